import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from geophase.phase_space import (
    apply_symplectic,
    make_thermal,
    make_vacuum,
    min_variance_and_angle,
    shear_from_chi2,
    symplectic_form,
)
from geophase.pulses import (
    Pulse,
    PulseLoop,
    apply_loss,
    canonical_loop,
    chi_from_pulse,
    closure_residual,
    compose_loop,
    corrected_displacements,
    coupling_blocks,
    loop_area,
    loss_noise_chi,
    mechanical_shear,
    nonclosure_state,
    nonclosure_threshold,
    pulse_symplectic,
    squeezing_with_nonclosure,
    validate_timing,
)

strengths = st.floats(min_value=0.0, max_value=3.0, allow_nan=False)
phases = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)
pulse_lists = st.lists(st.tuples(strengths, phases), min_size=1, max_size=6)


def heisenberg_map(chi, phi):
    """exp(Omega M) for H = chi X_M (X_L cos phi + P_L sin phi) = r^T M r / 2."""
    m = np.zeros((4, 4))
    m[0, 2] = m[2, 0] = chi * math.cos(phi)
    m[0, 3] = m[3, 0] = chi * math.sin(phi)
    return expm(symplectic_form(2) @ m)


def closed_loop(pairs):
    pulses = [Pulse(c, p) for c, p in pairs]
    rest = -sum((q.phasor for q in pulses), 0j)
    pulses.append(Pulse(abs(rest), math.atan2(rest.imag, rest.real)))
    return PulseLoop(tuple(pulses))


def test_pulse_field_normalisation():
    p = Pulse(1.5, -math.pi / 2)
    assert p.phi == pytest.approx(1.5 * math.pi)
    assert 0 <= Pulse(1.0, 7 * math.pi).phi < 2 * math.pi
    with pytest.raises(ValueError):
        Pulse(-0.1)
    with pytest.raises(ValueError):
        PulseLoop(())
    for eta in (0.0, -0.5, 1.01):
        with pytest.raises(ValueError):
            PulseLoop((Pulse(1.0),), eta=eta)


def test_canonical_loop_layout():
    loop = canonical_loop(0.8)
    assert [p.phi for p in loop.pulses] == [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]
    assert {p.chi for p in loop.pulses} == {0.8}


@settings(max_examples=60)
@given(strengths, phases)
def test_pulse_map_matches_exponential(chi, phi):
    np.testing.assert_allclose(pulse_symplectic(Pulse(chi, phi)).matrix, heisenberg_map(chi, phi), atol=1e-12)


def test_pulse_map_structure():
    m = pulse_symplectic(Pulse(0.7, 0.0)).matrix
    # P_M picks up -chi X_L; P_L picks up -chi X_M; nothing else moves
    expected = np.eye(4)
    expected[1, 2] = -0.7
    expected[3, 0] = -0.7
    np.testing.assert_allclose(m, expected, atol=1e-15)


def test_chi_from_pulse_formula_and_errors():
    assert chi_from_pulse(2.0, 9.0, 1.0, math.sqrt(math.pi / 2)) == pytest.approx(24.0)
    for args in ((0.0, 1, 1, 1), (1, 1, 0.0, 1), (1, 1, 1, -1.0)):
        with pytest.raises(ValueError):
            chi_from_pulse(*args)


def test_canonical_closure_and_area():
    total, residual, area = compose_loop(canonical_loop(1.0))
    to_mech, to_light = coupling_blocks(total)
    assert max(np.abs(to_mech).max(), np.abs(to_light).max()) < 1e-12
    assert residual.chi_loss < 1e-12
    assert area == pytest.approx(1.0, abs=1e-10)
    assert mechanical_shear(total) == pytest.approx(1.0, abs=1e-10)


def test_canonical_loop_reproduces_negative_correlation():
    total, _, _ = compose_loop(canonical_loop(1.0))
    mech = apply_symplectic(make_thermal(0.0).tensor(make_vacuum()), total).reduced(0)
    assert mech.cov[0, 1] < 0
    np.testing.assert_allclose(mech.cov, [[0.5, -1.0], [-1.0, 2.5]], atol=1e-12)


@settings(max_examples=80)
@given(st.lists(st.tuples(strengths, phases), min_size=2, max_size=5))
def test_closed_loops_decouple_and_shear_by_area(pairs):
    loop = closed_loop(pairs)
    total, residual, area = compose_loop(loop)
    assert residual.chi_loss < 1e-9
    to_mech, to_light = coupling_blocks(total)
    scale = max(1.0, sum(p.chi for p in loop.pulses) ** 2)
    assert max(np.abs(to_mech).max(), np.abs(to_light).max()) < 1e-10 * scale
    np.testing.assert_allclose(total.matrix[:2, :2], shear_from_chi2(area).matrix, atol=1e-10 * scale)


@settings(max_examples=80)
@given(pulse_lists)
def test_shear_tracks_area_for_open_loops(pairs):
    loop = PulseLoop(tuple(Pulse(c, p) for c, p in pairs))
    total, _, area = compose_loop(loop)
    assert mechanical_shear(total) == pytest.approx(area, abs=1e-10 * max(1.0, abs(area)))


@given(pulse_lists, st.floats(min_value=0.0, max_value=4.0))
def test_area_reversal_and_scaling(pairs, s):
    loop = PulseLoop(tuple(Pulse(c, p) for c, p in pairs))
    reverse = PulseLoop(tuple(reversed(loop.pulses)))
    area = loop_area(loop)
    assert loop_area(reverse) == pytest.approx(-area, abs=1e-12)
    scaled = loop.scaled([s] * len(loop.pulses))
    assert loop_area(scaled) == pytest.approx(s * s * area, rel=1e-9, abs=1e-12)


@given(pulse_lists)
def test_residual_is_phasor_sum(pairs):
    loop = PulseLoop(tuple(Pulse(c, p) for c, p in pairs))
    total = sum(c * complex(math.cos(p), math.sin(p)) for c, p in pairs)
    res = closure_residual(loop)
    assert res.chi_loss >= 0
    assert res.chi_loss == pytest.approx(abs(total), abs=1e-12)
    if abs(total) > 1e-6:
        assert complex(math.cos(res.phi_loss), math.sin(res.phi_loss)) == pytest.approx(total / abs(total), abs=1e-9)


def test_opposite_pulses_cancel_back_action():
    chi = 1.3
    pair = PulseLoop((Pulse(chi, 0.0), Pulse(chi, math.pi)))
    total, residual, area = compose_loop(pair)
    np.testing.assert_allclose(total.matrix, np.eye(4), atol=1e-15)
    assert residual.chi_loss < 1e-15 and abs(area) < 1e-15
    total, _, _ = compose_loop(canonical_loop(chi))
    assert total.matrix[1, 2] == pytest.approx(0.0, abs=1e-15)
    assert total.matrix[1, 3] == pytest.approx(0.0, abs=1e-15)


def test_open_loop_two_mode_simulation_matches_kick_model():
    loop = PulseLoop(canonical_loop(1.0).pulses[:3] + (Pulse(0.9, 1.5 * math.pi),))
    total, residual, area = compose_loop(loop)
    assert residual.chi_loss == pytest.approx(0.1, abs=1e-12)
    assert residual.phi_loss == pytest.approx(0.5 * math.pi, abs=1e-12)
    mech = apply_symplectic(make_vacuum(2), total).reduced(0)
    np.testing.assert_allclose(mech.cov, nonclosure_state(area, residual.chi_loss).cov, atol=1e-12)


def test_loop_json_round_trip():
    loop = PulseLoop((Pulse(0.5, 0.1), Pulse(1.25, 3.0)), eta=0.9)
    assert PulseLoop.from_json(loop.to_json()) == loop
    assert set(loop.to_dict()) == {"pulses", "eta"}
    with pytest.raises(ValueError):
        PulseLoop.from_dict({"pulses": [{"chi": 1.0}], "gain": 2})
    with pytest.raises(ValueError):
        PulseLoop.from_dict({"pulses": [{"chi": 1.0, "phase": 0.0}]})


def test_lossless_loop_is_unchanged_by_loss():
    loop = canonical_loop(1.0)
    effective, noise = apply_loss(loop)
    assert effective == loop
    assert noise == 0.0


def test_attenuation_per_pass():
    effective, _ = apply_loss(canonical_loop(1.0, eta=0.9))
    assert [p.chi for p in effective.pulses] == pytest.approx([1.0, 0.9, 0.81, 0.729])
    assert closure_residual(effective).chi_loss > 0.1


def test_beamsplitter_vacuum_noise_fraction():
    _, noise = apply_loss(canonical_loop(1.0, eta=0.99))
    assert noise**2 == pytest.approx(1 - 0.99**2, rel=1e-12)
    assert noise**2 == pytest.approx(0.02, rel=0.01)
    assert loss_noise_chi(1.0, 1.0, 1.0, 0.99) == pytest.approx(chi_from_pulse(1.0, 1 - 0.99**2, 1.0, 1.0))


def test_correction_identity_at_unit_efficiency():
    loop = canonical_loop(1.0)
    assert corrected_displacements(loop) == loop


@pytest.mark.parametrize("eta", [0.9, 0.5])
def test_correction_closes_lossy_loop(eta):
    loop = corrected_displacements(canonical_loop(1.0, eta=eta))
    effective, _ = apply_loss(loop)
    _, residual, area = compose_loop(effective)
    assert residual.chi_loss < 1e-10
    assert area == pytest.approx(1.0, abs=1e-10)


def test_correction_cap():
    with pytest.raises(ValueError, match="cap"):
        corrected_displacements(canonical_loop(1.0, eta=0.05))
    corrected_displacements(canonical_loop(1.0, eta=0.05), cap=1e4)


@pytest.mark.parametrize("chi2", [0.25, 0.5, 1.0, 2.0])
def test_nonclosure_zero_reproduces_lossless_minimum(chi2):
    lossless, _ = min_variance_and_angle(apply_symplectic(make_vacuum(), shear_from_chi2(chi2)))
    assert squeezing_with_nonclosure(chi2, 0.0) == pytest.approx(lossless, rel=1e-12)


def test_nonclosure_example_and_limits():
    assert squeezing_with_nonclosure(1.0, 0.0) == pytest.approx(0.08579, abs=1e-5)
    assert squeezing_with_nonclosure(1.0, 50.0) > 0.5
    values = [squeezing_with_nonclosure(1.0, c) for c in np.linspace(0, 5, 101)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    with pytest.raises(ValueError):
        squeezing_with_nonclosure(1.0, -1.0)


def test_nonclosure_threshold_crossing():
    c = nonclosure_threshold(1.0)
    assert squeezing_with_nonclosure(1.0, c) == pytest.approx(0.5, abs=1e-12)
    assert nonclosure_threshold(0.0) == 0.0


def test_timing_satisfied_and_clause_reports():
    assert validate_timing(4.2e-5, 4e-7, 1e-8, 5e8) == []
    (v,) = validate_timing(4.2e-5, 3e-8, 1e-8, 5e8)
    assert v.clause == "tau > 4 sigma" and v.margin == pytest.approx(0.75)
    (v,) = validate_timing(10 * 5e-7, 5e-7, 1e-8, 5e8)
    assert v.clause == "T_M >> tau" and v.margin == pytest.approx(0.1)
    (v,) = validate_timing(4.2e-5, 4e-7, 1e-8, 2e7)
    assert v.clause == "4 sigma > 1/kappa"
    with pytest.raises(ValueError):
        validate_timing(0.0, 1e-7, 1e-8, 5e8)


def test_timing_half_microsecond_round_trip_is_below_factor_100():
    # T_M / tau = 84 for a 24 kHz period and a 0.5 us fibre loop
    (v,) = validate_timing(4.2e-5, 5e-7, 1e-8, 5e8)
    assert v.clause == "T_M >> tau"
    assert v.margin == pytest.approx(0.84)


@given(st.floats(min_value=1e-9, max_value=1e-3), st.floats(min_value=1.01, max_value=1e3))
def test_timing_scale_invariance(sigma, scale):
    assume(scale > 0)
    base = validate_timing(1e4 * sigma, 8 * sigma, sigma, 5 / sigma)
    scaled = validate_timing(1e4 * sigma * scale, 8 * sigma * scale, sigma * scale, 5 / (sigma * scale))
    assert [v.clause for v in base] == [v.clause for v in scaled] == []
