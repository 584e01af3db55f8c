"""Four-pulse optical loops and their effect on the mechanical mode.

Two-mode maps use ordering (X_M, P_M, X_L, P_L): mechanics first, light
second.  A pulse with strength chi and optical phase phi implements
exp(-i chi X_M X_L^phi), X_L^phi = X_L cos(phi) + P_L sin(phi).

Sign convention for composition: ``compose_loop`` multiplies the pulse maps in
operator-product order (first pulse leftmost).  With that choice a loop
traversed counter-clockwise in optical phase space (phases increasing)
encloses a positive area and shears the mechanics as P -> P - 2*area*X, giving
the negative <XP + PX> of a squeezed state with tan(theta) = sqrt(chi^4 + 1) -
chi^2.  The chronological product gives the mirror-image shear; closure
residuals and shear magnitudes do not depend on the choice.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from geophase.phase_space import (
    GaussianState,
    SymplecticMap,
    apply_symplectic,
    make_vacuum,
    min_variance_and_angle,
    shear_from_chi2,
    variance_along,
)

TWO_PI = 2.0 * math.pi
TIMING_SEPARATION = 100.0  # numeric meaning of "T_M >> tau"


@dataclass(frozen=True)
class Pulse:
    chi: float
    phi: float = 0.0

    def __post_init__(self):
        if self.chi < 0:
            raise ValueError(f"pulse strength must be nonnegative, got {self.chi}")
        object.__setattr__(self, "chi", float(self.chi))
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    @property
    def phasor(self) -> complex:
        return self.chi * complex(math.cos(self.phi), math.sin(self.phi))


@dataclass(frozen=True)
class PulseLoop:
    """Pulses in chronological order plus the single-pass amplitude efficiency."""

    pulses: tuple[Pulse, ...]
    eta: float = 1.0

    def __post_init__(self):
        pulses = tuple(self.pulses)
        if not pulses:
            raise ValueError("a pulse loop needs at least one pulse")
        object.__setattr__(self, "pulses", pulses)
        _check_eta(self.eta)

    def scaled(self, factors) -> PulseLoop:
        pulses = tuple(Pulse(p.chi * float(s), p.phi) for p, s in zip(self.pulses, factors, strict=True))
        return replace(self, pulses=pulses)

    def to_dict(self) -> dict:
        return {"pulses": [{"chi": p.chi, "phi": p.phi} for p in self.pulses], "eta": self.eta}

    @classmethod
    def from_dict(cls, doc: dict) -> PulseLoop:
        unknown = set(doc) - {"pulses", "eta"}
        if unknown:
            raise ValueError(f"unknown loop fields: {sorted(unknown)}")
        pulses = []
        for entry in doc["pulses"]:
            extra = set(entry) - {"chi", "phi"}
            if extra:
                raise ValueError(f"unknown pulse fields: {sorted(extra)}")
            pulses.append(Pulse(chi=entry["chi"], phi=entry.get("phi", 0.0)))
        return cls(tuple(pulses), eta=doc.get("eta", 1.0))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> PulseLoop:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ClosureResidual:
    """Net optical displacement left by an open loop, chi_loss * exp(i phi_loss)."""

    chi_loss: float
    phi_loss: float


def _check_eta(eta: float) -> None:
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"single-pass efficiency must lie in (0, 1], got {eta}")


def canonical_loop(chi: float = 1.0, eta: float = 1.0) -> PulseLoop:
    """Equal-strength X, P, -X, -P sequence."""
    phases = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)
    return PulseLoop(tuple(Pulse(chi, phi) for phi in phases), eta=eta)


def chi_from_pulse(g0: float, n_photons: float, sigma: float, kappa: float) -> float:
    """Interaction strength of a Gaussian pulse: 4 g0 sqrt(N sigma sqrt(pi/2) / kappa)."""
    if g0 <= 0 or sigma <= 0 or kappa <= 0:
        raise ValueError("g0, sigma and kappa must be positive")
    if n_photons < 0:
        raise ValueError(f"photon number must be nonnegative, got {n_photons}")
    return 4.0 * g0 * math.sqrt(n_photons * sigma * math.sqrt(math.pi / 2.0) / kappa)


def loss_noise_chi(g0: float, sigma: float, kappa: float, eta: float) -> float:
    """Non-closure strength from vacuum noise entering through loss, in device units."""
    _check_eta(eta)
    return chi_from_pulse(g0, 1.0 - eta**2, sigma, kappa)


def pulse_symplectic(pulse: Pulse) -> SymplecticMap:
    chi, c, s = pulse.chi, math.cos(pulse.phi), math.sin(pulse.phi)
    m = np.eye(4)
    m[1, 2] = -chi * c  # P_M picks up -chi X_L^phi
    m[1, 3] = -chi * s
    m[2, 0] = chi * s  # light quadrature conjugate to X_L^phi picks up -chi X_M
    m[3, 0] = -chi * c
    return SymplecticMap(m)


def loop_area(loop: PulseLoop) -> float:
    """Signed area enclosed by the optical displacements, from the commutator sum.

    Uses [X^a, X^b] = i sin(b - a) for every ordered pair of pulses.
    """
    area = 0.0
    pulses = loop.pulses
    for j, pj in enumerate(pulses):
        for pk in pulses[j + 1 :]:
            area += 0.5 * pj.chi * pk.chi * math.sin(pk.phi - pj.phi)
    return area


def closure_residual(loop: PulseLoop) -> ClosureResidual:
    total = sum((p.phasor for p in loop.pulses), 0j)
    magnitude = abs(total)
    phase = math.atan2(total.imag, total.real) % TWO_PI if magnitude > 0 else 0.0
    return ClosureResidual(chi_loss=magnitude, phi_loss=phase)


def compose_loop(loop: PulseLoop) -> tuple[SymplecticMap, ClosureResidual, float]:
    """Lossless two-mode map of the whole loop, its closure residual and enclosed area."""
    total = np.eye(4)
    for pulse in loop.pulses:
        total = total @ pulse_symplectic(pulse).matrix
    return SymplecticMap(total), closure_residual(loop), loop_area(loop)


def mechanical_shear(total: SymplecticMap) -> float:
    """chi^2 of the shear P -> P - 2 chi^2 X read from the mechanical block."""
    return -0.5 * float(total.matrix[1, 0])


def coupling_blocks(total: SymplecticMap) -> tuple[np.ndarray, np.ndarray]:
    """Off-diagonal (mechanics <- light, light <- mechanics) 2x2 blocks."""
    return total.matrix[:2, 2:], total.matrix[2:, :2]


def apply_loss(loop: PulseLoop) -> tuple[PulseLoop, float]:
    """Attenuate each pulse by the passes it has made and report the added noise.

    Pulse ``j`` (0-based) has travelled ``j`` times around the lossy fibre, so its
    amplitude is scaled by eta**j.  The returned noise strength is the rms pulse
    chi times sqrt(1 - eta^2).
    """
    eta = loop.eta
    _check_eta(eta)
    factors = [eta**j for j in range(len(loop.pulses))]
    rms_chi = math.sqrt(sum(p.chi**2 for p in loop.pulses) / len(loop.pulses))
    return loop.scaled(factors), rms_chi * math.sqrt(1.0 - eta**2)


def corrected_displacements(loop: PulseLoop, cap: float = 10.0) -> PulseLoop:
    """Pre-amplify pulses so the loop closes again after attenuation.

    Raises ``ValueError`` when any pulse would need more than ``cap`` times its
    nominal strength.
    """
    eta = loop.eta
    _check_eta(eta)
    factors = [eta ** (-j) for j in range(len(loop.pulses))]
    worst = max(factors)
    if worst > cap:
        raise ValueError(f"eta={eta} needs a {worst:.3g}x amplitude boost, above the cap of {cap}x")
    return loop.scaled(factors)


def nonclosure_state(chi2: float, chi_loss: float) -> GaussianState:
    """Vacuum mechanics after a shear ``chi2`` and a kick ``chi_loss X_L^phi`` from vacuum light."""
    if chi2 < 0 or chi_loss < 0:
        raise ValueError("chi2 and chi_loss must be nonnegative")
    sheared = apply_symplectic(make_vacuum(), shear_from_chi2(chi2))
    cov = sheared.cov.copy()
    cov[1, 1] += 0.5 * chi_loss**2
    return GaussianState(sheared.mean, cov)


def squeezing_with_nonclosure(chi2: float, chi_loss: float) -> float:
    """Readout variance when the loop leaves an unknown residual coupling.

    The readout quadrature is the one optimal for a closed loop; the residual
    kick adds chi_loss^2 / 2 to the momentum variance.
    """
    _, theta = min_variance_and_angle(apply_symplectic(make_vacuum(), shear_from_chi2(chi2)))
    return variance_along(nonclosure_state(chi2, chi_loss), theta)


def nonclosure_threshold(chi2: float, level: float = 0.5) -> float:
    """chi_loss at which the readout variance reaches ``level``; ``inf`` if never."""
    _, theta = min_variance_and_angle(apply_symplectic(make_vacuum(), shear_from_chi2(chi2)))
    base = squeezing_with_nonclosure(chi2, 0.0)
    weight = 0.5 * math.sin(theta) ** 2
    if base >= level:
        return 0.0
    if weight == 0.0:
        return math.inf
    return math.sqrt((level - base) / weight)


@dataclass(frozen=True)
class TimingViolation:
    clause: str
    margin: float  # ratio of the two sides; < 1 means violated

    def __str__(self) -> str:
        return f"{self.clause} (ratio {self.margin:.3g})"


def validate_timing(
    T_M: float, tau: float, sigma: float, kappa: float, separation: float = TIMING_SEPARATION
) -> list[TimingViolation]:
    """Check T_M >> tau > 4 sigma > 1/kappa, with ">>" meaning a factor ``separation``."""
    for name, value in (("T_M", T_M), ("tau", tau), ("sigma", sigma), ("kappa", kappa)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")
    violations = []
    clauses = (
        ("T_M >> tau", T_M / (separation * tau), True),
        ("tau > 4 sigma", tau / (4.0 * sigma), False),
        ("4 sigma > 1/kappa", 4.0 * sigma * kappa, False),
    )
    for clause, ratio, inclusive in clauses:
        ok = ratio >= 1.0 if inclusive else ratio > 1.0
        if not ok:
            violations.append(TimingViolation(clause, ratio))
    return violations
