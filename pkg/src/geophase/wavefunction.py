"""Position-grid wavefunctions for the non-Gaussian phase gates.

Every gate produced by the pulse loop is diagonal in position, so it acts on
psi(x) as a pointwise unit-modulus phase.  Wigner functions are evaluated by
direct quadrature of (1/pi) int psi*(x+y) psi(x-y) exp(2ipy) dy with y on the
position grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from geophase.fields import WignerField, _frozen, grid_spacing, uniform_grid

DEFAULT_NX = 1024
DEFAULT_HALF_WIDTH = 10.0
NORM_TOL = 1e-8
SUPPORT_FACTOR = 6.0
LEAKAGE_TOL = 1e-4


class GridResolutionError(ValueError):
    """The position grid is too coarse for the requested quantity."""


class MomentumSupportError(ValueError):
    """The momentum grid does not contain the state's momentum distribution."""


def _norm(x: np.ndarray, amplitudes: np.ndarray) -> float:
    return float(np.sum(np.abs(amplitudes) ** 2) * grid_spacing(x))


@dataclass(frozen=True)
class GridState:
    x: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        x = _frozen(self.x)
        amps = _frozen(self.amplitudes, dtype=complex)
        if amps.shape != x.shape:
            raise ValueError("amplitudes and grid differ in length")
        if not np.allclose(np.diff(x), x[1] - x[0], rtol=1e-9, atol=0.0):
            raise ValueError("position grid must be uniform")
        norm = _norm(x, amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"wavefunction norm is {norm!r}, expected 1")
        prob = np.abs(amps) ** 2 * grid_spacing(x)
        mean = np.sum(prob * x)
        std = np.sqrt(np.sum(prob * (x - mean) ** 2))
        half_width = 0.5 * (x[-1] - x[0])
        if half_width < SUPPORT_FACTOR * std:
            raise GridResolutionError(
                f"grid half-width {half_width:.3g} is below {SUPPORT_FACTOR:g} position std ({std:.3g})"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dx(self) -> float:
        return grid_spacing(self.x)

    def norm(self) -> float:
        return _norm(self.x, self.amplitudes)


def ground_state(n_x: int = DEFAULT_NX, half_width: float = DEFAULT_HALF_WIDTH) -> GridState:
    if n_x < 128 or half_width < 6.0:
        raise GridResolutionError(f"ground state needs n_x >= 128 and half-width >= 6, got {n_x}, {half_width}")
    x = uniform_grid(half_width, n_x)
    psi = np.pi**-0.25 * np.exp(-0.5 * x**2)
    psi = psi / np.sqrt(_norm(x, psi))
    return GridState(x, psi.astype(complex))


def apply_polynomial_phase(state: GridState, coeffs) -> GridState:
    """Multiply psi(x) by exp(-i sum_k c_k x^k).

    ``coeffs`` maps power k (>= 1) to c_k; a sequence is read as
    ``[c_1, c_2, ...]``.
    """
    if isinstance(coeffs, dict):
        terms = coeffs.items()
    else:
        terms = enumerate(coeffs, start=1)
    phase = np.zeros_like(state.x)
    for k, c in terms:
        if k < 1:
            raise ValueError(f"phase powers start at 1, got {k}")
        if c:
            phase = phase + c * state.x**k
    amps = state.amplitudes * np.exp(-1j * phase)
    return GridState(state.x, amps)


def quadratic_gate(state: GridState, chi2: float) -> GridState:
    return apply_polynomial_phase(state, {2: chi2})


def quartic_gate(state: GridState, chi2: float) -> GridState:
    return apply_polynomial_phase(state, {4: chi2})


def _momentum_amplitudes(state: GridState) -> tuple[np.ndarray, np.ndarray]:
    """Momentum-space amplitudes (ordered by increasing p) and their p grid."""
    n = state.x.size
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=state.dx)
    phi = np.fft.fft(state.amplitudes)
    order = np.argsort(k)
    dk = 2.0 * np.pi / (n * state.dx)
    weights = np.abs(phi[order]) ** 2
    weights = weights / (weights.sum() * dk)
    return k[order], weights


def _derivative(state: GridState) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(state.x.size, d=state.dx)
    return np.fft.ifft(1j * k * np.fft.fft(state.amplitudes))


@dataclass(frozen=True)
class GridMoments:
    """Expectation values of a grid state.

    ``x_powers[k]`` is <X^k>; ``xp`` is <XP + PX>.
    """

    x_powers: tuple[float, ...]
    p: float
    pp: float
    xp: float


def _raw_moments(state: GridState, max_order: int) -> GridMoments:
    prob = np.abs(state.amplitudes) ** 2 * state.dx
    x_powers = tuple(float(np.sum(prob * state.x**k)) for k in range(max_order + 1))
    p_psi = -1j * _derivative(state)
    bra = np.conj(state.amplitudes)
    p = float(np.real(np.sum(bra * p_psi)) * state.dx)
    pp = float(np.sum(np.abs(p_psi) ** 2) * state.dx)
    xp = float(2.0 * np.real(np.sum(bra * state.x * p_psi)) * state.dx)
    return GridMoments(x_powers, p, pp, xp)


def moments(state: GridState, max_order: int = 4, tol: float = 1e-4) -> GridMoments:
    """Position moments up to ``max_order`` and the first two momentum moments.

    The same quantities are recomputed on every second grid point; a
    disagreement above ``tol`` (relative to max(1, |value|)) raises
    ``GridResolutionError``.
    """
    full = _raw_moments(state, max_order)
    half_x = state.x[::2]
    half_amps = state.amplitudes[::2]
    half_amps = half_amps / np.sqrt(_norm(half_x, half_amps))
    # the coarse grid may fail the support check the full grid passes
    coarse = object.__new__(GridState)
    object.__setattr__(coarse, "x", half_x)
    object.__setattr__(coarse, "amplitudes", half_amps)
    half = _raw_moments(coarse, max_order)
    pairs = list(zip(full.x_powers, half.x_powers)) + [(full.p, half.p), (full.pp, half.pp), (full.xp, half.xp)]
    for a, b in pairs:
        if abs(a - b) > tol * max(1.0, abs(a)):
            raise GridResolutionError(f"moment changes from {b!r} to {a!r} between n_x/2 and n_x grids")
    return full


def momentum_std(state: GridState) -> float:
    m = _raw_moments(state, 1)
    return float(np.sqrt(max(m.pp - m.p**2, 0.0)))


def momentum_tail_mass(state: GridState, p_half_width: float) -> float:
    k, density = _momentum_amplitudes(state)
    dk = k[1] - k[0]
    return float(density[np.abs(k) > p_half_width].sum() * dk)


def auto_p_half_width(state: GridState, floor: float = 10.0, tail: float = 1e-6) -> float:
    """Smallest whole-number momentum half-width covering ``SUPPORT_FACTOR`` std and all but ``tail`` of the mass."""
    k, density = _momentum_amplitudes(state)
    dk = k[1] - k[0]
    order = np.argsort(np.abs(k))
    cumulative = np.cumsum(density[order]) * dk
    idx = min(int(np.searchsorted(cumulative, 1.0 - tail)), k.size - 1)
    needed = max(floor, SUPPORT_FACTOR * momentum_std(state), float(np.abs(k[order][idx])))
    return float(np.ceil(needed))


def wigner_from_wavefunction(
    state: GridState, p: np.ndarray | None = None, n_p: int | None = None, p_half_width: float | None = None
) -> WignerField:
    """Wigner function of ``state`` on its own x grid and a momentum grid.

    Either pass an explicit increasing ``p`` array or let the grid be built from
    ``n_p`` (default: same as n_x) and ``p_half_width`` (default: automatic).
    """
    if p is None:
        if p_half_width is None:
            p_half_width = auto_p_half_width(state)
        p = uniform_grid(p_half_width, n_p or state.x.size)
    p = np.asarray(p, dtype=float)
    p_extent = min(-p[0], p[-1])
    std = momentum_std(state)
    if p_extent < SUPPORT_FACTOR * std:
        raise MomentumSupportError(
            f"momentum half-width {p_extent:.3g} is below {SUPPORT_FACTOR:g} momentum std ({std:.3g})"
        )
    leak = momentum_tail_mass(state, p_extent)
    if leak > LEAKAGE_TOL:
        raise MomentumSupportError(f"{leak:.2e} of the momentum distribution lies outside the grid")
    nyquist = np.pi / (2.0 * state.dx)
    if p_extent > nyquist:
        raise GridResolutionError(f"momentum grid reaches {p_extent:.3g}, beyond the position-grid limit {nyquist:.3g}")

    psi = state.amplitudes
    n = psi.size
    m = np.arange(-(n - 1), n)
    idx = np.arange(n)
    plus = idx[:, None] + m[None, :]
    minus = idx[:, None] - m[None, :]
    valid = (plus >= 0) & (plus < n) & (minus >= 0) & (minus < n)
    corr = np.where(valid, np.conj(psi[np.clip(plus, 0, n - 1)]) * psi[np.clip(minus, 0, n - 1)], 0.0)
    kernel = np.exp(2j * np.outer(m * state.dx, p))
    w = (corr @ kernel) * (state.dx / np.pi)
    residue = np.max(np.abs(w.imag))
    if residue > 1e-10:
        raise ArithmeticError(f"Wigner function has imaginary residue {residue:.3e}")
    return WignerField(x=state.x, p=p, values=w.real)


def negativity_volume(field: WignerField) -> float:
    """Integrated magnitude of the negative part of W."""
    negative = 0.5 * (np.abs(field.values) - field.values)
    return float(negative.sum() * field.dx * field.dp)
