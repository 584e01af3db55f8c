"""Free evolution of the mechanical variance after the pulse sequence.

The oscillator rotates at ``omega`` and relaxes toward a white-noise bath with
amplitude damping ``gamma``.  ``variance_trajectory`` is the closed-form
solution; ``covariance_ode_oracle`` integrates the same moment equations
numerically so the two can be checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BathParams:
    """Bath coupling.

    ``gamma`` is the amplitude damping rate; the energy (phonon) decay rate is
    ``2 * gamma``, equal to omega / Q when built with ``from_quality``.
    """

    gamma: float
    omega: float
    nbar: float

    def __post_init__(self):
        if self.gamma < 0 or not self.omega > 0 or self.nbar < 0:
            raise ValueError(f"invalid bath parameters {self}")

    @classmethod
    def from_quality(cls, omega: float, Q: float, nbar: float) -> BathParams:
        return cls(gamma=omega / (2.0 * Q), omega=omega, nbar=nbar)

    @property
    def energy_decay_rate(self) -> float:
        return 2.0 * self.gamma

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


@dataclass(frozen=True)
class MomentSet:
    """Second moments <X^2>, <P^2>, <XP + PX> of a zero-mean state."""

    xx: float
    pp: float
    xp: float

    def __post_init__(self):
        if not (self.xx > 0 and self.pp > 0):
            raise ValueError(f"variances must be positive, got {self}")
        if self.xx * self.pp - 0.25 * self.xp**2 < 0.25 - 1e-10 * max(1.0, self.xx * self.pp):
            raise ValueError(f"moments violate the uncertainty relation: {self}")

    @property
    def cov(self) -> np.ndarray:
        return np.array([[self.xx, 0.5 * self.xp], [0.5 * self.xp, self.pp]])


def post_pulse_moments(nbar_eff: float, chi2: float) -> MomentSet:
    """Moments of a thermal state after the geometric-phase shear."""
    if nbar_eff < 0:
        raise ValueError(f"occupation must be nonnegative, got {nbar_eff}")
    n = nbar_eff + 0.5
    return MomentSet(xx=n, pp=n * (1.0 + 4.0 * chi2**2), xp=-4.0 * chi2 * n)


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.size and (t.min() < 0 or np.any(np.diff(t) < 0)):
        raise ValueError("times must be nonnegative and sorted")
    return t


def variance_trajectory(m0: MomentSet, bath: BathParams, times, printed_form: bool = False) -> np.ndarray:
    """Var X(t) for the damped oscillator starting from moments ``m0``.

    ``printed_form=True`` uses the uncorrected variant with ``-1`` inside the
    bracket and ``nbar + 1`` in the thermal tail.  That form does not return
    xx at t = 0 nor nbar + 1/2 at long times and is kept only for comparison.
    """
    t = _check_times(times)
    decay = np.exp(-2.0 * bath.gamma * t)
    phase = 2.0 * bath.omega * t
    bracket = np.cos(phase) * (m0.xx - m0.pp) + np.sin(phase) * m0.xp + m0.xx + m0.pp
    if printed_form:
        return 0.5 * decay * (bracket - 1.0) + (1.0 - decay) * (bath.nbar + 1.0)
    return 0.5 * decay * bracket + (1.0 - decay) * (bath.nbar + 0.5)


def _moment_rates(y, bath: BathParams):
    xx, pp, c = y  # c = <XP + PX> / 2
    w, g, eq = bath.omega, bath.gamma, bath.nbar + 0.5
    return (
        2.0 * w * c - 2.0 * g * (xx - eq),
        -2.0 * w * c - 2.0 * g * (pp - eq),
        w * (pp - xx) - 2.0 * g * c,
    )


def covariance_ode_oracle(
    m0: MomentSet, bath: BathParams, t_end: float, dt: float, full: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the moment equations with classical fixed-step RK4.

    Returns ``(times, var_x)``, or ``(times, moments)`` with columns
    (xx, pp, xp) when ``full`` is set.  The last step is shortened to land on
    ``t_end``.
    """
    if dt > bath.period / 50.0:
        raise ValueError(f"step {dt:.3e} s exceeds 1/50 of the mechanical period")
    if not (dt > 0 and t_end >= 0):
        raise ValueError("dt must be positive and t_end nonnegative")
    n_steps = int(math.ceil(t_end / dt - 1e-9))
    times = np.empty(n_steps + 1)
    out = np.empty((n_steps + 1, 3))
    y = (m0.xx, m0.pp, 0.5 * m0.xp)
    t = 0.0
    times[0], out[0] = 0.0, y
    for i in range(1, n_steps + 1):
        h = min(dt, t_end - t)
        k1 = _moment_rates(y, bath)
        k2 = _moment_rates([a + 0.5 * h * b for a, b in zip(y, k1)], bath)
        k3 = _moment_rates([a + 0.5 * h * b for a, b in zip(y, k2)], bath)
        k4 = _moment_rates([a + h * b for a, b in zip(y, k3)], bath)
        y = tuple(a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))
        t = t_end if i == n_steps else t + h
        times[i], out[i] = t, y
    out[:, 2] *= 2.0
    return (times, out) if full else (times, out[:, 0].copy())


def observed_variance(var_x, dt: float, kappa: float) -> float:
    """Smallest mean of Var X over a sliding window of length 1/kappa.

    ``var_x`` holds samples spaced by ``dt``; the window must span at least 20
    samples.  Window integrals use the trapezoid rule.
    """
    v = np.asarray(var_x, dtype=float)
    window = 1.0 / kappa
    if dt > window / 20.0 * (1.0 + 1e-9):
        raise ValueError(f"sampling interval {dt:.3e} s is coarser than (1/kappa)/20 = {window / 20:.3e} s")
    k = int(round(window / dt))
    if k >= v.size:
        raise ValueError("averaging window is longer than the trajectory")
    cumulative = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * dt)])
    means = (cumulative[k:] - cumulative[:-k]) / (k * dt)
    return float(means.min())


def dense_trajectory(m0: MomentSet, bath: BathParams, kappa: float, periods: float = 1.0, per_window: int = 20):
    """Closed-form Var X sampled finely enough for ``observed_variance``."""
    dt = (1.0 / kappa) / per_window
    n = int(math.ceil(periods * bath.period / dt)) + 1
    times = np.arange(n) * dt
    return times, variance_trajectory(m0, bath, times)
