"""Gaussian states and symplectic maps for one or two bosonic modes.

Quadratures are ordered (X1, P1, X2, P2) with X = (b + b^dag)/sqrt(2), so
[X, P] = i and the vacuum covariance is identity/2.  A ``SymplecticMap`` holds
the Heisenberg action U^dag r U = S r + d; states transform as
mean -> S mean + d and cov -> S cov S^T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from geophase.fields import WignerField, _frozen

SYMMETRY_TOL = 1e-12
HEISENBERG_TOL = 1e-10
SYMPLECTIC_TOL = 1e-10


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal Omega with [[0, 1], [-1, 0]] per mode."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        dim = mean.size
        if dim not in (2, 4):
            raise ValueError(f"only 1 or 2 modes are supported, got mean of length {dim}")
        if cov.shape != (dim, dim):
            raise ValueError(f"covariance shape {cov.shape} does not match mean length {dim}")
        if np.max(np.abs(cov - cov.T)) > 1e-8 * max(1.0, np.max(np.abs(cov))):
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        # Heisenberg bound: cov + (i/2) Omega >= 0
        herm = cov + 0.5j * symplectic_form(dim // 2)
        lowest = np.linalg.eigvalsh(herm)[0]
        if lowest < -HEISENBERG_TOL * max(1.0, np.max(np.abs(cov))):
            raise ValueError(f"covariance violates the uncertainty principle (eigenvalue {lowest:.3e})")
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "cov", _frozen(cov))

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def reduced(self, mode: int) -> GaussianState:
        """Marginal state of a single mode (0-based)."""
        sl = slice(2 * mode, 2 * mode + 2)
        return GaussianState(self.mean[sl], self.cov[sl, sl])

    def tensor(self, other: GaussianState) -> GaussianState:
        dim = self.mean.size + other.mean.size
        cov = np.zeros((dim, dim))
        cov[: self.mean.size, : self.mean.size] = self.cov
        cov[self.mean.size :, self.mean.size :] = other.cov
        return GaussianState(np.concatenate([self.mean, other.mean]), cov)


@dataclass(frozen=True)
class SymplecticMap:
    matrix: np.ndarray
    displacement: np.ndarray | None = None

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        dim = matrix.shape[0]
        if matrix.shape != (dim, dim) or dim not in (2, 4):
            raise ValueError(f"symplectic matrix must be 2x2 or 4x4, got {matrix.shape}")
        disp = np.zeros(dim) if self.displacement is None else np.asarray(self.displacement, dtype=float)
        if disp.shape != (dim,):
            raise ValueError(f"displacement length {disp.size} does not match matrix size {dim}")
        omega = symplectic_form(dim // 2)
        err = np.max(np.abs(matrix.T @ omega @ matrix - omega))
        if err > SYMPLECTIC_TOL * max(1.0, np.max(np.abs(matrix)) ** 2):
            raise ValueError(f"matrix is not symplectic (|S^T Omega S - Omega| = {err:.3e})")
        object.__setattr__(self, "matrix", _frozen(matrix))
        object.__setattr__(self, "displacement", _frozen(disp))

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def identity(cls, n_modes: int = 1) -> SymplecticMap:
        return cls(np.eye(2 * n_modes))

    def then(self, later: SymplecticMap) -> SymplecticMap:
        """Map equivalent to applying ``self`` and then ``later`` to a state."""
        if later.n_modes != self.n_modes:
            raise ValueError("cannot compose maps acting on different numbers of modes")
        return SymplecticMap(
            later.matrix @ self.matrix,
            later.matrix @ self.displacement + later.displacement,
        )


def make_vacuum(n_modes: int = 1) -> GaussianState:
    return GaussianState(np.zeros(2 * n_modes), 0.5 * np.eye(2 * n_modes))


def make_thermal(nbar: float) -> GaussianState:
    """Single-mode thermal state with occupation ``nbar``."""
    if nbar < 0:
        raise ValueError(f"thermal occupation must be nonnegative, got {nbar}")
    return GaussianState(np.zeros(2), (nbar + 0.5) * np.eye(2))


def shear_from_chi2(chi2: float) -> SymplecticMap:
    """Heisenberg map of exp(-i chi2 X^2): X -> X, P -> P - 2 chi2 X."""
    return SymplecticMap(np.array([[1.0, 0.0], [-2.0 * chi2, 1.0]]))


def apply_symplectic(state: GaussianState, smap: SymplecticMap) -> GaussianState:
    if state.n_modes != smap.n_modes:
        raise ValueError(f"map acts on {smap.n_modes} modes but state has {state.n_modes}")
    s = smap.matrix
    return GaussianState(s @ state.mean + smap.displacement, s @ state.cov @ s.T)


def _single_mode(state: GaussianState) -> None:
    if state.n_modes != 1:
        raise ValueError("operation requires a single-mode state")


def min_variance_and_angle(state: GaussianState) -> tuple[float, float]:
    """Smallest quadrature variance and its angle theta in [0, pi).

    The quadrature is X cos(theta) + P sin(theta).  An isotropic covariance
    returns theta = 0.
    """
    _single_mode(state)
    evals, evecs = np.linalg.eigh(state.cov)
    if evals[1] - evals[0] <= 1e-12 * max(1.0, abs(evals[1])):
        return float(evals[0]), 0.0
    u = evecs[:, 0]
    theta = float(np.arctan2(u[1], u[0]) % np.pi)
    if np.isclose(theta, np.pi, rtol=0.0, atol=1e-15):
        theta = 0.0
    return float(evals[0]), theta


def variance_along(state: GaussianState, theta: float) -> float:
    _single_mode(state)
    u = np.array([np.cos(theta), np.sin(theta)])
    return float(u @ state.cov @ u)


def gaussian_wigner(state: GaussianState, x: np.ndarray, p: np.ndarray) -> WignerField:
    """Sample the Gaussian Wigner function of a single-mode state on ``x`` by ``p``."""
    _single_mode(state)
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if x.size < 2 or p.size < 2 or not (x[1] > x[0] and p[1] > p[0]):
        raise ValueError("grids must be increasing with positive spacing")
    det = np.linalg.det(state.cov)
    if det < 1e-300:
        raise ValueError(f"covariance is singular (det = {det:.3e})")
    inv = np.linalg.inv(state.cov)
    dx = x[:, None] - state.mean[0]
    dp = p[None, :] - state.mean[1]
    quad = inv[0, 0] * dx**2 + 2.0 * inv[0, 1] * dx * dp + inv[1, 1] * dp**2
    values = np.exp(-0.5 * quad) / (2.0 * np.pi * np.sqrt(det))
    return WignerField(x=x, p=p, values=values)
