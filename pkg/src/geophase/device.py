"""SiN string resonators and the end-to-end squeezing pipeline.

geometry -> stress and Q -> zero-point coupling -> pulse timing -> chi ->
cooled initial state -> geometric phase -> thermal evolution -> variance
observable within one cavity decay time.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import constants, ndimage, optimize

from geophase.pulses import chi_from_pulse, validate_timing
from geophase.thermal import BathParams, dense_trajectory, observed_variance, post_pulse_moments

HBAR = constants.hbar
K_B = constants.k

# 200 MHz/nm, read as an angular rate per unit displacement
DEFAULT_G = 200e6 / 1e-9
MAX_DEMONSTRATED_Q = 6.9e6
SQUEEZING_LEVEL = 0.5
PINNED_N_EFF = 10.0


@dataclass(frozen=True)
class StringGeometry:
    length: float
    thickness: float
    width: float
    mode_number: int = 1

    def __post_init__(self):
        if not (self.length > 0 and self.thickness > 0 and self.width > 0):
            raise ValueError(f"string dimensions must be positive: {self}")
        if not self.thickness <= self.width <= self.length:
            raise ValueError(f"expected thickness <= width <= length: {self}")
        if self.mode_number < 1:
            raise ValueError(f"mode number must be >= 1, got {self.mode_number}")

    @property
    def volume(self) -> float:
        return self.length * self.thickness * self.width


@dataclass(frozen=True)
class MaterialParams:
    youngs_modulus: float = 241e9
    q_bending: float = 17000.0
    density: float = 3100.0

    def __post_init__(self):
        if not (self.youngs_modulus > 0 and self.q_bending > 0 and self.density > 0):
            raise ValueError(f"material constants must be positive: {self}")


@dataclass(frozen=True)
class PipelineSettings:
    """Conventions the pulse and cooling model depends on.

    ``n_eff_mode`` picks the initial occupation: ``"cooled"`` uses the pulsed
    cooling result, ``"pinned"`` always uses ``n_eff_pinned`` and ``"clamped"``
    uses the larger of the two.
    """

    coupling_gradient: float = DEFAULT_G
    mass_fraction: float = 0.5
    sigma_ratio: float = 1e-3
    kappa_sigma: float = 5.0
    tau_sigma: float = 8.0
    n_eff_mode: str = "cooled"
    n_eff_pinned: float = PINNED_N_EFF
    per_window: int = 20

    def __post_init__(self):
        if self.n_eff_mode not in ("cooled", "pinned", "clamped"):
            raise ValueError(f"unknown n_eff_mode {self.n_eff_mode!r}")


@dataclass(frozen=True)
class DeviceParams:
    f_M: float
    Q: float
    g0: float
    kappa: float
    sigma: float
    tau: float
    n_photons: float
    temperature: float
    coupling_gradient: float = DEFAULT_G

    @property
    def omega_M(self) -> float:
        return 2.0 * math.pi * self.f_M

    @property
    def T_M(self) -> float:
        return 1.0 / self.f_M

    @property
    def chi(self) -> float:
        return chi_from_pulse(self.g0, self.n_photons, self.sigma, self.kappa)


def tensile_stress(f_M: float, length: float, density: float) -> float:
    """String stress S = 4 f^2 L^2 rho, with f the fundamental frequency in Hz."""
    return 4.0 * f_M**2 * length**2 * density


def string_Q(geom: StringGeometry, mat: MaterialParams, f_M: float) -> float:
    S = tensile_stress(f_M, geom.length, mat.density)
    E, h, L = mat.youngs_modulus, geom.thickness, geom.length
    bracket = (geom.mode_number * math.pi) ** 2 * E * h**2 / (12.0 * S * L**2) + 1.0887 * math.sqrt(E / S) * h / L
    return mat.q_bending / bracket


def effective_mass(geom: StringGeometry, mat: MaterialParams, fraction: float = 0.5) -> float:
    return fraction * mat.density * geom.volume


def zero_point_coupling(
    G: float, geom: StringGeometry, mat: MaterialParams, omega_M: float, mass_fraction: float = 0.5
) -> float:
    """g0 = G x0 with x0 = sqrt(hbar / (2 m_eff omega_M))."""
    m = effective_mass(geom, mat, mass_fraction)
    return G * math.sqrt(HBAR / (2.0 * m * omega_M))


def derive_timing(f_M: float, sigma_ratio: float = 1e-3, kappa_sigma: float = 5.0, tau_sigma: float = 8.0):
    """Pulse width, cavity decay rate and fibre round trip for a mechanical frequency.

    sigma = sigma_ratio * T_M, kappa = kappa_sigma / sigma, tau = tau_sigma * sigma.
    """
    if not f_M > 0:
        raise ValueError(f"frequency must be positive, got {f_M}")
    sigma = sigma_ratio / f_M
    return sigma, kappa_sigma / sigma, tau_sigma * sigma


def effective_phonon_number(chi: float, nbar: float, Q: float) -> float:
    """Occupation left by two-pulse measurement cooling with strength ``chi``."""
    if chi == 0:
        raise ValueError("cooling needs a nonzero interaction strength")
    return 0.5 * (math.sqrt(1.0 + chi**-4 + math.pi * nbar / (Q * chi**2)) - 1.0)


def bath_occupation(f_M: float, temperature: float) -> float:
    if temperature == 0:
        return 0.0
    return 1.0 / math.expm1(HBAR * 2.0 * math.pi * f_M / (K_B * temperature))


def device_params(
    geom: StringGeometry,
    mat: MaterialParams,
    f_M: float,
    temperature: float,
    n_photons: float | None,
    flux_cap: float = 1e16,
    settings: PipelineSettings = PipelineSettings(),
) -> DeviceParams:
    """Derived device quantities; ``n_photons=None`` takes the flux-limited maximum."""
    sigma, kappa, tau = derive_timing(f_M, settings.sigma_ratio, settings.kappa_sigma, settings.tau_sigma)
    g0 = zero_point_coupling(settings.coupling_gradient, geom, mat, 2.0 * math.pi * f_M, settings.mass_fraction)
    if n_photons is None:
        n_photons = flux_cap * sigma
    return DeviceParams(
        f_M=f_M,
        Q=string_Q(geom, mat, f_M),
        g0=g0,
        kappa=kappa,
        sigma=sigma,
        tau=tau,
        n_photons=n_photons,
        temperature=temperature,
        coupling_gradient=settings.coupling_gradient,
    )


@dataclass(frozen=True)
class PipelineResult:
    length: float
    f_M: float
    Q: float
    g0: float
    chi: float
    nbar: float
    n_eff: float
    var_obs: float
    violations: tuple[str, ...] = ()


def _violation_tokens(dev: DeviceParams, flux_cap: float) -> list[str]:
    tokens = ["timing:" + v.clause.replace(" ", "") for v in validate_timing(dev.T_M, dev.tau, dev.sigma, dev.kappa)]
    if dev.n_photons > flux_cap * dev.sigma * (1.0 + 1e-12):
        tokens.append("photon_flux")
    return tokens


def run_pipeline(
    geom: StringGeometry,
    mat: MaterialParams,
    f_M: float,
    temperature: float,
    n_photons: float | None,
    flux_cap: float = 1e16,
    settings: PipelineSettings = PipelineSettings(),
) -> PipelineResult:
    """Observed squeezing for one device.

    Constraint failures (timing, photon flux) are listed in
    ``PipelineResult.violations``; they do not abort the calculation.
    """
    if not (f_M > 0 and temperature >= 0 and flux_cap > 0):
        raise ValueError("frequency and flux cap must be positive, temperature nonnegative")
    dev = device_params(geom, mat, f_M, temperature, n_photons, flux_cap, settings)
    chi = dev.chi
    nbar = bath_occupation(f_M, temperature)
    cooled = effective_phonon_number(chi, nbar, dev.Q) if chi > 0 else nbar
    if settings.n_eff_mode == "pinned":
        n_eff = settings.n_eff_pinned
    elif settings.n_eff_mode == "clamped":
        n_eff = max(cooled, settings.n_eff_pinned)
    else:
        n_eff = cooled
    m0 = post_pulse_moments(n_eff, chi**2)
    bath = BathParams.from_quality(dev.omega_M, dev.Q, nbar)
    times, var_x = dense_trajectory(m0, bath, dev.kappa, periods=1.0, per_window=settings.per_window)
    var_obs = observed_variance(var_x, times[1] - times[0], dev.kappa)
    return PipelineResult(
        length=geom.length,
        f_M=f_M,
        Q=dev.Q,
        g0=dev.g0,
        chi=chi,
        nbar=nbar,
        n_eff=n_eff,
        var_obs=var_obs,
        violations=tuple(_violation_tokens(dev, flux_cap)),
    )


@dataclass(frozen=True)
class SweepSpec:
    length_range: tuple[float, float] = (0.5e-3, 10e-3)
    frequency_range: tuple[float, float] = (1e3, 70e3)
    resolution: tuple[int, int] = (40, 40)
    thickness: float = 157e-9
    width: float = 3e-6
    temperature: float = 1.0
    flux_cap: float = 1e16
    n_photons: float | None = None
    material: MaterialParams = MaterialParams()
    settings: PipelineSettings = PipelineSettings(n_eff_mode="pinned")

    def __post_init__(self):
        if min(self.resolution) < 2:
            raise ValueError("sweep needs at least 2 points per axis")
        for lo, hi in (self.length_range, self.frequency_range):
            if not 0 < lo < hi:
                raise ValueError("sweep ranges must be positive and increasing")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.linspace(*self.length_range, self.resolution[0]),
            np.linspace(*self.frequency_range, self.resolution[1]),
        )


@dataclass
class SweepResult:
    """Row-major grid of pipeline results: ``cells[i * n_f + j]`` is (lengths[i], frequencies[j])."""

    lengths: np.ndarray
    frequencies: np.ndarray
    cells: list[PipelineResult]
    metadata: dict = field(default_factory=dict)

    def grid(self, name: str) -> np.ndarray:
        values = np.array([getattr(c, name) for c in self.cells], dtype=float)
        return values.reshape(self.lengths.size, self.frequencies.size)


def _run_cell(args) -> PipelineResult:
    spec, length, f_M = args
    geom = StringGeometry(length, spec.thickness, spec.width)
    return run_pipeline(geom, spec.material, f_M, spec.temperature, spec.n_photons, spec.flux_cap, spec.settings)


def q_contour(spec: SweepSpec, q_level: float = MAX_DEMONSTRATED_Q) -> list[tuple[float, float]]:
    """(L, f) points where the string Q equals ``q_level``, one per swept length.

    Q rises monotonically with f at fixed geometry, so each length has at most
    one crossing inside the frequency range.
    """
    lengths, _ = spec.axes()
    f_lo, f_hi = spec.frequency_range
    points = []
    for length in lengths:
        geom = StringGeometry(float(length), spec.thickness, spec.width)

        def gap(f):
            return math.log(string_Q(geom, spec.material, f) / q_level)

        if gap(f_lo) * gap(f_hi) <= 0:
            points.append((float(length), float(optimize.brentq(gap, f_lo, f_hi, xtol=1e-9, rtol=1e-14))))
    return points


def _optimum(result: SweepResult, mask: np.ndarray) -> dict | None:
    var = np.where(mask, result.grid("var_obs"), np.inf)
    if not np.isfinite(var).any():
        return None
    i, j = np.unravel_index(int(np.argmin(var)), var.shape)
    cell = result.cells[i * result.frequencies.size + j]
    return {"L_m": cell.length, "f_hz": cell.f_M, "Q": cell.Q, "chi": cell.chi, "var_obs": cell.var_obs, "index": [int(i), int(j)]}


def sweep_squeezing(spec: SweepSpec = SweepSpec(), workers: int = 1) -> SweepResult:
    """Evaluate the pipeline on an (L, f) grid.

    Cells are independent and may be computed by ``workers`` processes; the
    result order is always row-major in L regardless of scheduling.
    """
    lengths, freqs = spec.axes()
    jobs = [(spec, float(L), float(f)) for L in lengths for f in freqs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        cells = [_run_cell(job) for job in jobs]
    result = SweepResult(lengths=lengths, frequencies=freqs, cells=cells)

    var = result.grid("var_obs")
    q = result.grid("Q")
    squeezed = var < SQUEEZING_LEVEL
    labels, n_regions = ndimage.label(squeezed)
    sizes = np.bincount(labels.ravel())[1:] if n_regions else np.array([], dtype=int)
    result.metadata = {
        "color_truncation": SQUEEZING_LEVEL,
        "q_max_demonstrated": MAX_DEMONSTRATED_Q,
        "q_contour": [list(p) for p in q_contour(spec)],
        "optimum_feasible": _optimum(result, q <= MAX_DEMONSTRATED_Q),
        "optimum_global": _optimum(result, np.ones_like(squeezed)),
        "squeezed_fraction": float(squeezed.mean()),
        "squeezed_regions": int(n_regions),
        "largest_squeezed_region": int(sizes.max()) if sizes.size else 0,
        "cell_size": [float(lengths[1] - lengths[0]), float(freqs[1] - freqs[0])],
        "spec": _spec_dict(spec),
    }
    return result


def _spec_dict(spec: SweepSpec) -> dict:
    doc = asdict(spec)
    doc["length_range"] = list(spec.length_range)
    doc["frequency_range"] = list(spec.frequency_range)
    doc["resolution"] = list(spec.resolution)
    return doc


def with_settings(spec: SweepSpec, **changes) -> SweepSpec:
    return replace(spec, settings=replace(spec.settings, **changes))
