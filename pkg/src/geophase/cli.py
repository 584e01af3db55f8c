"""Command-line front end.

Subcommands (one per result):
  squeeze     loop composition on a thermal state, covariance and squeezing
  wigner      Wigner function after the x^2 or x^4 gate (CSV x,p,w)
  nonclosure  readout variance versus residual loop coupling
  thermal     variance trajectory after the pulse sequence (CSV t,var_x)
  sweep       observable squeezing over string length and frequency

All commands take ``--config FILE`` (JSON, schema_version 1), ``--out PATH``,
``--format csv|json`` and ``--strict``.  In CSV mode, extra scalar results go to
``PATH.meta.json``.  Exit codes: 0 success, 2 configuration error, 3 constraint
violation under ``--strict``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from geophase import device, phase_space, pulses, thermal, wavefunction
from geophase.config import ConfigError, ScenarioConfig, load_config
from geophase.io import SWEEP_COLUMNS, csv_text, json_text, sweep_rows

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONSTRAINT = 3

REPORTED_NONCLOSURE_THRESHOLD = 2.1


class Output:
    """What a command produced: an optional table plus scalar metadata."""

    def __init__(self, columns=(), rows=(), meta=None, violations=()):
        self.columns = tuple(columns)
        self.rows = [tuple(r) for r in rows]
        self.meta = meta or {}
        self.violations = list(violations)

    def as_document(self) -> dict:
        doc = dict(self.meta)
        if self.columns:
            doc["columns"] = list(self.columns)
            doc["rows"] = [list(r) for r in self.rows]
        return doc


def _build_loop(cfg) -> pulses.PulseLoop:
    if cfg.loop is not None and cfg.chi2 is not None:
        raise ConfigError("squeeze: give either 'chi2' or 'loop', not both (set chi2 to null)")
    if cfg.loop is not None:
        try:
            return pulses.PulseLoop.from_dict(cfg.loop)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"squeeze.loop: {exc}") from None
    if cfg.chi2 is None or cfg.chi2 < 0:
        raise ConfigError("squeeze: chi2 must be a nonnegative number")
    return pulses.canonical_loop(math.sqrt(cfg.chi2))


def cmd_squeeze(config: ScenarioConfig) -> Output:
    cfg = config.squeeze
    loop = _build_loop(cfg)
    if cfg.correct_loss:
        loop = pulses.corrected_displacements(loop, cfg.correction_cap)
    effective, noise_chi = pulses.apply_loss(loop)
    total, residual, area = pulses.compose_loop(effective)
    initial = phase_space.make_thermal(cfg.nbar).tensor(phase_space.make_vacuum())
    mech = phase_space.apply_symplectic(initial, total).reduced(0)
    if noise_chi > 0:
        # uncancelled vacuum noise adds an uncorrelated momentum kick
        cov = mech.cov.copy()
        cov[1, 1] += 0.5 * noise_chi**2
        mech = phase_space.GaussianState(mech.mean, cov)
    var, theta = phase_space.min_variance_and_angle(mech)
    to_mech, to_light = pulses.coupling_blocks(total)
    meta = {
        "loop": effective.to_dict(),
        "nbar": cfg.nbar,
        "mean": mech.mean,
        "cov": mech.cov,
        "min_variance": var,
        "angle": theta,
        "area": area,
        "shear_chi2": pulses.mechanical_shear(total),
        "chi_loss": residual.chi_loss,
        "phi_loss": residual.phi_loss,
        "coupling_max": float(max(np.abs(to_mech).max(), np.abs(to_light).max())),
        "added_noise_chi": noise_chi,
    }
    violations = ["loop_not_closed"] if residual.chi_loss > 1e-10 else []
    rows = [
        ("mean_x", mech.mean[0]),
        ("mean_p", mech.mean[1]),
        ("cov_xx", mech.cov[0, 0]),
        ("cov_xp", mech.cov[0, 1]),
        ("cov_pp", mech.cov[1, 1]),
        ("min_variance", var),
        ("angle", theta),
        ("area", area),
        ("chi_loss", residual.chi_loss),
        ("phi_loss", residual.phi_loss),
        ("coupling_max", meta["coupling_max"]),
        ("added_noise_chi", noise_chi),
    ]
    return Output(("quantity", "value"), rows, {"squeeze": meta}, violations)


GATES = {"x2": 2, "x4": 4, "none": None}


def wigner_fields(config: ScenarioConfig):
    cfg = config.wigner
    if cfg.gate not in GATES:
        raise ConfigError(f"wigner.gate must be one of {sorted(GATES)}, got {cfg.gate!r}")
    values = cfg.chi2 if isinstance(cfg.chi2, list) else [cfg.chi2]
    if not values or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise ConfigError("wigner.chi2 must be a number or a non-empty list of numbers")
    grid = cfg.grid
    base = wavefunction.ground_state(grid.n_x, grid.half_width)
    power = GATES[cfg.gate]
    out = []
    for chi2 in values:
        state = base if power is None else wavefunction.apply_polynomial_phase(base, {power: float(chi2)})
        field = wavefunction.wigner_from_wavefunction(state, n_p=grid.n_p, p_half_width=grid.p_half_width)
        out.append((float(chi2), field))
    return out


def cmd_wigner(config: ScenarioConfig) -> list[tuple[dict, object]]:
    results = []
    for chi2, field in wigner_fields(config):
        summary = {
            "gate": config.wigner.gate,
            "chi2": chi2,
            "negativity": wavefunction.negativity_volume(field),
            "min_w": float(field.values.min()),
            "total": field.total(),
        }
        results.append((summary, field))
    return results


def cmd_nonclosure(config: ScenarioConfig) -> Output:
    cfg = config.nonclosure
    if cfg.n < 2 or cfg.chi_loss_min < 0 or cfg.chi_loss_max <= cfg.chi_loss_min:
        raise ConfigError("nonclosure: need n >= 2 and 0 <= chi_loss_min < chi_loss_max")
    grid = np.linspace(cfg.chi_loss_min, cfg.chi_loss_max, cfg.n)
    rows = [(c, pulses.squeezing_with_nonclosure(cfg.chi2, float(c))) for c in grid]
    _, theta = phase_space.min_variance_and_angle(
        phase_space.apply_symplectic(phase_space.make_vacuum(), phase_space.shear_from_chi2(cfg.chi2))
    )
    meta = {
        "chi2": cfg.chi2,
        "readout_angle": theta,
        "threshold": pulses.nonclosure_threshold(cfg.chi2),
        "reported_threshold": REPORTED_NONCLOSURE_THRESHOLD,
        "model": "fixed closed-loop readout angle; residual kick variance chi_loss^2/2",
    }
    return Output(("chi_loss", "variance"), rows, {"nonclosure": meta})


def cmd_thermal(config: ScenarioConfig) -> Output:
    cfg = config.thermal
    if cfg.n_samples < 2 or cfg.periods <= 0:
        raise ConfigError("thermal: need n_samples >= 2 and periods > 0")
    omega = 2.0 * math.pi * cfg.f_M
    nbar = cfg.bath_nbar if cfg.bath_nbar is not None else device.bath_occupation(cfg.f_M, cfg.temperature)
    bath = thermal.BathParams.from_quality(omega, cfg.Q, nbar)
    m0 = thermal.post_pulse_moments(cfg.nbar_eff, cfg.chi2)
    t_end = cfg.periods * bath.period
    times = np.linspace(0.0, t_end, cfg.n_samples)
    var = thermal.variance_trajectory(m0, bath, times, printed_form=cfg.printed_form)
    t_ode, v_ode = thermal.covariance_ode_oracle(m0, bath, t_end, bath.period / cfg.oracle_steps_per_period)
    closed = thermal.variance_trajectory(m0, bath, t_ode)
    deviation = float(np.max(np.abs(v_ode - closed) / np.abs(closed)))
    meta = {
        "initial_moments": {"xx": m0.xx, "pp": m0.pp, "xp": m0.xp},
        "bath": {"gamma": bath.gamma, "omega": bath.omega, "nbar": bath.nbar},
        "equilibrium": nbar + 0.5,
        "printed_form": cfg.printed_form,
        "oracle_max_rel_deviation": deviation,
        "oracle_agrees": deviation < 1e-8,
    }
    return Output(("t", "var_x"), zip(times, var), {"thermal": meta})


def sweep_spec(config: ScenarioConfig) -> device.SweepSpec:
    cfg = config.sweep
    try:
        return device.SweepSpec(
            length_range=tuple(float(v) for v in cfg.length_range),
            frequency_range=tuple(float(v) for v in cfg.frequency_range),
            resolution=tuple(int(v) for v in cfg.resolution),
            thickness=cfg.thickness,
            width=cfg.width,
            temperature=cfg.temperature,
            flux_cap=cfg.flux_cap,
            n_photons=cfg.n_photons,
            material=device.MaterialParams(**vars(cfg.material)),
            settings=device.PipelineSettings(**vars(cfg.settings)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sweep: {exc}") from None


def cmd_sweep(config: ScenarioConfig) -> Output:
    result = device.sweep_squeezing(sweep_spec(config), workers=config.sweep.workers)
    violations = sorted({v for cell in result.cells for v in cell.violations})
    return Output(SWEEP_COLUMNS, sweep_rows(result), {"sweep": result.metadata}, violations)


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def emit(output: Output, out: Path | None, fmt: str) -> None:
    if fmt == "json":
        _write(out, json_text(output.as_document()))
        return
    _write(out, csv_text(output.columns, output.rows))
    if out is not None and output.meta:
        _meta_path(out).write_text(json_text(output.meta))


def emit_wigner(results, out: Path | None, fmt: str) -> None:
    if fmt == "json":
        doc = {
            "fields": [
                dict(summary, x=field.x, p=field.p, w=field.values) for summary, field in results
            ]
        }
        _write(out, json_text(doc))
        return
    if len(results) == 1:
        summary, field = results[0]
        _write(out, field.to_csv())
        if out is not None:
            _meta_path(out).write_text(json_text({"wigner": [summary]}))
        return
    if out is None:
        raise ConfigError("several chi2 values need --out to name the output files")
    for k, (_, field) in enumerate(results):
        out.with_name(f"{out.stem}.{k}{out.suffix}").write_text(field.to_csv())
    _meta_path(out).write_text(json_text({"wigner": [s for s, _ in results]}))


COMMANDS = {
    "squeeze": cmd_squeeze,
    "nonclosure": cmd_nonclosure,
    "thermal": cmd_thermal,
    "sweep": cmd_sweep,
}


def _add_globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=default, help="scenario JSON file")
    parser.add_argument("--out", type=Path, default=default, help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=default if suppress else "csv")
    parser.add_argument("--strict", action="store_true", default=default if suppress else False,
                        help="exit with code 3 on constraint violations")


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geophase", description=__doc__.splitlines()[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter, epilog=__doc__)
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("squeeze", "wigner", "nonclosure", "thermal", "sweep"):
        _add_globals(sub.add_parser(name), suppress=True)
    return parser


def main(argv=None) -> int:
    args = create_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "wigner":
            emit_wigner(cmd_wigner(config), args.out, args.format)
            return EXIT_OK
        output = COMMANDS[args.command](config)
        emit(output, args.out, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    if args.strict and output.violations:
        print("constraint violations: " + ", ".join(output.violations), file=sys.stderr)
        return EXIT_CONSTRAINT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
