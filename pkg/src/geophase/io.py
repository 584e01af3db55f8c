"""Deterministic text serialisation of tables and documents."""

from __future__ import annotations

import json
import math

import numpy as np

SWEEP_COLUMNS = ("L_m", "f_hz", "Q", "g0_rad_s", "chi", "n_eff", "var_obs", "violations")


def fmt(value) -> str:
    """Shortest decimal string that round-trips to the same float."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def csv_text(columns, rows) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def json_text(doc) -> str:
    return json.dumps(_plain(doc), indent=2) + "\n"


def trajectory_csv(times, var_x) -> str:
    return csv_text(("t", "var_x"), zip(times, var_x))


def sweep_rows(result):
    for cell in result.cells:
        yield (cell.length, cell.f_M, cell.Q, cell.g0, cell.chi, cell.n_eff, cell.var_obs, ";".join(cell.violations))


def sweep_csv(result) -> str:
    return csv_text(SWEEP_COLUMNS, sweep_rows(result))
