"""Shared helpers for the experiment scripts."""

from __future__ import annotations

import argparse
from pathlib import Path


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--outdir", type=Path, default=Path("results"), help="directory for CSV/JSON/PNG output")
    p.add_argument("--no-plot", action="store_true", help="skip the matplotlib figure")
    return p


def prepare(args) -> Path:
    args.outdir.mkdir(parents=True, exist_ok=True)
    return args.outdir


def pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt
