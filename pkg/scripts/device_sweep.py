"""Observable squeezing over SiN string length and frequency, with the Q = 6.9e6 contour."""

import math

import numpy as np
from _common import parser, prepare, pyplot

from geophase.device import SweepSpec, sweep_squeezing
from geophase.io import json_text, sweep_csv


def main():
    p = parser(__doc__)
    p.add_argument("--resolution", type=int, nargs=2, default=[40, 40])
    p.add_argument("--workers", type=int, default=4)
    args = p.parse_args()
    out = prepare(args)

    result = sweep_squeezing(SweepSpec(resolution=tuple(args.resolution)), workers=args.workers)
    (out / "sweep.csv").write_text(sweep_csv(result))
    (out / "sweep.meta.json").write_text(json_text(result.metadata))
    meta = {k: v for k, v in result.metadata.items() if k not in ("q_contour", "spec")}
    print(json_text(meta), end="")

    if not args.no_plot:
        plt = pyplot()
        var = np.minimum(result.grid("var_obs"), result.metadata["color_truncation"])
        fig, ax = plt.subplots(figsize=(6, 4.5))
        mesh = ax.pcolormesh(result.lengths * 1e3, result.frequencies / 1e3, np.log10(var).T, shading="auto")
        fig.colorbar(mesh, label="log10 var_obs (truncated at 0.5)")
        contour = np.array(result.metadata["q_contour"])
        if contour.size:
            ax.plot(contour[:, 0] * 1e3, contour[:, 1] / 1e3, "w--", label="Q = 6.9e6")
        best = result.metadata["optimum_feasible"]
        if best:
            ax.plot(best["L_m"] * 1e3, best["f_hz"] / 1e3, "r*", ms=10,
                    label=f"best var {best['var_obs']:.3g} (log {math.log10(best['var_obs']):.2f})")
        ax.set_xlabel("L [mm]")
        ax.set_ylabel("f [kHz]")
        ax.legend(loc="upper right", fontsize=8)
        fig.tight_layout()
        fig.savefig(out / "sweep.png", dpi=120)


if __name__ == "__main__":
    main()
