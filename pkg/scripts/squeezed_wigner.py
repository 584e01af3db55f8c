"""Wigner function of the vacuum after the closed four-pulse loop.

Writes the grid-engine field, the Gaussian-engine reference and a summary with
the minimum variance and readout angle.
"""

import math

import numpy as np
from _common import parser, prepare, pyplot

from geophase.io import json_text
from geophase.phase_space import apply_symplectic, gaussian_wigner, make_thermal, make_vacuum, min_variance_and_angle
from geophase.pulses import canonical_loop, compose_loop
from geophase.wavefunction import ground_state, quadratic_gate, wigner_from_wavefunction


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--chi2", type=float, default=1.0)
    args = p.parse_args()
    out = prepare(args)

    total, residual, area = compose_loop(canonical_loop(math.sqrt(args.chi2)))
    mech = apply_symplectic(make_thermal(0.0).tensor(make_vacuum()), total).reduced(0)
    var, theta = min_variance_and_angle(mech)

    field = wigner_from_wavefunction(quadratic_gate(ground_state(), area))
    reference = gaussian_wigner(mech, field.x, field.p)
    summary = {
        "chi2": args.chi2,
        "area": area,
        "chi_loss": residual.chi_loss,
        "cov": mech.cov,
        "min_variance": var,
        "angle": theta,
        "tan_angle": math.tan(theta),
        "tan_angle_expected": math.sqrt(args.chi2**2 + 1) - args.chi2,
        "engine_linf": float(np.max(np.abs(field.values - reference.values))),
    }
    (out / "squeezed_wigner.csv").write_text(field.to_csv())
    (out / "squeezed_wigner.json").write_text(json_text(summary))
    print(json_text(summary), end="")

    if not args.no_plot:
        plt = pyplot()
        fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=True)
        window = np.abs(field.x) <= 4
        pwin = np.abs(field.p) <= 6
        vac = gaussian_wigner(make_vacuum(), field.x, field.p)
        for ax, f, title in ((axes[0], vac, "before"), (axes[1], field, f"after, chi^2={args.chi2:g}")):
            ax.contourf(f.x[window], f.p[pwin], f.values[np.ix_(window, pwin)].T, levels=30, cmap="viridis")
            ax.set_title(title)
            ax.set_xlabel("X")
        axes[0].set_ylabel("P")
        xs = np.linspace(-4, 4, 2)
        axes[1].plot(xs, xs * math.tan(theta + math.pi / 2), "w--", lw=1)
        fig.tight_layout()
        fig.savefig(out / "squeezed_wigner.png", dpi=120)


if __name__ == "__main__":
    main()
