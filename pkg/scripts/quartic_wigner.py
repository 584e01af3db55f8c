"""Wigner functions of the ground state after the quartic gate exp(-i chi^2 X^4).

Reports the negativity volume and the deviation of the conditional mean
momentum from -4 chi^2 x^3 for each gate strength.
"""

import numpy as np
from _common import parser, prepare, pyplot

from geophase.io import json_text
from geophase.wavefunction import ground_state, negativity_volume, quartic_gate, wigner_from_wavefunction


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--chi2", type=float, nargs="+", default=[0.0, 0.066, 0.133, 0.2])
    args = p.parse_args()
    out = prepare(args)

    vacuum = ground_state()
    fields, rows = [], []
    for k, chi2 in enumerate(args.chi2):
        field = wigner_from_wavefunction(quartic_gate(vacuum, chi2))
        inside = np.abs(field.x) <= 2
        drift = field.conditional_momentum()[inside] + 4 * chi2 * field.x[inside] ** 3
        rows.append({
            "chi2": chi2,
            "negativity": negativity_volume(field),
            "min_w": float(field.values.min()),
            "profile_max_dev": float(np.abs(drift).max()),
        })
        (out / f"quartic_wigner.{k}.csv").write_text(field.to_csv())
        fields.append(field)
    (out / "quartic_wigner.json").write_text(json_text({"fields": rows}))
    print(json_text({"fields": rows}), end="")

    if not args.no_plot:
        plt = pyplot()
        fig, axes = plt.subplots(1, len(fields), figsize=(3.2 * len(fields), 3.4), squeeze=False)
        for ax, field, row in zip(axes[0], fields, rows):
            xw = np.abs(field.x) <= 3.5
            pw = np.abs(field.p) <= 8
            vals = field.values[np.ix_(xw, pw)].T
            lim = np.abs(vals).max()
            ax.pcolormesh(field.x[xw], field.p[pw], vals, cmap="RdBu_r", vmin=-lim, vmax=lim, shading="auto")
            ax.plot(field.x[xw], -4 * row["chi2"] * field.x[xw] ** 3, "k--", lw=0.8)
            ax.set_ylim(-8, 8)
            ax.set_title(f"chi^2={row['chi2']:g}")
            ax.set_xlabel("X")
        axes[0][0].set_ylabel("P")
        fig.tight_layout()
        fig.savefig(out / "quartic_wigner.png", dpi=120)


if __name__ == "__main__":
    main()
