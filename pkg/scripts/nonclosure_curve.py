"""Readout variance versus residual loop coupling for chi^2 = 1."""

import numpy as np
from _common import parser, prepare, pyplot

from geophase.io import csv_text, json_text
from geophase.pulses import nonclosure_threshold, squeezing_with_nonclosure

REPORTED_THRESHOLD = 2.1


def main():
    p = parser(__doc__)
    p.add_argument("--chi2", type=float, default=1.0)
    p.add_argument("--max", type=float, default=3.0)
    args = p.parse_args()
    out = prepare(args)

    chi_loss = np.linspace(0.0, args.max, 301)
    variance = [squeezing_with_nonclosure(args.chi2, float(c)) for c in chi_loss]
    threshold = nonclosure_threshold(args.chi2)
    (out / "nonclosure.csv").write_text(csv_text(("chi_loss", "variance"), zip(chi_loss, variance)))
    summary = {"chi2": args.chi2, "threshold": threshold, "reported_threshold": REPORTED_THRESHOLD}
    (out / "nonclosure.json").write_text(json_text(summary))
    print(json_text(summary), end="")

    if not args.no_plot:
        plt = pyplot()
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(chi_loss, variance)
        ax.axhline(0.5, color="k", lw=0.8)
        ax.axvline(threshold, color="C1", ls="--", label=f"model c* = {threshold:.2f}")
        ax.axvline(REPORTED_THRESHOLD, color="C2", ls=":", label=f"reported {REPORTED_THRESHOLD}")
        ax.set_xlabel("chi_loss")
        ax.set_ylabel("Var along squeezed quadrature")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out / "nonclosure.png", dpi=120)


if __name__ == "__main__":
    main()
