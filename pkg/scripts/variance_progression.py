"""Position variance after the pulse sequence on short and long time scales."""

import numpy as np
from _common import parser, prepare, pyplot

from geophase.device import MaterialParams, StringGeometry, bath_occupation, device_params, effective_phonon_number
from geophase.io import json_text, trajectory_csv
from geophase.thermal import BathParams, observed_variance, post_pulse_moments, variance_trajectory


def main():
    p = parser(__doc__)
    p.add_argument("--length", type=float, default=1e-3, help="string length [m]")
    p.add_argument("--f-M", type=float, default=24e3)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--n-photons", type=float, default=None, help="photons per pulse (default: flux-limited)")
    args = p.parse_args()
    out = prepare(args)

    geom = StringGeometry(args.length, 157e-9, 3e-6)
    dev = device_params(geom, MaterialParams(), args.f_M, args.temperature, args.n_photons)
    nbar = bath_occupation(args.f_M, args.temperature)
    n_eff = effective_phonon_number(dev.chi, nbar, dev.Q)
    bath = BathParams.from_quality(dev.omega_M, dev.Q, nbar)
    m0 = post_pulse_moments(n_eff, dev.chi**2)
    kappa = dev.kappa
    spans = {"window": 5 / kappa, "period": bath.period, "ten_periods": 10 * bath.period,
             "rethermalise": 10 / (2 * bath.gamma * max(nbar, 1.0))}
    summary = {"Q": dev.Q, "chi": dev.chi, "n_eff": n_eff, "nbar": nbar, "kappa": kappa, "spans": spans}
    curves = {}
    for name, span in spans.items():
        t = np.linspace(0, span, 4001)
        v = variance_trajectory(m0, bath, t)
        curves[name] = (t, v)
        (out / f"variance_{name}.csv").write_text(trajectory_csv(t, v))
    dt = (1 / kappa) / 20
    t = np.arange(int(bath.period / dt) + 1) * dt
    summary["var_obs"] = observed_variance(variance_trajectory(m0, bath, t), dt, kappa)
    (out / "variance_progression.json").write_text(json_text(summary))
    print(json_text(summary), end="")

    if not args.no_plot:
        plt = pyplot()
        fig, axes = plt.subplots(1, len(curves), figsize=(3.2 * len(curves), 3.2))
        for ax, (name, (t, v)) in zip(axes, curves.items()):
            ax.semilogy(t, v)
            ax.axhline(0.5, color="k", lw=0.6)
            ax.set_title(name)
            ax.set_xlabel("t [s]")
        axes[0].set_ylabel("Var X")
        fig.tight_layout()
        fig.savefig(out / "variance_progression.png", dpi=120)


if __name__ == "__main__":
    main()
