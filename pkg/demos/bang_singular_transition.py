"""Structure of the optimal control below and above the critical time.

For short interrogation the sensitivity optimum is pure bang-bang: the
switching function crosses zero only at isolated switches. Past roughly
0.8 t_QSL an interior singular plateau opens up where the switching
function collapses to zero and the control follows the second-order
singular value instead of the bound.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import qsense as q

MODEL = q.SensorModel()
U_MAX = 0.1


def optimum(rel, n_t=600, iters=2500):
    tau = rel * np.pi / U_MAX
    cfg = q.OptimizationConfig(u_max=U_MAX, tau=tau, n_t=n_t,
                               cost=q.CostKind("EtaSquared"),
                               max_iters=iters, coarse_n_t=n_t // 4,
                               seed=0, n_random_starts=1)
    return q.optimize_multistart(MODEL, cfg)


def panel(ax_u, ax_phi, res, rel):
    wf = res.waveform
    t = (np.arange(wf.n_t) + 0.5) * wf.dt
    diag = res.diagnostics
    ax_u.step(t / wf.tau, wf.values / U_MAX, where="mid", lw=0.8)
    sing = [(a, b) for lab, a, b in res.arc_labels if lab == "Singular"]
    for a, b in sing:
        ax_u.axvspan(t[a] / wf.tau, t[b - 1] / wf.tau, color="C1", alpha=0.2)
        ax_u.plot(t[a:b] / wf.tau, diag.u_sing[a:b] / U_MAX, "C1--", lw=1.0)
    ax_u.set_ylabel("$u / u_{max}$")
    ax_u.set_title("$\\tau = %.1f\\,t_{QSL}$, arcs: %s"
                   % (rel, ", ".join(lab for lab, _, _ in res.arc_labels)),
                   fontsize=9)
    phi = diag.phi / np.max(np.abs(diag.phi))
    ax_phi.plot(t / wf.tau, phi, lw=0.8)
    ax_phi.axhline(0.0, color="k", lw=0.5)
    ax_phi.set_ylabel("$\\Phi / \\max|\\Phi|$")
    ax_phi.set_xlabel("$t / \\tau$")


def main():
    below = optimum(0.6)
    above = optimum(1.2)
    for tag, res in (("below", below), ("above", above)):
        labels = [(lab, b - a) for lab, a, b in res.arc_labels]
        print("%s transition: eta = %.6f, arcs = %s"
              % (tag, q.sensitivity(MODEL, res.waveform), labels))

    fig, axes = plt.subplots(2, 2, figsize=(9.0, 5.0), sharex="col")
    panel(axes[0, 0], axes[1, 0], below, 0.6)
    panel(axes[0, 1], axes[1, 1], above, 1.2)
    fig.tight_layout()
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                       "bang_singular_transition.png")
    fig.savefig(out, dpi=160)
    print("wrote", out)


if __name__ == "__main__":
    main()
