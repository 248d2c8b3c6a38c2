"""Fisher-information-optimal control is not sensitivity-optimal.

At long interrogation times a control maximizing the quantum Fisher
information drives the information growth close to its t^2 ceiling, yet
the plain population readout it leaves behind has nearly zero slope in
the field. The sensitivity optimum sacrifices some information for an
observable that actually responds.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import qsense as q

MODEL = q.SensorModel()
U_MAX = 0.1
REL = 1.2


def optimum(kind):
    tau = REL * np.pi / U_MAX
    cfg = q.OptimizationConfig(u_max=U_MAX, tau=tau, n_t=600,
                               cost=q.CostKind(kind), max_iters=2500,
                               coarse_n_t=150, seed=0, n_random_starts=1)
    return q.optimize_multistart(MODEL, cfg)


def qfi_series(traj):
    S = traj.states
    p0, p1 = S[:, :2], S[:, 2:]
    ov = np.einsum("ki,ki->k", p0.conj(), p1)
    return 4.0 * (np.einsum("ki,ki->k", p1.conj(), p1).real
                  - np.abs(ov) ** 2)


def main():
    tau = REL * np.pi / U_MAX
    res_eta = optimum("EtaSquared")
    res_qfi = optimum("NegQFI")

    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9.0, 3.4))
    rows = []
    for res, label, color in ((res_eta, "$\\eta^2$ optimum", "C0"),
                              (res_qfi, "QFI optimum", "C1")):
        traj = q.evolve(MODEL, res.waveform, delta_omega=0.0)
        Q = qfi_series(traj)
        t = traj.times
        ax0.plot(t[1:] / tau, Q[1:] / t[1:] ** 2, color, lw=1.0, label=label)
        tm = (np.arange(res.waveform.n_t) + 0.5) * res.waveform.dt
        ax1.step(tm / tau, res.waveform.values / U_MAX, color, where="mid",
                 lw=0.8, label=label)
        rows.append((label, abs(traj.sensitivity()), Q[-1]))

    ax0.axhline(1.0, color="k", lw=0.5, ls=":")
    ax0.set_xlabel("$t / \\tau$")
    ax0.set_ylabel("$QFI(t) / t^2$")
    ax0.legend(frameon=False, fontsize=8)
    ax1.set_xlabel("$t / \\tau$")
    ax1.set_ylabel("$u / u_{max}$")
    ax1.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                       "qfi_vs_sensitivity.png")
    fig.savefig(out, dpi=160)
    print("wrote", out)
    for label, eta, Qend in rows:
        print("%-16s |eta| = %8.4f   QFI(tau) = %9.2f   (tau^2 = %.2f)"
              % (label.replace("$", ""), eta, Qend, tau * tau))


if __name__ == "__main__":
    main()
