"""Response kernels: what a protocol actually averages over its window.

The impulse-response kernel maps a time-varying field to the first-order
shift of the outcome probability. For the rotating-frame YX protocol the
kernel has a closed form; the numerical construction reproduces it and
extends to arbitrary lab-frame protocols, where the YX and detuned-carrier
kernels weight the window differently but integrate to the same overall
sensitivity scale.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import qsense as q

MODEL = q.SensorModel()
U_MAX = 0.5


def main():
    tau = 0.5 * np.pi / U_MAX
    n_centers = 100

    # rotating frame: numerical construction against the closed form
    proto_rwa = q.yx_rwa_protocol(q.YXParams(U_MAX, tau), 500)
    K_num = q.numerical_kernel(MODEL, proto_rwa, n_centers)
    K_ana = q.analytic_kernel_yx_rwa(U_MAX, tau, n_centers)

    # lab frame: the two reference protocols
    K_yx = q.numerical_kernel(
        MODEL, q.yx_waveform(q.YXParams(U_MAX, tau), 1000), n_centers)
    dw = q.optimize_detune_rwa(U_MAX, tau)
    det = q.detune_waveform(q.DetuneParams(U_MAX, tau, 1.0 + dw, 0.0), 1000)
    K_det = q.numerical_kernel(MODEL, det, n_centers)

    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9.0, 3.4))
    ax0.plot(K_ana.centers / tau, K_ana.values, "k-", lw=1.0,
             label="closed form")
    ax0.plot(K_num.centers / tau, K_num.values, "C0o", ms=2.5,
             label="impulse probes")
    ax0.set_xlabel("$t' / \\tau$")
    ax0.set_ylabel("$K(t')$")
    ax0.set_title("rotating-frame YX kernel")
    ax0.legend(frameon=False, fontsize=8)

    ax1.plot(K_yx.centers / tau, K_yx.values, "C0-", lw=0.9, label="YX, lab")
    ax1.plot(K_det.centers / tau, K_det.values, "C1-", lw=0.9,
             label="detune, lab")
    ax1.set_xlabel("$t' / \\tau$")
    ax1.set_title("lab-frame kernels")
    ax1.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                       "response_kernel.png")
    fig.savefig(out, dpi=160)
    print("wrote", out)

    for tag, K, proto in (("rwa", K_num, proto_rwa),
                          ("yx lab", K_yx, None), ("detune lab", K_det, None)):
        if proto is None:
            proto = K.protocol
        eta = q.evolve(MODEL, proto, delta_omega=0.0).sensitivity()
        print("%-10s integral = %9.5f   eta = %9.5f   gap = %.2e"
              % (tag, K.integral, eta, abs(K.integral - eta) / abs(eta)))


if __name__ == "__main__":
    main()
