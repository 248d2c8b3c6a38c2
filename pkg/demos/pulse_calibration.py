"""Reconstructing a distorted control pulse from sensor shot statistics.

A step pulse passes through a transfer line with one exponential pole and
arrives rounded. Sliding a short sensing window across the record and
projectively reading out at each stop recovers the pulse shape up to the
kernel's window average; shot noise enters only through the binomial
spread of the readout.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import qsense as q

MODEL = q.SensorModel()
U_MAX = 0.4
SHOTS = 100000
SEED = 2


def main():
    tau = 0.5 * np.pi / U_MAX
    duration = 6.0 * tau
    # step large enough to clear the shot noise, small enough to stay in
    # the linear response regime of the readout
    dist = q.DistortionModel(step_amplitude=0.02, step_onset=duration / 4,
                             poles=((0.8, tau),), duration=duration)
    grid = np.linspace(0.0, duration, 4001)
    truth = q.SampledField(grid, q.distorted_pulse(dist, grid))

    proto = q.yx_waveform(q.YXParams(U_MAX, tau), 1000)
    centers = np.linspace(0.5 * tau, duration - 0.5 * tau, 40)
    records = q.simulate_measurement_sweep(MODEL, proto, truth, centers,
                                           SHOTS, SEED)
    recon = q.reconstruct_waveform(records)

    K = q.numerical_kernel(MODEL, proto, 100)
    eta = q.evolve(MODEL, proto, delta_omega=0.0).sensitivity()
    predicted = np.array([q.convolve_predict(K, truth.at(c + K.centers)) / eta
                          for c in centers])

    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    ax.plot(grid, truth.values / dist.step_amplitude, "k-", lw=1.0,
            label="distorted pulse")
    ax.plot(centers, predicted / dist.step_amplitude, "C1-", lw=1.0,
            label="window average")
    ax.errorbar(centers, recon.estimates / dist.step_amplitude,
                yerr=recon.stderrs / dist.step_amplitude, fmt="C0o", ms=3,
                lw=0.8, capsize=2, label="%d shots / point" % SHOTS)
    ax.set_xlabel("window center")
    ax.set_ylabel("field / step amplitude")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    out = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                       "pulse_calibration.png")
    fig.savefig(out, dpi=160)
    print("wrote", out)

    rms_pred = np.sqrt(np.mean((recon.estimates - predicted) ** 2))
    print("rms vs truth       = %.3e (%.1f%% of step)"
          % (recon.rms_error, 100 * recon.rms_error / dist.step_amplitude))
    print("rms vs window avg  = %.3e (%.1f%% of step)"
          % (rms_pred, 100 * rms_pred / dist.step_amplitude))
    print("mean stderr        = %.3e"
          % np.mean(recon.stderrs))


if __name__ == "__main__":
    main()
