"""Command-line front end: simulations, optimizations, sweeps, tables.

Every subcommand accepts --config FILE (YAML mapping mirroring the flags
1:1, flags override) and an optional --output BASE that writes BASE.csv and
BASE.json; without --output the table goes to stdout. All floats are
printed at 12 significant digits so identical configs give identical bytes.

Exit codes: 0 success, 2 bad usage or config, 3 numerical failure,
4 unwritable output.
"""

import argparse
import json
import os
import platform
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .calibration import (DistortionModel, SampledField, distorted_pulse,
                          reconstruct_waveform, simulate_measurement_sweep)
from .dynamics import (ControlWaveform, SensorModel, evolve, sensitivity)
from .kernel import (analytic_kernel_yx_rwa, convolve_predict,
                     numerical_kernel)
from .optimal_control import (CostKind, OptimizationConfig,
                              optimize_multistart, verify_optimality)
from .protocols import (DetuneParams, YXParams, detune_rwa_protocol,
                        detune_waveform, optimize_detune_rwa,
                        optimize_detune_full, yx_rwa_protocol, yx_waveform)

FLOAT_FMT = "%.12g"

_COST_NAMES = {"eta2": "EtaSquared", "qfi": "NegQFI"}


class ConfigError(ValueError):
    """Invalid or unknown configuration; maps to exit code 2."""


def _fmt(x) -> str:
    return FLOAT_FMT % float(x)


def _round12(obj):
    # round every float to 12 significant digits for byte-stable JSON
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(_fmt(obj))
    if isinstance(obj, (int, np.integer, bool)):
        return int(obj) if not isinstance(obj, bool) else obj
    if isinstance(obj, np.ndarray):
        return [_round12(v) for v in obj.tolist()]
    return obj


def _versions() -> dict:
    import scipy
    return {"qsense": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version()}


def _emit(output, header, rows, summary):
    """Write BASE.csv and BASE.json, or the CSV table to stdout."""
    lines = [",".join(header)]
    lines += [",".join(r) for r in rows]
    text = "\n".join(lines) + "\n"
    if output is None:
        sys.stdout.write(text)
        return
    with open(output + ".csv", "w", newline="") as fh:
        fh.write(text)
    with open(output + ".json", "w") as fh:
        json.dump(_round12(summary), fh, sort_keys=True, indent=2)
        fh.write("\n")
    print("wrote %s.csv %s.json" % (output, output))


# ---------------------------------------------------------------------------
# config file handling: YAML keys mirror flag dests, flags override


def _merge_config(args, defaults):
    cfg_path = getattr(args, "config", None)
    if cfg_path is not None:
        import yaml
        with open(cfg_path) as fh:
            data = yaml.safe_load(fh)
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("config file must be a key-value mapping")
        for key, val in data.items():
            dest = str(key).replace("-", "_")
            if dest not in defaults:
                raise ConfigError("unknown config key: %s" % key)
            if getattr(args, dest) is None:
                setattr(args, dest, val)
    for dest, val in defaults.items():
        if getattr(args, dest) is None:
            setattr(args, dest, val)
    return args


def _tau_grid(text: str) -> np.ndarray:
    try:
        a, b, s = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError("tau grid must be START:STOP:STEP") from None
    if s <= 0 or b < a:
        raise ConfigError("tau grid must be increasing with positive step")
    n = int(np.floor((b - a) / s + 1e-9)) + 1
    return a + s * np.arange(n)


def _lab_n_t(tau: float, omega: float, multiple: int = 1) -> int:
    # 40 samples per carrier period, rounded up to the requested multiple
    n = max(400, int(np.ceil(tau * omega / (2 * np.pi) * 40)))
    return ((n + multiple - 1) // multiple) * multiple


def _aligned_rwa_n_t(build, n_centers: int, target: int = 1000) -> int:
    """Smallest multiple of n_centers >= target whose grid fits the protocol."""
    k0 = max(1, (target + n_centers - 1) // n_centers)
    for k in range(k0, k0 + 400):
        try:
            build(k * n_centers).interval_arrays()
            return k * n_centers
        except ValueError:
            continue
    raise ConfigError("no aligned grid found; set --n-t explicitly")


def _detune_params(u_max, tau, delta, a):
    if delta is None:
        delta = optimize_detune_rwa(u_max, tau)
    return DetuneParams(u_max=u_max, tau=tau, omega=1.0 + delta, a=a)


def _build_protocol(kind, rwa, u_max, tau, n_t, detune_delta, detune_a):
    """Construct the requested reference protocol; returns (protocol, name)."""
    if kind == "yx":
        params = YXParams(u_max=u_max, tau=tau)
        if rwa:
            return yx_rwa_protocol(params, n_t), "yx_rwa"
        return yx_waveform(params, n_t or _lab_n_t(tau, 1.0)), "yx"
    if kind == "detune":
        params = _detune_params(u_max, tau, detune_delta, detune_a)
        if rwa:
            return detune_rwa_protocol(params, n_t or 400), "detune_rwa"
        return (detune_waveform(params, n_t or _lab_n_t(tau, params.omega)),
                "detune")
    raise ConfigError("unknown protocol kind: %s" % kind)


def _node_table(traj, control_values):
    """Per-node rows: time, control, probability, sensitivity, qfi."""
    S = traj.states
    p0, p1 = S[:, :2], S[:, 2:]
    prob = np.abs(S[:, 0]) ** 2
    eta = 2.0 * np.real(np.conj(S[:, 0]) * S[:, 2])
    qfi = 4.0 * (np.einsum("ki,ki->k", p1.conj(), p1).real
                 - np.abs(np.einsum("ki,ki->k", p0.conj(), p1)) ** 2)
    u = np.append(control_values, control_values[-1])
    rows = [[_fmt(t), _fmt(uu), _fmt(pp), _fmt(ee), _fmt(qq)]
            for t, uu, pp, ee, qq in zip(traj.times, u, prob, eta, qfi)]
    return ["time", "control", "probability", "sensitivity", "qfi"], rows


# ---------------------------------------------------------------------------
# subcommands


_SIMULATE_DEFAULTS = dict(protocol="yx", rwa=False, umax=0.2, tau=None,
                          n_t=None, delta_omega=0.0, detune_delta=None,
                          detune_a=0.0, output=None)


def _cmd_simulate(args):
    _merge_config(args, _SIMULATE_DEFAULTS)
    if args.tau is None:
        raise ConfigError("simulate requires --tau (units of t_QSL)")
    model = SensorModel()
    tau = args.tau * np.pi / args.umax
    proto, name = _build_protocol(args.protocol, args.rwa, args.umax, tau,
                                  args.n_t, args.detune_delta, args.detune_a)
    traj = evolve(model, proto, delta_omega=args.delta_omega)
    if isinstance(proto, ControlWaveform):
        control = proto.values
    else:
        control = proto.interval_arrays()[0]
    header, rows = _node_table(traj, control)
    summary = {
        "command": "simulate",
        "config": {"protocol": name, "umax": args.umax,
                   "tau_over_tqsl": args.tau, "n_t": int(proto.n_t),
                   "delta_omega": args.delta_omega,
                   "detune_a": args.detune_a},
        "results": {"probability": traj.probability(),
                    "sensitivity": traj.sensitivity(), "qfi": traj.qfi(),
                    "tau": tau, "t_qsl": np.pi / args.umax},
        "versions": _versions(),
    }
    _emit(args.output, header, rows, summary)
    return 0


_OPTIMIZE_DEFAULTS = dict(umax=0.2, tau=None, n_t=600, coarse_n_t=None,
                          cost="eta2", w_smooth=0.0, max_iters=2000,
                          restarts=1, seed=0, kkt_tol=1e-9, output=None)


def _auto_coarse(n_t):
    quarter = n_t // 4
    if quarter >= 100 and n_t % quarter == 0:
        return quarter
    return None


def _cmd_optimize(args):
    _merge_config(args, _OPTIMIZE_DEFAULTS)
    if args.tau is None:
        raise ConfigError("optimize requires --tau (units of t_QSL)")
    if args.cost not in _COST_NAMES:
        raise ConfigError("cost must be one of %s" % sorted(_COST_NAMES))
    model = SensorModel()
    tau = args.tau * np.pi / args.umax
    coarse = args.coarse_n_t if args.coarse_n_t else _auto_coarse(args.n_t)
    cost = CostKind(_COST_NAMES[args.cost], smooth_weight=args.w_smooth)
    config = OptimizationConfig(
        u_max=args.umax, tau=tau, n_t=args.n_t, cost=cost,
        max_iters=args.max_iters, seed=args.seed,
        n_random_starts=args.restarts, kkt_tol=args.kkt_tol,
        coarse_n_t=coarse)
    res = optimize_multistart(model, config)
    diag = res.diagnostics
    wf = res.waveform
    header = ["time", "control", "switching_function", "singular_control",
              "control_hamiltonian"]
    rows = [[_fmt(t), _fmt(u), _fmt(ph), _fmt(us), _fmt(h)]
            for t, u, ph, us, h in zip(wf.midpoints, wf.values, diag.phi,
                                       diag.u_sing, diag.h_oc)]
    eta = sensitivity(model, wf)
    summary = {
        "command": "optimize",
        "config": {"umax": args.umax, "tau_over_tqsl": args.tau,
                   "n_t": args.n_t, "coarse_n_t": coarse or 0,
                   "cost": args.cost, "w_smooth": args.w_smooth,
                   "max_iters": args.max_iters, "restarts": args.restarts,
                   "kkt_tol": args.kkt_tol},
        "seed": args.seed,
        "results": {"cost_value": res.cost_value, "eta": eta,
                    "converged": bool(res.converged),
                    "kkt_residual": res.kkt_residual,
                    "init_name": res.init_name,
                    "iterations": int(len(res.history) - 1),
                    "arc_labels": [[l, int(a), int(b)]
                                   for l, a, b in res.arc_labels]},
        "model": {"omega0": model.omega0},
        "cost": {"kind": cost.kind, "smooth_weight": cost.smooth_weight},
        "waveform": {"tau": wf.tau, "n_t": int(wf.n_t), "u_max": wf.u_max,
                     "values": wf.values},
        "versions": _versions(),
    }
    _emit(args.output, header, rows, summary)
    return 0


_SWEEP_DEFAULTS = dict(protocol="yx", rwa=False, umax=0.2, tau_grid=None,
                       cost="eta2", n_t=None, detune_mode="rwa",
                       max_iters=1500, restarts=1, seed=0, output=None)


def _sweep_point(args, model, tau_rel):
    tau = tau_rel * np.pi / args.umax
    if args.protocol == "optimal":
        n_t = args.n_t or 600
        cost = CostKind(_COST_NAMES[args.cost])
        config = OptimizationConfig(
            u_max=args.umax, tau=tau, n_t=n_t, cost=cost,
            max_iters=args.max_iters, seed=args.seed,
            n_random_starts=args.restarts, coarse_n_t=_auto_coarse(n_t))
        res = optimize_multistart(model, config)
        return sensitivity(model, res.waveform), "optimal_" + args.cost
    if args.protocol == "detune" and args.detune_mode == "full":
        res = optimize_detune_full(args.umax, tau)
        return res.eta, "detune_full"
    proto, name = _build_protocol(args.protocol, args.rwa, args.umax, tau,
                                  args.n_t, None, 0.0)
    return evolve(model, proto, delta_omega=0.0).sensitivity(), name


def _cmd_sweep(args):
    _merge_config(args, _SWEEP_DEFAULTS)
    if args.tau_grid is None:
        raise ConfigError("sweep requires --tau-grid START:STOP:STEP")
    if args.cost not in _COST_NAMES:
        raise ConfigError("cost must be one of %s" % sorted(_COST_NAMES))
    model = SensorModel()
    taus = _tau_grid(args.tau_grid)
    workers = int(os.environ.get("QSENSE_THREADS", "0") or 0)
    if workers <= 0:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, len(taus)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        points = list(pool.map(lambda tr: _sweep_point(args, model, tr),
                               taus))
    header = ["tau_over_tqsl", "eta", "eta_over_tau", "protocol"]
    rows = []
    for tau_rel, (eta, name) in zip(taus, points):
        tau = tau_rel * np.pi / args.umax
        rows.append([_fmt(tau_rel), _fmt(eta), _fmt(eta / tau), name])
    summary = {
        "command": "sweep",
        "config": {"protocol": args.protocol, "rwa": bool(args.rwa),
                   "umax": args.umax, "tau_grid": args.tau_grid,
                   "cost": args.cost, "n_t": args.n_t or 0,
                   "detune_mode": args.detune_mode,
                   "max_iters": args.max_iters, "restarts": args.restarts},
        "seed": args.seed,
        "results": {"n_points": len(taus),
                    "eta": [float(e) for e, _ in points]},
        "versions": _versions(),
    }
    _emit(args.output, header, rows, summary)
    return 0


_KERNEL_DEFAULTS = dict(protocol="yx", rwa=False, umax=0.5, tau=0.5,
                        centers=200, n_t=None, analytic=False,
                        impulse_area=1e-3, detune_delta=None, detune_a=0.0,
                        output=None)


def _cmd_kernel(args):
    _merge_config(args, _KERNEL_DEFAULTS)
    model = SensorModel()
    tau = args.tau * np.pi / args.umax
    if args.analytic:
        if not (args.protocol == "yx" and args.rwa):
            raise ConfigError("--analytic requires --protocol yx --rwa")
        K = analytic_kernel_yx_rwa(args.umax, tau, args.centers)
        proto, name = K.protocol, "yx_rwa_analytic"
    else:
        if args.n_t is not None:
            n_t = args.n_t
        elif args.rwa and args.protocol == "yx":
            n_t = _aligned_rwa_n_t(
                lambda n: yx_rwa_protocol(YXParams(args.umax, tau), n),
                args.centers, target=5 * args.centers)
        elif args.rwa:
            n_t = 5 * args.centers
        else:
            n_t = _lab_n_t(tau, 1.0, multiple=args.centers)
        proto, name = _build_protocol(args.protocol, args.rwa, args.umax,
                                      tau, n_t, args.detune_delta,
                                      args.detune_a)
        K = numerical_kernel(model, proto, args.centers, args.impulse_area)
    eta = evolve(model, proto, delta_omega=0.0).sensitivity()
    header = ["t_prime", "kernel"]
    rows = [[_fmt(t), _fmt(v)] for t, v in zip(K.centers, K.values)]
    summary = {
        "command": "kernel",
        "config": {"protocol": name, "umax": args.umax,
                   "tau_over_tqsl": args.tau, "centers": args.centers,
                   "n_t": int(getattr(proto, "n_t", 0)),
                   "impulse_area": args.impulse_area,
                   "analytic": bool(args.analytic)},
        "results": {"integral": K.integral, "eta": eta,
                    "integral_gap_rel": abs(K.integral - eta)
                    / max(abs(eta), 1e-300)},
        "versions": _versions(),
    }
    _emit(args.output, header, rows, summary)
    return 0


_CALIBRATE_DEFAULTS = dict(protocol="yx", rwa=False, umax=0.4, tau=0.5,
                           step_amplitude=1e-4, step_onset=None,
                           duration=None, pole=None, centers=40,
                           shots=10000, seed=0, kernel_centers=100,
                           n_t=None, exact=False, output=None)


def _parse_poles(raw, tau):
    if raw is None:
        return ((0.8, tau),)
    poles = []
    for item in raw:
        if isinstance(item, str):
            w, tc = (float(x) for x in item.split(":"))
        else:
            w, tc = (float(x) for x in item)
        poles.append((w, tc))
    return tuple(poles)


def _cmd_calibrate(args):
    _merge_config(args, _CALIBRATE_DEFAULTS)
    model = SensorModel()
    tau = args.tau * np.pi / args.umax
    duration = args.duration if args.duration is not None else 6.0 * tau
    onset = args.step_onset if args.step_onset is not None else duration / 4
    poles = _parse_poles(args.pole, tau)
    distortion = DistortionModel(step_amplitude=args.step_amplitude,
                                 step_onset=onset, poles=poles,
                                 duration=duration)
    grid = np.linspace(0.0, duration, 4001)
    truth = SampledField(grid, distorted_pulse(distortion, grid))

    if args.n_t is not None:
        n_t = args.n_t
    elif args.rwa and args.protocol == "yx":
        n_t = _aligned_rwa_n_t(
            lambda n: yx_rwa_protocol(YXParams(args.umax, tau), n),
            args.kernel_centers, target=5 * args.kernel_centers)
    elif args.rwa:
        n_t = 5 * args.kernel_centers
    else:
        n_t = _lab_n_t(tau, 1.0, multiple=args.kernel_centers)
    proto, name = _build_protocol(args.protocol, args.rwa, args.umax, tau,
                                  n_t, None, 0.0)

    centers = np.linspace(0.5 * tau, duration - 0.5 * tau, args.centers)
    records = simulate_measurement_sweep(model, proto, truth, centers,
                                         args.shots, args.seed,
                                         exact=args.exact)
    recon = reconstruct_waveform(records)
    K = numerical_kernel(model, proto, args.kernel_centers)
    eta = evolve(model, proto, delta_omega=0.0).sensitivity()
    predicted = np.array([convolve_predict(K, truth.at(c + K.centers)) / eta
                          for c in centers])
    rms_vs_pred = float(np.sqrt(np.mean((recon.estimates - predicted) ** 2)))

    header = ["center", "truth", "predicted_window_average", "estimate",
              "stderr", "p_exact", "warn_nonlinear"]
    rows = [[_fmt(r.center), _fmt(r.truth_at_center), _fmt(pw),
             _fmt(r.estimate), _fmt(r.stderr), _fmt(r.p_exact),
             "1" if r.warn_nonlinear else "0"]
            for r, pw in zip(records, predicted)]
    summary = {
        "command": "calibrate",
        "config": {"protocol": name, "umax": args.umax,
                   "tau_over_tqsl": args.tau,
                   "step_amplitude": args.step_amplitude,
                   "step_onset": onset, "duration": duration,
                   "poles": [list(p) for p in poles],
                   "centers": args.centers, "shots": args.shots,
                   "kernel_centers": args.kernel_centers,
                   "n_t": int(proto.n_t), "exact": bool(args.exact)},
        "seed": args.seed,
        "results": {"rms_error_vs_truth": recon.rms_error,
                    "rms_error_vs_predicted": rms_vs_pred,
                    "eta": eta, "kernel_integral": K.integral,
                    "warned": int(sum(r.warn_nonlinear for r in records))},
        "versions": _versions(),
    }
    _emit(args.output, header, rows, summary)
    return 0


_VERIFY_DEFAULTS = dict(input=None, output=None)


def _cmd_verify(args):
    _merge_config(args, _VERIFY_DEFAULTS)
    if args.input is None:
        raise ConfigError("verify requires --input RESULT.json")
    with open(args.input) as fh:
        data = json.load(fh)
    try:
        wf_data = data["waveform"]
        cost_data = data["cost"]
        wf = ControlWaveform(float(wf_data["tau"]), int(wf_data["n_t"]),
                             np.asarray(wf_data["values"], dtype=float),
                             float(wf_data["u_max"]))
        cost = CostKind(cost_data["kind"],
                        smooth_weight=float(cost_data["smooth_weight"]))
        omega0 = float(data.get("model", {}).get("omega0", 1.0))
    except (KeyError, TypeError) as exc:
        raise ConfigError("input is not an optimize result: %s" % exc) from None
    model = SensorModel(omega0=omega0)
    report = verify_optimality(model, wf, cost)
    values = {"bang_consistency": report.bang_consistency,
              "singular_phi": report.singular_phi_ratio,
              "hoc_constant": report.hoc_constancy,
              "hoc_negative": report.hoc_mean,
              "kkt_residual": report.kkt_residual}
    for name, ok in sorted(report.checks.items()):
        print("%s: %s (%s)" % (name, "PASS" if ok else "FAIL",
                               _fmt(values.get(name, np.nan))))
    print("overall: %s" % ("PASS" if report.passed else "FAIL"))
    if args.output is not None:
        summary = {
            "command": "verify",
            "config": {"input": args.input},
            "results": {"passed": bool(report.passed),
                        "checks": {k: bool(v)
                                   for k, v in report.checks.items()},
                        **values,
                        "arc_labels": [[l, int(a), int(b)]
                                       for l, a, b in report.arc_labels]},
            "versions": _versions(),
        }
        with open(args.output + ".json", "w") as fh:
            json.dump(_round12(summary), fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(p):
    p.add_argument("--config", help="YAML config file; flags override")
    p.add_argument("--output", help="output base path (BASE.csv, BASE.json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsense",
        description="Time-resolution limits of a driven qubit sensor: "
                    "simulate, optimize, sweep, tabulate.")
    parser.add_argument("--version", action="version",
                        version="qsense " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve one protocol, table per node")
    p.add_argument("--protocol", choices=["yx", "detune"])
    p.add_argument("--rwa", action="store_true", default=None)
    p.add_argument("--umax", type=float)
    p.add_argument("--tau", type=float, help="duration in units of t_QSL")
    p.add_argument("--n-t", type=int)
    p.add_argument("--delta-omega", type=float)
    p.add_argument("--detune-delta", type=float)
    p.add_argument("--detune-a", type=float)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("optimize", help="free-form optimal control")
    p.add_argument("--umax", type=float)
    p.add_argument("--tau", type=float, help="duration in units of t_QSL")
    p.add_argument("--n-t", type=int)
    p.add_argument("--coarse-n-t", type=int)
    p.add_argument("--cost", choices=sorted(_COST_NAMES))
    p.add_argument("--w-smooth", type=float)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--kkt-tol", type=float)
    _add_common(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("sweep", help="sensitivity over a tau grid")
    p.add_argument("--protocol", choices=["yx", "detune", "optimal"])
    p.add_argument("--rwa", action="store_true", default=None)
    p.add_argument("--umax", type=float)
    p.add_argument("--tau-grid", help="START:STOP:STEP in units of t_QSL")
    p.add_argument("--cost", choices=sorted(_COST_NAMES))
    p.add_argument("--n-t", type=int)
    p.add_argument("--detune-mode", choices=["rwa", "full"])
    p.add_argument("--max-iters", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("kernel", help="response kernel of a protocol")
    p.add_argument("--protocol", choices=["yx", "detune"])
    p.add_argument("--rwa", action="store_true", default=None)
    p.add_argument("--umax", type=float)
    p.add_argument("--tau", type=float, help="duration in units of t_QSL")
    p.add_argument("--centers", type=int)
    p.add_argument("--n-t", type=int)
    p.add_argument("--analytic", action="store_true", default=None)
    p.add_argument("--impulse-area", type=float)
    p.add_argument("--detune-delta", type=float)
    p.add_argument("--detune-a", type=float)
    _add_common(p)
    p.set_defaults(func=_cmd_kernel)

    p = sub.add_parser("calibrate", help="shot-noise waveform reconstruction")
    p.add_argument("--protocol", choices=["yx", "detune"])
    p.add_argument("--rwa", action="store_true", default=None)
    p.add_argument("--umax", type=float)
    p.add_argument("--tau", type=float, help="duration in units of t_QSL")
    p.add_argument("--step-amplitude", type=float)
    p.add_argument("--step-onset", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--pole", action="append",
                   help="WEIGHT:TIME_CONSTANT, repeatable")
    p.add_argument("--centers", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--kernel-centers", type=int)
    p.add_argument("--n-t", type=int)
    p.add_argument("--exact", action="store_true", default=None,
                   help="use exact probabilities, no shot noise")
    _add_common(p)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("verify", help="optimality report for a saved result")
    p.add_argument("--input", help="JSON written by the optimize command")
    _add_common(p)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(json.dumps(
            {"error": "ConfigError", "message": str(exc)}) + "\n")
        return 2
    except OSError as exc:
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 4
    except Exception as exc:
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
