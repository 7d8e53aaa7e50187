"""Command-line front end.

Every subcommand resolves its arguments to a plain parameter dict, runs
a pure pipeline, writes CSV (and optionally PNG) outputs, and drops a
manifest next to them.  ``rdc-sim rerun <manifest>`` replays a manifest
and reproduces the CSVs byte for byte.  Worker parallelism is capped by
the RDC_SIM_THREADS environment variable.

Exit codes: 0 success, 2 usage error, 3 validation or data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import calibration as cal_mod
from . import dse as dse_mod
from . import metrics as metrics_mod
from . import noise as noise_mod
from . import oscillator as osc_mod
from . import resolution as res_mod
from .errors import RdcsimError
from .noise import JitterModel
from .profiles import resolve_profile
from .reporting import RunManifest, read_manifest, write_csv, write_manifest

_TIME_UNITS = {"ns": 1e-9, "us": 1e-6, "ms": 1e-3, "s": 1.0}


def parse_time(text: str) -> float:
    """Parse '10ms', '1us', '0.5s', or a bare number of seconds."""
    text = text.strip()
    for suffix in ("ns", "us", "ms", "s"):
        if text.endswith(suffix):
            return float(text[: -len(suffix)]) * _TIME_UNITS[suffix]
    return float(text)


def parse_checkpoints(spec: str) -> list[float]:
    """Parse 'log:1us:100ms:50', 'lin:...:...:N', or comma-listed times."""
    if spec.startswith(("log:", "lin:")):
        kind, t0, t1, n = spec.split(":")
        start, stop, count = parse_time(t0), parse_time(t1), int(n)
        if kind == "log":
            return list(np.geomspace(start, stop, count))
        return list(np.linspace(start, stop, count))
    return [parse_time(v) for v in spec.split(",")]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",")]


def _jitter_model(profile, which: str) -> JitterModel:
    if which == "profile":
        return JitterModel.from_profile(profile)
    if which == "transient":
        return res_mod.transient_jitter_model(profile)
    return JitterModel(a=profile.white_jitter_coeff, k=float(which))


def _counter_bits(profile, params) -> int:
    stages = params.get("counter_stages")
    return 4 * int(stages) if stages else profile.counter_bits


def _emit(subcommand, params, out_path, header, rows, plot_fn=None):
    outputs = [str(write_csv(out_path, header, rows))]
    if plot_fn is not None:
        outputs.append(str(plot_fn(Path(out_path).with_suffix(".png"))))
    manifest = RunManifest(subcommand=subcommand, parameters=params, outputs=outputs)
    write_manifest(manifest, out_path)
    return outputs


# ----------------------------------------------------------------- runners


def run_transfer(params: dict) -> list[str]:
    profile = resolve_profile(params["profile"])
    w = noise_mod.fitted_widlar_params(profile)
    curve = osc_mod.transfer_curve(profile, w, n_points=int(params["points"]))
    rows = list(zip(curve.resistances.tolist(), curve.frequencies.tolist()))
    plot = None
    if params.get("plot"):
        from . import figures

        plot = lambda p: figures.render_transfer(  # noqa: E731
            curve.resistances, curve.frequencies, p,
            title=f"Transfer curve ({profile.name})",
        )
    return _emit("transfer", params, params["out"], ["r_ohm", "f_hz"], rows, plot)


def run_jitter(params: dict) -> list[str]:
    profile = resolve_profile(params["profile"])
    spec = noise_mod.design_phase_noise(profile)
    times = parse_checkpoints(params["times"])
    jitter = noise_mod.accumulated_jitter_curve(spec, times)
    t1, t2 = (parse_time(v) for v in params["slope_points"].split(":"))
    j12 = noise_mod.accumulated_jitter_curve(spec, [t1, t2])
    slope = (j12[1] - j12[0]) / (t2 - t1)
    print(f"{profile.name} jitter slope ({t1:g}s..{t2:g}s): {slope:.6g}")
    rows = list(zip(times, jitter.tolist()))
    plot = None
    if params.get("plot"):
        from . import figures

        plot = lambda p: figures.render_jitter(  # noqa: E731
            times, {profile.name: jitter}, p, slopes={profile.name: slope}
        )
    return _emit("jitter", params, params["out"], ["t_s", "rms_jitter_s"], rows, plot)


def run_resolve(params: dict) -> list[str]:
    profile = resolve_profile(params["profile"])
    seeds = params["seed_list"]
    if len(seeds) < 1:
        raise RdcsimError("need at least one seed")
    checkpoints = parse_checkpoints(params["checkpoints"])
    jm = _jitter_model(profile, params["jitter"])
    trace = res_mod.monte_carlo(profile, jm, seeds, checkpoints,
                                counter_bits=_counter_bits(profile, params))
    curve = res_mod.resolution_curve(trace, float(params["sigma_threshold"]))
    rows = [
        (t, m, s, b)
        for t, m, s, b in zip(trace.checkpoints.tolist(), trace.mean.tolist(),
                              trace.sigma.tolist(), curve.bits.tolist())
    ]
    plot = None
    if params.get("plot"):
        from . import figures

        plot = lambda p: figures.render_resolution(  # noqa: E731
            trace, curve, p, title=f"Transient resolution ({profile.name})"
        )
    return _emit("resolve", params, params["out"],
                 ["t_s", "mean_count", "sigma", "bits"], rows, plot)


def run_supply_noise(params: dict) -> list[str]:
    profile = resolve_profile(params["profile"])
    seeds = params["seed_list"]
    checkpoints = parse_checkpoints(params["checkpoints"])
    jm = _jitter_model(profile, params["jitter"])
    results = res_mod.supply_noise_sweep(
        profile, jm, params["amplitudes"], seeds, checkpoints,
        counter_bits=_counter_bits(profile, params),
    )
    plot = None
    if params.get("plot"):
        from . import figures

        plot = lambda p: figures.render_supply_noise(  # noqa: E731
            {profile.name: results}, p
        )
    return _emit("supply-noise", params, params["out"],
                 ["amplitude_vpp", "bits"], results, plot)


def run_vt_sweep(params: dict) -> list[str]:
    profile = resolve_profile(params["profile"])
    seeds = params["seed_list"]
    checkpoints = parse_checkpoints(params["checkpoints"])
    jm = _jitter_model(profile, params["jitter"])
    v_lo, v_hi = (float(v) for v in params["v_range"].split(":"))
    t_lo, t_hi = (float(v) for v in params["t_range"].split(":"))
    rows_n, cols_n = (int(v) for v in params["grid"].split("x"))
    worst, best = res_mod.vt_sensitivity_sweep(
        profile, jm, (v_lo, v_hi), (t_lo, t_hi), (rows_n, cols_n),
        seeds, checkpoints,
    )
    print(f"{profile.name} bits over V/T grid: worst {worst:.2f}, best {best:.2f}")
    rows = [(v_lo, v_hi, t_lo, t_hi, worst, best)]
    return _emit("vt-sweep", params, params["out"],
                 ["v_min", "v_max", "t_min_c", "t_max_c", "worst_bits", "best_bits"],
                 rows)


def run_dse(params: dict) -> list[str]:
    if params.get("grid"):
        grid = dse_mod.grid_from_csv(params["grid"])
    elif params.get("synthetic"):
        grid = dse_mod.grid_from_model(
            latch_wl=np.arange(1.0, 9.0), dro_wl=np.arange(5.0, 55.0, 5.0)
        )
    else:
        raise RdcsimError("dse needs --grid FILE or --synthetic")
    latch, dro, best_cost = dse_mod.argmin_cost(grid)
    i = int(np.nonzero(grid.latch_wl == latch)[0][0])
    j = int(np.nonzero(grid.dro_wl == dro)[0][0])
    print(f"best sizing: latch_wl={latch:g} dro_wl={dro:g} cost={best_cost:.4f}")
    rows = [(latch, dro, float(grid.power[i, j]), float(grid.freq[i, j]),
             float(grid.pn_dbc[i, j]), best_cost)]
    return _emit("dse", params, params["out"],
                 ["latch_wl", "dro_wl", "power_w", "freq_hz", "pn_dbc", "cost"],
                 rows)


def run_calibrate(params: dict) -> list[str]:
    profile = resolve_profile(params["profile"])
    drift = cal_mod.DriftModel(scale=float(params["drift_scale"]),
                               offset_hz=float(params["drift_offset_hz"]))
    strategy = int(params["strategy"])
    rows = []
    for n in params["offline_points"]:
        err = cal_mod.rms_error_experiment(
            profile, strategy, int(n), drift=drift,
            trials=int(params["trials"]), seed=int(params["seed"]),
        )
        rows.append((int(n), strategy, err))
    plot = None
    if params.get("plot"):
        from . import figures

        plot = lambda p: figures.render_calibration(rows, p)  # noqa: E731
    return _emit("calibrate", params, params["out"],
                 ["n_offline", "strategy", "rms_error_pct"], rows, plot)


def run_fom(params: dict) -> list[str]:
    profiles = [resolve_profile(name) for name in params["profiles"]]
    reports = metrics_mod.table_report(profiles)
    rows = []
    for rep in reports:
        deltas = metrics_mod.reference_deltas(rep)
        worst = max(deltas.values()) if deltas else 0.0
        flag = "mismatch" if worst > 0.01 else "ok"
        rows.append((
            rep.profile, rep.active_power, rep.avg_power, rep.energy_per_readout,
            rep.bits, rep.fom,
            rep.dynamic_range if rep.dynamic_range is not None else "",
            worst, flag,
        ))
    plot = None
    if params.get("plot"):
        from . import figures

        plot = lambda p: figures.render_fom(reports, p)  # noqa: E731
    return _emit("fom", params, params["out"],
                 ["profile", "active_power_w", "avg_power_w", "energy_j", "bits",
                  "fom_j_per_cs", "dynamic_range_db", "max_ref_delta", "flag"],
                 rows, plot)


# ------------------------------------------------------------- reproduce

REPRODUCE_IDS = ("fig9", "fig10", "fig11", "fig12", "fig15", "fig16", "table1")

_FIG_DESIGN = {"fig9": "d1", "fig10": "d2", "fig11": "d3"}


def run_reproduce(params: dict) -> list[str]:
    figure = params["figure"]
    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    if figure in _FIG_DESIGN:
        return _reproduce_transient(figure, _FIG_DESIGN[figure], out_dir, params)
    if figure == "fig12":
        return _reproduce_jitter(out_dir, params)
    if figure == "fig15":
        return _reproduce_calibration(out_dir, params)
    if figure == "fig16":
        return _reproduce_supply(out_dir, params)
    if figure == "table1":
        return _reproduce_table(out_dir, params)
    raise RdcsimError(f"unknown reproduction id {figure!r}; "
                      f"expected one of {REPRODUCE_IDS}")


def _reproduce_transient(figure, design, out_dir, params):
    from . import figures

    if not params["seed_list"]:
        raise RdcsimError("need at least one seed")
    profile = resolve_profile(design)
    jm = res_mod.transient_jitter_model(profile)
    checkpoints = res_mod.log_checkpoints(1e-6, 150e-3, 120)
    trace = res_mod.monte_carlo(profile, jm, params["seed_list"], checkpoints)
    curve = res_mod.resolution_curve(trace)
    out = out_dir / f"{figure}_{design}_resolution.csv"
    rows = list(zip(trace.checkpoints.tolist(), trace.mean.tolist(),
                    trace.sigma.tolist(), curve.bits.tolist()))
    sat = curve.saturation_time
    print(f"{design}: divergence at {sat:.4g} s, max {curve.max_bits:.2f} bits"
          if sat else f"{design}: no divergence in window")
    plot = lambda p: figures.render_resolution(  # noqa: E731
        trace, curve, p, title=f"Transient resolution ({design})"
    )
    return _emit(f"reproduce:{figure}", params, out,
                 ["t_s", "mean_count", "sigma", "bits"], rows, plot)


def _reproduce_jitter(out_dir, params):
    from . import figures

    times = list(np.geomspace(50e-6, 100e-3, 60))
    rows = []
    curves = {}
    slopes = {}
    for name in ("d1", "d2", "d3"):
        profile = resolve_profile(name)
        spec = noise_mod.design_phase_noise(profile)
        jitter = noise_mod.accumulated_jitter_curve(spec, times)
        t1, t2 = noise_mod.DEFAULT_SLOPE_POINTS
        j12 = noise_mod.accumulated_jitter_curve(spec, [t1, t2])
        slope = (j12[1] - j12[0]) / (t2 - t1)
        curves[name] = jitter
        slopes[name] = slope
        print(f"{name} jitter slope: {slope:.6g}")
        rows.extend((name, t, j) for t, j in zip(times, jitter.tolist()))
    out = out_dir / "fig12_jitter.csv"
    plot = lambda p: figures.render_jitter(times, curves, p, slopes)  # noqa: E731
    return _emit("reproduce:fig12", params, out,
                 ["design", "t_s", "rms_jitter_s"], rows, plot)


def _reproduce_calibration(out_dir, params):
    from . import figures

    profile = resolve_profile("d1")
    drift = cal_mod.DriftModel(scale=1.02, offset_hz=50e3)
    trials = int(params.get("trials", 200))
    rows = []
    for strategy in (1, 3):
        for n in (3, 5, 8, 12, 16, 20):
            err = cal_mod.rms_error_experiment(
                profile, strategy, n, drift=drift, trials=trials, seed=1234
            )
            rows.append((n, strategy, err))
    out = out_dir / "fig15_calibration.csv"
    plot = lambda p: figures.render_calibration(rows, p)  # noqa: E731
    return _emit("reproduce:fig15", params, out,
                 ["n_offline", "strategy", "rms_error_pct"], rows, plot)


def _reproduce_supply(out_dir, params):
    from . import figures

    amplitudes = [0.0, 2e-3, 5e-3, 10e-3, 20e-3]
    seeds = list(range(100))
    rows = []
    results = {}
    for name in ("d2", "d3"):
        profile = resolve_profile(name)
        jm = res_mod.transient_jitter_model(profile)
        pairs = res_mod.supply_noise_sweep(profile, jm, amplitudes, seeds)
        results[name] = pairs
        rows.extend((name, a, b) for a, b in pairs)
        print(f"{name}: {pairs[-1][1]:.2f} bits at "
              f"{amplitudes[-1] * 1e3:g} mVpp")
    out = out_dir / "fig16_supply_noise.csv"
    plot = lambda p: figures.render_supply_noise(results, p)  # noqa: E731
    return _emit("reproduce:fig16", params, out,
                 ["design", "amplitude_vpp", "bits"], rows, plot)


def _reproduce_table(out_dir, params):
    fom_params = dict(params)
    fom_params["profiles"] = ["d1", "d2", "d3"]
    fom_params["out"] = str(out_dir / "table1_fom.csv")
    fom_params["plot"] = True
    return run_fom(fom_params)


def run_rerun(params: dict) -> list[str]:
    manifest = read_manifest(params["manifest"])
    name = manifest.subcommand.split(":", 1)[0]
    runner = _RUNNERS.get(name)
    if runner is None:
        raise RdcsimError(f"manifest references unknown subcommand {name!r}")
    return runner(manifest.parameters)


_RUNNERS = {
    "transfer": run_transfer,
    "jitter": run_jitter,
    "resolve": run_resolve,
    "supply-noise": run_supply_noise,
    "vt-sweep": run_vt_sweep,
    "dse": run_dse,
    "calibrate": run_calibrate,
    "fom": run_fom,
    "reproduce": run_reproduce,
}


# --------------------------------------------------------------- parsing


def _add_profile(p):
    p.add_argument("--profile", required=True,
                   help="builtin name (d1|d2|d3) or config file path")


def _add_mc_args(p, default_checkpoints="log:1us:100ms:50"):
    p.add_argument("--seeds", type=int, default=10, help="number of noise seeds")
    p.add_argument("--checkpoints", default=default_checkpoints,
                   help="log:T0:T1:N, lin:T0:T1:N, or comma-listed times")
    p.add_argument("--jitter", default="profile",
                   help="'profile', 'transient', or a numeric slope")
    p.add_argument("--counter-stages", type=int, default=None,
                   help="override counter width as 4*stages bits")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdc-sim",
        description="Behavioral simulator for time-based resistance-to-digital "
                    "converters",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("transfer", help="resistance to frequency curve")
    _add_profile(p)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("jitter", help="accumulated RMS jitter curve")
    _add_profile(p)
    p.add_argument("--times", default="log:200us:100ms:80")
    p.add_argument("--slope-points", default="0.1ms:10ms")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("resolve", help="transient resolution simulation")
    _add_profile(p)
    _add_mc_args(p)
    p.add_argument("--sigma-threshold", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("supply-noise", help="resolution vs supply noise")
    _add_profile(p)
    _add_mc_args(p, default_checkpoints="log:10us:120ms:60")
    p.add_argument("--amplitudes", type=_float_list,
                   default=[0.0, 2e-3, 5e-3, 10e-3, 20e-3],
                   help="comma-listed peak-to-peak amplitudes in volts")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("vt-sweep", help="supply/temperature sensitivity")
    _add_profile(p)
    _add_mc_args(p, default_checkpoints="log:10us:120ms:60")
    p.add_argument("--v-range", default="1.5:2.0")
    p.add_argument("--t-range", default="-25:100")
    p.add_argument("--grid", default="3x3")
    p.add_argument("--out", required=True)

    p = sub.add_parser("dse", help="sizing-grid cost minimization")
    p.add_argument("--grid", default=None, help="grid CSV path")
    p.add_argument("--synthetic", action="store_true",
                   help="use the synthetic demonstration grid")
    p.add_argument("--out", required=True)

    p = sub.add_parser("calibrate", help="readout calibration error study")
    _add_profile(p)
    p.add_argument("--strategy", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--offline-points", type=_int_list, default=[5],
                   help="comma-listed offline point counts")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--drift-scale", type=float, default=1.0)
    p.add_argument("--drift-offset-hz", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("fom", help="figure-of-merit table")
    p.add_argument("--profiles", default="d1,d2,d3",
                   help="comma-listed builtin names or config paths")
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("reproduce", help="canonical report bundles")
    p.add_argument("figure", choices=REPRODUCE_IDS)
    p.add_argument("--out-dir", default="reports")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--trials", type=int, default=200)

    p = sub.add_parser("rerun", help="replay a run manifest")
    p.add_argument("manifest")

    return parser


def _params_from_args(args: argparse.Namespace) -> dict:
    params = {k: v for k, v in vars(args).items() if k != "subcommand"}
    if "seeds" in params:
        params["seed_list"] = list(range(int(params.pop("seeds"))))
    if "profiles" in params and isinstance(params["profiles"], str):
        params["profiles"] = params["profiles"].split(",")
    return params


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    runner = run_rerun if args.subcommand == "rerun" else _RUNNERS[args.subcommand]
    try:
        runner(_params_from_args(args))
    except (RdcsimError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
