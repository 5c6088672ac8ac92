"""Command-line front end: ``spdcdesign <subcommand> ...``.

Exit codes: 0 success, 1 runtime or analysis error, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .config import ConfigError, RunConfig, load_config, validate_config
from .core import SpdcError
from .dispersion import bdl_phase_group_ratio, calibrate_period, group_properties
from .interferometer import coincidence_rate, default_config, envelope_local_maxima
from .jsa import analyze, bandwidth
from .optimizer import OptimizationRun, evaluate_candidate_report, optimize
from .poling import ProfileError, generate, profile_from_dict, profile_period_at
from .scenarios import SCENARIOS, get_scenario

SCHEMAS = {
    "spectrum": "spdcdesign-spectrum/1",
    "interferogram": "spdcdesign-interferogram/1",
    "profile": "spdcdesign-profile/1",
    "domains": "spdcdesign-domains/1",
    "trace": "spdcdesign-trace/1",
    "metrics": "spdcdesign-metrics/1",
}


class UsageError(Exception):
    pass


def write_csv(path: Path, schema: str, header, rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema: {schema}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"  # keeps every column numeric
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if not np.isfinite(v) else f"{float(v):.12g}"
    return str(v)


def read_csv(path) -> tuple[str, list[str], np.ndarray]:
    """Schema, header and numeric body of a CSV written by :func:`write_csv`."""
    with open(path, encoding="utf-8") as fh:
        schema = fh.readline().split(":", 1)[1].strip()
        header = fh.readline().strip().split(",")
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    return schema, header, body


# run context


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "output_dir", None):
        cfg.output_dir = args.output_dir
    return cfg


def _outdir(cfg: RunConfig, sub: str | None = None) -> Path:
    out = cfg.resolved_output_dir()
    if sub:
        out = out / sub
    out.mkdir(parents=True, exist_ok=True)
    (out / "run_config.toml").write_text(cfg.to_toml(), encoding="utf-8")
    return out


def resolve_profile(ref: str | None, cfg: RunConfig, period: float):
    """Profile from a scenario id, a TOML/JSON file, or (default) the config's profile table."""
    if ref is None:
        return cfg.profile_spec(period)
    if ref in SCENARIOS:
        return get_scenario(ref).profile(period)
    path = Path(ref)
    if not path.is_file():
        raise UsageError(f"--profile {ref!r} is neither a scenario ({', '.join(SCENARIOS)}) nor a file")
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from None
    if "best_profile" in data:
        data = data["best_profile"]
    elif "profile" in data:
        data = data["profile"]
    try:
        return profile_from_dict(data, period)
    except (ProfileError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad profile in {path}: {exc}") from None


def _interferogram_config(args, cfg: RunConfig, spectrum, ratio):
    compensate = cfg.compensate and not getattr(args, "no_compensation", False)
    delay_range = getattr(args, "delay_range", None) or cfg.delay_range_fs
    step = getattr(args, "step", None) or cfg.delay_step_fs
    return default_config(spectrum, ratio, compensate, delay_range, step)


# outputs


def emit_spectrum(out: Path, cfg: RunConfig, s, title: str = ""):
    files = []
    if "csv" in cfg.formats:
        delta = s.delta_phase if s.delta_phase is not None else np.full(s.grid.count, np.nan)
        rows = zip(s.signal_wavelength_nm, s.detuning, s.intensity, s.phase, delta)
        files.append(write_csv(out / "spectrum.csv", SCHEMAS["spectrum"],
                               ["wavelength_nm", "detuning_rad_fs", "intensity", "phase_rad", "delta_rad"], rows))
    if "svg" in cfg.formats:
        from .plotting import plot_spectrum
        plot_spectrum(s, out / "spectrum.svg", title)
        files.append(out / "spectrum.svg")
    return files


def emit_interferogram(out: Path, cfg: RunConfig, ig, title: str = ""):
    files = []
    if "csv" in cfg.formats:
        rows = zip(ig.delays_fs, ig.rate, ig.envelope)
        files.append(write_csv(out / "interferogram.csv", SCHEMAS["interferogram"],
                               ["delay_fs", "rate", "envelope"], rows))
    if "svg" in cfg.formats:
        from .plotting import plot_interferogram
        plot_interferogram(ig, out / "interferogram.svg", title)
        files.append(out / "interferogram.svg")
    return files


# subcommands


def cmd_spectrum(args) -> int:
    cfg = _load(args)
    d = cfg.dispersion()
    spec = resolve_profile(args.profile, cfg, calibrate_period(d))
    s = analyze(generate(spec), d, cfg.grid(d.center_wavelength_nm))
    bw = bandwidth(s)
    out = _outdir(cfg)
    emit_spectrum(out, cfg, s, spec.kind)
    flag = " (truncated by grid)" if bw.truncated else ""
    print(f"fwhm_nm={bw.fwhm_nm:.6g}{flag} symmetry_residual={bw.symmetry_residual:.3g} "
          f"group_slope_fs={s.group_slope:.6g}")
    print(f"wrote {out}")
    return 0


def cmd_interferogram(args) -> int:
    cfg = _load(args)
    d = cfg.dispersion()
    spec = resolve_profile(args.profile, cfg, calibrate_period(d))
    s = analyze(generate(spec), d, cfg.grid(d.center_wavelength_nm))
    ig = coincidence_rate(s, _interferogram_config(args, cfg, s, bdl_phase_group_ratio(d)))
    out = _outdir(cfg)
    emit_interferogram(out, cfg, ig, spec.kind)
    trunc = " (envelope truncated by delay axis)" if ig.envelope_truncated else ""
    print(f"visibility={ig.visibility_peak:.6g} envelope_fwhm_fs={ig.envelope_fwhm_fs:.6g}{trunc} "
          f"fringe_period_fs={ig.fringe_period_fs:.6g} peak_delay_fs={ig.peak_delay_fs:.6g}")
    print(f"wrote {out}")
    return 0


def cmd_optimize(args) -> int:
    cfg = _load(args)
    overrides = {k: v for k, v in (("seed", args.seed), ("workers", args.jobs),
                                   ("generations", args.generations)) if v is not None}
    cfg.ga = {**cfg.ga, **overrides}
    errors = validate_ga(cfg)
    if errors:
        raise ConfigError(errors)
    d = cfg.dispersion()
    ga = cfg.ga_config()

    def progress(entry):
        if not args.quiet and (entry.generation % 10 == 0):
            print(f"gen {entry.generation:4d} best={entry.best:.6g} mean={entry.mean:.4g} "
                  f"feasible={entry.feasible_fraction:.2f}", flush=True)

    run = optimize(ga, d, progress=progress)
    out = _outdir(cfg)
    write_run(out, run)
    f = run.best_fitness
    print(f"best total={f.total:.6g} phase={f.phase_term:.4g} symmetry={f.symmetry_term:.4g} "
          f"fwhm_term={f.fwhm_term:.4g} fwhm_nm={f.fwhm_nm:.5g} feasible={f.feasible} "
          f"({run.stop_reason}, {run.evaluations} evaluations)")
    print(f"wrote {out}")
    return 0


def validate_ga(cfg: RunConfig):
    from .config import config_field_errors
    return [e for e in config_field_errors(cfg) if e[0].startswith("ga")]


def write_run(out: Path, run: OptimizationRun):
    (out / "optimization_run.json").write_text(run.to_json(), encoding="utf-8")
    (out / "best_profile.toml").write_text(tomli_w.dumps({"profile": run.best_spec.to_dict()}), encoding="utf-8")
    write_csv(out / "trace.csv", SCHEMAS["trace"],
              ["generation", "best", "mean", "feasible_fraction", "best_feasible"],
              ((t.generation, t.best, t.mean, t.feasible_fraction, t.best_feasible) for t in run.trace))


def scenario_metrics(name: str, cfg: RunConfig) -> dict:
    """Run one scenario end to end, write its artifacts, return the metrics row."""
    d = cfg.dispersion()
    sc = get_scenario(name)
    spec = sc.profile(calibrate_period(d))
    grid = cfg.grid(d.center_wavelength_nm)
    ratio = bdl_phase_group_ratio(d)
    s = analyze(generate(spec), d, grid)
    ig = coincidence_rate(s, default_config(s, ratio, cfg.compensate, cfg.delay_range_fs, cfg.delay_step_fs))
    rep = evaluate_candidate_report(spec, d, grid, ig_config=ig.config, ratio=ratio)
    out = _outdir(cfg, name)
    emit_spectrum(out, cfg, rep.spectrum, sc.description)
    emit_interferogram(out, cfg, rep.interferogram, sc.description)
    row = {
        "scenario": name,
        "fwhm_nm": rep.fwhm_nm,
        "visibility": rep.visibility,
        "envelope_fwhm_fs": rep.envelope_fwhm_fs,
        "envelope_maxima": int(len(envelope_local_maxima(rep.interferogram))),
        "fringe_period_fs": rep.fringe_period_fs,
        "min_domain_um": rep.min_domain_um,
        "constraint_passed": rep.constraint_passed,
        "reference": sc.reference,
    }
    if "json" in cfg.formats:
        (out / "report.json").write_text(json.dumps(rep.to_dict(), indent=1), encoding="utf-8")
        (out / "metrics.json").write_text(json.dumps(row, indent=1), encoding="utf-8")
    return row


def _scenario_worker(job):
    name, cfg_dict, source = job
    from .config import parse_config
    cfg = parse_config({k: v for k, v in cfg_dict.items()}, source)
    return scenario_metrics(name, cfg)


def cmd_run_scenario(args) -> int:
    names = list(SCENARIOS) if args.scenario == ["all"] else args.scenario
    unknown = [n for n in names if n not in SCENARIOS]
    if unknown:
        raise UsageError(f"unknown scenario {unknown[0]!r}; choose from {', '.join(SCENARIOS)} or 'all'")
    cfg = _load(args)
    if args.jobs > 1 and len(names) > 1:
        jobs = [(n, cfg.to_dict(), cfg.source) for n in names]
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_scenario_worker, jobs))
    else:
        rows = [scenario_metrics(n, cfg) for n in names]
    out = _outdir(cfg)
    write_csv(out / "metrics.csv", SCHEMAS["metrics"],
              ["scenario", "fwhm_nm", "ref_fwhm_nm", "visibility", "ref_visibility",
               "envelope_fwhm_fs", "ref_envelope_fwhm_fs", "envelope_maxima", "min_domain_um"],
              ((r["scenario"], r["fwhm_nm"], r["reference"].get("fwhm_nm", np.nan), r["visibility"],
                r["reference"].get("visibility", np.nan), r["envelope_fwhm_fs"],
                r["reference"].get("envelope_fwhm_fs", np.nan), r["envelope_maxima"], r["min_domain_um"])
               for r in rows))
    print(f"{'scenario':<18}{'FWHM nm':>10}{'(ref)':>8}{'V':>9}{'(ref)':>8}{'env fs':>10}{'(ref)':>8}")
    for r in rows:
        ref = r["reference"]
        print(f"{r['scenario']:<18}{r['fwhm_nm']:>10.4g}{_ref(ref, 'fwhm_nm'):>8}{r['visibility']:>9.4f}"
              f"{_ref(ref, 'visibility'):>8}{r['envelope_fwhm_fs']:>10.4g}{_ref(ref, 'envelope_fwhm_fs'):>8}")
    print(f"wrote {out}")
    return 0


def _ref(ref: dict, key: str) -> str:
    return f"{ref[key]:g}" if key in ref else "-"


def cmd_export_profile(args) -> int:
    cfg = _load(args)
    d = cfg.dispersion()
    spec = resolve_profile(args.profile, cfg, calibrate_period(d))
    seq = generate(spec)
    out = _outdir(cfg)
    starts = seq.starts
    write_csv(out / "profile.csv", SCHEMAS["profile"], ["z_um", "local_period_um"],
              zip(starts, profile_period_at(spec, starts)))
    write_csv(out / "domains.csv", SCHEMAS["domains"], ["index", "start_um", "length_um", "sign"],
              zip(range(seq.count), starts, seq.lengths, seq.signs.astype(int)))
    if "svg" in cfg.formats:
        from .plotting import plot_profile
        plot_profile(starts, profile_period_at(spec, starts), out / "profile.svg", spec.kind)
    print(f"domains={seq.count} min_domain_um={seq.min_domain:.6g} truncated_last={seq.truncated_last}")
    print(f"wrote {out}")
    return 0


def cmd_validate_config(args) -> int:
    errors = validate_config(args.path)
    if errors:
        for key, msg in errors:
            print(f"{key}: {msg}", file=sys.stderr)
        return 2
    print(f"{args.path}: valid")
    return 0


def cmd_calibrate_period(args) -> int:
    cfg = _load(args)
    d = cfg.dispersion()
    period = calibrate_period(d)
    g = group_properties(d)
    print(f"period_um={period:.12g}")
    print(f"inverse_group_velocity_H_fs_per_um={1.0 / g.u_H:.12g}")
    print(f"inverse_group_velocity_V_fs_per_um={1.0 / g.u_V:.12g}")
    print(f"dgd_fs_per_um={g.dgd_per_length:.12g}")
    print(f"phase_group_ratio_bdl={bdl_phase_group_ratio(d):.12g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spdcdesign", description="Type-II SPDC poling design and interferometer simulation.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="run config TOML (default: the shipped default config)")
        sp.add_argument("--output-dir", help="output directory (overridden by $SPDCDESIGN_OUTPUT_DIR)")
        return sp

    def delay_range(text):
        try:
            a, b = (float(v) for v in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError("expected START,STOP in fs") from None
        if not a < b:
            raise argparse.ArgumentTypeError("START must be below STOP")
        return [a, b]

    sp = common(sub.add_parser("spectrum", help="joint spectral intensity, phase and residual phase"))
    sp.add_argument("--profile", help="scenario id or profile TOML/JSON file")
    sp.set_defaults(func=cmd_spectrum)

    sp = common(sub.add_parser("interferogram", help="coincidence rate versus delay"))
    sp.add_argument("--profile", help="scenario id or profile TOML/JSON file")
    sp.add_argument("--delay-range", type=delay_range, metavar="START,STOP", help="group-delay axis in fs")
    sp.add_argument("--step", type=float, help="delay step in fs")
    sp.add_argument("--no-compensation", action="store_true", help="do not remove the source group delay")
    sp.set_defaults(func=cmd_interferogram)

    sp = common(sub.add_parser("optimize", help="GA search over asymmetric-polynomial coefficients"))
    sp.add_argument("--seed", type=int)
    sp.add_argument("--jobs", type=int, help="worker processes for fitness evaluation")
    sp.add_argument("--generations", type=int)
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_optimize)

    sp = common(sub.add_parser("run-scenario", help="reproduce a named scenario and print its metrics"))
    sp.add_argument("scenario", nargs="+", help=f"one or more of {', '.join(SCENARIOS)}, or 'all'")
    sp.add_argument("--jobs", type=int, default=1, help="run scenarios concurrently")
    sp.set_defaults(func=cmd_run_scenario)

    sp = common(sub.add_parser("export-profile", help="local period along z and the raw domain list"))
    sp.add_argument("--profile", help="scenario id or profile TOML/JSON file")
    sp.set_defaults(func=cmd_export_profile)

    sp = sub.add_parser("validate-config", help="check a run config without running anything")
    sp.add_argument("path")
    sp.set_defaults(func=cmd_validate_config)

    sp = common(sub.add_parser("calibrate-period", help="degenerate phase-matching period"))
    sp.set_defaults(func=cmd_calibrate_period)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits with 2 on usage errors
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"spdcdesign {args.command}: {exc}", file=sys.stderr)
        return 2
    except (SpdcError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"spdcdesign {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
