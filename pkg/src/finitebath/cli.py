"""Command line front end.

Subcommands
-----------
``single``
    Thermalize one test particle at a fixed frequency and fit its
    energy distribution; writes per-seed histograms and a manifest.
``sweep``
    Frequency sweep against one bath (or the switched pair when a
    second bath is configured); writes the thermalization curve.
``twobath``
    Switched two-bath sweep plus the two single-bath reference curves.
``oracle``
    Stand-alone reference computations (Langevin ensemble, degenerate
    exchange series, memory kernel, two-temperature mixture).
``fit``
    Re-fit a histogram CSV produced by an earlier run.

Exit codes: 0 success, 2 configuration error (also used by argparse),
3 numerical failure, 4 fit failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bath import realize_bath
from .config import ConfigError, build_sweep_spec, check_config
from .experiments import (
    run_single_bath_point,
    run_sweep,
    run_two_bath_point,
    run_two_bath_sweep,
)
from .model import TestParticleSpec
from .oracles import (
    degenerate_energy_series,
    effective_temperature,
    langevin_reference,
    memory_kernel,
    mixture_distribution,
)
from .output import RunManifest, emit_curve, emit_histogram, fmt, read_histogram
from .propagator import NumericalError
from .rng import LANGEVIN, substream
from .stats import FitError, aggregate_seeds, fit_temperature

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_FIT = 4


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file (flat key/value object)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        dest="overrides",
                        help="override a config key (repeatable); VALUE is JSON")
    parser.add_argument("--seed-list", type=int, nargs="+", default=None,
                        help="replace the configured seed list")
    parser.add_argument("--out", type=Path, default=Path("."),
                        help="output directory (created if missing)")


def _load_config(args: argparse.Namespace) -> dict:
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except OSError as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON: {err}") from err
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    else:
        raw = {}
    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            raw[key] = json.loads(value)
        except json.JSONDecodeError:
            raw[key] = value  # bare strings such as --set dos=square
    return check_config(raw)


def _outdir(args: argparse.Namespace) -> Path:
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


def _manifest(args: argparse.Namespace, command: str, cfg: dict, spec) -> RunManifest:
    return RunManifest(
        command=command,
        config=cfg,
        seeds=list(spec.seeds),
        code_version=__version__,
        propagator=spec.propagator,
        step_size=spec.step_size,
        delta_t_steps=spec.delta_t_steps,
    )


def cmd_single(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    spec = build_sweep_spec(cfg, omega_override=args.omega,
                            seeds_override=args.seed_list)
    if len(spec.omega_grid) != 1:
        raise ConfigError("single needs exactly one frequency "
                          "(--omega or a one-point omega_grid)")
    omega = spec.omega_grid[0]
    out = _outdir(args)
    manifest = _manifest(args, "single", cfg, spec)
    runner = run_two_bath_point if spec.bath2 is not None else run_single_bath_point

    fits, failures = [], []
    for seed in spec.seeds:
        try:
            point = runner(omega, spec, seed)
        except (NumericalError, FitError) as err:
            failures.append((seed, err))
            print(f"seed {seed}: {type(err).__name__}: {err}", file=sys.stderr)
            continue
        if point.fit is None:
            failures.append((seed, FitError(point.fit_error)))
            print(f"seed {seed}: {point.fit_error}", file=sys.stderr)
            continue
        fits.append(point.fit)
        hist_path = out / f"hist_seed{seed}.csv"
        emit_histogram(point.hist, point.fit, hist_path,
                       manifest_ref="manifest.json")
        manifest.outputs.append(hist_path.name)
        if point.max_snap_distance is not None:
            manifest.max_snap_distance = max(manifest.max_snap_distance or 0.0,
                                             point.max_snap_distance)
        print(f"seed {seed}: T = {fmt(point.fit.temperature)} "
              f"+- {fmt(point.fit.sigma)}")

    manifest.failures = [f"seed {seed}: {type(err).__name__}: {err}"
                         for seed, err in failures]
    if not fits:
        manifest.finish()
        manifest.write(out / "manifest.json")
        _, err = failures[-1]
        raise err
    temperature, sigma = aggregate_seeds(fits)
    print(f"aggregate over {len(fits)} seeds: "
          f"T = {fmt(temperature)} +- {fmt(sigma)}")
    summary = {"omega": omega, "temperature": temperature, "sigma": sigma,
               "n_seeds": len(fits)}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    manifest.outputs.append("summary.json")
    manifest.finish()
    manifest.write(out / "manifest.json")
    return EXIT_OK


def _sweep_exit(curve) -> int:
    """Success if any grid point produced a temperature."""
    if np.any(np.isfinite(curve.temperature)):
        return EXIT_OK
    if any("NumericalError" in msg or "EigensolverError" in msg
           for msg in curve.failures):
        return EXIT_NUMERICAL
    return EXIT_FIT


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    spec = build_sweep_spec(cfg, seeds_override=args.seed_list)
    out = _outdir(args)
    manifest = _manifest(args, "sweep", cfg, spec)
    curve = run_sweep(spec)
    emit_curve(curve, out / "curve.csv")
    manifest.outputs.append("curve.csv")
    manifest.failures = list(curve.failures)
    manifest.bath_initial = curve.bath_initial
    manifest.bath_final = curve.bath_final
    manifest.finish()
    manifest.write(out / "manifest.json")
    n_ok = int(np.sum(np.isfinite(curve.temperature)))
    print(f"sweep: {n_ok}/{len(curve.omegas)} grid points fitted, "
          f"{len(curve.failures)} seed-level failures")
    return _sweep_exit(curve)


def cmd_twobath(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    spec = build_sweep_spec(cfg, seeds_override=args.seed_list)
    if spec.bath2 is None:
        raise ConfigError("twobath needs bath2_* config keys")
    out = _outdir(args)
    manifest = _manifest(args, "twobath", cfg, spec)
    result = run_two_bath_sweep(spec)
    emit_curve(result.combined, out / "curve_combined.csv")
    manifest.outputs.append("curve_combined.csv")
    for index, alone in enumerate(result.alone):
        name = f"curve_bath{index + 1}_alone.csv"
        emit_curve(alone, out / name)
        manifest.outputs.append(name)
        manifest.failures.extend(f"bath{index + 1} alone: {msg}"
                                 for msg in alone.failures)
    manifest.failures.extend(result.combined.failures)
    manifest.bath_initial = result.combined.bath_initial
    manifest.bath_final = result.combined.bath_final
    manifest.finish()
    manifest.write(out / "manifest.json")
    n_ok = int(np.sum(np.isfinite(result.combined.temperature)))
    print(f"twobath: {n_ok}/{len(result.combined.omegas)} combined points fitted")
    return _sweep_exit(result.combined)


def _oracle_langevin(args: argparse.Namespace, out: Path) -> list:
    tp = TestParticleSpec(mass=args.mass, omega=args.omega)
    rng = substream(args.seed, LANGEVIN).generator()
    times, energies = langevin_reference(
        tp, gamma=args.gamma, temperature=args.temperature,
        t_final=args.t_final, dt=args.dt, rng=rng,
        n_paths=args.n_paths, sample_stride=args.stride)
    path = out / "langevin.csv"
    with path.open("w") as fh:
        fh.write("path,t,energy\n")
        for p in range(energies.shape[0]):
            for t, e in zip(times, energies[p]):
                fh.write(f"{p},{fmt(t)},{fmt(e)}\n")
    keep = times >= 0.5 * times[-1]
    mean_late = float(np.mean(energies[:, keep]))
    print(f"late-time mean energy: {fmt(mean_late)} "
          f"(target {fmt(args.temperature)})")
    return [path.name]


def _oracle_degenerate(args: argparse.Namespace, out: Path) -> list:
    times = np.linspace(0.0, args.t_final, args.n_points)
    energies = degenerate_energy_series(args.e0, args.omega_r, times)
    path = out / "degenerate.csv"
    with path.open("w") as fh:
        fh.write("t,energy\n")
        for t, e in zip(times, energies):
            fh.write(f"{fmt(t)},{fmt(e)}\n")
    return [path.name]


def _oracle_kernel(args: argparse.Namespace, out: Path, cfg: dict) -> list:
    spec = build_sweep_spec(cfg, omega_override=1.0)
    real = realize_bath(spec.bath1, args.seed)
    tau = np.linspace(0.0, args.t_final, args.n_points)
    kernel = memory_kernel(real.frequencies, spec.bath1.mass, tau)
    path = out / "kernel.csv"
    with path.open("w") as fh:
        fh.write("tau,kernel\n")
        for t, k in zip(tau, kernel):
            fh.write(f"{fmt(t)},{fmt(k)}\n")
    return [path.name]


def _oracle_mixture(args: argparse.Namespace, out: Path) -> list:
    energies = np.linspace(0.0, args.e_max, args.n_points)
    path = out / "mixture.csv"
    with path.open("w") as fh:
        fh.write("energy,density,t_eff\n")
        for e in energies:
            rho = mixture_distribution(e, args.t1, args.t2)
            teff = effective_temperature(e, args.t1, args.t2)
            fh.write(f"{fmt(e)},{fmt(rho)},{fmt(teff)}\n")
    return [path.name]


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    out = _outdir(args)
    manifest = RunManifest(command=f"oracle {args.which}", config=cfg,
                           seeds=[args.seed] if hasattr(args, "seed") else [],
                           code_version=__version__,
                           propagator="closed-form", step_size=None,
                           delta_t_steps=None)
    if args.which == "langevin":
        manifest.outputs = _oracle_langevin(args, out)
    elif args.which == "degenerate":
        manifest.outputs = _oracle_degenerate(args, out)
    elif args.which == "kernel":
        manifest.outputs = _oracle_kernel(args, out, cfg)
    else:
        manifest.outputs = _oracle_mixture(args, out)
    manifest.finish()
    manifest.write(out / "manifest.json")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    try:
        hist = read_histogram(args.histogram)
    except OSError as err:
        raise ConfigError(f"cannot read histogram {args.histogram}: {err}") from err
    except ValueError as err:
        raise ConfigError(str(err)) from err
    fit = fit_temperature(hist)
    result = {
        "temperature": fit.temperature,
        "sigma": fit.sigma,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "n_bins_used": fit.n_bins_used,
        "goodness": fit.goodness,
    }
    print(f"T = {fmt(fit.temperature)} +- {fmt(fit.sigma)} "
          f"({fit.n_bins_used} bins)")
    if args.json_out is not None:
        args.json_out.parent.mkdir(parents=True, exist_ok=True)
        args.json_out.write_text(json.dumps(result, indent=2) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finitebath",
        description="Thermalization of a harmonic test particle "
                    "coupled to finite oscillator baths.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_single = sub.add_parser("single", help="one frequency, full histogram")
    _add_common(p_single)
    p_single.add_argument("--omega", type=float, default=None,
                          help="test particle frequency")
    p_single.set_defaults(func=cmd_single)

    p_sweep = sub.add_parser("sweep", help="thermalization curve over a grid")
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_two = sub.add_parser("twobath", help="switched two-bath sweep")
    _add_common(p_two)
    p_two.set_defaults(func=cmd_twobath)

    p_oracle = sub.add_parser("oracle", help="reference computations")
    o_sub = p_oracle.add_subparsers(dest="which", required=True)

    o_lang = o_sub.add_parser("langevin", help="Langevin ensemble mean energy")
    _add_common(o_lang)
    o_lang.add_argument("--gamma", type=float, required=True)
    o_lang.add_argument("--temperature", type=float, required=True)
    o_lang.add_argument("--omega", type=float, default=1.0)
    o_lang.add_argument("--mass", type=float, default=1.0)
    o_lang.add_argument("--t-final", type=float, default=200.0)
    o_lang.add_argument("--dt", type=float, default=1e-3)
    o_lang.add_argument("--seed", type=int, default=0)
    o_lang.add_argument("--n-paths", type=int, default=64)
    o_lang.add_argument("--stride", type=int, default=100)
    o_lang.set_defaults(func=cmd_oracle)

    o_deg = o_sub.add_parser("degenerate", help="degenerate exchange envelope")
    _add_common(o_deg)
    o_deg.add_argument("--e0", type=float, required=True)
    o_deg.add_argument("--omega-r", type=float, required=True)
    o_deg.add_argument("--t-final", type=float, default=100.0)
    o_deg.add_argument("--n-points", type=int, default=1000)
    o_deg.set_defaults(func=cmd_oracle)

    o_ker = o_sub.add_parser("kernel", help="bath memory kernel")
    _add_common(o_ker)
    o_ker.add_argument("--seed", type=int, default=0)
    o_ker.add_argument("--t-final", type=float, default=50.0)
    o_ker.add_argument("--n-points", type=int, default=1000)
    o_ker.set_defaults(func=cmd_oracle)

    o_mix = o_sub.add_parser("mixture", help="two-temperature mixture profile")
    _add_common(o_mix)
    o_mix.add_argument("--t1", type=float, required=True)
    o_mix.add_argument("--t2", type=float, required=True)
    o_mix.add_argument("--e-max", type=float, default=20.0)
    o_mix.add_argument("--n-points", type=int, default=500)
    o_mix.set_defaults(func=cmd_oracle)

    p_fit = sub.add_parser("fit", help="re-fit a stored histogram")
    p_fit.add_argument("histogram", type=Path, help="histogram CSV")
    p_fit.add_argument("--json-out", type=Path, default=None,
                       help="write the fit result as JSON")
    p_fit.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FitError as err:
        print(f"fit failure: {err}", file=sys.stderr)
        return EXIT_FIT


if __name__ == "__main__":
    raise SystemExit(main())
