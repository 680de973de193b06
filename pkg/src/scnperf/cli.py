"""Command-line front end for coverage/ASE sweeps and validation runs.

Subcommands::

    scnperf coverage  --preset case1 --lambda-grid 0.1:10000:20 --gamma-db 0
    scnperf ase       --preset case1 --lambda-grid 1:1000:4 --gamma0-db 0,3,6
    scnperf validate  --preset case1 --lambda-grid 10:1000:1 --gamma-db 0
    scnperf peak      --preset case1 --gamma-db 0 --lambda-range 2:200

Output is CSV with a ``# key=value`` provenance header. dB values are
accepted on the command line and converted once at this boundary; all
internal math is linear. Exit codes: 0 success, 1 validation failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from . import __version__
from .analytic import coverage_probability, find_coverage_peak
from .ase import ase, ase_mc
from .case3gpp import Case1Params, coverage_case1
from .model import (
    NetworkParams,
    PRESET_NAMES,
    db_to_linear,
    preset,
)
from .montecarlo import McConfig, default_disk_radius, estimate_coverage, sinr_samples

PROVIDERS = ("analytic-general", "analytic-closed", "monte-carlo")


class ConfigError(Exception):
    """Bad preset, grid, or flag combination."""


def parse_lambda_grid(spec: str) -> list[float]:
    """``start:stop:points_per_decade`` -> log-spaced density grid."""
    try:
        start_s, stop_s, ppd_s = spec.split(":")
        start, stop, ppd = float(start_s), float(stop_s), int(ppd_s)
    except ValueError as exc:
        raise ConfigError(f"malformed lambda grid {spec!r}") from exc
    if start <= 0 or stop < start or ppd < 1:
        raise ConfigError(f"malformed lambda grid {spec!r}")
    if stop == start:
        return [start]
    n = int(round(math.log10(stop / start) * ppd))
    grid = [start * 10.0 ** (i / ppd) for i in range(n + 1)]
    if grid[-1] < stop * (1.0 - 1e-12):
        grid.append(stop)
    else:
        grid[-1] = stop
    return grid


def parse_db_list(spec: str) -> list[float]:
    """Comma-separated dB values; empty string means an empty list."""
    if spec.strip() == "":
        return []
    try:
        return [float(tok) for tok in spec.split(",")]
    except ValueError as exc:
        raise ConfigError(f"malformed dB list {spec!r}") from exc


def _load_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"config line without '=': {line!r}")
                key, _, val = line.partition("=")
                values[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _resolve(args: argparse.Namespace, config: dict[str, str], key: str, default):
    """CLI flag wins, then config file, then the hard default."""
    cli_val = getattr(args, key, None)
    if cli_val is not None:
        return cli_val
    if key in config:
        raw = config[key]
        if default is None or isinstance(default, str):
            return raw
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    return default


def _scenario(args, config) -> dict:
    name = _resolve(args, config, "preset", "case1")
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    alpha_los = _resolve(args, config, "alpha_los", None)
    if alpha_los is not None:
        alpha_los = float(alpha_los)
    scn = {
        "preset": name,
        "alpha_los": alpha_los,
        "tx_power_dbm": float(_resolve(args, config, "tx_power_dbm", 24.0)),
        "noise_dbm": float(_resolve(args, config, "noise_dbm", -95.0)),
        "trials": int(_resolve(args, config, "trials", 10000)),
        "seed": int(_resolve(args, config, "seed", 1)),
        "disk_radius_km": _resolve(args, config, "disk_radius_km", None),
        "workers": int(_resolve(args, config, "workers", 1)),
    }
    if scn["disk_radius_km"] is not None:
        scn["disk_radius_km"] = float(scn["disk_radius_km"])
    return scn


def _network(scn: dict, lam: float, gamma: float) -> NetworkParams:
    return NetworkParams(
        bs_density=lam,
        tx_power_mw=db_to_linear(scn["tx_power_dbm"]),
        noise_mw=db_to_linear(scn["noise_dbm"]),
        sinr_threshold=gamma,
    )


def _mc_config(scn: dict, lam: float) -> McConfig:
    _, los_fn = preset(scn["preset"], alpha_los=scn["alpha_los"])
    radius = scn["disk_radius_km"]
    if radius is None:
        radius = default_disk_radius(lam, los_fn)
    return McConfig(disk_radius_km=radius, trials=scn["trials"], seed=scn["seed"])


def _closed_params(scn: dict, lam: float) -> Case1Params:
    model, los_fn = preset(scn["preset"], alpha_los=scn["alpha_los"])
    try:
        return Case1Params.from_components(model, los_fn, _network(scn, lam, 1.0))
    except ValueError as exc:
        raise ConfigError(
            f"provider analytic-closed does not cover preset {scn['preset']!r}: {exc}"
        ) from exc


def _eval_coverage_point(task: tuple) -> dict:
    """Worker-safe single-point evaluation (rebuilds the scenario)."""
    scn, provider, lam, gamma_db = task
    gamma = db_to_linear(gamma_db)
    t0 = time.perf_counter()
    if provider == "analytic-closed":
        point = coverage_case1(_closed_params(scn, lam), gamma)
        value, err = point.p_cov, point.abs_error_est
    elif provider == "analytic-general":
        model, los_fn = preset(scn["preset"], alpha_los=scn["alpha_los"])
        point = coverage_probability(model, los_fn, _network(scn, lam, gamma))
        value, err = point.p_cov, point.abs_error_est
    elif provider == "monte-carlo":
        model, los_fn = preset(scn["preset"], alpha_los=scn["alpha_los"])
        est = estimate_coverage(
            model, los_fn, _network(scn, lam, gamma), _mc_config(scn, lam)
        )
        value, err = est.mean, est.std_error
    else:
        raise ConfigError(f"unknown provider {provider!r}")
    wall_ms = (time.perf_counter() - t0) * 1e3
    return {
        "lambda": lam,
        "gamma_db": gamma_db,
        "p_cov": value,
        "err_or_se": err,
        "provider": provider,
        "wall_ms": wall_ms,
    }


def _open_out(path: str):
    if path in ("-", ""):
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def _write_csv(path: str, meta: dict, fieldnames: list[str], rows: list[dict]) -> None:
    fh, owned = _open_out(path)
    try:
        for key, val in meta.items():
            fh.write(f"# {key}={val}\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            formatted = {
                k: (format(v, ".10g") if isinstance(v, float) else v)
                for k, v in row.items()
            }
            writer.writerow(formatted)
    finally:
        if owned:
            fh.close()


def _meta(scn: dict, **extra) -> dict:
    meta = {
        "tool": "scnperf",
        "version": __version__,
        "preset": scn["preset"],
        "tx_power_dbm": scn["tx_power_dbm"],
        "noise_dbm": scn["noise_dbm"],
        "seed": scn["seed"],
        "trials": scn["trials"],
    }
    if scn["alpha_los"] is not None:
        meta["alpha_los"] = scn["alpha_los"]
    if scn["disk_radius_km"] is not None:
        meta["disk_radius_km"] = scn["disk_radius_km"]
    meta.update(extra)
    return meta


def cmd_coverage(args, config) -> int:
    scn = _scenario(args, config)
    provider = _resolve(args, config, "provider", "analytic-general")
    if provider not in PROVIDERS:
        raise ConfigError(f"unknown provider {provider!r}")
    grid = parse_lambda_grid(_resolve(args, config, "lambda_grid", "1:1000:4"))
    gammas_db = parse_db_list(_resolve(args, config, "gamma_db", "0"))
    tasks = [(scn, provider, lam, gdb) for gdb in gammas_db for lam in grid]
    workers = scn["workers"]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_eval_coverage_point, tasks))
    else:
        rows = [_eval_coverage_point(t) for t in tasks]
    meta = _meta(
        scn,
        provider=provider,
        lambda_grid=_resolve(args, config, "lambda_grid", "1:1000:4"),
        gamma_db=_resolve(args, config, "gamma_db", "0"),
    )
    _write_csv(
        _resolve(args, config, "out", "-"),
        meta,
        ["lambda", "gamma_db", "p_cov", "err_or_se", "provider", "wall_ms"],
        rows,
    )
    return 0


def _coverage_fn_for(scn: dict, provider: str):
    """(bs_density, gamma) -> p_cov callable for the ASE integrals."""
    if provider == "analytic-closed":

        def fn(lam: float, gamma: float) -> float:
            return coverage_case1(_closed_params(scn, lam), gamma).p_cov

        return fn
    if provider == "analytic-general":
        model, los_fn = preset(scn["preset"], alpha_los=scn["alpha_los"])

        def fn(lam: float, gamma: float) -> float:
            return coverage_probability(
                model, los_fn, _network(scn, lam, gamma)
            ).p_cov

        return fn
    raise ConfigError(f"provider {provider!r} is not a coverage function provider")


def cmd_ase(args, config) -> int:
    scn = _scenario(args, config)
    provider = _resolve(args, config, "provider", "analytic-general")
    if provider not in PROVIDERS:
        raise ConfigError(f"unknown provider {provider!r}")
    grid = parse_lambda_grid(_resolve(args, config, "lambda_grid", "1:1000:4"))
    gammas0_db = parse_db_list(_resolve(args, config, "gamma0_db", "0"))
    rows = []
    for lam in grid:
        if provider == "monte-carlo":
            model, los_fn = preset(scn["preset"], alpha_los=scn["alpha_los"])
            samples = sinr_samples(
                model, los_fn, _network(scn, lam, 1.0), _mc_config(scn, lam)
            )
            for gdb in gammas0_db:
                point = ase_mc(samples, lam, db_to_linear(gdb))
                rows.append(
                    {
                        "lambda": lam,
                        "gamma0_db": gdb,
                        "ase": point.ase,
                        "provider": provider,
                    }
                )
        else:
            fn = _coverage_fn_for(scn, provider)
            for gdb in gammas0_db:
                point = ase(fn, lam, db_to_linear(gdb), method=provider)
                rows.append(
                    {
                        "lambda": lam,
                        "gamma0_db": gdb,
                        "ase": point.ase,
                        "provider": provider,
                    }
                )
    meta = _meta(
        scn,
        provider=provider,
        lambda_grid=_resolve(args, config, "lambda_grid", "1:1000:4"),
        gamma0_db=_resolve(args, config, "gamma0_db", "0"),
    )
    _write_csv(
        _resolve(args, config, "out", "-"),
        meta,
        ["lambda", "gamma0_db", "ase", "provider"],
        rows,
    )
    return 0


def cmd_validate(args, config) -> int:
    scn = _scenario(args, config)
    provider = _resolve(args, config, "provider", "monte-carlo")
    baseline_preset = _resolve(args, config, "baseline_preset", scn["preset"])
    baseline_provider = _resolve(args, config, "baseline_provider", None)
    if baseline_provider is None:
        baseline_provider = (
            "analytic-closed" if baseline_preset == "case1" else "analytic-general"
        )
    tol_floor = _resolve(args, config, "tol", None)
    if tol_floor is not None:
        tol_floor = float(tol_floor)
    grid = parse_lambda_grid(_resolve(args, config, "lambda_grid", "10:1000:1"))
    gammas_db = parse_db_list(_resolve(args, config, "gamma_db", "0"))

    base_scn = dict(scn, preset=baseline_preset)
    rows = []
    failures = 0
    for gdb in gammas_db:
        for lam in grid:
            base = _eval_coverage_point((base_scn, baseline_provider, lam, gdb))
            cand = _eval_coverage_point((scn, provider, lam, gdb))
            if provider == "monte-carlo":
                floor = 0.01 if tol_floor is None else tol_floor
                tol = max(floor, 3.0 * cand["err_or_se"])
                se = cand["err_or_se"]
            else:
                tol = 1e-3 if tol_floor is None else tol_floor
                se = 0.0
            delta = abs(base["p_cov"] - cand["p_cov"])
            ok = delta <= tol
            failures += 0 if ok else 1
            rows.append(
                {
                    "lambda": lam,
                    "gamma_db": gdb,
                    "baseline": base["p_cov"],
                    "candidate": cand["p_cov"],
                    "se": se,
                    "abs_delta": delta,
                    "tol": tol,
                    "status": "PASS" if ok else "FAIL",
                }
            )
    meta = _meta(
        scn,
        provider=provider,
        baseline_provider=baseline_provider,
        baseline_preset=baseline_preset,
        lambda_grid=_resolve(args, config, "lambda_grid", "10:1000:1"),
        gamma_db=_resolve(args, config, "gamma_db", "0"),
        failures=failures,
    )
    _write_csv(
        _resolve(args, config, "out", "-"),
        meta,
        [
            "lambda",
            "gamma_db",
            "baseline",
            "candidate",
            "se",
            "abs_delta",
            "tol",
            "status",
        ],
        rows,
    )
    if provider == "monte-carlo" and failures:
        print(
            f"validation failed at {failures} point(s); consider more trials "
            f"than {scn['trials']} for a tighter standard error",
            file=sys.stderr,
        )
    return 1 if failures else 0


def cmd_peak(args, config) -> int:
    scn = _scenario(args, config)
    default_provider = "analytic-closed" if scn["preset"] == "case1" else "analytic-general"
    provider = _resolve(args, config, "provider", default_provider)
    if provider == "monte-carlo":
        raise ConfigError("peak search needs an analytic provider")
    spec = _resolve(args, config, "lambda_range", "2:200")
    try:
        lo_s, hi_s = spec.split(":")
        lo, hi = float(lo_s), float(hi_s)
    except ValueError as exc:
        raise ConfigError(f"malformed lambda range {spec!r}") from exc
    gammas_db = parse_db_list(_resolve(args, config, "gamma_db", "0"))
    fn = _coverage_fn_for(scn, provider)
    model, los_fn = preset(scn["preset"], alpha_los=scn["alpha_los"])
    rows = []
    for gdb in gammas_db:
        gamma = db_to_linear(gdb)
        result = find_coverage_peak(
            model,
            los_fn,
            _network(scn, 1.0, gamma),
            (lo, hi),
            coverage_fn=fn,
        )
        rows.append(
            {
                "gamma_db": gdb,
                "lambda_star": result.bs_density,
                "p_cov": result.p_cov,
                "bracket_lo": result.bracket[0],
                "bracket_hi": result.bracket[1],
                "provider": provider,
            }
        )
    meta = _meta(scn, provider=provider, lambda_range=spec)
    _write_csv(
        _resolve(args, config, "out", "-"),
        meta,
        ["gamma_db", "lambda_star", "p_cov", "bracket_lo", "bracket_hi", "provider"],
        rows,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scnperf",
        description="Coverage and area spectral efficiency of dense small-cell "
        "networks under LoS/NLoS path loss.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key=value scenario file")
        p.add_argument("--preset", help=f"model preset, one of {PRESET_NAMES}")
        p.add_argument(
            "--alpha-los", type=float, dest="alpha_los", help="override the LoS exponent"
        )
        p.add_argument("--provider", help=f"one of {PROVIDERS}")
        p.add_argument(
            "--lambda-grid",
            dest="lambda_grid",
            help="density grid start:stop:points_per_decade (log spaced)",
        )
        p.add_argument("--tx-power-dbm", type=float, dest="tx_power_dbm")
        p.add_argument("--noise-dbm", type=float, dest="noise_dbm")
        p.add_argument("--trials", type=int, help="Monte Carlo replications")
        p.add_argument("--seed", type=int, help="Monte Carlo seed")
        p.add_argument(
            "--disk-radius-km",
            type=float,
            dest="disk_radius_km",
            help="simulation window radius (default: auto)",
        )
        p.add_argument("--workers", type=int, help="sweep worker processes")
        p.add_argument("--out", help="output CSV path ('-' for stdout)")

    p_cov = sub.add_parser("coverage", help="coverage probability sweep")
    add_common(p_cov)
    p_cov.add_argument("--gamma-db", dest="gamma_db", help="SINR threshold(s), dB")
    p_cov.set_defaults(handler=cmd_coverage)

    p_ase = sub.add_parser("ase", help="area spectral efficiency sweep")
    add_common(p_ase)
    p_ase.add_argument(
        "--gamma0-db", dest="gamma0_db", help="minimum working SINR value(s), dB"
    )
    p_ase.set_defaults(handler=cmd_ase)

    p_val = sub.add_parser("validate", help="compare two coverage providers")
    add_common(p_val)
    p_val.add_argument("--gamma-db", dest="gamma_db", help="SINR threshold(s), dB")
    p_val.add_argument(
        "--baseline-provider", dest="baseline_provider", help="reference provider"
    )
    p_val.add_argument(
        "--baseline-preset", dest="baseline_preset", help="reference preset"
    )
    p_val.add_argument(
        "--tol", type=float, help="tolerance floor (default 0.01 MC / 1e-3 analytic)"
    )
    p_val.set_defaults(handler=cmd_validate)

    p_peak = sub.add_parser("peak", help="find the coverage-maximising density")
    add_common(p_peak)
    p_peak.add_argument("--gamma-db", dest="gamma_db", help="SINR threshold(s), dB")
    p_peak.add_argument(
        "--lambda-range", dest="lambda_range", help="search range lo:hi"
    )
    p_peak.set_defaults(handler=cmd_peak)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config: dict[str, str] = {}
    try:
        if getattr(args, "config", None):
            config = _load_config(args.config)
        return args.handler(args, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
