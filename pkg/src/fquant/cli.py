"""Experiment runner: simulate -> optimize -> diagnose -> report pipelines.

Subcommands: quantize, oracle, bounds, diagnose.  Exit codes: 0 success,
2 config parse/validation error, 3 simulation or optimization error; nonzero
exits leave a JSON error record in the output directory (or on stderr when no
directory is available).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path as FsPath

import numpy as np

from . import diagnostics, oracles
from .config import ExperimentConfig, load_config, print_schema
from .errors import ConfigError, FquantError
from .optimize import optimize_codebook, product_quantizer, splitting_init
from .process_sim import sample_paths
from .quantize_core import (Codebook, distortion, quant_error_with_stderr,
                            sup_distortion)

ORACLE_NAMES = ("c0", "l1", "sharp2", "supnorm", "closed_form")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUN = 3


def _write(out_dir: FsPath, name: str, data: str | bytes):
    out_dir.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(out_dir / name, mode) as fh:
        fh.write(data)


def _error_record(out_dir: FsPath | None, stage: str, exc: Exception) -> None:
    record = json.dumps({"error": type(exc).__name__, "stage": stage,
                         "message": str(exc)}, sort_keys=True)
    if out_dir is not None:
        try:
            _write(out_dir, "error.json", record + "\n")
            return
        except OSError:
            pass
    print(record, file=sys.stderr)


def _manifest(cfg: ExperimentConfig, seed: int, files: list[str], extra: dict) -> str:
    body = {"config_hash": cfg.config_hash, "seed": seed, "files": sorted(files),
            "created": time.strftime("%Y-%m-%dT%H:%M:%S"), **extra}
    return json.dumps(body, sort_keys=True) + "\n"


def _stamp_json(payload: str, cfg_hash: str) -> str:
    """Embed the config hash in a JSON report (all result files carry it)."""
    body = json.loads(payload)
    body["config_hash"] = cfg_hash
    return json.dumps(body, sort_keys=True) + "\n"


def _stamp_csv(payload: str, cfg_hash: str) -> str:
    return f"# config_hash={cfg_hash}\n{payload}"


def run_quantize(cfg: ExperimentConfig, seed: int, out_dir: FsPath,
                 dry_run: bool = False) -> int:
    space = cfg.build_space()
    spec = cfg.build_process_spec()
    opt = cfg.build_optimizer(seed)
    if dry_run:
        print(f"config ok: hash={cfg.config_hash} n={cfg.n} r={cfg.r} "
              f"m={space.m} d={space.d} n_paths={cfg.n_paths}")
        return EXIT_OK
    sample = sample_paths(spec, space, cfg.n_paths, seed)
    codebook = splitting_init(sample, space, cfg.n, cfg.r, seed, config=opt)
    codebook, trace = optimize_codebook(opt, codebook, sample, cfg.r)

    files = []
    h = cfg.config_hash
    _write(out_dir, "codebook.bin", codebook.to_binary())
    files.append("codebook.bin")
    _write(out_dir, "codebook.csv", _stamp_csv(codebook.to_csv(), h))
    files.append("codebook.csv")
    rep = distortion(codebook, sample, cfg.r)
    _write(out_dir, "distortion.json", _stamp_json(rep.to_json(), h))
    files.append("distortion.json")
    if cfg.r >= space.p:
        stat = diagnostics.stationarity_residual(codebook, sample, cfg.r)
        _write(out_dir, "stationarity.json", _stamp_json(stat.to_json(), h))
        files.append("stationarity.json")
    _write(out_dir, "trace.csv", _stamp_csv(trace.to_csv(), h))
    files.append("trace.csv")
    if space.m >= 64:
        fit = diagnostics.holder_fit(codebook)
        _write(out_dir, "holder.json", _stamp_json(fit.to_json(), h))
        _write(out_dir, "holder.csv", _stamp_csv(fit.to_csv(), h))
        files += ["holder.json", "holder.csv"]
    _write(out_dir, "manifest.json", _manifest(cfg, seed, files, {
        "distortion": rep.value, "quant_error": rep.value ** (1.0 / cfg.r),
        "exit_reason": trace.exit_reason, "iterations": trace.iterations}))
    print(f"quantize: n={cfg.n} r={cfg.r} distortion={rep.value:.6g} "
          f"({trace.exit_reason} after {trace.iterations} iters) -> {out_dir}")
    return EXIT_OK


def run_oracles(selection: list[str], out_dir: FsPath, m_sharp: int = 10,
                trunc: int = 16, n_funcs: int = 12) -> int:
    chosen = list(ORACLE_NAMES) if not selection or "all" in selection else selection
    unknown = set(chosen) - set(ORACLE_NAMES)
    if unknown:
        raise ConfigError(f"unknown oracle selection {sorted(unknown)}; "
                          f"known: {ORACLE_NAMES}")
    checks = []
    values = {}
    if "c0" in chosen:
        rep = oracles.c0_example(M=trunc)
        checks += rep.checks
        values["c0"] = {"best_value": rep.best_value,
                        "value_at_candidate": rep.value_at_candidate,
                        "sequence_values": rep.sequence_values.tolist()}
    if "l1" in chosen:
        rep = oracles.l1_hyperplane_example(M=trunc)
        checks += rep.checks
        values["l1"] = {"e_plane": rep.e_plane, "e_full": rep.e_full,
                        "e_hyperplane_upper": rep.e_hyperplane_upper}
    if "sharp2" in chosen:
        ratios = {}
        for m in range(2, m_sharp + 1):
            rep = oracles.sharp_constant_example(m)
            checks += rep.checks
            ratios[m] = rep.ratio
        values["sharp2"] = {"ratios": ratios}
    if "supnorm" in chosen:
        rep = oracles.sup_counterexample(n_funcs=n_funcs)
        checks += rep.checks
        values["supnorm"] = {"value_at_h": rep.value_at_h, "best_probe": rep.best_probe}
    if "closed_form" in chosen:
        registry = {
            "brownian": oracles.closed_form_errors("brownian", 1, 2, 2),
            "bridge": oracles.closed_form_errors("bridge", 1, 2, 2),
            "ou(b=1,t_end=4)": oracles.closed_form_errors(
                "ou", 1, 2, 2, {"b": 1.0, "t_end": 4.0}),
        }
        values["closed_form"] = registry
        missing = oracles.closed_form_errors("fbm", 3, 2, 2)
        checks.append(oracles.indicator_check("closed_form.registry_miss_is_none",
                                              missing is None, -1.0))
    manifest = {
        "selection": chosen,
        "values": values,
        "checks": [c.as_dict() for c in checks],
        "all_passed": all(c.passed for c in checks),
    }
    _write(out_dir, "oracle_manifest.json", json.dumps(manifest, sort_keys=True) + "\n")
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} value={c.value:.12g}")
    print(f"oracle manifest -> {out_dir / 'oracle_manifest.json'}")
    return EXIT_OK if manifest["all_passed"] else EXIT_RUN


def run_bounds(cfg: ExperimentConfig, seed: int, out_dir: FsPath,
               dry_run: bool = False) -> int:
    space = cfg.build_space()
    if space.d < 2:
        raise ConfigError("bounds requires d >= 2 in [space]")
    sizes = cfg.bounds.get("marginal_sizes", [2] * space.d)
    if not isinstance(sizes, list):
        sizes = [sizes]
    sizes = [int(s) for s in sizes]
    if len(sizes) != space.d:
        raise ConfigError(f"[bounds] marginal_sizes needs {space.d} entries, got {sizes}")
    norm = str(cfg.bounds.get("norm", "lp"))
    if norm not in ("lp", "sup"):
        raise ConfigError(f"[bounds] norm must be 'lp' or 'sup', got {norm!r}")
    cap = int(cfg.bounds.get("cap", 4096))
    n = cfg.n
    if int(np.prod(sizes)) > n:
        raise ConfigError(f"[bounds] product of marginal sizes {sizes} exceeds n={n}")
    if dry_run:
        print(f"config ok: bounds d={space.d} n={n} sizes={sizes} norm={norm}")
        return EXIT_OK

    spec = cfg.build_process_spec()
    opt = cfg.build_optimizer(seed)
    sample = sample_paths(spec, space, cfg.n_paths, seed)
    report = marginal_bounds_report(sample, space, n, sizes, cfg.r, seed, opt,
                                    norm=norm, cap=cap)
    report["config_hash"] = cfg.config_hash
    _write(out_dir, "bounds.json", json.dumps(report, sort_keys=True) + "\n")
    _write(out_dir, "manifest.json", _manifest(cfg, seed, ["bounds.json"], {
        "holds": report["holds"]}))
    print(f"bounds[{norm}]: lower={report['lower']:.6g} joint={report['joint']:.6g} "
          f"upper={report['upper']:.6g} holds={report['holds']} -> {out_dir}")
    return EXIT_OK if report["holds"] else EXIT_RUN


def marginal_bounds_report(sample, space, n: int, sizes: list[int], r: float,
                           seed: int, opt, norm: str = "lp", cap: int = 4096) -> dict:
    """Evaluate the marginal sandwich at optimized codebooks.

    Joint candidates include the product of the small marginal optima, and the
    size-n marginal candidates include the joint codebook's projections, so
    the two inequalities hold on the shared sample up to optimization slop
    (reported against 3 Monte Carlo standard errors).
    """
    d = space.d
    p = space.p
    exponent = p if norm == "lp" else r
    msp = space.marginal()

    def err2(cb, smp):
        if norm == "lp":
            e, se = quant_error_with_stderr(cb, smp, exponent)
        else:
            rep = sup_distortion(cb, smp, exponent)
            e = rep.value ** (1.0 / exponent)
            se = rep.stderr / (exponent * rep.value ** ((exponent - 1) / exponent)) \
                if rep.value > 0 else 0.0
        return e, se

    marg_samples = [sample.coordinate(j) for j in range(d)]
    small = []
    for j in range(d):
        cb = splitting_init(marg_samples[j], msp, sizes[j], exponent, seed + j, config=opt)
        small.append(cb)
    product = product_quantizer(small, cap=cap)

    joint_candidates = [product]
    grown = splitting_init(sample, space, n, exponent, seed, config=opt)
    joint_candidates.append(grown)
    refined, _ = optimize_codebook(opt, product, sample, exponent)
    joint_candidates.append(refined)
    joint_cb = min(joint_candidates, key=lambda cb: err2(cb, sample)[0])
    e_joint, se_joint = err2(joint_cb, sample)

    full_marg = []
    for j in range(d):
        cands = [splitting_init(marg_samples[j], msp, n, exponent, seed + 100 + j,
                                config=opt)]
        proj = Codebook(space=msp, values=_dedup(joint_cb.values[:, j:j + 1, :]))
        cands.append(proj)
        best = min(cands, key=lambda cb: err2(cb, marg_samples[j])[0])
        full_marg.append(best)

    e_small = [err2(small[j], marg_samples[j]) for j in range(d)]
    e_full = [err2(full_marg[j], marg_samples[j]) for j in range(d)]

    if norm == "lp":
        lower = sum(e ** exponent for e, _ in e_full)
        upper = sum(e ** exponent for e, _ in e_small)
    else:
        lower = max(e ** exponent for e, _ in e_full)
        upper = sum(e ** exponent for e, _ in e_small)
    joint_pow = e_joint ** exponent
    sig = 3.0 * _power_se(e_joint, se_joint, exponent)
    sig_low = 3.0 * _rss(_power_se(e, se, exponent) for e, se in e_full)
    sig_up = 3.0 * _rss(_power_se(e, se, exponent) for e, se in e_small)
    holds = bool(lower <= joint_pow + sig + sig_low and joint_pow <= upper + sig + sig_up)
    return {
        "norm": norm, "exponent": exponent, "n": n, "sizes": sizes,
        "lower": lower, "joint": joint_pow, "upper": upper,
        "sigma_joint": sig / 3.0, "sigma_lower": sig_low / 3.0, "sigma_upper": sig_up / 3.0,
        "holds": holds,
        "marginal_errors_n": [e for e, _ in e_full],
        "marginal_errors_small": [e for e, _ in e_small],
    }


def _power_se(e: float, se: float, k: float) -> float:
    return k * e ** (k - 1.0) * se if e > 0 else 0.0


def _rss(values) -> float:
    return float(np.sqrt(sum(v * v for v in values)))


def _dedup(values: np.ndarray) -> np.ndarray:
    seen = {}
    for row in values:
        seen.setdefault(row.tobytes(), row)
    return np.stack(list(seen.values()))


def run_diagnose(cfg: ExperimentConfig, seed: int, codebook_path: str,
                 out_dir: FsPath, dry_run: bool = False) -> int:
    space = cfg.build_space()
    spec = cfg.build_process_spec()
    with open(codebook_path, "rb") as fh:
        codebook = Codebook.from_binary(fh.read(), space)
    if dry_run:
        print(f"config ok: diagnose {codebook.n} atoms on m={space.m}, d={space.d}")
        return EXIT_OK
    sample = sample_paths(spec, space, cfg.n_paths, seed)
    files = []
    h = cfg.config_hash
    rep = distortion(codebook, sample, cfg.r)
    _write(out_dir, "distortion.json", _stamp_json(rep.to_json(), h))
    files.append("distortion.json")
    if cfg.r >= space.p:
        stat = diagnostics.stationarity_residual(codebook, sample, cfg.r)
        _write(out_dir, "stationarity.json", _stamp_json(stat.to_json(), h))
        files.append("stationarity.json")
    if space.m >= 64:
        fit = diagnostics.holder_fit(codebook)
        _write(out_dir, "holder.json", _stamp_json(fit.to_json(), h))
        _write(out_dir, "holder.csv", _stamp_csv(fit.to_csv(), h))
        files += ["holder.json", "holder.csv"]
    _write(out_dir, "manifest.json", _manifest(cfg, seed, files, {
        "codebook": str(codebook_path), "distortion": rep.value}))
    print(f"diagnose: distortion={rep.value:.6g} -> {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fquant",
        description="Functional quantization experiment runner")
    parser.add_argument("--print-schema", action="store_true",
                        help="print the config file schema and exit")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", help="experiment config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the [sample] seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--dry-run", action="store_true",
                       help="validate the config, write nothing")
        p.add_argument("--print-schema", action="store_true")

    common(sub.add_parser("quantize", help="simulate, optimize and report"))
    o = sub.add_parser("oracle", help="run counterexample oracles")
    o.add_argument("selection", nargs="*",
                   help=f"subset of {ORACLE_NAMES} (default: all)")
    o.add_argument("--all", action="store_true")
    o.add_argument("--m", type=int, default=10, help="largest sharp-constant support")
    o.add_argument("--out", default=None)
    common(sub.add_parser("bounds", help="marginal bound sandwich (d >= 2)"))
    dg = sub.add_parser("diagnose", help="diagnostics for a saved codebook")
    common(dg)
    dg.add_argument("--codebook", required=True, help="codebook .bin file")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "print_schema", False):
        print(print_schema())
        return EXIT_OK
    if args.command is None:
        parser.print_usage()
        return EXIT_CONFIG

    out_dir = FsPath(getattr(args, "out", None) or "out")
    if args.command == "oracle":
        try:
            return run_oracles(list(args.selection) + (["all"] if args.all else []),
                               out_dir, m_sharp=args.m)
        except ConfigError as exc:
            _error_record(out_dir, "oracle", exc)
            return EXIT_CONFIG
        except (FquantError, np.linalg.LinAlgError) as exc:
            _error_record(out_dir, "oracle", exc)
            return EXIT_RUN

    if not getattr(args, "config", None):
        print("error: --config is required (see --print-schema)", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        _error_record(None, "config", exc)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else cfg.seed
    if getattr(args, "out", None) is None and cfg.output.get("dir"):
        out_dir = FsPath(str(cfg.output["dir"]))

    try:
        if args.command == "quantize":
            return run_quantize(cfg, seed, out_dir, dry_run=args.dry_run)
        if args.command == "bounds":
            return run_bounds(cfg, seed, out_dir, dry_run=args.dry_run)
        if args.command == "diagnose":
            return run_diagnose(cfg, seed, args.codebook, out_dir,
                                dry_run=args.dry_run)
    except (ConfigError, OSError) as exc:
        _error_record(out_dir, args.command, exc)
        return EXIT_CONFIG
    except (FquantError, np.linalg.LinAlgError) as exc:
        _error_record(out_dir, args.command, exc)
        return EXIT_RUN
    parser.print_usage()
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
