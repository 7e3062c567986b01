"""Command-line pipeline: fit, score, toy, robustness, analyze.

Every command is deterministic: seeds default to DEFAULT_SEED, never the
clock, and machine-readable output (--format records, one JSON object)
is byte-identical across reruns with identical arguments.

Exit codes: 0 success, 2 argument errors, 3 I/O or file-format errors,
4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .analysis import (
    dimension_stats,
    histogram,
    histogram_to_tsv,
    pairwise_pcc,
    pcc_to_tsv,
    stats_to_tsv,
)
from .divergence import ScoreReport, trend_score
from .feature_io import FeatureFileError, FeatureMatrix, read_feature_file, subsample, write_feature_file
from .fid import CovarianceError, fid, gaussian_stats
from .fitting import (
    FitConfig,
    FitStatus,
    FittedModel,
    ModelFormatError,
    fit_model,
    load_model,
    log_likelihoods,
    save_model,
    _MODEL_MAGIC,
)
from .special_math import NonConvergenceError
from .tgn import DistributionKind
from .toys import SCENARIOS, generate_features, run_scenario

DEFAULT_SEED = 1729

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

# Flag defaults, also used to decide which values a --config file may
# override: anything the user passed explicitly (i.e. that differs from
# the default) wins over the config file.
_CONFIG_DEFAULTS = {
    "kind": "tgn",
    "grad_step": 1e-6,
    "conv_tol": 1e-6,
    "max_iters": 500,
    "min_samples": 32,
    "beta_min": 0.05,
    "beta_max": 20.0,
    "sigma_floor": 1e-8,
    "seed": DEFAULT_SEED,
    "bins": 64,
    "pcc_pairs": 100_000,
    "fractions": "1,1/5,1/10,1/50",
    "metric": "trend",
}


def _apply_config(args) -> None:
    if not getattr(args, "config", None):
        return
    data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"config file {args.config} must hold a JSON object")
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in _CONFIG_DEFAULTS:
            raise ValueError(f"unknown config key {key!r}")
        if hasattr(args, dest) and getattr(args, dest) == _CONFIG_DEFAULTS[dest]:
            setattr(args, dest, value)


def _emit(args, record: dict, text: str) -> None:
    if args.format == "records":
        print(json.dumps(record, sort_keys=True))
    else:
        print(text)


def _fit_config(args) -> FitConfig:
    return FitConfig(
        kind=DistributionKind.parse(args.kind),
        grad_step=args.grad_step,
        conv_tol=args.conv_tol,
        max_iters=args.max_iters,
        min_samples=args.min_samples,
        beta_bounds=(args.beta_min, args.beta_max),
        sigma_floor=args.sigma_floor,
    )


def _add_fit_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kind", choices=[k.value for k in DistributionKind],
                        default="tgn", help="density family to fit (default tgn)")
    parser.add_argument("--grad-step", type=float, default=1e-6)
    parser.add_argument("--conv-tol", type=float, default=1e-6)
    parser.add_argument("--max-iters", type=int, default=500)
    parser.add_argument("--min-samples", type=int, default=32)
    parser.add_argument("--beta-min", type=float, default=0.05)
    parser.add_argument("--beta-max", type=float, default=20.0)
    parser.add_argument("--sigma-floor", type=float, default=1e-8)
    parser.add_argument("--config", default=None,
                        help="JSON file of flag defaults; explicit flags win")


def _param_summary(model: FittedModel) -> dict:
    fitted = [dim for dim in model.dims if dim.status is not FitStatus.FALLBACK_DEGENERATE]
    record: dict = {
        "d": model.d,
        "n_degenerate": model.d - len(fitted),
        "n_converged": sum(1 for dim in model.dims if dim.converged),
        "mean_log_likelihood": float(np.mean([dim.log_likelihood for dim in model.dims])),
    }
    for name in ("mu", "sigma", "beta"):
        values = np.array([getattr(dim.params, name) for dim in fitted])
        record[f"{name}_mean"] = float(values.mean()) if values.size else math.nan
        record[f"{name}_std"] = float(values.std()) if values.size else math.nan
    return record


def _summary_text(record: dict) -> str:
    lines = [
        f"dimensions: {record['d']} "
        f"(converged {record['n_converged']}, degenerate {record['n_degenerate']})",
        "parameter      mean       std",
    ]
    for name in ("mu", "sigma", "beta"):
        lines.append(f"{name:<9} {record[f'{name}_mean']:>9.4f} {record[f'{name}_std']:>9.4f}")
    lines.append(f"mean log-likelihood per dimension: {record['mean_log_likelihood']!r}")
    return "\n".join(lines)


def cmd_fit(args) -> int:
    features = read_feature_file(args.features)
    config = _fit_config(args)
    model = fit_model(features, config)
    record = {"command": "fit", "features": str(args.features), "kind": args.kind,
              "n": features.n, "seed": args.seed}
    record.update(_param_summary(model))
    if args.out:
        save_model(model, args.out)
        record["model_path"] = str(args.out)
    if args.eval is not None:
        eval_features = read_feature_file(args.eval)
        per_dim, n_clamped = log_likelihoods(model, eval_features)
        record["eval_features"] = str(args.eval)
        record["eval_mean_log_likelihood"] = float(np.mean(per_dim))
        record["eval_n_clamped"] = n_clamped
    text = [f"fitted {args.kind} model to {args.features} ({features.n} samples)",
            _summary_text(record)]
    if args.out:
        text.append(f"model written to {args.out}")
    if args.eval is not None:
        text.append(f"held-out mean log-likelihood: {record['eval_mean_log_likelihood']!r} "
                    f"({record['eval_n_clamped']} clamped)")
    _emit(args, record, "\n".join(text))
    return EXIT_OK


def _load_side(path, args) -> tuple[FittedModel | None, FeatureMatrix | None]:
    """A score input is either a saved model or a feature file."""
    raw = Path(path).read_bytes()
    if raw.startswith(_MODEL_MAGIC.encode()):
        return load_model(path), None
    features = read_feature_file(path)
    return None, features


def cmd_score(args) -> int:
    config = _fit_config(args)
    test_model, test_features = _load_side(args.test, args)
    ref_model, ref_features = _load_side(args.reference, args)
    want_trend = args.metric in ("trend", "both")
    want_fid = args.metric in ("fid", "both")
    if want_fid and (test_features is None or ref_features is None):
        raise ValueError("fid needs feature files on both sides (models carry no covariance)")

    record: dict = {"command": "score", "metric": args.metric,
                    "test": str(args.test), "reference": str(args.reference),
                    "seed": args.seed}
    text: list[str] = []
    report: ScoreReport | None = None
    if want_trend:
        if test_model is None:
            test_model = fit_model(test_features, config)
        if ref_model is None:
            ref_model = fit_model(ref_features, config)
        report = trend_score(test_model, ref_model)
        record.update(report.to_record())
        text.append(report.to_text())
    if want_fid:
        value = fid(gaussian_stats(test_features), gaussian_stats(ref_features))
        record["fid"] = value
        text.append(f"FID score: {value!r}")
    if args.report:
        Path(args.report).write_text(json.dumps(record, sort_keys=True) + "\n", encoding="utf-8")
        text.append(f"report written to {args.report}")
    _emit(args, record, "\n".join(text))
    return EXIT_OK


def cmd_toy(args) -> int:
    scenario = SCENARIOS[args.scenario]
    if args.n < 1000:
        raise ValueError("toy scenarios need --n of at least 1000")
    features = generate_features(scenario, args.n, args.seed)
    outdir = Path(args.outdir if args.outdir else f"toy-{scenario.name}")
    outdir.mkdir(parents=True, exist_ok=True)
    fixtures = {}
    for name, matrix in features.items():
        path = outdir / f"{name}.tfea"
        write_feature_file(matrix, path)
        fixtures[name] = str(path)
    result = run_scenario(scenario, args.n, args.seed, _fit_config(args), features=features)
    record = {"command": "toy", "fixtures": fixtures, "seed": args.seed}
    record.update(result.to_record())
    lines = [f"{scenario.name}: {args.n} samples per stream, fixtures in {outdir}",
             f"{'model':<10} {'trend':>12} {'fid':>12}"]
    for name, _ in scenario.models:
        lines.append(f"{name:<10} {result.trend_scores[name]:>12.6f} {result.fid_scores[name]:>12.6f}")
    lines.append(f"{'(self)':<10} {result.self_trend:>12.6f} {result.self_fid:>12.6f}")
    _emit(args, record, "\n".join(lines))
    return EXIT_OK


def _parse_fractions(text: str) -> list[tuple[str, float]]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        value = float(Fraction(part))
        if not 0.0 < value <= 1.0:
            raise ValueError(f"fraction {part!r} outside (0, 1]")
        out.append((part, value))
    if not out:
        raise ValueError("no fractions given")
    return out


def cmd_robustness(args) -> int:
    fractions = _parse_fractions(args.fractions)
    config = _fit_config(args)
    test = read_feature_file(args.test)
    reference = read_feature_file(args.reference)
    ref_model = fit_model(reference, config)
    ref_stats = gaussian_stats(reference)
    rows = []
    for label, value in fractions:
        kept = subsample(test, value, args.seed)
        model = fit_model(kept, config)
        rows.append({
            "fraction": label,
            "fraction_value": value,
            "n": kept.n,
            "trend": trend_score(model, ref_model).trend,
            "fid": fid(gaussian_stats(kept), ref_stats),
        })
    record = {"command": "robustness", "test": str(args.test),
              "reference": str(args.reference), "seed": args.seed, "rows": rows}
    lines = [f"{'fraction':>10} {'n':>8} {'trend':>12} {'fid':>12}"]
    for row in rows:
        lines.append(f"{row['fraction']:>10} {row['n']:>8} {row['trend']:>12.6f} {row['fid']:>12.6f}")
    _emit(args, record, "\n".join(lines))
    return EXIT_OK


def cmd_analyze(args) -> int:
    features = read_feature_file(args.features)
    stats = dimension_stats(features)
    kurtoses = np.array([s.kurtosis for s in stats])
    zero_fractions = np.array([s.zero_fraction for s in stats])
    record: dict = {
        "command": "analyze",
        "features": str(args.features),
        "seed": args.seed,
        "n": features.n,
        "d": features.d,
        "mean_zero_fraction": float(zero_fractions.mean()),
        "mean_kurtosis": float(np.nanmean(kurtoses)) if not np.all(np.isnan(kurtoses)) else math.nan,
        "median_kurtosis": float(np.nanmedian(kurtoses)) if not np.all(np.isnan(kurtoses)) else math.nan,
    }
    written = []
    if args.out:
        stats_path = Path(f"{args.out}-stats.tsv")
        stats_path.write_text(stats_to_tsv(stats), encoding="utf-8")
        written.append(str(stats_path))

    if args.histogram:
        hist_dims = [int(s) for s in args.histogram.split(",") if s.strip()]
        hist_records = {}
        for dim in hist_dims:
            edges, counts = histogram(features, dim, args.bins)
            hist_records[str(dim)] = {"edges": edges.tolist(), "counts": counts.tolist()}
            if args.out:
                hist_path = Path(f"{args.out}-hist{dim}.tsv")
                hist_path.write_text(histogram_to_tsv(edges, counts), encoding="utf-8")
                written.append(str(hist_path))
        record["histograms"] = hist_records

    if features.d >= 2:
        k = None if args.pcc_all else args.pcc_pairs
        pairs, values, summary = pairwise_pcc(features, k, seed=args.seed)
        record["pcc"] = {
            "mean_abs_pcc": summary.mean_abs_pcc,
            "std_abs_pcc": summary.std_abs_pcc,
            "mean_pcc": summary.mean_pcc,
            "std_pcc": summary.std_pcc,
            "n_pairs": summary.n_pairs,
            "n_undefined": summary.n_undefined,
        }
        if args.out:
            pcc_path = Path(f"{args.out}-pcc.tsv")
            pcc_path.write_text(pcc_to_tsv(pairs, values), encoding="utf-8")
            written.append(str(pcc_path))
    if written:
        record["files"] = written

    lines = [f"{features.n} samples x {features.d} dimensions from {args.features}",
             f"mean zero fraction: {record['mean_zero_fraction']:.4f}",
             f"mean kurtosis (zeros excluded): {record['mean_kurtosis']:.2f}",
             f"median kurtosis (zeros excluded): {record['median_kurtosis']:.2f}"]
    if "pcc" in record:
        lines.append(f"mean |PCC| over {record['pcc']['n_pairs']} pairs: "
                     f"{record['pcc']['mean_abs_pcc']:.4f} "
                     f"(std {record['pcc']['std_abs_pcc']:.4f})")
    lines.extend(f"wrote {name}" for name in written)
    _emit(args, record, "\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trend",
        description="Evaluate generative-model features by per-dimension "
                    "truncated generalized normal density estimation.",
    )
    parser.add_argument("--format", choices=["text", "records"], default="text",
                        help="records prints one JSON object per command")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit per-dimension densities to a feature file")
    p_fit.add_argument("features")
    p_fit.add_argument("--out", default=None, help="write the fitted model here")
    p_fit.add_argument("--eval", default=None, help="held-out feature file to evaluate")
    p_fit.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_fit_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_score = sub.add_parser("score", help="score a test set against a reference set")
    p_score.add_argument("test", help="feature file or saved model")
    p_score.add_argument("reference", help="feature file or saved model")
    p_score.add_argument("--metric", choices=["trend", "fid", "both"], default="trend")
    p_score.add_argument("--report", default=None, help="also write the JSON record here")
    p_score.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_fit_flags(p_score)
    p_score.set_defaults(func=cmd_score)

    p_toy = sub.add_parser("toy", help="run a synthetic two-metric contrast scenario")
    p_toy.add_argument("--scenario", type=int, choices=sorted(SCENARIOS), required=True)
    p_toy.add_argument("--n", type=int, default=50_000)
    p_toy.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_toy.add_argument("--outdir", default=None)
    _add_fit_flags(p_toy)
    p_toy.set_defaults(func=cmd_toy)

    p_rob = sub.add_parser("robustness", help="rescore after subsampling the test set")
    p_rob.add_argument("test")
    p_rob.add_argument("reference")
    p_rob.add_argument("--fractions", default="1,1/5,1/10,1/50")
    p_rob.add_argument("--seed", type=int, default=DEFAULT_SEED)
    _add_fit_flags(p_rob)
    p_rob.set_defaults(func=cmd_robustness)

    p_an = sub.add_parser("analyze", help="per-dimension statistics, PCCs, histograms")
    p_an.add_argument("features")
    p_an.add_argument("--histogram", default=None, help="comma-separated dimension indices")
    p_an.add_argument("--bins", type=int, default=64)
    p_an.add_argument("--pcc-pairs", type=int, default=100_000)
    p_an.add_argument("--pcc-all", action="store_true", help="enumerate every pair")
    p_an.add_argument("--out", default=None, help="prefix for TSV exports")
    p_an.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_an.add_argument("--config", default=None,
                      help="JSON file of flag defaults; explicit flags win")
    p_an.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return args.func(args)
    except (FeatureFileError, ModelFormatError) as exc:
        print(f"trend: file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"trend: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NonConvergenceError as exc:
        print(f"trend: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, CovarianceError) as exc:
        print(f"trend: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
