"""Command-line surface.

Every subcommand validates its flags, runs one toolkit operation, and emits
a RunReport: a JSON document carrying the tool version, the fully resolved
configuration, all seeds, FNV-1a digests of input files, and the result
payload. Reports contain no timestamps or machine state, so re-running with
identical flags and seeds produces byte-identical output.

By default the report JSON goes to stdout. With --report PATH the JSON is
written to the file and an aligned-text rendering goes to stdout instead.

Exit codes: 0 success, 1 usage error, 2 data/computation error.
The SCORELAB_SEED environment variable supplies a default --seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import attack as attack_mod
from . import classifiers, experiments, formats, gaussian, synthetic
from .errors import ScorelabError, UsageError
from .metrics import (
    LN2,
    REMAINDER_ABSORB,
    REMAINDER_REJECT,
    SplitSpec,
    improved_score,
    inception_score,
)

DEFAULT_SEED = 42


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 instead of argparse's 2
        raise UsageError(message)


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("SCORELAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"SCORELAB_SEED must be an integer, got {env!r}") from exc
    return DEFAULT_SEED


def _config_from(args: argparse.Namespace) -> dict:
    skip = {"func", "report"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, subcommand: str, seeds: dict, digests: dict, result: dict, table: str) -> None:
    report = {
        "tool": "scorelab",
        "version": __version__,
        "subcommand": subcommand,
        "config": _config_from(args),
        "seeds": seeds,
        "input_digests": digests,
        "result": result,
    }
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.report:
        with open(args.report, "w") as f:
            f.write(text)
        sys.stdout.write(table)
    else:
        sys.stdout.write(text)


def _add_matrix_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="probability matrix (PMAT or CSV)")
    p.add_argument("--format", default="auto", choices=("auto", "pmat", "csv"))
    p.add_argument("--row-sum-tol", type=float, default=formats.DEFAULT_ROW_SUM_TOL,
                   help="row-sum tolerance on load (default 1e-6)")
    p.add_argument("--no-validate", action="store_true",
                   help="skip row validation and renormalization on load")


def _add_report_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--report", help="write the RunReport JSON here instead of stdout")


def _load_input(args) -> tuple:
    matrix = formats.load_matrix(
        args.input, fmt=args.format, row_sum_tol=args.row_sum_tol,
        validate=not args.no_validate,
    )
    return matrix, {"input": formats.file_digest(args.input)}


def _parse_split_list(text: str) -> list[int]:
    try:
        counts = [int(c) for c in text.split(",") if c.strip()]
    except ValueError as exc:
        raise UsageError(f"bad split list {text!r}: {exc}") from exc
    if not counts or any(c < 1 for c in counts):
        raise UsageError(f"split counts must be positive integers, got {text!r}")
    return counts


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_score(args) -> None:
    matrix, digests = _load_input(args)
    spec = SplitSpec(n_splits=args.splits, remainder_policy=args.remainder)
    report = inception_score(matrix, spec, seed=args.shuffle_seed)
    table = (
        f"n={report.n} k={report.k} splits={report.n_splits}\n"
        f"mean score {report.mean:.6g}\n"
        f"std        {report.std:.6g}\n"
    )
    _emit(args, "score", {"shuffle_seed": args.shuffle_seed}, digests,
          report.as_dict(), table)


def _cmd_improved_score(args) -> None:
    matrix, digests = _load_input(args)
    value = improved_score(matrix)
    result = {
        "improved_score_nats": value,
        "improved_score_bits": value / LN2,
        "exponentiated": math.exp(value),
        "n": matrix.n,
        "k": matrix.class_count,
    }
    table = (
        f"n={matrix.n} k={matrix.class_count}\n"
        f"improved score {value:.6g} nats ({value / LN2:.6g} bits)\n"
        f"exponentiated  {math.exp(value):.6g}\n"
    )
    _emit(args, "improved-score", {}, digests, result, table)


def _cmd_entropy_study(args) -> None:
    matrix, digests = _load_input(args)
    study = experiments.entropy_study(matrix, bins=args.bins)
    lines = [
        f"n={matrix.n} k={matrix.class_count}",
        f"mean conditional entropy {study.mean_conditional_entropy_bits:.4f} bits",
        f"marginal entropy         {study.marginal_entropy_bits:.4f} bits",
        f"mutual information       {study.mutual_information_bits:.4f} bits",
        "row-entropy histogram (bits):",
    ]
    edges = study.histogram_edges_bits
    for i, count in enumerate(study.histogram_counts):
        lines.append(f"  [{edges[i]:7.3f}, {edges[i + 1]:7.3f})  {count}")
    _emit(args, "entropy-study", {}, digests, study.as_dict(), "\n".join(lines) + "\n")


def _cmd_split_study(args) -> None:
    matrix, digests = _load_input(args)
    counts = _parse_split_list(args.splits)
    study = experiments.split_study(
        matrix, counts, remainder_policy=args.remainder,
        shuffle_seed=args.shuffle_seed, source=args.input,
    )
    lines = [f"{'n_splits':>8}  {'mean':>12}  {'std':>12}"]
    for row in study.rows:
        lines.append(f"{row.n_splits:>8}  {row.mean:>12.6g}  {row.std:>12.6g}")
    _emit(args, "split-study", {"shuffle_seed": args.shuffle_seed}, digests,
          study.as_dict(), "\n".join(lines) + "\n")


def _cmd_top_classes(args) -> None:
    matrix, digests = _load_input(args)
    names: list[str] | None = None
    if args.labels:
        with open(args.labels) as f:
            names = [line.rstrip("\n") for line in f]
        digests["labels"] = formats.file_digest(args.labels)
    ranked = experiments.top_classes(matrix, args.top)
    entries = []
    lines = [f"{'rank':>4}  {'class':>6}  {'marginal':>12}  label"]
    for rank, (idx, prob) in enumerate(ranked, start=1):
        label = names[idx] if names and idx < len(names) else ""
        entries.append({"class": idx, "marginal": prob, "label": label})
        lines.append(f"{rank:>4}  {idx:>6}  {prob:>12.6g}  {label}")
    result = {"top": entries, "n": matrix.n, "k": matrix.class_count}
    _emit(args, "top-classes", {}, digests, result, "\n".join(lines) + "\n")


def _cmd_gaussian_demo(args) -> None:
    seed = _resolve_seed(args.seed)
    spec = gaussian.default_mixture(args.scale)
    reports = gaussian.score_ordering_demo(spec, args.samples, seed, scale=args.scale)
    result = {
        "scale_reading": args.scale,
        "n_samples": args.samples,
        "reports": [r.as_dict() for r in reports],
    }
    lines = [f"{'sampler':<28}  {'exp score':>10}  {'nats':>8}  {'H(y)':>8}  {'H(y|x)':>8}"]
    for r in reports:
        lines.append(
            f"{r.sampler:<28}  {r.score_exp:>10.4f}  {r.score_nats:>8.4f}"
            f"  {r.marginal_entropy_nats:>8.4f}  {r.mean_conditional_entropy_nats:>8.4f}"
        )
    _emit(args, "gaussian-demo", {"seed": seed}, {}, result, "\n".join(lines) + "\n")


def _load_points_csv(path: str) -> np.ndarray:
    try:
        pts = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise formats.LoadError(f"{path}: cannot read points ({exc})") from exc
    return pts


def _cmd_attack(args) -> None:
    model = formats.load_model(args.classifier)
    digests = {"classifier": formats.file_digest(args.classifier)}
    seed = _resolve_seed(args.seed)
    if args.init == "uniform":
        init: attack_mod.InitSpec = attack_mod.UniformBoxInit(
            args.box_lo, args.box_hi, model.input_dim
        )
    elif args.init == "empirical":
        if not args.init_data:
            raise UsageError("--init empirical requires --init-data")
        init = attack_mod.EmpiricalInit(_load_points_csv(args.init_data))
        digests["init_data"] = formats.file_digest(args.init_data)
    else:
        if not args.fixed_point:
            raise UsageError("--init fixed requires --fixed-point")
        try:
            point = np.asarray([float(v) for v in args.fixed_point.split(",")])
        except ValueError as exc:
            raise UsageError(f"bad --fixed-point: {exc}") from exc
        init = attack_mod.FixedInit(point)
    config = attack_mod.AttackConfig(
        epsilon=args.epsilon, max_iters=args.iters, init=init,
        early_stop_delta=args.delta, seed=seed,
    )
    result_batch = attack_mod.generate_attacked_batch(model, config, args.samples)
    score = improved_score(result_batch.matrix)
    split_report = inception_score(result_batch.matrix, SplitSpec(n_splits=1))
    if args.output_matrix:
        formats.save_matrix(result_batch.matrix, args.output_matrix)
    if args.traces:
        trace_doc = [
            {
                "target": t.target,
                "iterations": t.iterations,
                "converged": t.converged,
                "probs": list(t.probs),
            }
            for t in result_batch.traces
        ]
        with open(args.traces, "w") as f:
            json.dump(trace_doc, f, sort_keys=True, indent=2)
            f.write("\n")
    mean_iters = float(np.mean([t.iterations for t in result_batch.traces]))
    result = {
        "improved_score_nats": score,
        "exponentiated": math.exp(score),
        "score_report": split_report.as_dict(),
        "converged_fraction": result_batch.converged_fraction,
        "mean_iterations": mean_iters,
        "n_samples": args.samples,
        "k": model.class_count,
        "init": init.describe(),
    }
    table = (
        f"attacked {args.samples} samples against {args.classifier}\n"
        f"init {init.describe()}  eps={args.epsilon:g}  iters<={args.iters}\n"
        f"exponentiated score {math.exp(score):.4f} (max {model.class_count})\n"
        f"converged {result_batch.converged_fraction * 100:.1f}%  "
        f"mean iterations {mean_iters:.1f}\n"
    )
    _emit(args, "attack", {"seed": seed}, digests, result, table)


def _cmd_train_classifier(args) -> None:
    seed = _resolve_seed(args.seed)
    data = classifiers.gaussian_blobs(
        n_classes=args.classes, dim=args.dim, n_per_class=args.samples_per_class,
        center_scale=args.center_scale, spread=args.spread, seed=seed,
    )
    train_set, test_set = data.split(args.train_fraction, seed=seed + 1)
    if args.arch == "linear":
        model: classifiers.Classifier = classifiers.SoftmaxLinear.random(
            args.dim, args.classes, seed=seed + 2
        )
    else:
        model = classifiers.MLPClassifier.random(
            args.dim, args.hidden, args.classes, seed=seed + 2,
            activation=args.activation,
        )
    config = classifiers.TrainConfig(
        learning_rate=args.learning_rate, epochs=args.epochs,
        batch_size=args.batch_size, seed=seed + 3,
    )
    trained, losses = classifiers.train(model, train_set, config)
    formats.save_model(trained, args.output)
    if args.save_data:
        np.savetxt(args.save_data, train_set.points, delimiter=",", fmt="%.17g")
    result = {
        "architecture": args.arch,
        "initial_loss": losses[0],
        "final_loss": losses[-1],
        "train_accuracy": classifiers.accuracy(trained, train_set.points, train_set.labels),
        "heldout_accuracy": classifiers.accuracy(trained, test_set.points, test_set.labels),
        "n_train": train_set.n,
        "n_heldout": test_set.n,
        "dataset": data.description,
        "model_digest": formats.file_digest(args.output),
    }
    table = (
        f"trained {args.arch} on {data.description}\n"
        f"loss {losses[0]:.4f} -> {losses[-1]:.4f} over {args.epochs} epochs\n"
        f"train accuracy   {result['train_accuracy']:.4f}\n"
        f"heldout accuracy {result['heldout_accuracy']:.4f}\n"
        f"saved {args.output}\n"
    )
    _emit(args, "train-classifier", {"seed": seed}, {}, result, table)


def _cmd_gen_synthetic(args) -> None:
    seed = _resolve_seed(args.seed)
    kwargs = {}
    if args.kind == "dirichlet":
        kwargs["alpha"] = args.alpha
    elif args.kind == "heterogeneous":
        kwargs.update(
            sharp_fraction=args.sharp_fraction, peak=args.peak,
            diffuse_alpha=args.diffuse_alpha,
        )
    matrix = synthetic.generate(args.kind, args.rows, args.classes, seed=seed, **kwargs)
    formats.save_matrix(matrix, args.output, fmt=args.format)
    result = {
        "kind": args.kind,
        "rows": matrix.n,
        "classes": matrix.class_count,
        "output_digest": formats.file_digest(args.output),
    }
    table = f"wrote {args.kind} matrix ({matrix.n} x {matrix.class_count}) to {args.output}\n"
    _emit(args, "gen-synthetic", {"seed": seed}, {}, result, table)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scorelab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"scorelab {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="split-protocol exponentiated score")
    _add_matrix_args(p)
    p.add_argument("--splits", type=int, default=10)
    p.add_argument("--remainder", default=REMAINDER_REJECT,
                   choices=(REMAINDER_REJECT, REMAINDER_ABSORB))
    p.add_argument("--shuffle-seed", type=int, default=None,
                   help="permute rows with this seed before splitting")
    _add_report_arg(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("improved-score", help="batching-invariant log-scale score")
    _add_matrix_args(p)
    _add_report_arg(p)
    p.set_defaults(func=_cmd_improved_score)

    p = sub.add_parser("entropy-study", help="entropy diagnostics in bits")
    _add_matrix_args(p)
    p.add_argument("--bins", type=int, default=10)
    _add_report_arg(p)
    p.set_defaults(func=_cmd_entropy_study)

    p = sub.add_parser("split-study", help="score means/stds across split counts")
    _add_matrix_args(p)
    p.add_argument("--splits", default=",".join(str(c) for c in experiments.DEFAULT_SPLIT_GRID),
                   help="comma-separated split counts")
    p.add_argument("--remainder", default=REMAINDER_REJECT,
                   choices=(REMAINDER_REJECT, REMAINDER_ABSORB))
    p.add_argument("--shuffle-seed", type=int, default=None)
    _add_report_arg(p)
    p.set_defaults(func=_cmd_split_study)

    p = sub.add_parser("top-classes", help="classes ranked by marginal probability")
    _add_matrix_args(p)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--labels", help="sidecar file with one class name per line")
    _add_report_arg(p)
    p.set_defaults(func=_cmd_top_classes)

    p = sub.add_parser("gaussian-demo", help="1-D testbed score ordering")
    p.add_argument("--samples", type=int, default=gaussian.DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scale", default="variance", choices=("variance", "stddev"),
                   help="how to read the mixture's dispersion parameter")
    _add_report_arg(p)
    p.set_defaults(func=_cmd_gaussian_demo)

    p = sub.add_parser("attack", help="gradient-sign score attack")
    p.add_argument("--classifier", required=True, help="SLMD model file")
    p.add_argument("--epsilon", type=float, default=0.001)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--delta", type=float, default=1e-3,
                   help="stop a sample once p(target) >= 1 - delta")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--init", default="uniform", choices=("uniform", "empirical", "fixed"))
    p.add_argument("--box-lo", type=float, default=-1.0)
    p.add_argument("--box-hi", type=float, default=1.0)
    p.add_argument("--init-data", help="CSV of raw points for --init empirical")
    p.add_argument("--fixed-point", help="comma-separated floats for --init fixed")
    p.add_argument("--output-matrix", help="write the attacked ProbMatrix here")
    p.add_argument("--traces", help="write per-sample traces (JSON) here")
    _add_report_arg(p)
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("train-classifier", help="train a blob classifier, save SLMD")
    p.add_argument("--arch", default="mlp", choices=("mlp", "linear"))
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--activation", default="relu", choices=classifiers.ACTIVATIONS)
    p.add_argument("--samples-per-class", type=int, default=500)
    p.add_argument("--center-scale", type=float, default=2.5)
    p.add_argument("--spread", type=float, default=0.4)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", required=True, help="SLMD model path")
    p.add_argument("--save-data", help="also write the training points as CSV")
    _add_report_arg(p)
    p.set_defaults(func=_cmd_train_classifier)

    p = sub.add_parser("gen-synthetic", help="generate a synthetic matrix file")
    p.add_argument("--kind", required=True, choices=synthetic.KINDS)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--alpha", type=float, default=1.0, help="dirichlet concentration")
    p.add_argument("--sharp-fraction", type=float, default=0.6)
    p.add_argument("--peak", type=float, default=0.9)
    p.add_argument("--diffuse-alpha", type=float, default=2.0)
    p.add_argument("--output", required=True)
    p.add_argument("--format", default="auto", choices=("auto", "pmat", "csv"))
    _add_report_arg(p)
    p.set_defaults(func=_cmd_gen_synthetic)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ScorelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
