"""prob-export command line entry point."""

from __future__ import annotations

import argparse
import sys

from .export import ExportError, ExportJob, PreprocessSpec, export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prob-export",
        description="Classify a directory of images and export the probability matrix.",
    )
    parser.add_argument("--images", required=True, help="directory of images")
    parser.add_argument("--classifier", default="torchvision:resnet18",
                        help="classifier identifier, e.g. torchvision:resnet18")
    parser.add_argument("--weights", default=None,
                        help="'pretrained', a state-dict path, or omit for seeded random init")
    parser.add_argument("--seed", type=int, default=0,
                        help="initialization seed when no weights are given")
    parser.add_argument("--resize", type=int, nargs=2, default=(64, 64),
                        metavar=("H", "W"))
    parser.add_argument("--mean", type=float, nargs=3, default=None)
    parser.add_argument("--std", type=float, nargs=3, default=None)
    parser.add_argument("--output", required=True, help="output matrix path")
    parser.add_argument("--format", default="pmat", choices=("pmat", "csv"))
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--on-error", default="abort", choices=("abort", "skip"),
                        help="what to do with unreadable images")
    parser.add_argument("--expect-classes", type=int, default=None,
                        help="abort unless the classifier emits exactly this many classes")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    pre_kwargs = {"resize": tuple(args.resize)}
    if args.mean is not None:
        pre_kwargs["mean"] = tuple(args.mean)
    if args.std is not None:
        pre_kwargs["std"] = tuple(args.std)
    try:
        job = ExportJob(
            image_dir=args.images,
            classifier=args.classifier,
            weights=args.weights,
            init_seed=args.seed,
            preprocess=PreprocessSpec(**pre_kwargs),
            output_path=args.output,
            output_format=args.format,
            batch_size=args.batch_size,
            on_error=args.on_error,
            expect_classes=args.expect_classes,
        )
        result = export(job)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {result.n_rows} x {result.n_classes} matrix to {result.output_path} "
        f"(manifest {result.manifest_path}, {len(result.skipped)} skipped)"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
