"""Command line front end.

Exit codes: 1 for usage and configuration problems, 2 for malformed data
files, 3 for numeric failures during a run.  Settings merge in increasing
precedence: built-in defaults, then a ``--config`` JSON file, then explicit
flags.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import ConfigError, DataFormatError, OcboostError
from .experiments import (
    ExperimentConfig,
    run_mnist,
    run_oracle_compare,
    run_synthetic,
    surrogate_digits,
)
from .plotting import emit_plot

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_DATA_KEYS = ("train_images", "train_labels", "test_images", "test_labels")
_DATA_FILENAMES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; we reserve 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_tuple(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_common(parser):
    parser.add_argument("--config", metavar="JSON", help="JSON file of config overrides")
    parser.add_argument(
        "--out", default=None,
        help="output directory (default: $OCBOOST_OUT or ./ocboost-out)",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")


def _add_stream_flags(parser):
    parser.add_argument("--seeds", type=_int_tuple, default=None,
                        help="comma-separated stream seeds")
    parser.add_argument("--segments", type=int, default=None)
    parser.add_argument("--rows-per-segment", type=int, default=None)
    parser.add_argument("--n-hypotheses", type=int, default=None)
    parser.add_argument("--perturb-scale", type=float, default=None)
    parser.add_argument("--warm-start", type=int, default=None,
                        help="batch-initialized prefix length")
    parser.add_argument("--smoothing", type=float, default=None)
    parser.add_argument("--orders", type=_int_tuple, default=None,
                        help="comma-separated approximation orders")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ocboost", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="drifting synthetic stream suite")
    _add_common(p_synth)
    _add_stream_flags(p_synth)
    p_synth.add_argument("--convention", choices=("as_written", "theorem_consistent"),
                         default=None)
    p_synth.add_argument("--oza-modes", default=None,
                         help="comma-separated subset of averaged,exponential")
    p_synth.add_argument("--halt-after", type=int, default=None, metavar="N",
                         help="stop after example N and save resumable checkpoints")
    p_synth.add_argument("--resume", default=None, metavar="DIR",
                         help="finish a run halted in DIR")
    p_synth.set_defaults(func=_cmd_synth)

    p_cmp = sub.add_parser("oracle-compare",
                           help="run both negative-sum conventions side by side")
    _add_common(p_cmp)
    _add_stream_flags(p_cmp)
    p_cmp.set_defaults(func=_cmd_oracle_compare)

    p_mnist = sub.add_parser("mnist", help="digit-stream protocol")
    _add_common(p_mnist)
    for key in _DATA_KEYS:
        p_mnist.add_argument(f"--{key.replace('_', '-')}", default=None, metavar="IDX")
    p_mnist.add_argument("--data-dir", default=None,
                         help="directory holding the four IDX files "
                              "(default: $OCBOOST_MNIST_DIR)")
    p_mnist.add_argument("--surrogate", action="store_true",
                         help="generate a deterministic stand-in dataset instead")
    p_mnist.add_argument("--order", type=int, default=None)
    p_mnist.add_argument("--smoothing", type=float, default=None)
    p_mnist.add_argument("--convention", choices=("as_written", "theorem_consistent"),
                         default=None)
    p_mnist.add_argument("--stream-size", type=int, default=None)
    p_mnist.add_argument("--mnist-warm-start", type=int, default=None)
    p_mnist.add_argument("--eval-every", type=int, default=None)
    p_mnist.add_argument("--preselect-size", type=int, default=None)
    p_mnist.add_argument("--sample-size", type=int, default=None)
    p_mnist.add_argument("--preselect-seed", type=int, default=None)
    p_mnist.add_argument("--per-digit-hypotheses", type=int, default=None)
    p_mnist.add_argument("--hypothesis-kind", choices=("prototype", "stump"), default=None)
    p_mnist.set_defaults(func=_cmd_mnist)

    p_plot = sub.add_parser("plot", help="render a result CSV to SVG")
    p_plot.add_argument("csv", help="synthetic- or digit-schema result CSV")
    p_plot.add_argument("--out-file", default=None, help="SVG path (default: CSV with .svg)")
    p_plot.add_argument("--column", default=None, help="digit-schema y column")
    p_plot.add_argument("--title", default=None)
    p_plot.add_argument("-v", "--verbose", action="store_true", help="log progress")
    p_plot.set_defaults(func=_cmd_plot)
    return parser


def _out_dir(args) -> str:
    return args.out or os.environ.get("OCBOOST_OUT") or "ocboost-out"


def _merged_config(args, kind: str, overrides: dict) -> dict:
    merged = ExperimentConfig().to_dict()
    if args.config:
        if not Path(args.config).is_file():
            raise ConfigError(f"config file {args.config!r} is not readable")
        merged.update(ExperimentConfig.from_file(args.config).to_dict())
    merged.update({k: v for k, v in overrides.items() if v is not None})
    merged["kind"] = kind
    merged["out_dir"] = _out_dir(args)
    return merged


def _stream_overrides(args) -> dict:
    return {
        "seeds": getattr(args, "seeds", None),
        "segments": getattr(args, "segments", None),
        "rows_per_segment": getattr(args, "rows_per_segment", None),
        "n_hypotheses": getattr(args, "n_hypotheses", None),
        "perturb_scale": getattr(args, "perturb_scale", None),
        "warm_start": getattr(args, "warm_start", None),
        "smoothing": getattr(args, "smoothing", None),
        "orders": getattr(args, "orders", None),
    }


def _report(result: dict) -> int:
    for name, path in result.items():
        print(f"{name}: {path}")
    return 0


def _cmd_synth(args) -> int:
    overrides = _stream_overrides(args)
    overrides["convention"] = args.convention
    if args.oza_modes is not None:
        overrides["oza_modes"] = tuple(
            m for m in args.oza_modes.split(",") if m.strip() != ""
        )
    cfg = ExperimentConfig.from_dict(_merged_config(args, "synthetic", overrides))
    if args.halt_after is not None and args.resume is not None:
        raise ConfigError("--halt-after and --resume cannot be combined")
    return _report(run_synthetic(cfg, halt_after=args.halt_after, resume_from=args.resume))


def _cmd_oracle_compare(args) -> int:
    cfg = ExperimentConfig.from_dict(
        _merged_config(args, "oracle_compare", _stream_overrides(args))
    )
    return _report(run_oracle_compare(cfg))


def _cmd_mnist(args) -> int:
    overrides = {
        key: getattr(args, key, None)
        for key in (
            "order", "smoothing", "convention", "stream_size", "mnist_warm_start",
            "eval_every", "preselect_size", "sample_size", "preselect_seed",
            "per_digit_hypotheses", "hypothesis_kind",
        )
    }
    overrides.update({key: getattr(args, key, None) for key in _DATA_KEYS})
    merged = _merged_config(args, "mnist", overrides)
    if args.surrogate:
        merged.update(surrogate_digits(Path(merged["out_dir"]) / "surrogate-data"))
    elif not all(merged[k] for k in _DATA_KEYS):
        data_dir = args.data_dir or os.environ.get("OCBOOST_MNIST_DIR")
        if data_dir:
            merged.update({
                key: str(Path(data_dir) / _DATA_FILENAMES[key]) for key in _DATA_KEYS
            })
        else:
            raise ConfigError(
                "no digit data: pass the four IDX paths, --data-dir, "
                "set OCBOOST_MNIST_DIR, or use --surrogate"
            )
    return _report(run_mnist(ExperimentConfig.from_dict(merged)))


def _cmd_plot(args) -> int:
    csv_path = Path(args.csv)
    if not csv_path.is_file():
        raise ConfigError(f"CSV path {args.csv!r} is not a readable file")
    out_file = Path(args.out_file) if args.out_file else csv_path.with_suffix(".svg")
    emit_plot(csv_path, out_file, y_column=args.column, title=args.title)
    return _report({"svg": out_file})


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"ocboost: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataFormatError as exc:
        print(f"ocboost: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OcboostError as exc:
        print(f"ocboost: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"ocboost: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
