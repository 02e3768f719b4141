"""Experiment harness: drifting synthetic streams, the digit-stream protocol,
and the convention comparison, all writing deterministic CSV artifacts.

Runs are pure functions of their config: streams are regenerated from seeds,
floats are written with repr, and rows are sorted canonically before the final
write, so re-running a config (or halting and resuming it) reproduces files
byte for byte.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .batch import fit_weights, incremental_oracle, preselect_hypotheses
from .core import LabeledExample
from .errors import ConfigError
from .io import (
    load_learner_state,
    load_mnist_idx,
    save_classifier,
    write_idx_images,
    write_idx_labels,
)
from .metrics import approx_error, approx_error_series, ova_predict_scores, test_error
from .ocb import DEFAULT_SMOOTHING, OnlineCoordinateBooster
from .oza import OzaBooster
from .synthetic import DriftSpec, gen_drift_stream
from .weak import PrototypeHypothesis, prototype_source, stump_source

log = logging.getLogger("ocboost")

SYNTH_CSV_COLUMNS = ["example_index", "learner", "K", "convention", "seed", "approx_error"]
MNIST_CSV_COLUMNS = ["examples_seen", "learner", "digit", "test_error", "approx_error", "ova_error"]

KINDS = ("synthetic", "mnist", "oracle_compare")


@dataclass
class ExperimentConfig:
    """All knobs for every experiment kind; unused fields are ignored.

    Defaults are the desk-scale protocol sizes.
    """

    kind: str = "synthetic"
    out_dir: str = "ocboost-out"
    smoothing: float = DEFAULT_SMOOTHING
    # synthetic / oracle_compare
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    segments: int = 3
    rows_per_segment: int = 1000
    n_hypotheses: int = 20
    perturb_scale: float = 0.1
    warm_start: int = 100
    orders: tuple[int, ...] = (0, 5, 20)
    convention: str = "theorem_consistent"
    oza_modes: tuple[str, ...] = ("averaged",)
    # mnist
    train_images: str = ""
    train_labels: str = ""
    test_images: str = ""
    test_labels: str = ""
    per_digit_hypotheses: int = 50
    stream_size: int = 10000
    mnist_warm_start: int = 500
    eval_every: int = 1000
    preselect_size: int = 2000
    sample_size: int = 100
    preselect_seed: int = 0
    order: int = 25
    hypothesis_kind: str = "prototype"

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.smoothing <= 0:
            raise ConfigError(f"experiments need smoothing > 0, got {self.smoothing}")
        if self.kind in ("synthetic", "oracle_compare"):
            if not self.seeds:
                raise ConfigError("need at least one seed")
            total = self.segments * self.rows_per_segment
            if not 1 <= self.warm_start < total:
                raise ConfigError(
                    f"warm_start must be in [1, {total}), got {self.warm_start}"
                )
            if any(k < 0 for k in self.orders) or not self.orders:
                raise ConfigError(f"orders must be non-negative, got {self.orders!r}")
            from .ocb import CONVENTIONS

            if self.convention not in CONVENTIONS:
                raise ConfigError(f"unknown convention {self.convention!r}")
            from .oza import MODES

            if any(m not in MODES for m in self.oza_modes):
                raise ConfigError(f"unknown oza mode in {self.oza_modes!r}")
        if self.kind == "mnist":
            for name in ("train_images", "train_labels", "test_images", "test_labels"):
                path = getattr(self, name)
                if not path:
                    raise ConfigError(f"mnist runs need {name} set")
                if not Path(path).is_file():
                    raise ConfigError(f"{name} path {path!r} is not a readable file")
            if self.hypothesis_kind not in ("prototype", "stump"):
                raise ConfigError(f"unknown hypothesis_kind {self.hypothesis_kind!r}")
            if not 1 <= self.mnist_warm_start < self.stream_size:
                raise ConfigError("mnist_warm_start must be in [1, stream_size)")
            if self.eval_every < 1:
                raise ConfigError("eval_every must be >= 1")
        return self

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("seeds", "orders", "oza_modes"):
            if key in kwargs and isinstance(kwargs[key], list):
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)


def _ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_rows_csv(path: Path, columns, rows):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


# -- synthetic ----------------------------------------------------------------

def _synth_learner_specs(cfg: ExperimentConfig, conventions=None):
    """(label, K-string, convention-string, factory) per learner column group."""
    specs = []
    for order in cfg.orders:
        for conv in conventions or (cfg.convention,):
            specs.append((
                "ocb", str(order), conv,
                lambda order=order, conv=conv: OnlineCoordinateBooster(
                    order=order, smoothing=cfg.smoothing, negative_sum_convention=conv
                ),
            ))
    if conventions is None:
        for mode in cfg.oza_modes:
            specs.append((
                f"oza-{mode}", "", "",
                lambda mode=mode: OzaBooster(mode=mode, smoothing=cfg.smoothing),
            ))
    return specs


def _row_sort_key(row):
    seed = int(row[4])
    learner = row[1]
    k = (1, 0) if row[2] == "" else (0, int(row[2]))
    return (seed, learner, k, row[3], int(row[0]))


def _state_name(label: str, k: str, convention: str, seed: int) -> str:
    bits = [label]
    if k:
        bits.append(f"K{k}")
    if convention:
        bits.append(convention)
    bits.append(f"seed{seed}")
    return "-".join(bits) + ".state"


def run_synthetic(cfg: ExperimentConfig, conventions=None,
                  halt_after: int | None = None, resume_from=None) -> dict:
    """Drift-stream run producing approx-error rows per learner and seed.

    ``halt_after`` stops every learner after that absolute example index and
    saves resumable state snapshots; ``resume_from`` picks those up and
    finishes the run.  A halted-then-resumed run's final artifacts are byte
    identical to an uninterrupted one.
    """
    cfg.validate()
    out = _ensure_dir(Path(cfg.out_dir))
    csv_name = "oracle_compare.csv" if conventions else "synthetic.csv"
    total = cfg.segments * cfg.rows_per_segment
    if halt_after is not None and not cfg.warm_start < halt_after <= total:
        raise ConfigError(
            f"halt_after must be in ({cfg.warm_start}, {total}], got {halt_after}"
        )

    config_blob = json.dumps(cfg.to_dict(), sort_keys=True, indent=2) + "\n"
    prior_rows: list[tuple] = []
    if resume_from is not None:
        resume_dir = Path(resume_from)
        saved = resume_dir / "config.json"
        if not saved.is_file():
            raise ConfigError(f"{resume_dir}: no config.json to resume from")
        if saved.read_text() != config_blob:
            raise ConfigError(f"{resume_dir}: resume config does not match this run's")
        import csv as _csv

        with open(resume_dir / csv_name, newline="") as fh:
            reader = _csv.reader(fh)
            header = next(reader)
            if header != SYNTH_CSV_COLUMNS:
                raise ConfigError(f"cannot resume: unexpected CSV header {header!r}")
            prior_rows = [tuple(r) for r in reader if r]
    (out / "config.json").write_text(config_blob)

    specs = _synth_learner_specs(cfg, conventions)
    rows: list[tuple] = list(prior_rows)
    meta = []
    states_dir = _ensure_dir(out / ("checkpoints" if halt_after is not None else "states"))
    for seed in cfg.seeds:
        stream = gen_drift_stream(DriftSpec(
            segments=cfg.segments, rows_per_segment=cfg.rows_per_segment,
            n_hypotheses=cfg.n_hypotheses, perturb_scale=cfg.perturb_scale, seed=seed,
        ))
        margins = stream.margins
        stop = halt_after if halt_after is not None else total
        meta.append({
            "seed": seed,
            "boundaries": list(stream.boundaries),
            "segment_probs": [p.probs.tolist() for p in stream.segment_probs],
        })
        log.info("synthetic seed %d: oracle over %d prefixes", seed, total - cfg.warm_start)
        oracle = incremental_oracle(margins, smoothing=cfg.smoothing, start=cfg.warm_start + 1)
        for label, k, conv, factory in specs:
            if resume_from is not None:
                est = load_learner_state(
                    Path(resume_from) / "checkpoints" / _state_name(label, k, conv, seed)
                )
                begin = est.examples_seen_
            else:
                est = factory().start_from_batch(margins[:cfg.warm_start])
                begin = cfg.warm_start
            if begin >= stop:
                raise ConfigError("nothing to process: checkpoint is at or past the stop point")
            traj = est.run_margins(margins[begin:stop])
            ref = oracle.alphas[begin - cfg.warm_start:stop - cfg.warm_start]
            errors = approx_error_series(ref, traj.alphas)
            for i, err in enumerate(errors):
                rows.append((
                    str(begin + 1 + i), label, k, conv, str(seed), repr(float(err))
                ))
            est.save(states_dir / _state_name(label, k, conv, seed))
        log.info("synthetic seed %d done", seed)

    rows.sort(key=_row_sort_key)
    _write_rows_csv(out / csv_name, SYNTH_CSV_COLUMNS, rows)
    with open(out / "synth_meta.json", "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")
    result = {"csv": out / csv_name, "meta": out / "synth_meta.json", "states": states_dir}
    if conventions:
        means = {}
        for conv in conventions:
            errs = [float(r[5]) for r in rows if r[3] == conv]
            means[conv] = sum(errs) / len(errs) if errs else float("nan")
        by_config = {}
        for label, k, conv, _ in specs:
            errs = [float(r[5]) for r in rows if (r[1], r[2], r[3]) == (label, k, conv)]
            by_config[f"K={k} {conv}"] = sum(errs) / len(errs) if errs else float("nan")
        summary = {"mean_approx_error": means, "by_config": by_config}
        with open(out / "summary.json", "w") as fh:
            json.dump(summary, fh, sort_keys=True, indent=2)
            fh.write("\n")
        result["summary"] = out / "summary.json"
    return result


def run_oracle_compare(cfg: ExperimentConfig) -> dict:
    """Both negative-sum conventions over the synthetic suite, side by side."""
    from .ocb import CONVENTIONS

    return run_synthetic(cfg, conventions=CONVENTIONS)


# -- digit streams ------------------------------------------------------------

def _pool_outputs(pool, X) -> np.ndarray:
    """(n, J) matrix of raw hypothesis outputs; fast path for prototype pools."""
    if pool and all(isinstance(h, PrototypeHypothesis) for h in pool):
        P = np.stack([h.prototype for h in pool])
        thetas = np.array([h.theta for h in pool])
        d2 = (X ** 2).sum(axis=1)[:, None] + (P ** 2).sum(axis=1)[None, :] - 2.0 * (X @ P.T)
        np.maximum(d2, 0.0, out=d2)
        return np.where(np.sqrt(d2) >= thetas[None, :], 1, -1).astype(np.int8)
    return np.stack([np.asarray(h.batch(X), dtype=np.int8) for h in pool], axis=1)


def run_mnist(cfg: ExperimentConfig) -> dict:
    """Digit-stream protocol: preselect pools, stream, compare to batch refits.

    Emits one row per (eval point, learner, digit); the one-vs-all error is
    shared by a learner's ten rows at an eval point.
    """
    cfg.validate()
    out = _ensure_dir(Path(cfg.out_dir))
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), sort_keys=True, indent=2) + "\n")
    X_train, y_train = load_mnist_idx(cfg.train_images, cfg.train_labels)
    X_test, y_test = load_mnist_idx(cfg.test_images, cfg.test_labels)
    if cfg.stream_size > X_train.shape[0]:
        raise ConfigError(
            f"stream_size {cfg.stream_size} exceeds training set {X_train.shape[0]}"
        )
    if cfg.preselect_size > cfg.stream_size:
        raise ConfigError("preselect_size must not exceed stream_size")
    X_stream = X_train[:cfg.stream_size]
    y_stream = y_train[:cfg.stream_size]
    warm = cfg.mnist_warm_start

    source = prototype_source() if cfg.hypothesis_kind == "prototype" else stump_source()
    pools_dir = _ensure_dir(out / "pools")
    margins = []       # per digit: (stream, J) margin rows
    test_outputs = []  # per digit: (n_test, J) raw outputs
    test_labels = []   # per digit: +1/-1 vector on the test set
    for digit in range(10):
        y_bin = np.where(y_stream[:cfg.preselect_size] == digit, 1, -1).astype(np.int8)
        examples = [
            LabeledExample(X_stream[i], int(y_bin[i])) for i in range(cfg.preselect_size)
        ]
        pool = preselect_hypotheses(
            examples, source, rounds=cfg.per_digit_hypotheses,
            sample_size=cfg.sample_size, seed=cfg.preselect_seed + digit,
        )
        save_classifier(pools_dir / f"digit_{digit}.txt", pool)
        outputs = _pool_outputs(pool.hypotheses, X_stream)
        y_all = np.where(y_stream == digit, 1, -1).astype(np.int8)
        margins.append((outputs * y_all[:, None]).astype(np.int8))
        test_outputs.append(_pool_outputs(pool.hypotheses, X_test).astype(np.float64))
        test_labels.append(np.where(y_test == digit, 1, -1).astype(np.int8))
        log.info("digit %d: pool of %d selected", digit, cfg.per_digit_hypotheses)

    ocbs = [
        OnlineCoordinateBooster(
            order=cfg.order, smoothing=cfg.smoothing,
            negative_sum_convention=cfg.convention,
        ).start_from_batch(margins[d][:warm])
        for d in range(10)
    ]
    ozas = [
        OzaBooster(mode="averaged", smoothing=cfg.smoothing).start_from_batch(
            margins[d][:warm]
        )
        for d in range(10)
    ]

    eval_points = [n for n in range(cfg.eval_every, cfg.stream_size + 1, cfg.eval_every)
                   if n > warm]
    if not eval_points or eval_points[-1] != cfg.stream_size:
        eval_points.append(cfg.stream_size)
    rows = []

    def evaluate(n: int):
        batch_alphas = [
            fit_weights(margins[d][:n], smoothing=cfg.smoothing).alphas for d in range(10)
        ]
        for name, alphas in (
            ("ocb", [e.current_alphas() for e in ocbs]),
            ("oza-averaged", [e.current_alphas() for e in ozas]),
            ("batch", batch_alphas),
        ):
            scores = np.stack(
                [test_outputs[d] @ alphas[d] for d in range(10)], axis=1
            )
            ova_err = float((ova_predict_scores(scores) != y_test).mean())
            for d in range(10):
                rows.append((
                    str(n), name, str(d),
                    repr(float(test_error(scores[:, d], test_labels[d]))),
                    repr(float(approx_error(batch_alphas[d], alphas[d]))),
                    repr(ova_err),
                ))

    eval_set = set(eval_points)
    for n in range(warm + 1, cfg.stream_size + 1):
        for d in range(10):
            ocbs[d].process_margins(margins[d][n - 1])
            ozas[d].process_margins(margins[d][n - 1])
        if n in eval_set:
            log.info("digit stream: evaluating at %d examples", n)
            evaluate(n)

    states_dir = _ensure_dir(out / "states")
    for d in range(10):
        ocbs[d].save(states_dir / f"ocb-digit{d}.state")
        ozas[d].save(states_dir / f"oza-digit{d}.state")
    _write_rows_csv(out / "mnist.csv", MNIST_CSV_COLUMNS, rows)
    return {"csv": out / "mnist.csv", "pools": pools_dir, "states": states_dir}


def run_experiment(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    if cfg.kind == "synthetic":
        return run_synthetic(cfg)
    if cfg.kind == "oracle_compare":
        return run_oracle_compare(cfg)
    return run_mnist(cfg)


# -- surrogate digit data -----------------------------------------------------

def surrogate_digits(out_dir, n_train: int = 10000, n_test: int = 10000,
                     seed: int = 7, noise: float = 1.0) -> dict:
    """Write a deterministic 10-class stand-in for the digit dataset.

    Each class is a fixed random 28x28 template plus per-image Gaussian pixel
    noise, quantized to bytes through the same IDX files the real data uses.
    Returns the four file paths keyed like the config fields.
    """
    out = _ensure_dir(Path(out_dir))
    rng = np.random.default_rng(seed)
    templates = rng.standard_normal((10, 28 * 28))

    def make(count):
        labels = rng.integers(0, 10, size=count)
        pixels = templates[labels] + noise * rng.standard_normal((count, 28 * 28))
        bytes_ = np.clip(128.0 + 40.0 * pixels, 0, 255).astype(np.uint8)
        return bytes_, labels.astype(np.uint8)

    train_x, train_y = make(n_train)
    test_x, test_y = make(n_test)
    paths = {
        "train_images": out / "train-images-idx3-ubyte",
        "train_labels": out / "train-labels-idx1-ubyte",
        "test_images": out / "test-images-idx3-ubyte",
        "test_labels": out / "test-labels-idx1-ubyte",
    }
    write_idx_images(paths["train_images"], train_x, 28, 28)
    write_idx_labels(paths["train_labels"], train_y)
    write_idx_images(paths["test_images"], test_x, 28, 28)
    write_idx_labels(paths["test_labels"], test_y)
    return {k: str(v) for k, v in paths.items()}
