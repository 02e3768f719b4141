"""File formats: margin CSV, trajectory CSV, IDX image/label files,
state-snapshot headers, and classifier files.

Float values are written with repr(), which round-trips float64 exactly; that
is what makes checkpoint/resume and rerun comparisons exact rather than
approximate.
"""

from __future__ import annotations

import csv
import struct

import numpy as np

from .core import AlphaTrajectory, StrongClassifier
from .errors import DataFormatError
from .validation import as_margin_matrix
from .weak import DecisionStump, PrototypeHypothesis, normalize_images

IDX_IMAGE_MAGIC = 2051
IDX_LABEL_MAGIC = 2049

CLASSIFIER_FORMAT = "ocboost-classifier v1"


# -- margin matrix CSV --------------------------------------------------------

def write_margin_csv(path, margins):
    m = as_margin_matrix(margins)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"m_{j}" for j in range(1, m.shape[1] + 1)])
        writer.writerows(m.tolist())


def read_margin_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty margin CSV") from None
        expected = [f"m_{j}" for j in range(1, len(header) + 1)]
        if header != expected:
            raise DataFormatError(
                f"{path}: bad margin CSV header {header!r}, expected {expected!r}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                values = [int(v) for v in row]
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
            if any(v not in (-1, 1) for v in values):
                raise DataFormatError(f"{path}: line {lineno}: margins must be 1 or -1")
            rows.append(values)
    if not rows:
        raise DataFormatError(f"{path}: margin CSV has no data rows")
    return np.array(rows, dtype=np.int8)


# -- alpha trajectory CSV -----------------------------------------------------

def write_trajectory_csv(path, trajectory: AlphaTrajectory):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n"] + [f"alpha_{j}" for j in range(1, trajectory.n_coordinates + 1)])
        for i in range(len(trajectory)):
            writer.writerow([trajectory.start + i] + [repr(float(v)) for v in trajectory.alphas[i]])


def read_trajectory_csv(path) -> AlphaTrajectory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty trajectory CSV") from None
        expected = ["n"] + [f"alpha_{j}" for j in range(1, len(header))]
        if header != expected:
            raise DataFormatError(f"{path}: bad trajectory CSV header {header!r}")
        ns, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                ns.append(int(row[0]))
                rows.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise DataFormatError(f"{path}: trajectory CSV has no data rows")
    start = ns[0]
    if ns != list(range(start, start + len(ns))):
        raise DataFormatError(f"{path}: trajectory indices must be consecutive")
    return AlphaTrajectory(start=start, alphas=np.array(rows))


# -- state snapshots ----------------------------------------------------------

def read_state_header(path, expected_kind: str) -> tuple[dict, list[str]]:
    """Parse the versioned snapshot header; returns (header dict, value rows)."""
    from .ocb import STATE_FORMAT

    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != STATE_FORMAT:
        raise DataFormatError(
            f"{path}: not a state snapshot (missing '{STATE_FORMAT}' header)"
        )
    header: dict[str, str] = {}
    body_at = None
    for i, line in enumerate(lines[1:], start=1):
        # header lines are key=value; repr'd float rows never contain '='
        if "=" not in line:
            body_at = i
            break
        key, _, value = line.partition("=")
        header[key] = value
    if header.get("kind") != expected_kind:
        raise DataFormatError(
            f"{path}: snapshot kind {header.get('kind')!r}, expected {expected_kind!r}"
        )
    if body_at is None:
        raise DataFormatError(f"{path}: state snapshot has no value rows")
    return header, [ln for ln in lines[body_at:] if ln]


def load_learner_state(path):
    """Load either learner kind from a snapshot, dispatching on its header."""
    from .ocb import STATE_FORMAT, OnlineCoordinateBooster
    from .oza import OzaBooster

    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if first != STATE_FORMAT:
            raise DataFormatError(
                f"{path}: not a state snapshot (missing '{STATE_FORMAT}' header)"
            )
        kind_line = fh.readline().rstrip("\n")
    if kind_line == "kind=ocb":
        return OnlineCoordinateBooster.load(path)
    if kind_line == "kind=oza":
        return OzaBooster.load(path)
    raise DataFormatError(f"{path}: unknown snapshot kind line {kind_line!r}")


# -- IDX image/label files ----------------------------------------------------

def _read_be32(fh, path, what):
    data = fh.read(4)
    if len(data) != 4:
        raise DataFormatError(
            f"{path}: truncated while reading {what} at byte offset {fh.tell() - len(data)}"
        )
    return struct.unpack(">i", data)[0]


def read_idx_images(path) -> np.ndarray:
    """Read an IDX image file into a (count, rows*cols) uint8 array."""
    with open(path, "rb") as fh:
        magic = _read_be32(fh, path, "magic number")
        if magic != IDX_IMAGE_MAGIC:
            raise DataFormatError(
                f"{path}: bad image magic {magic} at byte offset 0, expected {IDX_IMAGE_MAGIC}"
            )
        count = _read_be32(fh, path, "image count")
        rows = _read_be32(fh, path, "row count")
        cols = _read_be32(fh, path, "column count")
        if count < 1 or rows < 1 or cols < 1:
            raise DataFormatError(f"{path}: non-positive dimensions ({count}, {rows}, {cols})")
        payload = fh.read(count * rows * cols + 1)
    if len(payload) < count * rows * cols:
        raise DataFormatError(
            f"{path}: truncated pixel data at byte offset {16 + len(payload)}, "
            f"expected {count * rows * cols} bytes"
        )
    if len(payload) > count * rows * cols:
        raise DataFormatError(f"{path}: trailing bytes after pixel data")
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows * cols)


def read_idx_labels(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = _read_be32(fh, path, "magic number")
        if magic != IDX_LABEL_MAGIC:
            raise DataFormatError(
                f"{path}: bad label magic {magic} at byte offset 0, expected {IDX_LABEL_MAGIC}"
            )
        count = _read_be32(fh, path, "label count")
        if count < 1:
            raise DataFormatError(f"{path}: non-positive label count {count}")
        payload = fh.read(count + 1)
    if len(payload) < count:
        raise DataFormatError(
            f"{path}: truncated label data at byte offset {8 + len(payload)}, "
            f"expected {count} bytes"
        )
    if len(payload) > count:
        raise DataFormatError(f"{path}: trailing bytes after label data")
    return np.frombuffer(payload, dtype=np.uint8)


def write_idx_images(path, images: np.ndarray, rows: int, cols: int):
    imgs = np.asarray(images, dtype=np.uint8)
    if imgs.ndim != 2 or imgs.shape[1] != rows * cols:
        raise ValueError(f"images must be (n, {rows * cols}), got {imgs.shape}")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">iiii", IDX_IMAGE_MAGIC, imgs.shape[0], rows, cols))
        fh.write(imgs.tobytes())


def write_idx_labels(path, labels: np.ndarray):
    lab = np.asarray(labels, dtype=np.uint8)
    if lab.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {lab.shape}")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">ii", IDX_LABEL_MAGIC, lab.size))
        fh.write(lab.tobytes())


def load_mnist_idx(images_path, labels_path) -> tuple[np.ndarray, np.ndarray]:
    """Load an IDX image/label pair into normalized features and digit labels.

    Pixels are scaled to [0, 1] and then each image is standardized to zero
    mean and unit variance.  Image and label counts must agree.
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DataFormatError(
            f"{images_path} has {images.shape[0]} images but "
            f"{labels_path} has {labels.shape[0]} labels"
        )
    X = normalize_images(images.astype(np.float64) / 255.0)
    return X, labels.astype(np.int64)


# -- classifier files ---------------------------------------------------------

def save_classifier(path, classifier: StrongClassifier):
    """Versioned text format covering stump and prototype hypotheses."""
    lines = [CLASSIFIER_FORMAT, f"hypotheses={len(classifier.hypotheses)}"]
    for alpha, hyp in zip(classifier.alphas, classifier.hypotheses):
        if isinstance(hyp, DecisionStump):
            lines.append(
                f"stump {float(alpha)!r} {int(hyp.feature)} "
                f"{float(hyp.threshold)!r} {int(hyp.polarity)}"
            )
        elif isinstance(hyp, PrototypeHypothesis):
            coords = " ".join(repr(float(v)) for v in hyp.prototype)
            lines.append(f"prototype {float(alpha)!r} {float(hyp.theta)!r} {coords}")
        else:
            raise ValueError(f"cannot serialize hypothesis type {type(hyp).__name__}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_classifier(path) -> StrongClassifier:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != CLASSIFIER_FORMAT:
        raise DataFormatError(f"{path}: not a classifier file")
    if len(lines) < 2 or not lines[1].startswith("hypotheses="):
        raise DataFormatError(f"{path}: missing hypothesis count")
    count = int(lines[1].partition("=")[2])
    if len(lines) != 2 + count:
        raise DataFormatError(f"{path}: expected {count} hypothesis lines, got {len(lines) - 2}")
    alphas, hyps = [], []
    for lineno, line in enumerate(lines[2:], start=3):
        parts = line.split()
        try:
            if parts[0] == "stump" and len(parts) == 5:
                alphas.append(float(parts[1]))
                hyps.append(DecisionStump(
                    feature=int(parts[2]), threshold=float(parts[3]), polarity=int(parts[4])
                ))
            elif parts[0] == "prototype" and len(parts) >= 4:
                alphas.append(float(parts[1]))
                hyps.append(PrototypeHypothesis(
                    prototype=np.array([float(v) for v in parts[3:]]), theta=float(parts[2])
                ))
            else:
                raise DataFormatError(f"{path}: line {lineno}: unknown hypothesis line")
        except (ValueError, IndexError) as exc:
            raise DataFormatError(f"{path}: line {lineno}: {exc}") from exc
    return StrongClassifier(hypotheses=tuple(hyps), alphas=np.array(alphas))
