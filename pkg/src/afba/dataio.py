"""LIBSVM sparse text format: parsing, writing, and train/test splitting.

Each non-empty line reads ``<label> <idx>:<val> <idx>:<val> ...`` with
1-based, strictly increasing indices. Binary label sets are mapped to
``{-1, +1}`` with the numerically smaller original label sent to -1.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "SparseDataset",
    "LibsvmFormatError",
    "parse_libsvm",
    "load_libsvm",
    "to_libsvm",
    "split",
]


class LibsvmFormatError(ValueError):
    """Malformed LIBSVM input. ``line`` is the 1-based physical line number."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


@dataclass(frozen=True)
class SparseDataset:
    """Labeled sparse samples.

    ``samples`` is a tuple of ``(label, ((index, value), ...))`` with
    labels in ``{-1, +1}`` and 1-based increasing indices. Implicit zeros
    are never stored.
    """

    samples: tuple
    num_features: int

    def __len__(self):
        return len(self.samples)

    @property
    def labels(self):
        return np.array([s[0] for s in self.samples], dtype=np.int64)

    def to_dense(self, num_features=None):
        n = self.num_features if num_features is None else int(num_features)
        X = np.zeros((len(self.samples), n))
        for i, (_, feats) in enumerate(self.samples):
            for j, v in feats:
                X[i, j - 1] = v
        return X

    def subset(self, indices):
        return SparseDataset(tuple(self.samples[i] for i in indices), self.num_features)

    def with_num_features(self, n):
        if n < self.num_features:
            raise ValueError("cannot shrink the feature dimension")
        return replace(self, num_features=int(n))


def _parse_label(tok, lineno):
    try:
        v = float(tok)
    except ValueError:
        raise LibsvmFormatError(lineno, f"bad label {tok!r}") from None
    if not math.isfinite(v):
        raise LibsvmFormatError(lineno, f"non-finite label {tok!r}")
    return v


def _parse_feature(tok, lineno):
    idx, sep, val = tok.partition(":")
    if not sep or not idx or not val:
        raise LibsvmFormatError(lineno, f"malformed feature token {tok!r}")
    if not idx.isdigit() or not idx.isascii():
        raise LibsvmFormatError(lineno, f"bad feature index {idx!r}")
    j = int(idx)
    if j < 1:
        raise LibsvmFormatError(lineno, f"feature index must be >= 1, got {j}")
    try:
        v = float(val)
    except ValueError:
        raise LibsvmFormatError(lineno, f"bad feature value {val!r}") from None
    if not math.isfinite(v):
        raise LibsvmFormatError(lineno, f"non-finite feature value {val!r}")
    return j, v


def _label_map(raw, first_line):
    distinct = sorted(set(raw))
    if len(distinct) > 2:
        raise LibsvmFormatError(
            first_line, f"label set {distinct} is not binary"
        )
    if len(distinct) == 2:
        lo, hi = distinct
        return {lo: -1, hi: 1}
    (only,) = distinct
    if only in (1.0, -1.0):
        return {only: int(only)}
    if only == 0.0:
        return {0.0: -1}
    raise LibsvmFormatError(first_line, f"cannot infer the class of single label {only:g}")


def parse_libsvm(data, num_features=None):
    """Parse LIBSVM text (``str`` or ``bytes``) into a :class:`SparseDataset`.

    Raises :class:`LibsvmFormatError` carrying the line number on malformed
    tokens, non-increasing indices, non-finite values, or a non-binary
    label set. ``num_features`` declares the dimension explicitly; by
    default it is the largest index seen.
    """
    if isinstance(data, str):
        lines = data.split("\n")
    else:
        lines = bytes(data).split(b"\n")
    raw = []
    max_idx = 0
    first_line = None
    for lineno, line in enumerate(lines, start=1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError:
                raise LibsvmFormatError(lineno, "line is not valid UTF-8") from None
        toks = line.split()
        if not toks:
            continue
        if first_line is None:
            first_line = lineno
        label = _parse_label(toks[0], lineno)
        feats = []
        prev = 0
        for tok in toks[1:]:
            j, v = _parse_feature(tok, lineno)
            if j <= prev:
                raise LibsvmFormatError(lineno, f"feature indices not increasing ({prev} then {j})")
            prev = j
            feats.append((j, v))
        max_idx = max(max_idx, prev)
        raw.append((label, tuple(feats), lineno))
    if not raw:
        raise LibsvmFormatError(len(lines), "no samples found")
    mapping = _label_map([r[0] for r in raw], first_line)
    if num_features is None:
        num_features = max_idx
    elif num_features < max_idx:
        raise LibsvmFormatError(
            next(r[2] for r in raw if r[1] and r[1][-1][0] > num_features),
            f"feature index exceeds declared dimension {num_features}",
        )
    samples = tuple((mapping[lab], feats) for lab, feats, _ in raw)
    return SparseDataset(samples, int(num_features))


def load_libsvm(path, num_features=None):
    with open(path, "rb") as fh:
        return parse_libsvm(fh.read(), num_features=num_features)


def to_libsvm(ds):
    """Serialize to LIBSVM text; ``parse_libsvm(to_libsvm(ds))`` reproduces ``ds``."""
    out = []
    for label, feats in ds.samples:
        parts = ["+1" if label > 0 else "-1"]
        parts.extend(f"{j}:{v!r}" for j, v in feats)
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def split(ds, train_count, seed=0):
    """Deterministic ``(train, test)`` partition.

    ``seed == 0`` keeps file order (first ``train_count`` samples train);
    any other seed shuffles with ``numpy.random.default_rng(seed)`` first.
    """
    n = len(ds)
    train_count = int(train_count)
    if not 0 < train_count < n:
        raise ValueError(f"train_count must be in (0, {n}), got {train_count}")
    order = np.arange(n) if seed == 0 else np.random.default_rng(seed).permutation(n)
    return ds.subset(order[:train_count]), ds.subset(order[train_count:])
