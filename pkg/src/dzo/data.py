"""LIBSVM parsing, i.i.d. partitioning, and dataset utilities.

Grammar accepted by the parser (one sample per line):

    <label> <idx>:<val> <idx>:<val> ...

`#` starts a comment running to end of line; blank lines are skipped.
Feature indices are 1-based in the file and stored 0-based, strictly
increasing within a line. Labels are normalized to {-1, +1}: the default
table accepts -1/+1, 0/1 (0 -> -1) and the 1/2 convention some mirrors use
(2 -> -1); pass `label_map` to override.
"""
from __future__ import annotations

import hashlib
import json
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .seeding import STREAM_PARTITION, substream

DEFAULT_LABEL_MAP: dict[float, int] = {1.0: 1, -1.0: -1, 0.0: -1, 2.0: -1}


class DataFormatError(ValueError):
    """Malformed LIBSVM input; message carries the 1-based line number."""


@dataclass(frozen=True)
class Sample:
    """One sparse labeled sample: parallel (indices, values) arrays, label in {-1,+1}."""

    indices: np.ndarray
    values: np.ndarray
    label: int

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def dot(self, x: np.ndarray) -> float:
        return float(self.values @ x[self.indices])


@dataclass(frozen=True)
class Dataset:
    d: int
    samples: tuple[Sample, ...]

    def __post_init__(self) -> None:
        if not self.samples:
            raise ValueError("dataset must contain at least one sample")
        max_idx = max((int(s.indices[-1]) for s in self.samples if s.indices.size), default=-1)
        if self.d < max_idx + 1:
            raise ValueError(f"d={self.d} smaller than max feature index + 1 = {max_idx + 1}")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class Partition:
    """Disjoint per-agent lists of sample indices covering the whole dataset."""

    assignments: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.assignments)


def _parse_line(line: str, lineno: int, label_map: dict[float, int]) -> Sample | None:
    text = line.split("#", 1)[0].strip()
    if not text:
        return None
    tokens = text.split()
    try:
        raw_label = float(tokens[0])
    except ValueError:
        raise DataFormatError(f"line {lineno}: unparsable label {tokens[0]!r}") from None
    if raw_label not in label_map:
        raise DataFormatError(f"line {lineno}: label {tokens[0]!r} not in label map")
    label = label_map[raw_label]

    indices: list[int] = []
    values: list[float] = []
    prev = 0
    for tok in tokens[1:]:
        idx_s, sep, val_s = tok.partition(":")
        if not sep:
            raise DataFormatError(f"line {lineno}: malformed token {tok!r}")
        try:
            idx = int(idx_s)
            val = float(val_s)
        except ValueError:
            raise DataFormatError(f"line {lineno}: unparsable number in {tok!r}") from None
        if idx < 1:
            raise DataFormatError(f"line {lineno}: feature index {idx} must be >= 1")
        if idx <= prev:
            raise DataFormatError(
                f"line {lineno}: feature indices must be strictly increasing ({idx} after {prev})"
            )
        prev = idx
        indices.append(idx - 1)
        values.append(val)
    return Sample(
        indices=np.asarray(indices, dtype=np.int64),
        values=np.asarray(values, dtype=np.float64),
        label=label,
    )


def parse_libsvm(
    source: str | bytes | Path | Iterable[str],
    d: int | None = None,
    label_map: dict[float, int] | None = None,
) -> Dataset:
    """Parse LIBSVM text into a Dataset.

    `source` may be a text blob, bytes, a file path, or an iterable of lines.
    `d` overrides the inferred dimension (max observed index); it must not be
    smaller than what the data requires.
    """
    if isinstance(source, Path):
        lines: Iterable[str] = source.read_text().splitlines()
    elif isinstance(source, bytes):
        lines = source.decode("utf-8").splitlines()
    elif isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = source
    lmap = DEFAULT_LABEL_MAP if label_map is None else label_map

    samples = []
    for lineno, line in enumerate(lines, start=1):
        s = _parse_line(line, lineno, lmap)
        if s is not None:
            samples.append(s)
    if not samples:
        raise DataFormatError("no samples found")
    inferred = max((int(s.indices[-1]) + 1 for s in samples if s.indices.size), default=0)
    return Dataset(d=d if d is not None else inferred, samples=tuple(samples))


def load_dataset(path: str | Path, d: int | None = None,
                 label_map: dict[float, int] | None = None) -> Dataset:
    return parse_libsvm(Path(path), d=d, label_map=label_map)


def to_libsvm_lines(ds: Dataset) -> Iterator[str]:
    """Serialize back to LIBSVM lines; floats use repr so a round trip is exact."""
    for s in ds.samples:
        feats = " ".join(f"{int(i) + 1}:{float(v)!r}" for i, v in zip(s.indices, s.values))
        yield f"{'+1' if s.label > 0 else '-1'} {feats}".rstrip()


def partition_iid(ds: Dataset, n: int, seed: int) -> Partition:
    """Seeded uniform shuffle split into n near-equal contiguous blocks."""
    total = len(ds)
    if n < 1:
        raise ValueError("need at least one agent")
    if n > total:
        raise ValueError(f"cannot split {total} samples across {n} agents")
    order = substream(seed, STREAM_PARTITION).permutation(total)
    base, rem = divmod(total, n)
    assignments = []
    pos = 0
    for i in range(n):
        size = base + (1 if i < rem else 0)
        assignments.append(tuple(int(k) for k in order[pos:pos + size]))
        pos += size
    return Partition(assignments=tuple(assignments))


def max_feature_norm(ds: Dataset) -> float:
    """Largest Euclidean feature norm; the hinge-loss Lipschitz constant."""
    return max(s.norm() for s in ds.samples)


def scale_features_maxabs(ds: Dataset) -> Dataset:
    """Per-feature max-abs scaling (off by default everywhere; opt-in flag)."""
    col_max = np.zeros(ds.d)
    for s in ds.samples:
        np.maximum.at(col_max, s.indices, np.abs(s.values))
    col_max[col_max == 0.0] = 1.0
    scaled = tuple(
        Sample(indices=s.indices, values=s.values / col_max[s.indices], label=s.label)
        for s in ds.samples
    )
    return Dataset(d=ds.d, samples=scaled)


def dataset_fingerprint(ds: Dataset) -> str:
    """sha256 over (d, labels, indices, values); keys reference-solver caches."""
    h = hashlib.sha256()
    h.update(str(ds.d).encode())
    for s in ds.samples:
        h.update(np.int64(s.label).tobytes())
        h.update(s.indices.tobytes())
        h.update(s.values.tobytes())
    return h.hexdigest()


def synthetic_sparse_classification(
    d: int,
    n_samples: int,
    nnz_per_sample: int,
    seed: int,
    flip_prob: float = 0.05,
    signal_features: int = 3,
) -> Dataset:
    """Seeded stand-in for the one-hot-encoded binary benchmark files.

    Rows have `nnz_per_sample` unit entries (feature norms mimic one-hot
    data). Each class carries its own block of `signal_features` marker
    columns present in every row of that class, so the clean problem is
    linearly separable inside the unit ball (like the mushrooms task); a
    fraction `flip_prob` of labels is flipped. Used when the real benchmark
    files are not in the local cache.
    """
    if not 1 <= nnz_per_sample <= d:
        raise ValueError("nnz_per_sample must lie in [1, d]")
    if signal_features < 0 or 2 * signal_features > min(nnz_per_sample, d // 2):
        raise ValueError("signal block too large for nnz_per_sample or d")
    rng = substream(seed, 105)
    background = d - 2 * signal_features
    nnz_bg = nnz_per_sample - signal_features
    samples = []
    for _ in range(n_samples):
        label = 1 if rng.random() < 0.5 else -1
        block = np.arange(0, signal_features) if label > 0 else np.arange(
            signal_features, 2 * signal_features
        )
        bg = rng.choice(background, size=nnz_bg, replace=False) + 2 * signal_features
        idx = np.sort(np.concatenate([block, bg])).astype(np.int64)
        if rng.random() < flip_prob:
            label = -label
        samples.append(Sample(indices=idx, values=np.ones(nnz_per_sample), label=label))
    return Dataset(d=d, samples=tuple(samples))


# --- optional HTTP fetch helper ---------------------------------------------

KNOWN_DATASETS = {
    "mushrooms": "mushrooms",
    "a9a": "a9a",
    "w8a": "w8a",
}
DEFAULT_BASE_URL = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/"
LOCK_FILE = "datasets.lock"


def fetch_dataset(name: str, cache_dir: str | Path,
                  base_url: str = DEFAULT_BASE_URL) -> Path:
    """Download a named benchmark file into `cache_dir` and record its sha256
    in the lock file; on later calls verify the cached file against the lock.
    """
    if name not in KNOWN_DATASETS:
        raise ValueError(f"unknown dataset {name!r}; known: {sorted(KNOWN_DATASETS)}")
    cache = Path(cache_dir)
    cache.mkdir(parents=True, exist_ok=True)
    target = cache / f"{name}.libsvm"
    lock_path = cache / LOCK_FILE
    lock = json.loads(lock_path.read_text()) if lock_path.exists() else {}

    if not target.exists():
        url = base_url.rstrip("/") + "/" + KNOWN_DATASETS[name]
        with urllib.request.urlopen(url) as resp:
            payload = resp.read()
        tmp = target.with_suffix(".tmp")
        tmp.write_bytes(payload)
        tmp.replace(target)

    digest = hashlib.sha256(target.read_bytes()).hexdigest()
    if name in lock and lock[name] != digest:
        raise RuntimeError(
            f"checksum mismatch for {name}: lock has {lock[name]}, file has {digest}"
        )
    lock[name] = digest
    tmp_lock = lock_path.with_suffix(".tmp")
    tmp_lock.write_text(json.dumps(lock, indent=2, sort_keys=True) + "\n")
    tmp_lock.replace(lock_path)
    return target
