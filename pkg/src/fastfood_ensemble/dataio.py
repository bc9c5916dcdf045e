"""Feature files, concatenation, subsampling and synthetic data.

The on-disk feature format ("DFEL", little-endian throughout):

    magic            4 bytes  b"DFEL"
    version          u32
    n_samples        u64
    n_dims           u64
    n_classes        u32      0 means unlabeled
    provenance       u32 count, then per entry:
                         u16 name length, UTF-8 name, u64 start, u64 end
    class names      u32 count (0 or n_classes), then per entry:
                         u16 name length, UTF-8 name
    labels           u32 x n_samples   (only when n_classes > 0)
    values           f32 x n_samples x n_dims, row-major

Values are 32-bit on disk and in memory; pooled CNN activations do not
need more precision and files halve in size. A CSV alternative with
header ``dim_0,...,dim_{M-1}[,label]`` is provided for interchange.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConsistencyError,
    CorruptionError,
    FormatError,
    InputError,
    InsufficientSamplesError,
    ParameterError,
    ParseError,
)
from .rng import Stream

MAGIC = b"DFEL"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ProvenanceSpan:
    """Half-open dimension span [start, end) contributed by one source."""

    name: str
    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ParameterError(f"bad provenance span [{self.start}, {self.end})")


@dataclass
class FeatureMatrix:
    """n x M matrix of pooled features with labels and provenance."""

    values: np.ndarray
    labels: np.ndarray | None = None
    class_names: list[str] | None = None
    provenance: list[ProvenanceSpan] = field(default_factory=list)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 2:
            raise InputError("values must be a 2-D matrix")
        if not np.all(np.isfinite(v)):
            raise InputError("values must be finite")
        self.values = v
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int32)
            if lab.shape != (v.shape[0],):
                raise ConsistencyError("labels length must equal n_samples")
            if lab.size and lab.min() < 0:
                raise InputError("labels must be non-negative")
            self.labels = lab
        if not self.provenance:
            self.provenance = [ProvenanceSpan("unknown", 0, v.shape[1])]
        pos = 0
        for span in self.provenance:
            if span.start != pos:
                raise ConsistencyError("provenance spans must partition [0, M)")
            pos = span.end
        if pos != v.shape[1]:
            raise ConsistencyError("provenance spans must partition [0, M)")
        if self.class_names is not None and self.labels is not None:
            if self.labels.size and self.labels.max() >= len(self.class_names):
                raise ConsistencyError("label index outside class_names")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_dims(self) -> int:
        return self.values.shape[1]

    @property
    def n_classes(self) -> int:
        if self.labels is None:
            return 0
        if self.class_names is not None:
            return len(self.class_names)
        return int(self.labels.max()) + 1 if self.labels.size else 0


def _write_text(out: list[bytes], text: str) -> None:
    raw = text.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ParameterError("name too long for u16 length prefix")
    out.append(struct.pack("<H", len(raw)))
    out.append(raw)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CorruptionError("file truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def text(self) -> str:
        (n,) = self.unpack("<H")
        return self.take(n).decode("utf-8")


def write_features(fm: FeatureMatrix, path) -> None:
    """Write ``fm`` in the binary feature format (lossless round trip)."""
    out: list[bytes] = [MAGIC, struct.pack("<I", FORMAT_VERSION)]
    out.append(struct.pack("<QQ", fm.n_samples, fm.n_dims))
    n_classes = fm.n_classes
    out.append(struct.pack("<I", n_classes))
    out.append(struct.pack("<I", len(fm.provenance)))
    for span in fm.provenance:
        _write_text(out, span.name)
        out.append(struct.pack("<QQ", span.start, span.end))
    names = fm.class_names if (fm.class_names and fm.labels is not None) else []
    out.append(struct.pack("<I", len(names)))
    for name in names:
        _write_text(out, name)
    if n_classes > 0:
        out.append(fm.labels.astype("<u4").tobytes())
    out.append(np.ascontiguousarray(fm.values, dtype="<f4").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(out))


def read_features(path) -> FeatureMatrix:
    """Read a binary feature file written by :func:`write_features`."""
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise FormatError("bad magic bytes (not a DFEL feature file)")
    (version,) = r.unpack("<I")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    n_samples, n_dims = r.unpack("<QQ")
    (n_classes,) = r.unpack("<I")
    (n_spans,) = r.unpack("<I")
    spans = []
    for _ in range(n_spans):
        name = r.text()
        start, end = r.unpack("<QQ")
        spans.append(ProvenanceSpan(name, start, end))
    (n_names,) = r.unpack("<I")
    if n_names not in (0, n_classes):
        raise CorruptionError("class-name count disagrees with n_classes")
    class_names = [r.text() for _ in range(n_names)] or None
    labels = None
    if n_classes > 0:
        raw = r.take(4 * n_samples)
        labels = np.frombuffer(raw, dtype="<u4").astype(np.int32)
        if labels.size and labels.max() >= n_classes:
            raise CorruptionError("label outside declared class range")
    raw = r.take(4 * n_samples * n_dims)
    values = np.frombuffer(raw, dtype="<f4").reshape(n_samples, n_dims).copy()
    if r.pos != len(data):
        raise CorruptionError("trailing bytes after feature payload")
    return FeatureMatrix(values=values, labels=labels, class_names=class_names,
                         provenance=spans)


def write_features_csv(fm: FeatureMatrix, path) -> None:
    """CSV export: header dim_0..dim_{M-1}[,label]. Drops provenance/names."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = [f"dim_{j}" for j in range(fm.n_dims)]
        if fm.labels is not None:
            header.append("label")
        w.writerow(header)
        for i in range(fm.n_samples):
            row = [np.format_float_positional(v, unique=True, trim="0")
                   for v in fm.values[i]]
            if fm.labels is not None:
                row.append(str(int(fm.labels[i])))
            w.writerow(row)


def read_features_csv(path) -> FeatureMatrix:
    """CSV import; every row must match the header width."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("empty CSV file")
    header = rows[0]
    labeled = bool(header) and header[-1] == "label"
    n_dims = len(header) - (1 if labeled else 0)
    if n_dims < 1:
        raise ParseError("CSV header declares no feature columns")
    values = np.empty((len(rows) - 1, n_dims), dtype=np.float32)
    labels = np.empty(len(rows) - 1, dtype=np.int32) if labeled else None
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise ParseError(f"CSV row {i + 2} has {len(row)} fields, "
                             f"expected {len(header)}")
        try:
            values[i] = [float(v) for v in row[:n_dims]]
            if labeled:
                labels[i] = int(row[n_dims])
        except ValueError as exc:
            raise ParseError(f"CSV row {i + 2}: {exc}") from None
    return FeatureMatrix(values=values, labels=labels,
                         provenance=[ProvenanceSpan("csv", 0, n_dims)])


def concat_features(parts: list[FeatureMatrix]) -> FeatureMatrix:
    """Concatenate feature matrices along dims, in argument order.

    All parts must have the same sample count; labeled parts must carry
    identical labels. Provenance spans are shifted and preserved.
    """
    if not parts:
        raise InputError("nothing to concatenate")
    n = parts[0].n_samples
    labels = None
    class_names = None
    for p in parts:
        if p.n_samples != n:
            raise ConsistencyError(
                f"sample counts differ: {p.n_samples} vs {n}"
            )
        if p.labels is not None:
            if labels is None:
                labels = p.labels
                class_names = p.class_names
            elif not np.array_equal(p.labels, labels):
                raise ConsistencyError("labeled parts carry different labels")
            elif class_names is None:
                class_names = p.class_names
    spans = []
    offset = 0
    for p in parts:
        for s in p.provenance:
            spans.append(ProvenanceSpan(s.name, s.start + offset, s.end + offset))
        offset += p.n_dims
    values = np.hstack([p.values for p in parts])
    return FeatureMatrix(values=values, labels=labels, class_names=class_names,
                         provenance=spans)


def slice_by_provenance(fm: FeatureMatrix, name: str) -> FeatureMatrix:
    """Extract the columns contributed by provenance entry ``name``."""
    for s in fm.provenance:
        if s.name == name:
            return FeatureMatrix(
                values=fm.values[:, s.start : s.end].copy(),
                labels=fm.labels,
                class_names=fm.class_names,
                provenance=[ProvenanceSpan(s.name, 0, s.end - s.start)],
            )
    raise ConsistencyError(f"no provenance entry named {name!r}")


def stratified_subsample(fm: FeatureMatrix, n_per_class: int, seed: int) -> FeatureMatrix:
    """Exactly ``n_per_class`` rows per class, without replacement.

    Deterministic in ``seed``; the original row order is preserved within
    the selection. A class smaller than ``n_per_class`` is an error, never
    a silent take-all.
    """
    if fm.labels is None:
        raise InputError("subsampling requires labels")
    if n_per_class < 1:
        raise ParameterError(f"n_per_class must be >= 1, got {n_per_class}")
    st = Stream(seed)
    chosen = []
    for cls in np.unique(fm.labels):
        pos = np.nonzero(fm.labels == cls)[0]
        if pos.size < n_per_class:
            raise InsufficientSamplesError(
                f"class {cls} has {pos.size} samples, need {n_per_class}"
            )
        perm = st.permutation(pos.size)
        chosen.append(pos[perm[:n_per_class]])
    idx = np.sort(np.concatenate(chosen))
    return FeatureMatrix(
        values=fm.values[idx].copy(),
        labels=fm.labels[idx].copy(),
        class_names=fm.class_names,
        provenance=list(fm.provenance),
    )


@dataclass(frozen=True)
class SplitSpec:
    """Fractional train/val/test split, optionally stratified."""

    train_fraction: float
    val_fraction: float
    test_fraction: float
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        fr = (self.train_fraction, self.val_fraction, self.test_fraction)
        if any(f < 0 or f > 1 for f in fr):
            raise ParameterError("fractions must lie in [0, 1]")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise ParameterError("fractions must sum to 1")


def split_features(fm: FeatureMatrix, spec: SplitSpec):
    """Split into (train, val, test); val/test may be empty matrices."""
    st = Stream(spec.seed)
    if spec.stratified:
        if fm.labels is None:
            raise InputError("stratified split requires labels")
        groups = [np.nonzero(fm.labels == c)[0] for c in np.unique(fm.labels)]
    else:
        groups = [np.arange(fm.n_samples)]
    buckets = ([], [], [])
    for pos in groups:
        perm = st.permutation(pos.size)
        shuffled = pos[perm]
        n_train = int(spec.train_fraction * pos.size)
        n_val = int(spec.val_fraction * pos.size)
        buckets[0].append(shuffled[:n_train])
        buckets[1].append(shuffled[n_train : n_train + n_val])
        buckets[2].append(shuffled[n_train + n_val :])

    def build(parts):
        idx = np.sort(np.concatenate(parts)) if parts else np.empty(0, np.int64)
        return FeatureMatrix(
            values=fm.values[idx].copy(),
            labels=None if fm.labels is None else fm.labels[idx].copy(),
            class_names=fm.class_names,
            provenance=list(fm.provenance),
        )

    return build(buckets[0]), build(buckets[1]), build(buckets[2])


def synth_mixture(
    n_classes: int, n_per_class: int, m: int, separation: float, seed: int
) -> FeatureMatrix:
    """Gaussian-mixture stand-in for pooled CNN features.

    Class ``k`` has mean ``separation * e_k`` on the first ``n_classes``
    axes and unit isotropic noise; rows are class-major. ``separation``
    may be 0 to produce class-indistinguishable data.
    """
    if n_classes < 2:
        raise ParameterError(f"n_classes must be >= 2, got {n_classes}")
    if m < n_classes:
        raise ParameterError(f"m must be >= n_classes, got {m}")
    if n_per_class < 1:
        raise ParameterError(f"n_per_class must be >= 1, got {n_per_class}")
    if separation < 0:
        raise ParameterError(f"separation must be >= 0, got {separation}")
    st = Stream(seed)
    total = n_classes * n_per_class
    values = st.normals(total * m).reshape(total, m)
    labels = np.repeat(np.arange(n_classes, dtype=np.int32), n_per_class)
    values[np.arange(total), labels] += separation
    return FeatureMatrix(
        values=values.astype(np.float32),
        labels=labels,
        class_names=[f"class{k}" for k in range(n_classes)],
        provenance=[ProvenanceSpan("synth", 0, m)],
    )
