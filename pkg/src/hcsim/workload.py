"""Synthetic key-value workloads under the independent reference model.

A catalogue assigns every object a size (normal, truncated below by
resampling) and a pair of Poisson request rates: reads follow a Zipf law
over the object index, writes follow an independent Zipf law over a
seeded random permutation of the same indices.  Traces are the merged
arrival process of all per-object streams, which is equivalent to a
single Poisson clock at the aggregate rate with each event marked
proportionally to the per-object rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GET = "GET"
PUT = "PUT"
DELETE = "DEL"
OPS = (GET, PUT, DELETE)

TRACE_HEADER = "#hctrace v1"
CATALOGUE_HEADER = "#hccat v1"

# Sub-stream tags so catalogue and trace draws never share RNG state.
_CATALOGUE_STREAM = 0
_TRACE_STREAM = 1


class ConfigError(ValueError):
    """Invalid workload or simulation configuration."""


class TraceFormatError(ValueError):
    """A trace or catalogue file does not match the documented format."""


@dataclass(frozen=True)
class TraceConfig:
    """Parameters of one synthetic workload.

    Sizes are bytes, rates are requests per second.  ``total_rate`` sets
    the Poisson time scale; the default stretches a 25M-request trace
    over roughly one simulated day, which standby-energy and wear
    accounting need.  ``delete_fraction`` is the share of write
    operations issued as DELETE rather than PUT.
    """

    catalogue_size: int
    mean_size: float = 1_000_000.0
    size_stddev: float = 1_000_000.0
    zipf_alpha: float = 0.8
    read_fraction: float = 0.8
    total_requests: int = 100_000
    total_rate: float = 290.0
    seed: int = 0
    min_size: int = 4096
    delete_fraction: float = 0.05

    def validate(self) -> None:
        if self.catalogue_size < 1:
            raise ConfigError("catalogue_size must be >= 1")
        if self.mean_size <= 0:
            raise ConfigError("mean_size must be positive")
        if self.size_stddev < 0:
            raise ConfigError("size_stddev must be nonnegative")
        if self.zipf_alpha <= 0:
            raise ConfigError("zipf_alpha must be positive")
        if not 0.0 <= self.read_fraction <= 1.0:
            raise ConfigError("read_fraction must lie in [0, 1]")
        if self.total_requests < 0:
            raise ConfigError("total_requests must be nonnegative")
        if self.total_rate <= 0:
            raise ConfigError("total_rate must be positive")
        if self.min_size < 1:
            raise ConfigError("min_size must be >= 1")
        if not 0.0 <= self.delete_fraction <= 1.0:
            raise ConfigError("delete_fraction must lie in [0, 1]")
        if self.size_stddev == 0 and self.mean_size < self.min_size:
            raise ConfigError("degenerate size distribution below min_size")


@dataclass(frozen=True)
class ContentDescriptor:
    """One catalogue entry: key doubles as the read-popularity index."""

    key: int
    size: int
    popularity_rank: int
    read_rate: float   # requests/s
    write_rate: float  # requests/s


@dataclass(slots=True)
class RequestEvent:
    timestamp_ns: int
    op: str
    key: int
    size: int

    @property
    def timestamp(self) -> float:
        """Event time in simulated seconds."""
        return self.timestamp_ns * 1e-9

    @property
    def is_read(self) -> bool:
        return self.op == GET


def zipf_weight(rank: int, alpha: float) -> float:
    """Unnormalized popularity weight of the object at a 1-based rank."""
    return float(rank) ** -alpha


def _truncated_normal(rng, mean, stddev, floor, n):
    # Resample below the floor instead of clipping, keeping the upper
    # tail shape intact.
    out = rng.normal(mean, stddev, n)
    bad = out < floor
    while bad.any():
        out[bad] = rng.normal(mean, stddev, int(bad.sum()))
        bad = out < floor
    return out


def build_catalogue(config: TraceConfig) -> list[ContentDescriptor]:
    """Draw the content catalogue for a config, deterministically.

    Read rates over the catalogue sum to read_fraction * total_rate,
    write rates to the complement; the write popularity order is an
    independent random permutation of the read order.
    """
    config.validate()
    n = config.catalogue_size
    rng = np.random.default_rng([config.seed, _CATALOGUE_STREAM])

    sizes = _truncated_normal(rng, config.mean_size, config.size_stddev,
                              config.min_size, n)
    sizes = np.rint(sizes).astype(np.int64)

    ranks = np.arange(1, n + 1, dtype=np.float64)
    read_w = ranks ** -config.zipf_alpha
    read_rates = read_w / read_w.sum() * (config.read_fraction * config.total_rate)

    write_ranks = rng.permutation(n).astype(np.float64) + 1.0
    write_w = write_ranks ** -config.zipf_alpha
    write_rates = write_w / write_w.sum() * ((1.0 - config.read_fraction) * config.total_rate)

    return [
        ContentDescriptor(z + 1, int(sizes[z]), z + 1,
                          float(read_rates[z]), float(write_rates[z]))
        for z in range(n)
    ]


def generate_trace(catalogue: list[ContentDescriptor],
                   config: TraceConfig) -> list[RequestEvent]:
    """Emit ``total_requests`` events from the superposed Poisson process.

    The aggregate clock ticks at ``total_rate``; each tick is marked as a
    read with probability read_fraction (the reads' share of total rate)
    and assigned a key proportionally to the per-object rate on that
    side.  Timestamps are quantized to nanoseconds.
    """
    config.validate()
    if len(catalogue) != config.catalogue_size:
        raise ConfigError("catalogue does not match config")
    n = config.total_requests
    if n == 0:
        return []

    rng = np.random.default_rng([config.seed, _TRACE_STREAM])
    gaps = rng.exponential(1.0 / config.total_rate, n)
    stamps = np.rint(np.cumsum(gaps) * 1e9).astype(np.int64)

    is_read = rng.random(n) < config.read_fraction
    n_read = int(is_read.sum())
    n_write = n - n_read

    keys = np.empty(n, dtype=np.int64)
    if n_read:
        p = np.array([d.read_rate for d in catalogue])
        keys[is_read] = rng.choice(len(catalogue), n_read, p=p / p.sum()) + 1
    if n_write:
        p = np.array([d.write_rate for d in catalogue])
        keys[~is_read] = rng.choice(len(catalogue), n_write, p=p / p.sum()) + 1

    ops = np.where(is_read, GET, PUT)
    if n_write:
        write_idx = np.flatnonzero(~is_read)
        deletes = rng.random(n_write) < config.delete_fraction
        ops[write_idx[deletes]] = DELETE

    size_by_key = np.zeros(len(catalogue) + 1, dtype=np.int64)
    for d in catalogue:
        size_by_key[d.key] = d.size
    sizes = size_by_key[keys]

    return [
        RequestEvent(t, o, k, s)
        for t, o, k, s in zip(stamps.tolist(), ops.tolist(),
                              keys.tolist(), sizes.tolist())
    ]


def unique_content_bytes(trace: list[RequestEvent]) -> int:
    """Total bytes of distinct keys appearing in a trace."""
    seen: dict[int, int] = {}
    for ev in trace:
        if ev.key not in seen:
            seen[ev.key] = ev.size
    return sum(seen.values())


def write_trace(trace: list[RequestEvent], path) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(TRACE_HEADER + "\n")
        for ev in trace:
            f.write(f"{ev.timestamp_ns} {ev.op} {ev.key} {ev.size}\n")


def read_trace(path) -> list[RequestEvent]:
    trace: list[RequestEvent] = []
    with open(path, "r") as f:
        header = f.readline()
        if header.rstrip("\n") != TRACE_HEADER:
            raise TraceFormatError(f"{path}: line 1: missing '{TRACE_HEADER}' header")
        for lineno, line in enumerate(f, start=2):
            parts = line.split()
            if len(parts) != 4:
                raise TraceFormatError(
                    f"{path}: line {lineno}: expected 4 fields, got {len(parts)}")
            ts, op, key, size = parts
            if op not in OPS:
                raise TraceFormatError(f"{path}: line {lineno}: unknown op {op!r}")
            try:
                ev = RequestEvent(int(ts), op, int(key), int(size))
            except ValueError as exc:
                raise TraceFormatError(f"{path}: line {lineno}: {exc}") from None
            trace.append(ev)
    return trace


def write_catalogue(catalogue: list[ContentDescriptor], path) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(CATALOGUE_HEADER + "\n")
        for d in catalogue:
            f.write(f"{d.key} {d.size} {d.read_rate!r} {d.write_rate!r}\n")


def read_catalogue(path) -> list[ContentDescriptor]:
    out: list[ContentDescriptor] = []
    with open(path, "r") as f:
        header = f.readline()
        if header.rstrip("\n") != CATALOGUE_HEADER:
            raise TraceFormatError(f"{path}: line 1: missing '{CATALOGUE_HEADER}' header")
        for lineno, line in enumerate(f, start=2):
            parts = line.split()
            if len(parts) != 4:
                raise TraceFormatError(
                    f"{path}: line {lineno}: expected 4 fields, got {len(parts)}")
            try:
                key, size = int(parts[0]), int(parts[1])
                rr, wr = float(parts[2]), float(parts[3])
            except ValueError as exc:
                raise TraceFormatError(f"{path}: line {lineno}: {exc}") from None
            out.append(ContentDescriptor(key, size, key, rr, wr))
    return out
