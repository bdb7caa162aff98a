"""Accumulated run metrics and the cost model.

Every trace event is attributed to exactly one serving bucket: dram,
nvm, or miss (served by tertiary storage).  Migrations and cache fills
are device work, not request service: they add energy, wear, and
background device time, but never touch the request counters or the
request latency sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .store import READ, WRITE, GB, TierStore

DRAM_BUCKET = "dram"
NVM_BUCKET = "nvm"
MISS_BUCKET = "miss"
BUCKETS = (DRAM_BUCKET, NVM_BUCKET, MISS_BUCKET)


@dataclass(frozen=True)
class CostModel:
    """Purchase-cost and lifetime figures for the cost-benefit ratio."""

    cost_per_gb_dram: float = 8.0  # DRAM runs ~8x NVM per bit
    cost_per_gb_nvm: float = 1.0
    lifetime_dram_years: float = 5.0
    lifetime_nvm_years: float = 5.0

    def validate(self) -> None:
        if self.cost_per_gb_dram <= 0 or self.cost_per_gb_nvm <= 0:
            raise ValueError("costs must be positive")
        if self.lifetime_dram_years <= 0 or self.lifetime_nvm_years < 0:
            raise ValueError("lifetimes must be positive")


def nvm_lifetime_years(measured_dwpd: float, endurance_dwpd: float,
                       calendar_years: float) -> float:
    """Wear-implied lifetime: calendar life shortened once the measured
    write pressure exceeds the device's endurance budget."""
    if measured_dwpd <= 0 or math.isinf(endurance_dwpd):
        return calendar_years
    return calendar_years * min(1.0, endurance_dwpd / measured_dwpd)


class SimMetrics:
    """Mutable per-run counters plus derived-report helpers."""

    def __init__(self):
        self.reads = {b: 0 for b in BUCKETS}
        self.writes = {b: 0 for b in BUCKETS}
        self.read_bytes = {b: 0 for b in BUCKETS}
        self.write_bytes = {b: 0 for b in BUCKETS}
        self.latency_sum = 0.0        # request service time, seconds
        self.dynamic_energy = 0.0     # joules, requests + migrations
        self.migration_seconds = 0.0  # device time off the request path
        self.migration_counts: dict[str, int] = {}
        self.total_events = 0
        self.elapsed = 0.0            # last event timestamp, seconds
        self.unique_keys = 0
        self.unique_bytes = 0
        self.device_bytes_written: dict[str, int] = {}
        self.standby_power = 0.0
        self.nvm_dwpd = 0.0
        self.nvm_endurance_dwpd = math.inf

    # -- recording -------------------------------------------------------

    def serve(self, bucket: str, device: TierStore, is_read: bool,
              size: int) -> None:
        """Charge one request to its serving bucket and device."""
        op = READ if is_read else WRITE
        self.latency_sum += device.service_time(op, size)
        self.dynamic_energy += device.access_energy(op, size)
        if is_read:
            self.reads[bucket] += 1
            self.read_bytes[bucket] += size
        else:
            self.writes[bucket] += 1
            self.write_bytes[bucket] += size
        self.total_events += 1

    def migrate(self, src: TierStore | None, dst: TierStore, size: int,
                label: str) -> None:
        """Charge one object move: read on the source, write on the
        destination.  Fills pass src=None (the data is already in
        flight from the miss that triggered them)."""
        seconds = 0.0
        if src is not None:
            seconds += src.service_time(READ, size)
            self.dynamic_energy += src.access_energy(READ, size)
        seconds += dst.service_time(WRITE, size)
        self.dynamic_energy += dst.access_energy(WRITE, size)
        self.migration_seconds += seconds
        self.migration_counts[label] = self.migration_counts.get(label, 0) + 1

    def note_first_sighting(self, key: int, size: int) -> None:
        self.unique_keys += 1
        self.unique_bytes += size

    def finalize(self, store) -> None:
        """Snapshot device-level counters once the event loop is done."""
        self.device_bytes_written = {
            tier.value: tier_store.bytes_written
            for tier, tier_store in store.tiers.items()
        }
        self.standby_power = sum(t.standby_power() for t in store.tiers.values())
        self.nvm_endurance_dwpd = store.nvm.params.endurance_dwpd
        if self.elapsed > 0:
            self.nvm_dwpd = store.nvm.dwpd(self.elapsed)

    # -- derived ----------------------------------------------------------

    @property
    def total_reads(self) -> int:
        return sum(self.reads.values())

    @property
    def total_writes(self) -> int:
        return sum(self.writes.values())

    def read_fractions(self) -> dict[str, float | None]:
        total = self.total_reads
        if total == 0:
            return {b: None for b in BUCKETS}
        return {b: self.reads[b] / total for b in BUCKETS}

    def write_fractions(self) -> dict[str, float | None]:
        total = self.total_writes
        if total == 0:
            return {b: None for b in BUCKETS}
        return {b: self.writes[b] / total for b in BUCKETS}

    def avg_read_size(self) -> dict[str, float | None]:
        return {b: self.read_bytes[b] / self.reads[b] if self.reads[b] else None
                for b in BUCKETS}

    def avg_write_size(self) -> dict[str, float | None]:
        return {b: self.write_bytes[b] / self.writes[b] if self.writes[b] else None
                for b in BUCKETS}

    def avg_served_size(self) -> dict[str, float | None]:
        out: dict[str, float | None] = {}
        for b in BUCKETS:
            n = self.reads[b] + self.writes[b]
            out[b] = (self.read_bytes[b] + self.write_bytes[b]) / n if n else None
        return out

    def avg_access_latency(self) -> float | None:
        if self.total_events == 0:
            return None
        return self.latency_sum / self.total_events

    def avg_power(self) -> float | None:
        """Dynamic energy over elapsed time plus provisioned standby."""
        if self.elapsed <= 0:
            return None
        return self.dynamic_energy / self.elapsed + self.standby_power

    def check_conservation(self, expected_events: int) -> None:
        assert self.total_reads + self.total_writes == expected_events, \
            "served counters do not cover the trace"
