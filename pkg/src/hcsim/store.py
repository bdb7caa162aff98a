"""Device model for the flat-addressable DRAM/NVM tiers and tertiary storage.

Capacities are byte-granular (key-value block semantics, no pages or
fragmentation).  Each tier spreads residents across banks, always filling
the least-occupied bank.  Timing is latency plus size over bandwidth for
the whole object; dynamic energy is charged per 64-byte access unit.
Decimal units throughout (1 GB = 1e9 bytes), matching device datasheets.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum

KB = 10 ** 3
MB = 10 ** 6
GB = 10 ** 9

READ = "read"
WRITE = "write"

SECONDS_PER_DAY = 86_400.0


class Tier(str, Enum):
    DRAM = "dram"
    NVM = "nvm"
    HDD = "hdd"


class StoreError(Exception):
    """Bookkeeping misuse: unknown key, double admission, bad size."""


class InsufficientSpaceError(StoreError):
    """Admission attempted without enough free capacity; evict first."""


@dataclass(frozen=True)
class DeviceParams:
    """Per-device timing, energy, and endurance figures.

    Energies are joules per ``access_unit`` bytes.  Standby power has a
    per-provisioned-GB component plus a capacity-independent one (used
    for the tertiary device).  Endurance is sustainable full-capacity
    writes per day; infinite where wear is not a concern.
    """

    read_latency: float       # s
    write_latency: float      # s
    read_bandwidth: float     # B/s
    write_bandwidth: float    # B/s
    read_energy: float        # J per access unit
    write_energy: float       # J per access unit
    standby_power_per_gb: float = 0.0  # W/GB
    standby_power_fixed: float = 0.0   # W
    endurance_dwpd: float = math.inf
    access_unit: int = 64     # bytes

    def validate(self) -> None:
        for name in ("read_latency", "write_latency", "read_bandwidth",
                     "write_bandwidth"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("read_energy", "write_energy", "standby_power_per_gb",
                     "standby_power_fixed"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.endurance_dwpd <= 0:
            raise ValueError("endurance_dwpd must be positive")
        if self.access_unit < 1:
            raise ValueError("access_unit must be >= 1")


# DDR4-class DRAM module.
DRAM_PARAMS = DeviceParams(
    read_latency=75e-9, write_latency=75e-9,
    read_bandwidth=75 * GB, write_bandwidth=75 * GB,
    read_energy=51.2e-9, write_energy=51.2e-9,
    standby_power_per_gb=1.0,
)

# Optane-class NVM: asymmetric write path, 30 DWPD endurance budget.
NVM_PARAMS = DeviceParams(
    read_latency=10e-6, write_latency=10e-6,
    read_bandwidth=2.2 * GB, write_bandwidth=2.1 * GB,
    read_energy=102.4e-9, write_energy=512e-9,
    standby_power_per_gb=0.1,
    endurance_dwpd=30.0,
)

# Tertiary storage pricing the misses; no dynamic-energy figure is
# modeled for it, only a fixed spindle draw.
HDD_PARAMS = DeviceParams(
    read_latency=5e-3, write_latency=5e-3,
    read_bandwidth=150e6, write_bandwidth=150e6,
    read_energy=0.0, write_energy=0.0,
    standby_power_fixed=10.0,
)

DEFAULT_PARAMS = {Tier.DRAM: DRAM_PARAMS, Tier.NVM: NVM_PARAMS, Tier.HDD: HDD_PARAMS}

DEFAULT_BANK_COUNT = 16


@dataclass(frozen=True)
class TierConfig:
    capacity: float  # bytes; 0 disables the tier, inf for tertiary
    bank_count: int = DEFAULT_BANK_COUNT
    params: DeviceParams | None = None  # None picks the tier default


class TierStore:
    """One memory tier: banks, occupancy, cached ranks, wear counter.

    ``min_rank`` tracks the minimum rank over residents in this tier's
    own rank dimension; it is maintained from cached per-resident ranks
    supplied by the caller (the policy refreshes them whenever a
    resident's statistics change).  Rankless residents (tertiary, LRU
    baselines) simply never feed the rank bookkeeping.
    """

    def __init__(self, tier: Tier, capacity: float, params: DeviceParams,
                 bank_count: int = DEFAULT_BANK_COUNT):
        if bank_count < 1:
            raise ValueError("bank_count must be >= 1")
        params.validate()
        self.tier = tier
        self.capacity = capacity
        self.params = params
        self.banks: list[int] = [0] * bank_count
        self.residents: dict[int, tuple[int, int]] = {}  # key -> (bank, size)
        self.resident_rank: dict[int, float] = {}
        self._rank_heap: list[tuple[float, int]] = []  # lazily invalidated
        self.used = 0
        self.threshold = 0.0
        self.min_rank = math.inf
        self.bytes_written = 0

    # -- capacity ------------------------------------------------------

    @property
    def free(self) -> float:
        return self.capacity - self.used

    @property
    def utilization(self) -> float:
        if self.capacity == 0:
            return 1.0
        if math.isinf(self.capacity):
            return 0.0
        return self.used / self.capacity

    def fits(self, size: int) -> bool:
        return self.free >= size

    def is_empty(self) -> bool:
        return not self.residents

    # -- placement -----------------------------------------------------

    def admit(self, key: int, size: int, rank: float | None = None) -> int:
        """Place a key in the least-occupied bank and return its index."""
        if size <= 0:
            raise StoreError(f"admit size must be positive, got {size}")
        if key in self.residents:
            raise StoreError(f"key {key} already resident in {self.tier.value}")
        if not self.fits(size):
            raise InsufficientSpaceError(
                f"{self.tier.value}: need {size} B, only {self.free} free")
        bank = min(range(len(self.banks)), key=self.banks.__getitem__)
        self.banks[bank] += size
        self.used += size
        self.residents[key] = (bank, size)
        if rank is not None:
            self.resident_rank[key] = rank
            heapq.heappush(self._rank_heap, (rank, key))
            if rank < self.min_rank:
                self.min_rank = rank
        return bank

    def evict(self, key: int) -> int:
        """Remove a resident and return its size."""
        entry = self.residents.pop(key, None)
        if entry is None:
            raise StoreError(f"key {key} not resident in {self.tier.value}")
        bank, size = entry
        self.banks[bank] -= size
        self.used -= size
        rank = self.resident_rank.pop(key, None)
        if rank is not None and rank <= self.min_rank:
            self.recompute_min_rank()
        return size

    def refresh_rank(self, key: int, rank: float) -> None:
        if key not in self.residents:
            raise StoreError(f"key {key} not resident in {self.tier.value}")
        self.resident_rank[key] = rank
        heapq.heappush(self._rank_heap, (rank, key))

    def _live_head(self) -> tuple[float, int] | None:
        heap = self._rank_heap
        while heap:
            rank, key = heap[0]
            if self.resident_rank.get(key) == rank:
                return heap[0]
            heapq.heappop(heap)
        return None

    def peek_lowest_rank(self) -> tuple[int, float] | None:
        """(key, rank) of the lowest-ranked resident, or None."""
        head = self._live_head()
        if head is None:
            return None
        return head[1], head[0]

    def recompute_min_rank(self) -> float:
        head = self._live_head()
        self.min_rank = head[0] if head is not None else math.inf
        # Keep the lazy heap from outgrowing the resident set unboundedly.
        if len(self._rank_heap) > 4 * len(self.resident_rank) + 64:
            self._rank_heap = [(r, k) for k, r in self.resident_rank.items()]
            heapq.heapify(self._rank_heap)
        return self.min_rank

    # -- timing / energy / wear ----------------------------------------

    def service_time(self, op: str, size: int) -> float:
        """Seconds to move one whole object through this device."""
        p = self.params
        if op == READ:
            return p.read_latency + size / p.read_bandwidth
        return p.write_latency + size / p.write_bandwidth

    def access_energy(self, op: str, size: int) -> float:
        """Dynamic joules for one access; writes also accrue wear bytes."""
        units = math.ceil(size / self.params.access_unit)
        if op == READ:
            return units * self.params.read_energy
        self.bytes_written += size
        return units * self.params.write_energy

    def dwpd(self, elapsed: float) -> float:
        """Full-capacity writes per day over the elapsed window."""
        if elapsed <= 0:
            raise ValueError("elapsed must be positive")
        if self.capacity == 0 or math.isinf(self.capacity):
            return 0.0
        return (self.bytes_written / self.capacity) / (elapsed / SECONDS_PER_DAY)

    def standby_power(self) -> float:
        """Provisioned standby draw, independent of occupancy."""
        p = self.params
        per_gb = 0.0
        if not math.isinf(self.capacity):
            per_gb = p.standby_power_per_gb * (self.capacity / GB)
        return per_gb + p.standby_power_fixed

    def check_invariants(self) -> None:
        assert self.used <= self.capacity, \
            f"{self.tier.value}: used {self.used} exceeds capacity {self.capacity}"
        assert self.used == sum(self.banks), \
            f"{self.tier.value}: bank occupancies do not sum to used"
        assert self.used == sum(s for _, s in self.residents.values()), \
            f"{self.tier.value}: resident sizes do not sum to used"
        assert all(b >= 0 for b in self.banks)


def make_tier_store(tier: Tier, config: TierConfig) -> TierStore:
    params = config.params if config.params is not None else DEFAULT_PARAMS[tier]
    return TierStore(tier, config.capacity, params, config.bank_count)


class HybridStore:
    """The three tiers plus the residency index (key -> single tier)."""

    def __init__(self, dram: TierStore, nvm: TierStore, hdd: TierStore):
        self.tiers = {Tier.DRAM: dram, Tier.NVM: nvm, Tier.HDD: hdd}
        self.location: dict[int, Tier] = {}

    @property
    def dram(self) -> TierStore:
        return self.tiers[Tier.DRAM]

    @property
    def nvm(self) -> TierStore:
        return self.tiers[Tier.NVM]

    @property
    def hdd(self) -> TierStore:
        return self.tiers[Tier.HDD]

    def where(self, key: int) -> Tier | None:
        return self.location.get(key)

    def lookup(self, key: int) -> tuple[Tier, int, int] | None:
        """Residency-index view: (tier, bank, size) or None."""
        tier = self.location.get(key)
        if tier is None:
            return None
        bank, size = self.tiers[tier].residents[key]
        return tier, bank, size

    def admit(self, tier: Tier, key: int, size: int,
              rank: float | None = None) -> int:
        if key in self.location:
            raise StoreError(f"key {key} already resident in "
                             f"{self.location[key].value}")
        bank = self.tiers[tier].admit(key, size, rank)
        self.location[key] = tier
        return bank

    def evict(self, key: int) -> tuple[Tier, int]:
        tier = self.location.pop(key, None)
        if tier is None:
            raise StoreError(f"key {key} not resident anywhere")
        size = self.tiers[tier].evict(key)
        return tier, size

    def check_invariants(self) -> None:
        for tier_store in self.tiers.values():
            tier_store.check_invariants()
        by_tier: dict[Tier, set[int]] = {t: set() for t in self.tiers}
        for key, tier in self.location.items():
            by_tier[tier].add(key)
        for tier, store in self.tiers.items():
            assert by_tier[tier] == set(store.residents), \
                f"{tier.value}: residency index out of sync"
