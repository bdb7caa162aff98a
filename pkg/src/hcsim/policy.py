"""Hierarchical rank-threshold caching policy for the hybrid store.

Every content carries two desirability ranks derived from its observed
read count, write count, and size: the DRAM rank rewards popular,
write-hot, small objects; the NVM rank rewards popular, write-cold
objects.  Admission and eviction are gated by each tier's
rank-threshold product (utilization-derived threshold times the
minimum resident rank), evictions run batched every ``eviction_interval``
requests over the contents touched since the previous batch, and all
statistics reset every ``reset_interval`` simulated seconds, purging
contents untouched for the whole elapsed window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .metrics import DRAM_BUCKET, MISS_BUCKET, NVM_BUCKET, SimMetrics
from .store import MB, HybridStore, Tier, TierStore
from .workload import DELETE, GET, PUT, ConfigError, RequestEvent

# Ranks use megabyte size units so threshold products stay comparable
# across configurations; ranks are scale-free under a common unit.
RANK_SIZE_UNIT = float(MB)

_BUCKET_OF = {Tier.DRAM: DRAM_BUCKET, Tier.NVM: NVM_BUCKET, Tier.HDD: MISS_BUCKET}


@dataclass(slots=True)
class ContentStats:
    """Online counters for one known content.

    ``location`` is the tier currently holding the object; None means
    absent (never seen, or deleted).  Counters move only on request
    arrival for this key and at the periodic reset.
    """

    key: int
    size: int
    reads: float = 0.0
    writes: float = 0.0
    last_access: float = 0.0
    location: Tier | None = None


@dataclass(frozen=True)
class PolicyConfig:
    """Tuning knobs of the hierarchical policy.

    ``write_exponent`` is the write-awareness dial (0 disables it);
    ``eviction_interval`` is in requests; ``reset_interval`` is in
    simulated seconds, None derives the default (the span of 1e6
    requests at the trace rate) and inf disables resets entirely.
    """

    name: str = "hgreedy"
    write_exponent: float = 1.0
    eviction_interval: int = 1000
    reset_interval: float | None = None
    threshold_knee: float = 0.5
    delete_write_weight: float = 1.0

    def validate(self) -> None:
        if self.write_exponent < 0:
            raise ConfigError("write_exponent must be nonnegative")
        if self.eviction_interval < 1:
            raise ConfigError("eviction_interval must be >= 1")
        if self.reset_interval is not None and self.reset_interval <= 0:
            raise ConfigError("reset_interval must be positive")
        if not 0.0 <= self.threshold_knee <= 1.0:
            raise ConfigError("threshold_knee must lie in [0, 1]")
        if self.delete_write_weight < 0:
            raise ConfigError("delete_write_weight must be nonnegative")


class RankPair(NamedTuple):
    dram_rank: float
    nvm_rank: float


def rank_from_counts(reads: float, writes: float, size: int,
                     write_exponent: float) -> RankPair:
    """Rank pair from raw counters; both counts clamp at 1 so content
    that was never read (or never written) stays rankable."""
    s = size / RANK_SIZE_UNIT
    p = reads if reads > 1.0 else 1.0
    w = writes if writes > 1.0 else 1.0
    wh = w ** write_exponent
    return RankPair(p * wh / s, p / (wh * s))


def get_rank(stats: ContentStats, write_exponent: float) -> RankPair:
    return rank_from_counts(stats.reads, stats.writes, stats.size,
                            write_exponent)


def update_threshold(tier: TierStore, knee: float = 0.5) -> float:
    """Utilization-derived admission threshold: zero below the knee so a
    cold tier accepts everything, the utilization itself above it."""
    u = tier.utilization
    tier.threshold = 0.0 if u < knee else u
    return tier.threshold


def rank_threshold_product(tier: TierStore) -> float:
    """Admission/eviction gate; zero while the tier holds nothing ranked
    so the first admission always passes."""
    if math.isinf(tier.min_rank):
        return 0.0
    return tier.threshold * tier.min_rank


class HGreedyPolicy:
    """Online hierarchical policy; pass ``profile`` to rank from known
    whole-trace totals instead of the live counters (the clairvoyant
    variant, which also disables the periodic reset)."""

    def __init__(self, store: HybridStore, metrics: SimMetrics,
                 config: PolicyConfig,
                 profile: dict[int, tuple[int, int]] | None = None,
                 reset_interval: float = math.inf):
        config.validate()
        self.store = store
        self.metrics = metrics
        self.config = config
        self.profile = profile
        self.reset_interval = math.inf if profile is not None else reset_interval
        self.stats: dict[int, ContentStats] = {}
        self.last_served: str | None = None
        self._updated: dict[int, None] = {}
        self._since_evictions = 0
        self._last_reset = 0.0

    # -- ranking ---------------------------------------------------------

    def content_rank(self, st: ContentStats) -> RankPair:
        h = self.config.write_exponent
        if self.profile is None:
            return rank_from_counts(st.reads, st.writes, st.size, h)
        reads, writes = self.profile.get(st.key, (0, 0))
        return rank_from_counts(reads, writes, st.size, h)

    # -- per-event driver --------------------------------------------------

    def process(self, event: RequestEvent) -> None:
        """One main-loop cycle: serve the request, refresh thresholds,
        then run the batched eviction pass and the periodic reset when
        their intervals come due."""
        self.on_request(event)
        knee = self.config.threshold_knee
        update_threshold(self.store.dram, knee)
        update_threshold(self.store.nvm, knee)
        self._since_evictions += 1
        if self._since_evictions >= self.config.eviction_interval:
            self.run_evictions(self._updated)
            self._updated = {}
            self._since_evictions = 0
        now = event.timestamp
        if now - self._last_reset >= self.reset_interval:
            self.periodic_reset(now)

    # -- request handling --------------------------------------------------

    def on_request(self, event: RequestEvent) -> None:
        key = event.key
        st = self.stats.get(key)
        if st is None:
            st = ContentStats(key, event.size)
            self.stats[key] = st
            self.metrics.note_first_sighting(key, event.size)
        op = event.op
        if op == GET:
            st.reads += 1.0
        elif op == PUT:
            st.writes += 1.0
        else:
            st.writes += self.config.delete_write_weight
        st.last_access = event.timestamp
        self._updated[key] = None

        store = self.store
        metrics = self.metrics
        loc = st.location
        size = event.size

        if op == GET:
            if loc is Tier.DRAM or loc is Tier.NVM:
                metrics.serve(_BUCKET_OF[loc], store.tiers[loc], True, size)
                self.last_served = _BUCKET_OF[loc]
            else:
                # Served by tertiary, then handed to the admission rule.
                metrics.serve(MISS_BUCKET, store.hdd, True, size)
                self.last_served = MISS_BUCKET
                if loc is Tier.HDD:
                    store.evict(key)
                tier = self.allocate_store(st)
                if tier is not Tier.HDD:
                    metrics.migrate(None, store.tiers[tier], st.size,
                                    f"fill->{tier.value}")
        elif op == PUT:
            if loc is Tier.DRAM or loc is Tier.NVM:
                metrics.serve(_BUCKET_OF[loc], store.tiers[loc], False, size)
                self.last_served = _BUCKET_OF[loc]
            else:
                if loc is Tier.HDD:
                    store.evict(key)
                tier = self.allocate_store(st)
                bucket = _BUCKET_OF[tier]
                metrics.serve(bucket, store.tiers[tier], False, size)
                self.last_served = bucket
        else:  # DELETE drops the pair from wherever it lives
            if loc is Tier.DRAM or loc is Tier.NVM:
                metrics.serve(_BUCKET_OF[loc], store.tiers[loc], False, size)
                self.last_served = _BUCKET_OF[loc]
                store.evict(key)
            else:
                metrics.serve(MISS_BUCKET, store.hdd, False, size)
                self.last_served = MISS_BUCKET
                if loc is Tier.HDD:
                    store.evict(key)
            st.location = None

    def allocate_store(self, st: ContentStats) -> Tier:
        """Pick the store for a non-resident content and install it.

        DRAM is tried first, then NVM, each requiring the content's rank
        to clear the tier's rank-threshold product and the object to fit
        without eviction; tertiary accepts everything else.
        """
        dram_rank, nvm_rank = self.content_rank(st)
        store = self.store
        dram = store.dram
        if dram.fits(st.size) and dram_rank > rank_threshold_product(dram):
            store.admit(Tier.DRAM, st.key, st.size, dram_rank)
            st.location = Tier.DRAM
            return Tier.DRAM
        nvm = store.nvm
        if nvm.fits(st.size) and nvm_rank > rank_threshold_product(nvm):
            store.admit(Tier.NVM, st.key, st.size, nvm_rank)
            st.location = Tier.NVM
            return Tier.NVM
        store.admit(Tier.HDD, st.key, st.size)
        st.location = Tier.HDD
        return Tier.HDD

    # -- batched eviction ----------------------------------------------------

    def run_evictions(self, updated_keys) -> list[tuple[int, Tier, Tier]]:
        """Re-evaluate every content touched since the last batch against
        the current rank-threshold products, migrating across tiers as
        the two ranks dictate.  The batch is greedy and two-phase:
        demotions run first so freed space is available, then promotion
        candidates claim it in descending rank order.  Returns the
        applied (key, src, dst) moves; both tiers' minimum ranks are
        recomputed afterwards.
        """
        store = self.store
        dram, nvm, hdd = store.dram, store.nvm, store.hdd
        moves: list[tuple[int, Tier, Tier]] = []
        wants_dram: list[tuple[float, int]] = []  # (rank, key), NVM/HDD origin
        wants_nvm: list[tuple[float, int]] = []

        for key in updated_keys:
            st = self.stats.get(key)
            if st is None or st.location is None:
                continue
            dram_rank, nvm_rank = self.content_rank(st)
            dram_gate = rank_threshold_product(dram)
            nvm_gate = rank_threshold_product(nvm)
            loc = st.location
            if loc is Tier.DRAM:
                if dram_rank < dram_gate and nvm_rank > nvm_gate:
                    if self._make_room(nvm, st.size, nvm_rank):
                        self._move(st, Tier.NVM, nvm_rank)
                    else:
                        self._move(st, Tier.HDD, None)
                    moves.append((key, Tier.DRAM, st.location))
                elif dram_rank < dram_gate and nvm_rank < nvm_gate:
                    self._move(st, Tier.HDD, None)
                    moves.append((key, Tier.DRAM, Tier.HDD))
                else:
                    dram.refresh_rank(key, dram_rank)
            elif loc is Tier.NVM:
                if dram_rank > dram_gate and nvm_rank < nvm_gate:
                    wants_dram.append((dram_rank, key))
                    nvm.refresh_rank(key, nvm_rank)
                elif nvm_rank < nvm_gate:
                    self._move(st, Tier.HDD, None)
                    moves.append((key, Tier.NVM, Tier.HDD))
                else:
                    nvm.refresh_rank(key, nvm_rank)
            else:  # tertiary resident: promote when a cache tier wants it
                if dram_rank > dram_gate:
                    wants_dram.append((dram_rank, key))
                elif nvm_rank > nvm_gate and nvm.fits(st.size):
                    self._move(st, Tier.NVM, nvm_rank)
                    moves.append((key, Tier.HDD, Tier.NVM))

        # Promotion phase: strongest DRAM candidates first; the ones
        # that do not fit fall through to NVM when it wants them.
        wants_dram.sort(reverse=True)
        for dram_rank, key in wants_dram:
            st = self.stats[key]
            if st.location is None or st.location is Tier.DRAM:
                continue
            src = st.location
            if dram.fits(st.size):
                self._move(st, Tier.DRAM, dram_rank)
                moves.append((key, src, Tier.DRAM))
            elif src is Tier.HDD:
                nvm_rank = self.content_rank(st).nvm_rank
                if nvm_rank > rank_threshold_product(nvm) and nvm.fits(st.size):
                    self._move(st, Tier.NVM, nvm_rank)
                    moves.append((key, src, Tier.NVM))
        dram.recompute_min_rank()
        nvm.recompute_min_rank()
        return moves

    def _make_room(self, tier: TierStore, size: int,
                   incoming_rank: float) -> bool:
        """Demote lowest-ranked residents to tertiary until the incoming
        object fits; gives up rather than evict anything ranked at or
        above the newcomer."""
        if tier.capacity < size:
            return False
        while tier.free < size:
            head = tier.peek_lowest_rank()
            if head is None or head[1] >= incoming_rank:
                return False
            victim = self.stats[head[0]]
            self._move(victim, Tier.HDD, None)
        return True

    def _move(self, st: ContentStats, dst: Tier, rank: float | None) -> None:
        src, _ = self.store.evict(st.key)
        self.store.admit(dst, st.key, st.size, rank)
        self.metrics.migrate(self.store.tiers[src], self.store.tiers[dst],
                             st.size, f"{src.value}->{dst.value}")
        st.location = dst

    # -- periodic reset --------------------------------------------------------

    def periodic_reset(self, now: float) -> list[int]:
        """Zero all counters and purge cold contents: anything cached in
        DRAM/NVM that was never touched in the whole elapsed window goes
        back to tertiary.  Returns the purged keys."""
        removed: list[int] = []
        cutoff = self._last_reset
        for st in list(self.stats.values()):
            if (st.location is Tier.DRAM or st.location is Tier.NVM) \
                    and st.last_access < cutoff:
                self._move(st, Tier.HDD, None)
                removed.append(st.key)
            st.reads = 0.0
            st.writes = 0.0
        # All ranks collapse to 1/size after zeroing; refresh the caches.
        for tier in (self.store.dram, self.store.nvm):
            is_dram = tier.tier is Tier.DRAM
            for key in tier.residents:
                pair = self.content_rank(self.stats[key])
                tier.refresh_rank(key, pair.dram_rank if is_dram else pair.nvm_rank)
            tier.recompute_min_rank()
        self._last_reset = now
        return removed
