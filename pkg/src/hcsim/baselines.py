"""Reference policies: hierarchical LRU, single-memory density greedy,
and the clairvoyant variant of the hierarchical policy.

All baselines run against the same store model and metrics recorder as
the main policy, so capacity and conservation invariants are enforced
identically.
"""

from __future__ import annotations

from collections import OrderedDict

from .metrics import DRAM_BUCKET, MISS_BUCKET, NVM_BUCKET, SimMetrics
from .store import HybridStore, Tier, TierStore
from .workload import DELETE, GET, PUT, RequestEvent

_BUCKET_OF = {Tier.DRAM: DRAM_BUCKET, Tier.NVM: NVM_BUCKET, Tier.HDD: MISS_BUCKET}


def build_offline_profile(trace: list[RequestEvent]) -> dict[int, tuple[int, int]]:
    """Exact per-key (reads, writes) totals over the whole trace."""
    profile: dict[int, tuple[int, int]] = {}
    for ev in trace:
        reads, writes = profile.get(ev.key, (0, 0))
        if ev.op == GET:
            profile[ev.key] = (reads + 1, writes)
        else:
            profile[ev.key] = (reads, writes + 1)
    return profile


class LruPolicy:
    """Hierarchical LRU: every access lands the object in DRAM at MRU,
    DRAM overflow demotes the LRU object to NVM, NVM overflow demotes
    to tertiary.  Oversized objects skip down to the first tier that
    can ever hold them."""

    def __init__(self, store: HybridStore, metrics: SimMetrics):
        self.store = store
        self.metrics = metrics
        self.recency: dict[Tier, OrderedDict[int, int]] = {
            Tier.DRAM: OrderedDict(), Tier.NVM: OrderedDict(),
        }
        self.last_served: str | None = None

    def process(self, event: RequestEvent) -> None:
        key, size, op = event.key, event.size, event.op
        store, metrics = self.store, self.metrics
        loc = store.where(key)

        if op == GET:
            if loc is Tier.DRAM:
                metrics.serve(DRAM_BUCKET, store.dram, True, size)
                self.last_served = DRAM_BUCKET
                self.recency[Tier.DRAM].move_to_end(key)
            elif loc is Tier.NVM:
                metrics.serve(NVM_BUCKET, store.nvm, True, size)
                self.last_served = NVM_BUCKET
                # Hit data is in flight: re-home it in DRAM, paying only
                # the destination write.
                objsize = store.nvm.residents[key][1]
                del self.recency[Tier.NVM][key]
                store.evict(key)
                dst = self._install(key, objsize)
                if dst is not Tier.NVM:
                    metrics.migrate(None, store.tiers[dst], objsize,
                                    f"nvm->{dst.value}")
            else:
                metrics.serve(MISS_BUCKET, store.hdd, True, size)
                self.last_served = MISS_BUCKET
                if loc is Tier.HDD:
                    store.evict(key)
                dst = self._install(key, size)
                if dst is not Tier.HDD:
                    metrics.migrate(None, store.tiers[dst], size,
                                    f"fill->{dst.value}")
        elif op == PUT:
            if loc is Tier.DRAM:
                metrics.serve(DRAM_BUCKET, store.dram, False, size)
                self.last_served = DRAM_BUCKET
                self.recency[Tier.DRAM].move_to_end(key)
            else:
                # New value is written wherever the object now lands;
                # a stale cached copy is just dropped.
                if loc is not None:
                    if loc is not Tier.HDD:
                        del self.recency[loc][key]
                    store.evict(key)
                dst = self._install(key, size)
                metrics.serve(_BUCKET_OF[dst], store.tiers[dst], False, size)
                self.last_served = _BUCKET_OF[dst]
        else:  # DELETE
            if loc is Tier.DRAM or loc is Tier.NVM:
                metrics.serve(_BUCKET_OF[loc], store.tiers[loc], False, size)
                self.last_served = _BUCKET_OF[loc]
                del self.recency[loc][key]
                store.evict(key)
            else:
                metrics.serve(MISS_BUCKET, store.hdd, False, size)
                self.last_served = MISS_BUCKET
                if loc is Tier.HDD:
                    store.evict(key)

    def _install(self, key: int, size: int) -> Tier:
        """Admit at DRAM MRU, cascading demotions down the hierarchy."""
        store = self.store
        if size <= store.dram.capacity:
            while not store.dram.fits(size):
                self._demote_lru(Tier.DRAM, Tier.NVM)
            store.admit(Tier.DRAM, key, size)
            self.recency[Tier.DRAM][key] = size
            return Tier.DRAM
        if size <= store.nvm.capacity:
            while not store.nvm.fits(size):
                self._demote_lru(Tier.NVM, Tier.HDD)
            store.admit(Tier.NVM, key, size)
            self.recency[Tier.NVM][key] = size
            return Tier.NVM
        store.admit(Tier.HDD, key, size)
        return Tier.HDD

    def _demote_lru(self, src: Tier, dst: Tier) -> None:
        victim, vsize = self.recency[src].popitem(last=False)
        self.store.evict(victim)
        if dst is Tier.NVM and vsize <= self.store.nvm.capacity:
            while not self.store.nvm.fits(vsize):
                self._demote_lru(Tier.NVM, Tier.HDD)
            self.store.admit(Tier.NVM, victim, vsize)
            self.recency[Tier.NVM][victim] = vsize
            self.metrics.migrate(self.store.tiers[src], self.store.nvm,
                                 vsize, f"{src.value}->nvm")
        else:
            self.store.admit(Tier.HDD, victim, vsize)
            self.metrics.migrate(self.store.tiers[src], self.store.hdd,
                                 vsize, f"{src.value}->hdd")


class DensityGreedyPolicy:
    """Single-memory greedy: keep the cache filled with the highest
    read-density (reads/size) contents, evicting the current minimum
    when a denser object arrives.  The non-cache tier must be disabled."""

    def __init__(self, store: HybridStore, metrics: SimMetrics, tier: Tier):
        if tier not in (Tier.DRAM, Tier.NVM):
            raise ValueError("density greedy caches in dram or nvm")
        self.store = store
        self.metrics = metrics
        self.tier = tier
        self.cache: TierStore = store.tiers[tier]
        self.bucket = _BUCKET_OF[tier]
        self.reads: dict[int, int] = {}
        self.last_served: str | None = None

    def _density(self, key: int, size: int) -> float:
        return self.reads.get(key, 0) / size

    def process(self, event: RequestEvent) -> None:
        key, size, op = event.key, event.size, event.op
        store, metrics = self.store, self.metrics
        loc = store.where(key)

        if op == GET:
            self.reads[key] = self.reads.get(key, 0) + 1
            if loc is self.tier:
                metrics.serve(self.bucket, self.cache, True, size)
                self.last_served = self.bucket
                self.cache.refresh_rank(key, self._density(key, size))
            else:
                metrics.serve(MISS_BUCKET, store.hdd, True, size)
                self.last_served = MISS_BUCKET
                if loc is Tier.HDD:
                    store.evict(key)
                if self._try_admit(key, size):
                    metrics.migrate(None, self.cache, size,
                                    f"fill->{self.tier.value}")
                else:
                    store.admit(Tier.HDD, key, size)
        elif op == PUT:
            if loc is self.tier:
                metrics.serve(self.bucket, self.cache, False, size)
                self.last_served = self.bucket
            else:
                if loc is Tier.HDD:
                    store.evict(key)
                if self._try_admit(key, size):
                    metrics.serve(self.bucket, self.cache, False, size)
                    self.last_served = self.bucket
                else:
                    store.admit(Tier.HDD, key, size)
                    metrics.serve(MISS_BUCKET, store.hdd, False, size)
                    self.last_served = MISS_BUCKET
        else:  # DELETE
            if loc is self.tier:
                metrics.serve(self.bucket, self.cache, False, size)
                self.last_served = self.bucket
                store.evict(key)
            else:
                metrics.serve(MISS_BUCKET, store.hdd, False, size)
                self.last_served = MISS_BUCKET
                if loc is Tier.HDD:
                    store.evict(key)

    def _try_admit(self, key: int, size: int) -> bool:
        """Admit if it fits, evicting strictly lower-density residents;
        reject once the incoming object would be the eviction victim."""
        if size > self.cache.capacity:
            return False
        incoming = self._density(key, size)
        while not self.cache.fits(size):
            head = self.cache.peek_lowest_rank()
            if head is None or head[1] >= incoming:
                return False
            victim_key = head[0]
            vsize = self.cache.residents[victim_key][1]
            self.store.evict(victim_key)
            self.store.admit(Tier.HDD, victim_key, vsize)
            self.metrics.migrate(self.cache, self.store.hdd, vsize,
                                 f"{self.tier.value}->hdd")
        self.store.admit(self.tier, key, size, incoming)
        return True


def lru_policy(trace, config):
    """Run the LRU baseline over a trace; returns the run metrics."""
    import dataclasses

    from .simulator import simulate_events
    cfg = dataclasses.replace(
        config, policy=dataclasses.replace(config.policy, name="lru"))
    return simulate_events(trace, cfg)


def density_greedy_policy(trace, config):
    """Run the single-memory density-greedy baseline over a trace."""
    import dataclasses

    from .simulator import simulate_events
    cfg = dataclasses.replace(
        config,
        policy=dataclasses.replace(config.policy, name="density-greedy"))
    return simulate_events(trace, cfg)


def offline_hgreedy(trace, profile, config):
    """Run the clairvoyant hierarchical policy with a precomputed profile."""
    import dataclasses

    from .simulator import simulate_events
    cfg = dataclasses.replace(
        config,
        policy=dataclasses.replace(config.policy, name="hgreedy-offline"))
    return simulate_events(trace, cfg, offline_profile=profile)


def density_greedy_residents(contents: list[tuple[float, int]],
                             capacity: float,
                             max_passes: int = 32) -> set[int]:
    """Steady-state resident set of density-greedy admission with known
    popularities: offer every content repeatedly until no admission
    changes anything.  ``contents[i] = (popularity, size)``; returns the
    resident indices."""
    resident: dict[int, tuple[float, int]] = {}
    used = 0
    for _ in range(max_passes):
        changed = False
        for idx, (pop, size) in enumerate(contents):
            if idx in resident or size > capacity:
                continue
            density = pop / size
            victims: list[int] = []
            freed = 0
            admissible = True
            if used + size > capacity:
                order = sorted(resident, key=lambda j: (resident[j][0] / resident[j][1], j))
                for j in order:
                    if used - freed + size <= capacity:
                        break
                    vdensity = resident[j][0] / resident[j][1]
                    if vdensity >= density:
                        admissible = False
                        break
                    victims.append(j)
                    freed += resident[j][1]
                if used - freed + size > capacity:
                    admissible = False
            if not admissible:
                continue
            for j in victims:
                used -= resident[j][1]
                del resident[j]
            resident[idx] = (pop, size)
            used += size
            changed = True
        if not changed:
            break
    return set(resident)
