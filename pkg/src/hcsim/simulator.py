"""Deterministic event loop binding a workload, the store model, and a
policy, plus report generation (JSON and CSV rows) and the cost model.

One run is strictly sequential; parallelism only ever happens across
independent runs.  Reports contain no wall-clock material, so identical
configs serialize to identical bytes.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import __version__
from .baselines import DensityGreedyPolicy, LruPolicy, build_offline_profile
from .metrics import CostModel, SimMetrics, nvm_lifetime_years
from .policy import HGreedyPolicy, PolicyConfig
from .store import (DEFAULT_PARAMS, GB, DeviceParams, HybridStore, Tier,
                    TierConfig, make_tier_store)
from .workload import (ConfigError, RequestEvent, TraceConfig, build_catalogue,
                       generate_trace, read_trace, unique_content_bytes)

POLICY_NAMES = ("hgreedy", "hgreedy-offline", "lru", "density-greedy",
                "dram-only", "nvm-only")


class InvariantError(AssertionError):
    """A simulation invariant was violated mid-run."""


@dataclass(frozen=True)
class SimConfig:
    """One simulation: trace source (inline config or file path), tier
    provisioning, policy selection, and cost figures."""

    trace: TraceConfig | str
    dram: TierConfig
    nvm: TierConfig
    hdd: TierConfig = field(default_factory=lambda: TierConfig(math.inf, 1))
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    costs: CostModel = field(default_factory=CostModel)
    seed: int = 0

    def validate(self) -> None:
        if self.dram.capacity < 0 or self.nvm.capacity < 0:
            raise ConfigError("tier capacities must be nonnegative")
        if self.policy.name not in POLICY_NAMES:
            raise ConfigError(f"unknown policy {self.policy.name!r}; "
                              f"expected one of {', '.join(POLICY_NAMES)}")
        self.policy.validate()
        self.costs.validate()
        if isinstance(self.trace, TraceConfig):
            self.trace.validate()


def build_store(config: SimConfig) -> HybridStore:
    return HybridStore(
        make_tier_store(Tier.DRAM, config.dram),
        make_tier_store(Tier.NVM, config.nvm),
        make_tier_store(Tier.HDD, config.hdd),
    )


def load_events(config: SimConfig) -> list[RequestEvent]:
    if isinstance(config.trace, TraceConfig):
        catalogue = build_catalogue(config.trace)
        return generate_trace(catalogue, config.trace)
    return read_trace(config.trace)


def _normalize(config: SimConfig) -> SimConfig:
    """Resolve the dram-only / nvm-only sugar onto density-greedy with
    the other tier disabled."""
    name = config.policy.name
    if name == "dram-only":
        return dataclasses.replace(
            config,
            nvm=dataclasses.replace(config.nvm, capacity=0),
            policy=dataclasses.replace(config.policy, name="density-greedy"))
    if name == "nvm-only":
        return dataclasses.replace(
            config,
            dram=dataclasses.replace(config.dram, capacity=0),
            policy=dataclasses.replace(config.policy, name="density-greedy"))
    return config


def _default_reset_interval(config: SimConfig,
                            events: list[RequestEvent]) -> float:
    """Span of 1e6 requests at the workload rate (inf when unknowable)."""
    if config.policy.reset_interval is not None:
        return config.policy.reset_interval
    if isinstance(config.trace, TraceConfig):
        return 1e6 / config.trace.total_rate
    if events and events[-1].timestamp > 0:
        return 1e6 * events[-1].timestamp / len(events)
    return math.inf


def make_policy(config: SimConfig, store: HybridStore, metrics: SimMetrics,
                events: list[RequestEvent],
                offline_profile: dict[int, tuple[int, int]] | None = None):
    name = config.policy.name
    if name == "hgreedy":
        return HGreedyPolicy(store, metrics, config.policy,
                             reset_interval=_default_reset_interval(config, events))
    if name == "hgreedy-offline":
        profile = offline_profile if offline_profile is not None \
            else build_offline_profile(events)
        return HGreedyPolicy(store, metrics, config.policy, profile=profile)
    if name == "lru":
        return LruPolicy(store, metrics)
    if name == "density-greedy":
        enabled = [t for t in (Tier.DRAM, Tier.NVM)
                   if store.tiers[t].capacity > 0]
        if len(enabled) != 1:
            raise ConfigError("density-greedy needs exactly one enabled "
                              "memory tier; use dram-only / nvm-only")
        return DensityGreedyPolicy(store, metrics, enabled[0])
    raise ConfigError(f"unknown policy {name!r}")


def simulate_events(events: list[RequestEvent], config: SimConfig, *,
                    check_interval: int = 0,
                    serve_hook: Callable[[RequestEvent, str], None] | None = None,
                    offline_profile: dict[int, tuple[int, int]] | None = None,
                    ) -> SimMetrics:
    """Run one policy over an already-materialized trace.

    ``check_interval`` > 0 audits store and conservation invariants every
    that many events (and at the end), raising InvariantError on
    violation.  ``serve_hook`` observes (event, serving bucket) pairs.
    """
    config.validate()
    cfg = _normalize(config)
    store = build_store(cfg)
    metrics = SimMetrics()
    policy = make_policy(cfg, store, metrics, events, offline_profile)

    processed = 0
    try:
        for ev in events:
            policy.process(ev)
            processed += 1
            if serve_hook is not None:
                serve_hook(ev, policy.last_served)
            if check_interval and processed % check_interval == 0:
                store.check_invariants()
                metrics.check_conservation(processed)
    except AssertionError as exc:
        raise InvariantError(str(exc)) from exc

    if check_interval:
        try:
            store.check_invariants()
            metrics.check_conservation(processed)
        except AssertionError as exc:
            raise InvariantError(str(exc)) from exc

    metrics.elapsed = events[-1].timestamp if events else 0.0
    metrics.finalize(store)
    return metrics


def run(config: SimConfig, *, check_interval: int = 0,
        serve_hook: Callable[[RequestEvent, str], None] | None = None,
        ) -> SimMetrics:
    """Load or generate the trace, then simulate it."""
    config.validate()
    events = load_events(config)
    return simulate_events(events, config, check_interval=check_interval,
                           serve_hook=serve_hook)


# -- derived quantities ----------------------------------------------------


def compute_cbr(config: SimConfig, cost_model: CostModel | None = None) -> float:
    """Lifetime-weighted hybrid memory cost against an all-DRAM build of
    the same total capacity.  As printed this is lower-is-better; the
    report also carries its reciprocal (see the format notes)."""
    costs = cost_model if cost_model is not None else config.costs
    costs.validate()
    dram_gb = config.dram.capacity / GB
    nvm_gb = config.nvm.capacity / GB
    denom = costs.cost_per_gb_dram * (dram_gb + nvm_gb)
    if denom == 0:
        raise ConfigError("cost-benefit ratio undefined for zero total capacity")
    hybrid = (costs.cost_per_gb_dram * dram_gb
              + costs.cost_per_gb_nvm * nvm_gb
              * (costs.lifetime_nvm_years / costs.lifetime_dram_years))
    return hybrid / denom


def avg_sizes(metrics: SimMetrics) -> dict[str, dict[str, float | None]]:
    """Per-bucket average request sizes; None where a bucket saw no traffic."""
    return {"read": metrics.avg_read_size(), "write": metrics.avg_write_size()}


def cache_capacity(config: SimConfig,
                   trace: list[RequestEvent]) -> tuple[float, float]:
    """(dram, nvm) capacity as a fraction of the trace's unique bytes."""
    if not trace:
        raise ConfigError("cache capacity undefined for an empty trace")
    unique = unique_content_bytes(trace)
    return config.dram.capacity / unique, config.nvm.capacity / unique


# -- serialization -----------------------------------------------------------


def _params_to_dict(params: DeviceParams) -> dict:
    d = dataclasses.asdict(params)
    if math.isinf(d["endurance_dwpd"]):
        d["endurance_dwpd"] = None
    return d


def _params_from_dict(d: dict) -> DeviceParams:
    d = dict(d)
    if d.get("endurance_dwpd") is None:
        d["endurance_dwpd"] = math.inf
    return DeviceParams(**d)


def _tier_to_dict(tc: TierConfig) -> dict:
    return {
        "capacity": None if math.isinf(tc.capacity) else tc.capacity,
        "bank_count": tc.bank_count,
        "params": None if tc.params is None else _params_to_dict(tc.params),
    }


def _tier_from_dict(d: dict, default_capacity: float = 0.0) -> TierConfig:
    cap = d.get("capacity", default_capacity)
    cap = math.inf if cap is None else float(cap)
    params = d.get("params")
    return TierConfig(
        capacity=cap,
        bank_count=int(d.get("bank_count", TierConfig.bank_count)),
        params=None if params is None else _params_from_dict(params),
    )


def _policy_to_dict(pc: PolicyConfig) -> dict:
    return {
        "name": pc.name,
        "h": pc.write_exponent,
        "delta": pc.eviction_interval,
        "tau_seconds": (None if pc.reset_interval is None
                        else ("inf" if math.isinf(pc.reset_interval)
                              else pc.reset_interval)),
        "threshold_knee": pc.threshold_knee,
        "delete_write_weight": pc.delete_write_weight,
    }


def _policy_from_dict(d: dict) -> PolicyConfig:
    tau = d.get("tau_seconds")
    if tau == "inf":
        tau = math.inf
    return PolicyConfig(
        name=d.get("name", "hgreedy"),
        write_exponent=float(d.get("h", 1.0)),
        eviction_interval=int(d.get("delta", 1000)),
        reset_interval=None if tau is None else float(tau),
        threshold_knee=float(d.get("threshold_knee", 0.5)),
        delete_write_weight=float(d.get("delete_write_weight", 1.0)),
    )


def config_to_dict(config: SimConfig) -> dict:
    if isinstance(config.trace, TraceConfig):
        trace: dict = dataclasses.asdict(config.trace)
    else:
        trace = {"path": str(config.trace)}
    return {
        "trace": trace,
        "tiers": {
            "dram": _tier_to_dict(config.dram),
            "nvm": _tier_to_dict(config.nvm),
            "hdd": _tier_to_dict(config.hdd),
        },
        "policy": _policy_to_dict(config.policy),
        "costs": dataclasses.asdict(config.costs),
        "seed": config.seed,
    }


def config_from_dict(d: dict) -> SimConfig:
    trace_section = d.get("trace")
    if trace_section is None:
        raise ConfigError("config needs a 'trace' section")
    if "path" in trace_section:
        trace: TraceConfig | str = str(trace_section["path"])
    else:
        trace = TraceConfig(**trace_section)
    tiers = d.get("tiers", {})
    hdd_dict = tiers.get("hdd", {"capacity": None, "bank_count": 1})
    return SimConfig(
        trace=trace,
        dram=_tier_from_dict(tiers.get("dram", {})),
        nvm=_tier_from_dict(tiers.get("nvm", {})),
        hdd=_tier_from_dict(hdd_dict, default_capacity=math.inf),
        policy=_policy_from_dict(d.get("policy", {})),
        costs=CostModel(**d.get("costs", {})),
        seed=int(d.get("seed", 0)),
    )


def load_config(path) -> SimConfig:
    with open(path) as f:
        return config_from_dict(json.load(f))


# -- reporting ---------------------------------------------------------------


def build_report(metrics: SimMetrics, config: SimConfig) -> dict:
    """Assemble the full JSON-serializable report for one run."""
    costs = config.costs
    total_capacity = config.dram.capacity + config.nvm.capacity
    cbr = compute_cbr(config) if total_capacity > 0 else None
    implied_life = nvm_lifetime_years(metrics.nvm_dwpd,
                                      metrics.nvm_endurance_dwpd,
                                      costs.lifetime_nvm_years)
    cbr_wear = None
    if total_capacity > 0:
        cbr_wear = compute_cbr(config, dataclasses.replace(
            costs, lifetime_nvm_years=implied_life))
    cc_dram = cc_nvm = None
    if metrics.unique_bytes > 0:
        cc_dram = config.dram.capacity / metrics.unique_bytes
        cc_nvm = config.nvm.capacity / metrics.unique_bytes
    return {
        "version": __version__,
        "config": config_to_dict(config),
        "results": {
            "total_requests": metrics.total_events,
            "elapsed_seconds": metrics.elapsed,
            "reads": dict(metrics.reads),
            "writes": dict(metrics.writes),
            "read_bytes": dict(metrics.read_bytes),
            "write_bytes": dict(metrics.write_bytes),
            "read_fractions": metrics.read_fractions(),
            "write_fractions": metrics.write_fractions(),
            "avg_read_size": metrics.avg_read_size(),
            "avg_write_size": metrics.avg_write_size(),
            "avg_served_size": metrics.avg_served_size(),
            "latency_sum_seconds": metrics.latency_sum,
            "avg_access_latency_seconds": metrics.avg_access_latency(),
            "dynamic_energy_joules": metrics.dynamic_energy,
            "migration_seconds": metrics.migration_seconds,
            "migration_counts": dict(sorted(metrics.migration_counts.items())),
            "standby_power_watts": metrics.standby_power,
            "avg_power_watts": metrics.avg_power(),
            "device_bytes_written": dict(metrics.device_bytes_written),
            "nvm_dwpd": metrics.nvm_dwpd,
            "nvm_lifetime_years_implied": implied_life,
            "unique_keys": metrics.unique_keys,
            "unique_bytes": metrics.unique_bytes,
            "cache_capacity_dram": cc_dram,
            "cache_capacity_nvm": cc_nvm,
            # Literal ratio is lower-is-better; reciprocal provided since
            # the two conventions circulate.  See docs/report-format.md.
            "cbr": cbr,
            "cbr_reciprocal": None if not cbr else 1.0 / cbr,
            "cbr_wear_adjusted": cbr_wear,
        },
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


# Stable column order for sweep aggregation; documented in
# docs/report-format.md.  Values come straight out of a report dict.
REPORT_CSV_COLUMNS = (
    "policy", "zipf_alpha", "mean_size", "h", "seed", "total_requests",
    "dram_capacity", "nvm_capacity",
    "cache_capacity_dram", "cache_capacity_nvm",
    "read_frac_dram", "read_frac_nvm", "read_frac_miss",
    "write_frac_dram", "write_frac_nvm", "write_frac_miss",
    "avg_read_size_dram", "avg_read_size_nvm",
    "avg_write_size_dram", "avg_write_size_nvm",
    "avg_access_latency_seconds", "dynamic_energy_joules",
    "avg_power_watts", "nvm_dwpd", "cbr", "cbr_reciprocal",
)


def report_csv_row(report: dict) -> dict[str, object]:
    cfg = report["config"]
    res = report["results"]
    trace = cfg["trace"]
    row: dict[str, object] = {
        "policy": cfg["policy"]["name"],
        "zipf_alpha": trace.get("zipf_alpha"),
        "mean_size": trace.get("mean_size"),
        "h": cfg["policy"]["h"],
        "seed": cfg["seed"],
        "total_requests": res["total_requests"],
        "dram_capacity": cfg["tiers"]["dram"]["capacity"],
        "nvm_capacity": cfg["tiers"]["nvm"]["capacity"],
        "cache_capacity_dram": res["cache_capacity_dram"],
        "cache_capacity_nvm": res["cache_capacity_nvm"],
        "avg_access_latency_seconds": res["avg_access_latency_seconds"],
        "dynamic_energy_joules": res["dynamic_energy_joules"],
        "avg_power_watts": res["avg_power_watts"],
        "nvm_dwpd": res["nvm_dwpd"],
        "cbr": res["cbr"],
        "cbr_reciprocal": res["cbr_reciprocal"],
    }
    for bucket in ("dram", "nvm", "miss"):
        row[f"read_frac_{bucket}"] = res["read_fractions"][bucket]
        row[f"write_frac_{bucket}"] = res["write_fractions"][bucket]
    for bucket in ("dram", "nvm"):
        row[f"avg_read_size_{bucket}"] = res["avg_read_size"][bucket]
        row[f"avg_write_size_{bucket}"] = res["avg_write_size"][bucket]
    return row


def rows_to_csv(rows: list[dict[str, object]]) -> str:
    def fmt(v: object) -> str:
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(v)
        return str(v)

    lines = [",".join(REPORT_CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(fmt(row.get(col)) for col in REPORT_CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_report(report: dict, path) -> None:
    Path(path).write_text(report_json(report))
