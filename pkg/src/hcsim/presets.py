"""Desk-scale presets mirroring the published experiment grid.

The full-scale setup (25M requests, 1M objects, 256 GB + 4 TB) is scaled
down to minutes of runtime while preserving the cache-capacity pairs,
which is the configuration-agnostic quantity the experiments are framed
in.  Note the third pair follows the prose percentages (1.2%, 20%); the
printed "(0.12,0.2)" contradicts them.
"""

from __future__ import annotations

from .metrics import CostModel
from .policy import PolicyConfig
from .simulator import SimConfig
from .store import MB, TierConfig
from .workload import TraceConfig, unique_content_bytes

GRID_ALPHAS = (0.7, 0.8, 0.9)
GRID_MEAN_SIZES = (1 * MB, 5 * MB, 10 * MB)
GRID_H_VALUES = (0.0, 1.0, 2.0)

# (dram, nvm) capacity as a fraction of the trace's unique bytes, one
# pair per mean file size above.
CACHE_CAPACITY_PAIRS = ((0.256, 4.0), (0.05, 0.8), (0.012, 0.2))

DESK_CATALOGUE_SIZE = 20_000
DESK_REQUESTS = 500_000
DESK_SEED = 42


def desk_trace_config(alpha: float, mean_size: float,
                      requests: int = DESK_REQUESTS,
                      catalogue_size: int = DESK_CATALOGUE_SIZE,
                      seed: int = DESK_SEED) -> TraceConfig:
    """Desk-scale workload; stddev equals the mean per the grid convention."""
    return TraceConfig(
        catalogue_size=catalogue_size,
        mean_size=mean_size,
        size_stddev=mean_size,
        zipf_alpha=alpha,
        total_requests=requests,
        seed=seed,
    )


def sim_config_for_trace(trace, trace_config: TraceConfig,
                         cc_dram: float, cc_nvm: float,
                         policy: PolicyConfig | None = None,
                         costs: CostModel | None = None) -> SimConfig:
    """Provision tiers to hit a cache-capacity pair for a generated trace."""
    unique = unique_content_bytes(trace)
    return SimConfig(
        trace=trace_config,
        dram=TierConfig(capacity=cc_dram * unique),
        nvm=TierConfig(capacity=cc_nvm * unique),
        policy=policy if policy is not None else PolicyConfig(),
        costs=costs if costs is not None else CostModel(),
        seed=trace_config.seed,
    )


def acceptance_cells() -> list[tuple[float, float, tuple[float, float]]]:
    """The nine (alpha, mean_size, cache-capacity pair) evaluation cells."""
    return [(alpha, mu, cc)
            for alpha in GRID_ALPHAS
            for mu, cc in zip(GRID_MEAN_SIZES, CACHE_CAPACITY_PAIRS)]
