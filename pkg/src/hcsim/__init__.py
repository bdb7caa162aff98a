"""Hybrid DRAM/NVM edge-cache simulator and policy library."""

__version__ = "0.1.0"

from .metrics import CostModel, SimMetrics
from .policy import ContentStats, HGreedyPolicy, PolicyConfig, get_rank
from .store import (DRAM_PARAMS, HDD_PARAMS, NVM_PARAMS, DeviceParams,
                    HybridStore, Tier, TierConfig, TierStore)
from .workload import (ContentDescriptor, RequestEvent, TraceConfig,
                       build_catalogue, generate_trace, read_catalogue,
                       read_trace, write_catalogue, write_trace)

__all__ = [
    "CostModel", "SimMetrics", "ContentStats", "HGreedyPolicy",
    "PolicyConfig", "get_rank", "DeviceParams", "HybridStore", "Tier",
    "TierConfig", "TierStore", "DRAM_PARAMS", "NVM_PARAMS", "HDD_PARAMS",
    "ContentDescriptor", "RequestEvent", "TraceConfig", "build_catalogue",
    "generate_trace", "read_catalogue", "read_trace", "write_catalogue",
    "write_trace",
]
