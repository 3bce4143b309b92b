"""Relay-pair selection and relay power allocation for two-hop buffered
half-duplex relay networks, with Monte Carlo evaluation."""

from .channel import ChannelStream, CsiErrorSpec, FadingSpec, corrupt_csi, sample_realization
from .model import (
    BufferState,
    ChannelRealization,
    EvalCounter,
    HdReceive,
    HdTransmit,
    Idle,
    Pair,
    PowerInterval,
    SystemParams,
    best_boundary_power,
    pair_bounds,
    power_bounds,
    rate_rd,
    rate_sr,
    sum_throughput,
)
from .schemes import SchemeId, SelectionContext, feasible_pairs, select
from .sim import EpisodeConfig, RunMetrics, SlotMetrics, apply_decision, mmht, run_episode
from .sweep import SweepSpec, SweepTemplate, run_sweep

__version__ = "0.1.0"
