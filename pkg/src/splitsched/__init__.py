"""splitsched: frame/slot-granular scheduling and simulation for multi-user
device-edge split inference under long-term energy budgets.

Two-tier control: a per-frame task scheduler (split point, bandwidth share,
closed-form reference power from an energy-deficit queue) and a per-slot
progressive transmitter (importance-ordered packets, power-deficit queue,
uncertainty-based early stop).  Includes independent oracles for every
closed form and desk-scale optimality/stability bound checks.
"""

__version__ = "0.1.0"

from .backend import active_backend
from .channel import (ChannelModelConfig, ChannelState, packet_capacity,
                      sample_frame, shannon_rate)
from .engine import FrameResult, RunSummary, SimConfig, run_simulation
from .inner import (TransmissionLog, run_frame_transmission, select_packets,
                    slot_power, synthetic_uncertainty, update_power_queue)
from .lambertw import lambert_w0
from .outer import (SchedulerParams, TaskDecision, allocate_resources,
                    batch_deadline, build_split_table, greedy_partition_search,
                    kkt_reference_power, local_energy, proportional_bandwidth,
                    saturation_power, transmission_window,
                    unit_bandwidth_reward, update_energy_queue, utility)
from .profile import (DnnProfile, LayerSpec, SurrogateCoefficients,
                      default_profile, fit_surrogate, importance_order,
                      surrogate_accuracy, tiny_profile)

__all__ = [
    "__version__", "active_backend",
    "ChannelModelConfig", "ChannelState", "packet_capacity", "sample_frame",
    "shannon_rate",
    "FrameResult", "RunSummary", "SimConfig", "run_simulation",
    "TransmissionLog", "run_frame_transmission", "select_packets",
    "slot_power", "synthetic_uncertainty", "update_power_queue",
    "lambert_w0",
    "SchedulerParams", "TaskDecision", "allocate_resources", "batch_deadline",
    "build_split_table", "greedy_partition_search", "kkt_reference_power",
    "local_energy", "proportional_bandwidth", "saturation_power",
    "transmission_window", "unit_bandwidth_reward", "update_energy_queue",
    "utility",
    "DnnProfile", "LayerSpec", "SurrogateCoefficients", "default_profile",
    "fit_surrogate", "importance_order", "surrogate_accuracy", "tiny_profile",
]
