"""Frame/slot-granular simulator for multi-user device-edge split inference.

Each frame: (1) the task scheduler picks split points, bandwidth shares and
reference powers from energy-deficit queues and frame-level channel gains;
(2) each user runs its device stage, then the packet-level slot loop
transmits feature maps progressively until an uncertainty threshold,
exhaustion, or the edge batch start; (3) the edge batch-processes remaining
layers so every task lands inside the frame; (4) energy-deficit queues are
updated against the long-term per-frame budget.

Policies
--------
two_tier      full scheduler (queue-aware split/bandwidth/power + slot loop)
myopic        identical pipeline with the queue frozen at 0 for decisions
              (pure accuracy chasing; the true queue is still tracked)
fixed_split   split pinned to ``fixed_split`` (bandwidth/power still adapt)
edge_only     fixed_split at split 0 (transmit raw input)
device_only   fixed_split at the last split (no transmission)
"""

import json
from dataclasses import dataclass, asdict, field, replace

import numpy as np

from . import _kernels as _k
from .channel import ChannelModelConfig, sample_frame
from .inner import run_frame_transmission
from .outer import (SchedulerParams, batch_deadline, build_split_table,
                    greedy_partition_search, update_energy_queue)
from .profile import cumulative_importance, default_profile

POLICIES = ("two_tier", "myopic", "fixed_split", "edge_only", "device_only")

STOP_LABELS = {0: "threshold", 1: "exhausted", 2: "deadline", 3: "local",
               4: "infeasible"}
_STOP_CODES = {"threshold": 0, "exhausted": 1, "deadline": 2, "local": 3,
               "infeasible": 4}

_INT_COLS = ("frame", "user", "split", "transmits", "slots", "n_sent",
             "success", "stop_code", "stop_slot")

TRACE_COLUMNS = (
    "frame", "user", "split", "transmits", "bandwidth_hz", "ref_power_w",
    "t_local_s", "t_edge_s", "window_s", "batch_offset_s", "slots",
    "pred_beta", "pred_acc", "pred_energy_j", "difficulty", "e_local_j",
    "e_transmit_j", "e_total_j", "n_sent", "beta_final", "acc_received",
    "acc_strict", "success", "stop_code", "stop_slot", "q_power_final",
    "q_energy_before", "q_energy_after", "util")


@dataclass(frozen=True)
class SimConfig:
    users: int = 1
    frames: int = 1000
    seed: int = 1
    policy: str = "two_tier"
    fixed_split: int = 0
    frame_period: float = 0.3
    t_slot: float = 1e-3
    v_outer: float = 50.0
    v_inner: float = 5.0
    p_max: float = 2.0
    energy_budget: float = 0.25
    bandwidth_hz: float = 1.6e6
    noise_power: float = 1e-13
    path_loss_gain: float = 3e-15
    fading: str = "rayleigh"
    device_frequency: float = 2e9
    edge_frequency: float = 2e10
    alpha_eff: float = 1e-28
    quant_bits: int = 8
    h_threshold_frac: float = 0.1
    kappa: float = 1.0
    difficulty_sigma: float = 0.8
    num_classes: int = 1000
    p_min: float = 1e-6
    q_floor: float = 1e-9
    eps_phi: float = 1e-9
    eps_conv: float = 1e-6
    max_iters: int = 50

    def __post_init__(self):
        if self.users < 1 or self.frames < 1:
            raise ValueError("need at least one user and one frame")
        if self.policy not in POLICIES:
            raise ValueError("unknown policy %r" % self.policy)
        if self.frame_period <= 0 or self.t_slot <= 0:
            raise ValueError("frame_period and t_slot must be positive")
        if self.t_slot > self.frame_period:
            raise ValueError("t_slot cannot exceed the frame period")
        if self.energy_budget <= 0:
            raise ValueError("energy_budget must be positive")

    def scheduler_params(self):
        return SchedulerParams(v_outer=self.v_outer, p_max=self.p_max,
                               p_min=self.p_min, q_floor=self.q_floor,
                               eps_phi=self.eps_phi, eps_conv=self.eps_conv,
                               max_iters=self.max_iters)


@dataclass(frozen=True)
class FrameResult:
    """One user's outcome in one frame (a trace row, typed)."""
    frame: int
    user: int
    split: int
    transmits: bool
    bandwidth_hz: float
    ref_power_w: float
    t_local_s: float
    t_edge_s: float
    window_s: float
    batch_offset_s: float
    slots: int
    pred_beta: float
    pred_acc: float
    pred_energy_j: float
    difficulty: float
    e_local_j: float
    e_transmit_j: float
    e_total_j: float
    n_sent: int
    beta_final: float
    acc_received: float
    acc_strict: float
    success: bool
    stop_reason: str
    stop_slot: int
    q_power_final: float
    q_energy_before: float
    q_energy_after: float
    util: float


@dataclass
class RunSummary:
    """Column-oriented trace of one run plus its configuration echo."""
    config: dict
    profile_name: str
    columns: dict = field(repr=False)

    def n_rows(self):
        return int(self.columns["frame"].shape[0])

    def row(self, i):
        c = self.columns
        return FrameResult(
            frame=int(c["frame"][i]), user=int(c["user"][i]),
            split=int(c["split"][i]), transmits=bool(c["transmits"][i]),
            bandwidth_hz=float(c["bandwidth_hz"][i]),
            ref_power_w=float(c["ref_power_w"][i]),
            t_local_s=float(c["t_local_s"][i]),
            t_edge_s=float(c["t_edge_s"][i]),
            window_s=float(c["window_s"][i]),
            batch_offset_s=float(c["batch_offset_s"][i]),
            slots=int(c["slots"][i]), pred_beta=float(c["pred_beta"][i]),
            pred_acc=float(c["pred_acc"][i]),
            pred_energy_j=float(c["pred_energy_j"][i]),
            difficulty=float(c["difficulty"][i]),
            e_local_j=float(c["e_local_j"][i]),
            e_transmit_j=float(c["e_transmit_j"][i]),
            e_total_j=float(c["e_total_j"][i]),
            n_sent=int(c["n_sent"][i]),
            beta_final=float(c["beta_final"][i]),
            acc_received=float(c["acc_received"][i]),
            acc_strict=float(c["acc_strict"][i]),
            success=bool(c["success"][i]),
            stop_reason=STOP_LABELS[int(c["stop_code"][i])],
            stop_slot=int(c["stop_slot"][i]),
            q_power_final=float(c["q_power_final"][i]),
            q_energy_before=float(c["q_energy_before"][i]),
            q_energy_after=float(c["q_energy_after"][i]),
            util=float(c["util"][i]))

    def per_user_energy(self):
        """Mean energy per frame for each user."""
        m, n = self.config["frames"], self.config["users"]
        return self.columns["e_total_j"].reshape(m, n).mean(axis=0)

    def final_queues(self):
        m, n = self.config["frames"], self.config["users"]
        return self.columns["q_energy_after"].reshape(m, n)[-1]

    def aggregates(self):
        c = self.columns
        m, n = self.config["frames"], self.config["users"]
        return {
            "policy": self.config["policy"],
            "seed": self.config["seed"],
            "frames": m,
            "users": n,
            "mean_acc_received": float(c["acc_received"].mean()),
            "mean_acc_strict": float(c["acc_strict"].mean()),
            "mean_pred_acc": float(c["pred_acc"].mean()),
            "mean_energy_j": float(c["e_total_j"].mean()),
            "per_user_energy_j": [float(x) for x in self.per_user_energy()],
            "mean_split": float(c["split"].mean()),
            "success_rate": float(c["success"].mean()),
            "final_queue_mean": float(self.final_queues().mean()),
            "final_queue_over_frames":
                float(self.final_queues().mean()) / m,
        }

    def write_trace(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            cols = [self.columns[name] for name in TRACE_COLUMNS]
            ints = [name in _INT_COLS for name in TRACE_COLUMNS]
            for i in range(self.n_rows()):
                parts = []
                for col, is_int in zip(cols, ints):
                    v = col[i]
                    parts.append(str(int(v)) if is_int
                                 else format(float(v), ".17g"))
                fh.write(",".join(parts) + "\n")

    def write_summary(self, path):
        payload = {"config": self.config,
                   "profile": self.profile_name,
                   "aggregates": self.aggregates()}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_trace(path):
    """Read a trace CSV back into a dict of numpy columns."""
    import csv

    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    out = {}
    for j, name in enumerate(header):
        vals = [r[j] for r in rows]
        if name in _INT_COLS:
            out[name] = np.array([int(v) for v in vals], dtype=np.int64)
        else:
            out[name] = np.array([float(v) for v in vals])
    return out


def _restrict_table(table, split):
    idx = np.nonzero(table.splits == split)[0]
    if idx.size != 1:
        raise ValueError("split %d not in profile split points" % split)
    i = slice(idx[0], idx[0] + 1)
    from .outer import SplitTable
    return SplitTable(splits=table.splits[i], bits_total=table.bits_total[i],
                      map_bits=table.map_bits[i], n_maps=table.n_maps[i],
                      e_local=table.e_local[i], t_local=table.t_local[i],
                      t_edge=table.t_edge[i], a0=table.a0[i], a1=table.a1[i],
                      a2=table.a2[i], acc_fixed=table.acc_fixed[i],
                      transmits=table.transmits[i])


def run_simulation(config, profile=None):
    """Simulate ``config.frames`` frames; returns a RunSummary."""
    if profile is None:
        profile = default_profile()
    table = build_split_table(profile, config.quant_bits,
                              config.device_frequency, config.edge_frequency,
                              config.alpha_eff)
    if config.policy == "fixed_split":
        table = _restrict_table(table, config.fixed_split)
    elif config.policy == "edge_only":
        table = _restrict_table(table, 0)
    elif config.policy == "device_only":
        table = _restrict_table(table, profile.k_m)

    params = config.scheduler_params()
    ch_cfg = ChannelModelConfig(path_loss_gain=config.path_loss_gain,
                                noise_power=config.noise_power,
                                fading=config.fading)
    h_max = float(np.log(config.num_classes))
    h_th = config.h_threshold_frac * h_max
    imp_cum = {s: cumulative_importance(profile, s)
               for s in profile.split_points if s < profile.k_m}

    n_users, n_frames = config.users, config.frames
    rng = np.random.Generator(np.random.PCG64(config.seed))
    queues = np.zeros(n_users)
    zero_queues = np.zeros(n_users)
    frame_gains = np.full(n_users, config.path_loss_gain)

    n_rows = n_frames * n_users
    cols = {name: (np.zeros(n_rows, dtype=np.int64) if name in _INT_COLS
                   else np.zeros(n_rows)) for name in TRACE_COLUMNS}

    for m in range(n_frames):
        difficulties = rng.lognormal(mean=0.0, sigma=config.difficulty_sigma,
                                     size=n_users)
        decision_q = zero_queues if config.policy == "myopic" else queues
        decisions = greedy_partition_search(params, table, decision_q,
                                            frame_gains, config.frame_period,
                                            config.bandwidth_hz,
                                            config.noise_power)
        offset = batch_deadline(config.frame_period,
                                [d.t_edge for d in decisions if d.split >= 0])
        for n in range(n_users):
            d = decisions[n]
            i = m * n_users + n
            row = cols
            row["frame"][i] = m
            row["user"][i] = n
            row["split"][i] = d.split
            row["difficulty"][i] = difficulties[n]
            row["q_energy_before"][i] = queues[n]
            row["batch_offset_s"][i] = offset

            if d.split < 0:
                e_total = 0.0
                row["stop_code"][i] = _STOP_CODES["infeasible"]
            elif d.transmits:
                win_eff = min(d.window, offset - d.t_local)
                n_slots = max(int(win_eff / config.t_slot + 1e-9), 0)
                state = sample_frame(ch_cfg, n_slots, rng)
                log = run_frame_transmission(
                    state.slot_gains, d.bandwidth, d.ref_power,
                    config.v_inner, d.map_bits, d.n_maps, imp_cum[d.split],
                    difficulties[n], h_th, config.noise_power, config.t_slot,
                    config.p_max, kappa=config.kappa, h_max=h_max,
                    q_floor=config.q_floor)
                coef = profile.surrogates[d.split]
                acc = _k.surrogate_k(coef.a0, coef.a1, coef.a2,
                                     log.beta_final)
                success = log.stop_reason in ("threshold", "exhausted")
                e_total = d.e_local + log.energy
                row["transmits"][i] = 1
                row["bandwidth_hz"][i] = d.bandwidth
                row["ref_power_w"][i] = d.ref_power
                row["slots"][i] = n_slots
                row["e_transmit_j"][i] = log.energy
                row["n_sent"][i] = log.n_sent
                row["beta_final"][i] = log.beta_final
                row["acc_received"][i] = acc
                row["acc_strict"][i] = acc if success else 0.0
                row["success"][i] = 1 if success else 0
                row["stop_code"][i] = _STOP_CODES[log.stop_reason]
                row["stop_slot"][i] = log.stop_slot
                row["q_power_final"][i] = log.q_final
            else:
                # device-only execution: no slots, full-model accuracy
                e_total = d.e_local
                row["acc_received"][i] = d.pred_acc
                row["acc_strict"][i] = d.pred_acc
                row["success"][i] = 1
                row["stop_code"][i] = _STOP_CODES["local"]

            if d.split >= 0:
                row["t_local_s"][i] = d.t_local
                row["t_edge_s"][i] = d.t_edge
                row["window_s"][i] = d.window
                row["pred_beta"][i] = d.pred_beta
                row["pred_acc"][i] = d.pred_acc
                row["pred_energy_j"][i] = d.pred_energy
                row["e_local_j"][i] = d.e_local
                row["util"][i] = d.util
            row["e_total_j"][i] = e_total
            queues[n] = update_energy_queue(queues[n], e_total,
                                            config.energy_budget)
            row["q_energy_after"][i] = queues[n]

    return RunSummary(config=asdict(config), profile_name=profile.name,
                      columns=cols)
