"""Command-line entry points.

    splitsched run     one simulation -> trace.csv + summary.json
    splitsched sweep   grid over one config field x seeds x policies -> CSV
    splitsched verify  run the oracle suite, print PASS/FAIL per section
    splitsched bench   time the numba vs pure-numpy kernel backends
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time
from dataclasses import replace, fields

import numpy as np

from .engine import SimConfig, run_simulation


def _load(args):
    if args.config:
        from .config import load_config
        cfg, profile = load_config(args.config)
    else:
        from .profile import default_profile
        cfg, profile = SimConfig(), default_profile()
    overrides = {}
    for name in ("seed", "users", "frames", "policy"):
        val = getattr(args, name, None)
        if val is not None:
            overrides[name] = val
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg, profile


def _field_type(name):
    for f in fields(SimConfig):
        if f.name == name:
            return f.type
    raise SystemExit("unknown config field %r" % name)


def cmd_run(args):
    cfg, profile = _load(args)
    os.makedirs(args.out, exist_ok=True)
    t0 = time.time()
    summary = run_simulation(cfg, profile)
    elapsed = time.time() - t0
    summary.write_trace(os.path.join(args.out, "trace.csv"))
    summary.write_summary(os.path.join(args.out, "summary.json"))
    agg = summary.aggregates()
    print("policy=%s seed=%d frames=%d users=%d (%.2fs)"
          % (cfg.policy, cfg.seed, cfg.frames, cfg.users, elapsed))
    print("  accuracy (received) %.4f | energy/frame %.4f J | success %.3f"
          % (agg["mean_acc_received"], agg["mean_energy_j"],
             agg["success_rate"]))
    print("  wrote %s/{trace.csv,summary.json}" % args.out)
    return 0


# named sweep axes; any raw SimConfig field name also works
_AXES = {"deadline": "frame_period", "bandwidth": "bandwidth_hz",
         "users": "users", "V": "v_outer"}

_SWEEP_KEYS = ["axis", "value", "policy", "n_seeds",
               "acc_mean", "acc_stderr", "acc_strict_mean",
               "energy_mean", "energy_stderr", "success_mean",
               "split_mean", "queue_over_frames_mean"]


def _sweep_point(payload):
    cfg, profile = payload
    return run_simulation(cfg, profile).aggregates()


def cmd_sweep(args):
    cfg, profile = _load(args)
    field = _AXES.get(args.axis, args.axis)
    ftype = _field_type(field)
    caster = int if ftype in ("int",) or ftype is int else float
    grid = [caster(v) for v in args.grid.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    policies = args.policies.split(",")
    os.makedirs(args.out, exist_ok=True)

    points = [(replace(cfg, seed=seed, policy=policy, **{field: value}),
               profile)
              for value in grid for policy in policies for seed in seeds]
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            aggs = list(pool.map(_sweep_point, points))
    else:
        aggs = [_sweep_point(p) for p in points]

    # rows come back in submission order, so grouping by grid order is
    # deterministic no matter how the pool scheduled the work
    rows = []
    i = 0
    for value in grid:
        for policy in policies:
            batch = aggs[i:i + len(seeds)]
            i += len(seeds)
            acc = np.array([b["mean_acc_received"] for b in batch])
            energy = np.array([b["mean_energy_j"] for b in batch])
            n = len(batch)

            def sem(x):
                if n < 2:
                    return 0.0
                return float(np.std(x, ddof=1) / math.sqrt(n))

            row = {
                "axis": args.axis, "value": value, "policy": policy,
                "n_seeds": n,
                "acc_mean": float(acc.mean()), "acc_stderr": sem(acc),
                "acc_strict_mean": float(np.mean(
                    [b["mean_acc_strict"] for b in batch])),
                "energy_mean": float(energy.mean()),
                "energy_stderr": sem(energy),
                "success_mean": float(np.mean(
                    [b["success_rate"] for b in batch])),
                "split_mean": float(np.mean(
                    [b["mean_split"] for b in batch])),
                "queue_over_frames_mean": float(np.mean(
                    [b["final_queue_over_frames"] for b in batch])),
            }
            rows.append(row)
            print("%s=%-10s policy=%-12s acc=%.4f±%.4f energy=%.4f±%.4f"
                  % (args.axis, value, policy, row["acc_mean"],
                     row["acc_stderr"], row["energy_mean"],
                     row["energy_stderr"]))

    path = os.path.join(args.out, "sweep.csv")
    with open(path, "w") as fh:
        fh.write(",".join(_SWEEP_KEYS) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r[k]) for k in _SWEEP_KEYS) + "\n")
    print("wrote %s (%d rows)" % (path, len(rows)))
    return 0


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def cmd_verify(args):
    from .verify import verify_all

    report = verify_all(quick=not args.full)
    failed = 0
    for name, section in report.items():
        if not isinstance(section, dict) or "passed" not in section:
            continue
        ok = section["passed"]
        failed += 0 if ok else 1
        print("%-22s %s" % (name, "PASS" if ok else "FAIL"))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")
        print("wrote %s" % args.out)
    return 0 if failed == 0 else 1


def cmd_bench(args):
    if args.worker:
        from .backend import active_backend

        cfg = SimConfig(users=args.users, frames=args.frames, seed=3)
        t0 = time.time()
        summary = run_simulation(cfg)          # includes jit compilation
        warm = time.time() - t0
        t0 = time.time()
        for _ in range(args.repeat):
            summary = run_simulation(cfg)
        hot = (time.time() - t0) / args.repeat
        print(json.dumps({"backend": active_backend(), "cold_s": warm,
                          "hot_s": hot,
                          "mean_energy": summary.aggregates()["mean_energy_j"],
                          "mean_acc":
                              summary.aggregates()["mean_acc_received"]}))
        return 0

    results = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, SPLITSCHED_BACKEND=backend)
        cmd = [sys.executable, "-m", "splitsched.cli", "bench", "--worker",
               "--frames", str(args.frames), "--users", str(args.users),
               "--repeat", str(args.repeat)]
        try:
            out = subprocess.run(cmd, env=env, capture_output=True,
                                 text=True, check=True)
        except subprocess.CalledProcessError as exc:
            print("backend %s failed:\n%s" % (backend, exc.stderr))
            return 1
        results[backend] = json.loads(out.stdout.strip().splitlines()[-1])

    nb, py = results["numba"], results["numpy"]
    print("workload: %d frames x %d users" % (args.frames, args.users))
    print("%-8s %12s %12s" % ("backend", "cold (s)", "hot (s)"))
    for name, r in results.items():
        print("%-8s %12.3f %12.3f" % (name, r["cold_s"], r["hot_s"]))
    if nb["mean_energy"] == py["mean_energy"] and \
            nb["mean_acc"] == py["mean_acc"]:
        print("outputs: bit-identical across backends")
    else:
        print("WARNING: backend outputs differ (energy %r vs %r)"
              % (nb["mean_energy"], py["mean_energy"]))
        return 1
    print("speedup (hot): %.1fx" % (py["hot_s"] / nb["hot_s"]))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="splitsched",
        description="Simulator and scheduler for multi-user device-edge "
                    "split inference under long-term energy budgets.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one simulation")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--users", type=int)
    p.add_argument("--frames", type=int)
    p.add_argument("--policy")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one axis over seeds x policies")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--axis", required=True,
                   help="deadline | bandwidth | users | V, or any config "
                        "field name (e.g. frame_period)")
    p.add_argument("--grid", required=True, help="comma-separated values")
    p.add_argument("--seeds", default="1", help="comma-separated seeds")
    p.add_argument("--policies", default="two_tier",
                   help="comma-separated policies")
    p.add_argument("--users", type=int, help="override user count")
    p.add_argument("--frames", type=int, help="override frame count")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for sweep points")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the oracle suite")
    p.add_argument("--full", action="store_true",
                   help="acceptance-scale draw counts (slower)")
    p.add_argument("--out", help="write JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="compare kernel backends")
    p.add_argument("--frames", type=int, default=2000)
    p.add_argument("--users", type=int, default=4)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
