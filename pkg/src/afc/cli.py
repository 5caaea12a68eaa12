"""Command-line entry point: baseline, train, evaluate, broker, export.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 connectivity failure. AFC_LOG sets log verbosity (default info).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from afc.agent.model_io import load_model
from afc.broker.server import BrokerServer
from afc.errors import (
    CheckpointError,
    ConfigError,
    ConnectivityError,
    NumericalError,
)
from afc.orchestrator.baseline import run_baseline
from afc.orchestrator.csvio import export_action, export_cl_cd, read_csv, write_csv
from afc.orchestrator.evaluate import evaluate_deterministic
from afc.orchestrator.stats import resample_uniform, signal_statistics
from afc.orchestrator.train import train
from afc.runconfig import RunConfig, dump_config, load_config

log = logging.getLogger("afc")

EXPORTED_CSVS = ("cl_cd.csv", "reward.csv", "action.csv", "cp.csv", "spectrum.csv")


def _load(args) -> RunConfig:
    if args.config is None:
        cfg = RunConfig()
    else:
        cfg = load_config(args.config)
    if args.seed is not None:
        cfg.train.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    return cfg


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_baseline_files(out: Path, cfg: RunConfig, result) -> None:
    write_csv(
        out / "baseline_stats.csv",
        ["mean_Cl", "sigma_Cl", "St", "mean_Cd", "Cd_press", "Cd_visc"],
        [[result.mean_cl, result.sigma_cl, result.st, result.mean_cd,
          result.mean_cd_press, result.mean_cd_visc]],
    )
    for k, blob in enumerate(result.snapshots):
        (out / f"snapshot_{k:02d}.afcs").write_bytes(blob)
    tr = result.trace
    export_cl_cd(out / "cl_cd.csv", tr["t"], tr["cd"], tr["cl"], cfg.sim.n_pe)
    write_csv(out / "cp.csv", ["theta_deg", "cp"],
              zip(result.cp_theta, result.cp_mean))
    s = result.cl_stats
    write_csv(out / "spectrum.csv", ["st", "power"], zip(s.freq, s.power))


def cmd_baseline(args) -> int:
    cfg = _load(args)
    if args.dry_run:
        print(dump_config(cfg), end="")
        return 0
    out = _out_dir(cfg)
    result = run_baseline(cfg)
    _write_baseline_files(out, cfg, result)
    print(
        f"baseline: St={result.st:.4f} mean_Cd={result.mean_cd:.4f} "
        f"sigma_Cl={result.sigma_cl:.4f} mean_Cl={result.mean_cl:+.4f} -> {out}"
    )
    return 0


def _read_baseline_stats(out: Path) -> dict:
    path = out / "baseline_stats.csv"
    if not path.exists():
        raise ConfigError(f"{path} not found; run `afc baseline` first")
    header, rows = read_csv(path)
    return dict(zip(header, rows[0]))


def _broker_context(cfg: RunConfig, args):
    """Returns (server or None, address). External address wins."""
    if args.broker_addr and not args.embedded_broker:
        return None, args.broker_addr
    server = BrokerServer(cfg.broker_host, cfg.broker_port, cfg.broker_capacity_mb)
    server.start()
    return server, server.address


def cmd_train(args) -> int:
    cfg = _load(args)
    if args.dry_run:
        print(dump_config(cfg), end="")
        return 0
    out = _out_dir(cfg)
    stats = _read_baseline_stats(out)
    server, addr = _broker_context(cfg, args)
    try:
        config_path = args.config or _materialize_default_config(out)
        outcome = train(cfg, config_path, out, addr,
                        st_baseline=stats["St"], cd_baseline=stats["mean_Cd"])
    finally:
        if server is not None:
            server.stop()
    first = np.mean([r[1] for r in outcome.reward_rows[:5]])
    last = np.mean([r[1] for r in outcome.reward_rows[-5:]])
    cd_red = 100.0 * np.mean([r[2] for r in outcome.reward_rows[-5:]]) / stats["mean_Cd"]
    print(
        f"train: mean reward first5={first:+.4f} last5={last:+.4f} "
        f"final drag reduction ~{cd_red:.2f}% -> {out / 'model.afcp'}"
    )
    return 0


def _materialize_default_config(out: Path) -> str:
    path = out / "resolved_config.cfg"
    path.write_text(dump_config(RunConfig()))
    return str(path)


def cmd_evaluate(args) -> int:
    cfg = _load(args)
    if args.dry_run:
        print(dump_config(cfg), end="")
        return 0
    if not args.model:
        raise ConfigError("evaluate requires --model PATH")
    model_path = Path(args.model)
    if not model_path.exists():
        raise ConfigError(f"model file not found: {model_path}")
    out = _out_dir(cfg)
    stats = _read_baseline_stats(out)
    snapshots = sorted(out.glob("snapshot_*.afcs"))
    if not snapshots:
        raise ConfigError(f"no snapshots in {out}; run `afc baseline` first")
    ac = load_model(model_path.read_bytes())
    result = evaluate_deterministic(
        cfg, ac, snapshots[0].read_bytes(),
        st_baseline=stats["St"], cd_baseline=stats["mean_Cd"],
        sigma_cl_baseline=stats["sigma_Cl"],
    )
    tr = result.trace
    export_cl_cd(out / "cl_cd.csv", tr["t"], tr["cd"], tr["cl"], cfg.sim.n_pe)
    export_action(out / "action.csv", tr["t"], tr["q"])
    if result.cp_theta.size:
        write_csv(out / "cp.csv", ["theta_deg", "cp"], zip(result.cp_theta, result.cp_mean))
    write_csv(out / "spectrum.csv", ["st", "power"],
              zip(result.q_stats.freq, result.q_stats.power))
    write_csv(
        out / "eval_stats.csv",
        ["mean_Cl", "sigma_Cl", "St_Cl", "mean_Cd", "Cd_press", "Cd_visc",
         "cd_reduction_pct", "sigma_cl_reduction_pct", "st_q", "converged"],
        [[result.mean_cl, result.sigma_cl, result.st_cl, result.mean_cd,
          result.mean_cd_press, result.mean_cd_visc, result.cd_reduction_pct,
          result.sigma_cl_reduction_pct, result.q_stats.st, int(result.converged)]],
    )
    print(
        f"Cd reduction: {result.cd_reduction_pct:.2f}% | "
        f"sigma_Cl reduction: {result.sigma_cl_reduction_pct:.2f}%"
        + ("" if result.converged else " [unconverged]")
    )
    return 0


def cmd_broker(args) -> int:
    cfg = _load(args)
    if args.dry_run:
        print(dump_config(cfg), end="")
        return 0
    host, port = cfg.broker_host, cfg.broker_port
    if args.broker_addr:
        h, _, p = args.broker_addr.rpartition(":")
        host, port = h, int(p)
    server = BrokerServer(host, port, cfg.broker_capacity_mb)
    print(f"broker listening on {server.address}", flush=True)
    server.serve_forever()
    return 0


def cmd_export(args) -> int:
    cfg = _load(args)
    if args.dry_run:
        print(dump_config(cfg), end="")
        return 0
    out = Path(cfg.out_dir)
    if not out.is_dir():
        raise ConfigError(f"run directory not found: {out}")
    spectrum = out / "spectrum.csv"
    cl_cd = out / "cl_cd.csv"
    if not spectrum.exists() and cl_cd.exists():
        try:
            header, rows = read_csv(cl_cd)
            t = np.array([r[0] for r in rows])
            cl = np.array([r[2] for r in rows])
            _, cl_u = resample_uniform(t, cl, 0.02)
            s = signal_statistics(cl_u, 0.02)
            write_csv(spectrum, ["st", "power"], zip(s.freq, s.power))
        except (ConfigError, IndexError):
            pass  # too little data: spectrum.csv stays missing and is reported
    missing = [n for n in EXPORTED_CSVS
               if not (out / n).exists() or (out / n).stat().st_size == 0]
    if missing:
        raise ConfigError(f"missing or empty exports in {out}: {', '.join(missing)}")
    print(f"export: {', '.join(EXPORTED_CSVS)} ready in {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afc",
        description="Deep-reinforcement-learning active flow control of a cylinder wake.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "baseline": (cmd_baseline, "run the uncontrolled flow and save statistics + snapshots"),
        "train": (cmd_train, "train the PPO agent against broker-coupled solver workers"),
        "evaluate": (cmd_evaluate, "run a trained policy deterministically and report statistics"),
        "broker": (cmd_broker, "run the standalone tensor broker service"),
        "export": (cmd_export, "verify/produce plot-ready CSVs for a finished run"),
    }
    for name, (fn, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="run configuration file (defaults: desk profile)")
        p.add_argument("--seed", type=int, help="override [train] seed")
        p.add_argument("--broker-addr", help="external broker HOST:PORT")
        p.add_argument("--embedded-broker", action="store_true",
                       help="host the broker inside this process")
        p.add_argument("--model", help="model file for evaluation")
        p.add_argument("--out", help="override [io] out_dir")
        p.add_argument("--dry-run", action="store_true",
                       help="print the resolved configuration and exit")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("AFC_LOG", "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, CheckpointError) as exc:
        log.error("%s", exc)
        return 2
    except NumericalError as exc:
        log.error("%s", exc)
        return 3
    except ConnectivityError as exc:
        log.error("%s", exc)
        return 4


if __name__ == "__main__":
    sys.exit(main())
