"""Flat key=value run configuration with [section] headers.

Every key has a desk-scale default; unknown sections or keys are rejected,
and every parse error names the offending line and key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from afc.agent.ppo import PpoConfig
from afc.errors import ConfigError
from afc.flow.config import JetConfig, SimConfig


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


#: section -> key -> (type converter, default)
SCHEMA: dict[str, dict[str, tuple]] = {
    "sim": {
        "re": (float, 100.0),
        "lx": (float, 30.0),
        "ly": (float, 15.0),
        "cylinder_x": (float, 7.5),
        "cylinder_y": (float, 7.5),
        "h": (float, 0.04),
        "cfl": (float, 0.4),
        "n_pe": (int, 4),
        "three_d": (_parse_bool, False),
    },
    "jets": {
        "theta_top_deg": (float, 90.0),
        "theta_bot_deg": (float, 270.0),
        "omega_deg": (float, 10.0),
        "l_jet": (float, 0.4),
        "q_max": (float, 0.176),
    },
    "train": {
        "n_episodes": (int, 30),
        "actions_per_episode": (int, 120),
        "n_cfd": (int, 2),
        "alpha": (float, 0.3),
        "beta": (float, 0.8),
        "seed": (int, 0),
        "periods_per_episode": (float, 6.0),
        "transient_time": (float, 100.0),
        "baseline_periods": (float, 12.0),
        "n_snapshots": (int, 4),
        "trigger_q": (float, 0.1),
        "trigger_t0": (float, 2.0),
        "trigger_t1": (float, 3.0),
        "actuation_onset": (float, 10.0),
        "eval_duration": (float, 90.0),
        "eval_stats_periods": (float, 10.0),
        "steady_drift_tol": (float, 0.005),
        "worker_retries": (int, 1),
    },
    "ppo": {
        "hidden": (int, 128),
        "learning_rate": (float, 3e-4),
        "clip_ratio": (float, 0.2),
        "gamma": (float, 0.99),
        "lam": (float, 0.95),
        "epochs": (int, 10),
        "minibatch_size": (int, 96),
        "entropy_coef": (float, 0.005),
        "value_coef": (float, 0.5),
        "max_grad_norm": (float, 0.5),
        "log_std_init": (float, -2.5),
    },
    "broker": {
        "host": (str, "127.0.0.1"),
        "port": (int, 0),
        "capacity_mb": (float, 256.0),
        "get_timeout_s": (float, 60.0),
    },
    "io": {
        "out_dir": (str, "runs/afc"),
    },
}


@dataclass
class TrainConfig:
    """Episode loop parameters; time spans derive from the measured baseline."""

    n_episodes: int = 30
    actions_per_episode: int = 120
    n_cfd: int = 2
    n_pe: int = 4
    alpha: float = 0.3
    beta: float = 0.8
    seed: int = 0
    periods_per_episode: float = 6.0
    transient_time: float = 100.0
    baseline_periods: float = 12.0
    n_snapshots: int = 4
    trigger_q: float = 0.1
    trigger_t0: float = 2.0
    trigger_t1: float = 3.0
    actuation_onset: float = 10.0
    eval_duration: float = 90.0
    eval_stats_periods: float = 10.0
    steady_drift_tol: float = 0.005
    worker_retries: int = 1

    def __post_init__(self):
        for name in ("n_episodes", "actions_per_episode", "n_cfd", "n_pe", "n_snapshots"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")

    def episode_time(self, st_baseline: float) -> float:
        """Six (by default) shedding periods of the measured baseline."""
        return self.periods_per_episode / st_baseline

    def action_time(self, st_baseline: float) -> float:
        return self.episode_time(st_baseline) / self.actions_per_episode

    @property
    def batch_per_action(self) -> int:
        return self.n_cfd * self.n_pe


@dataclass
class RunConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    jets: JetConfig = field(default_factory=JetConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    ppo: PpoConfig = field(default_factory=PpoConfig)
    broker_host: str = "127.0.0.1"
    broker_port: int = 0
    broker_capacity_mb: float = 256.0
    get_timeout_s: float = 60.0
    out_dir: str = "runs/afc"

    @property
    def broker_address(self) -> str:
        return f"{self.broker_host}:{self.broker_port}"


def default_values() -> dict[str, dict[str, object]]:
    return {sec: {k: v for k, (_, v) in keys.items()} for sec, keys in SCHEMA.items()}


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    values = default_values()
    section = None
    errors = []
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in SCHEMA:
                errors.append(f"{source}:{lineno}: unknown section [{name}]")
                section = None
            else:
                section = name
            continue
        if "=" not in line:
            errors.append(f"{source}:{lineno}: expected key=value, got {line!r}")
            continue
        if section is None:
            errors.append(f"{source}:{lineno}: key outside of any [section]")
            continue
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in SCHEMA[section]:
            errors.append(f"{source}:{lineno}: unknown key {key!r} in [{section}]")
            continue
        conv = SCHEMA[section][key][0]
        try:
            values[section][key] = conv(value)
        except (ValueError, TypeError):
            errors.append(
                f"{source}:{lineno}: bad value for {key!r}: {value!r} "
                f"(expected {getattr(conv, '__name__', 'value')})"
            )
    if errors:
        raise ConfigError("\n".join(errors))

    s = values["sim"]
    j = values["jets"]
    t = values["train"]
    p = values["ppo"]
    b = values["broker"]
    return RunConfig(
        sim=SimConfig(
            re=s["re"], lx=s["lx"], ly=s["ly"],
            cylinder_center=(s["cylinder_x"], s["cylinder_y"]),
            h=s["h"], cfl=s["cfl"], n_pe=s["n_pe"], three_d=s["three_d"],
        ),
        jets=JetConfig(
            theta_top_deg=j["theta_top_deg"], theta_bot_deg=j["theta_bot_deg"],
            omega_deg=j["omega_deg"], l_jet=j["l_jet"], q_max=j["q_max"],
        ),
        train=TrainConfig(n_pe=s["n_pe"], **t),
        ppo=PpoConfig(q_max=j["q_max"], **p),
        broker_host=b["host"],
        broker_port=b["port"],
        broker_capacity_mb=b["capacity_mb"],
        get_timeout_s=b["get_timeout_s"],
        out_dir=values["io"]["out_dir"],
    )


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(), source=str(p))


def dump_config(cfg: RunConfig) -> str:
    """Resolved configuration in the same format the parser accepts."""
    sim = cfg.sim
    lines = ["[sim]"]
    lines += [
        f"re={sim.re}", f"lx={sim.lx}", f"ly={sim.ly}",
        f"cylinder_x={sim.cylinder_center[0]}", f"cylinder_y={sim.cylinder_center[1]}",
        f"h={sim.h}", f"cfl={sim.cfl}", f"n_pe={sim.n_pe}", f"three_d={sim.three_d}",
    ]
    jets = cfg.jets
    lines += ["", "[jets]"]
    lines += [
        f"theta_top_deg={jets.theta_top_deg}", f"theta_bot_deg={jets.theta_bot_deg}",
        f"omega_deg={jets.omega_deg}", f"l_jet={jets.l_jet}", f"q_max={jets.q_max}",
    ]
    t = cfg.train
    lines += ["", "[train]"]
    lines += [f"{k}={getattr(t, k)}" for k in SCHEMA["train"]]
    p = cfg.ppo
    lines += ["", "[ppo]"]
    lines += [f"{k}={getattr(p, k)}" for k in SCHEMA["ppo"]]
    lines += ["", "[broker]"]
    lines += [
        f"host={cfg.broker_host}", f"port={cfg.broker_port}",
        f"capacity_mb={cfg.broker_capacity_mb}", f"get_timeout_s={cfg.get_timeout_s}",
    ]
    lines += ["", "[io]", f"out_dir={cfg.out_dir}"]
    return "\n".join(lines) + "\n"
