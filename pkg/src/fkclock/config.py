"""Run configuration: the single source of experiment reproducibility.

Every field mirrors a CLI flag; values can come from a flat TOML file, from
``FKCLOCK_*`` environment variables, or from the command line, with later
sources overriding earlier ones. The time step is always derived as
``t_e / 2**(n_a - 1)`` and never set directly.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .ansatz import AnsatzSpec, build_ansatz
from .clock import ENCODINGS, ClockSpec
from .hamiltonian import FORMS, FKHamiltonian, TFIMParams
from .sim import ParameterizedCircuit
from .vqe import GRADIENT_METHODS, AnnealSchedule, OptimizerConfig

ENV_PREFIX = "FKCLOCK_"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class ExperimentConfig:
    n_s: int = 2
    n_a: int = 2
    j: float = 0.25
    h: float = 1.0
    t_e: float = 3.0
    encoding: str = "gray"
    form: str = "alternating"
    depth: int = 2
    depth_cap: int | None = None
    initial: str | None = None
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    p1: float | None = None
    p2: float | None = None
    device: str | None = None
    shots: int = 100_000
    seed: int = 0
    out_dir: str = "runs"
    threads: int = 1

    def __post_init__(self):
        if self.n_s < 2:
            raise ConfigError("ns: need at least 2 spins")
        if self.n_a < 1:
            raise ConfigError("na: need at least 1 clock qubit")
        if self.t_e <= 0:
            raise ConfigError("te: simulation time must be positive")
        if self.h <= 0:
            raise ConfigError("h: transverse field must be positive")
        if self.encoding not in ENCODINGS:
            raise ConfigError(f"encoding: must be one of {ENCODINGS}")
        if self.form not in FORMS:
            raise ConfigError(f"form: must be one of {FORMS}")
        if self.depth < 1:
            raise ConfigError("depth: must be >= 1")
        if self.shots < 1:
            raise ConfigError("shots: must be >= 1")
        for name in ("p1", "p2"):
            p = getattr(self, name)
            if p is not None and not 0 <= p < 1:
                raise ConfigError(f"{name}: probability must lie in [0, 1)")
        if self.initial is not None and (
                len(self.initial) != self.n_s or set(self.initial) - {"0", "1"}):
            raise ConfigError(f"initial: must be a {self.n_s}-bit string")

    @property
    def dt(self) -> float:
        return self.t_e / 2 ** (self.n_a - 1)

    @property
    def initial_bits(self) -> str:
        return self.initial if self.initial is not None else "0" * self.n_s

    @property
    def width(self) -> int:
        return self.n_s + self.n_a

    def tfim(self) -> TFIMParams:
        return TFIMParams(self.n_s, self.j, self.h)

    def clock_spec(self) -> ClockSpec:
        return ClockSpec(self.n_a, self.encoding)

    def ansatz_spec(self) -> AnsatzSpec:
        return AnsatzSpec(self.n_s, self.n_a, self.depth)

    def build_circuit(self) -> ParameterizedCircuit:
        return build_ansatz(self.ansatz_spec(), self.initial_bits)

    def build_hamiltonian(self, dt_eff: float | None = None) -> FKHamiltonian:
        return FKHamiltonian(self.tfim(), self.clock_spec(),
                             self.dt if dt_eff is None else dt_eff,
                             form=self.form, initial=self.initial_bits)

    def to_flat_dict(self) -> dict[str, Any]:
        opt, sched = self.optimizer, self.schedule
        return {
            "ns": self.n_s, "na": self.n_a, "j": self.j, "h": self.h,
            "te": self.t_e, "encoding": self.encoding, "form": self.form,
            "depth": self.depth, "depth_cap": self.depth_cap,
            "initial": self.initial_bits,
            "lr": opt.learning_rate, "beta1": opt.beta1, "beta2": opt.beta2,
            "eps": opt.eps, "max_iter": opt.max_iter,
            "conv_ratio": opt.conv_ratio, "grad_tol": opt.grad_tol,
            "jitter": opt.jitter, "gradient_method": opt.gradient_method,
            "stages": sched.stages, "anneal": sched.mapping,
            "p1": self.p1, "p2": self.p2, "device": self.device,
            "shots": self.shots, "seed": self.seed, "out": self.out_dir,
            "threads": self.threads, "dt": self.dt,
        }


# flag name -> (python type, default); mirrors to_flat_dict keys minus "dt"
FLAT_FIELDS: dict[str, tuple[type, Any]] = {
    "ns": (int, 2), "na": (int, 2), "j": (float, 0.25), "h": (float, 1.0),
    "te": (float, 3.0), "encoding": (str, "gray"), "form": (str, "alternating"),
    "depth": (int, 2), "depth_cap": (int, None), "initial": (str, None),
    "lr": (float, 0.01), "beta1": (float, 0.9), "beta2": (float, 0.999),
    "eps": (float, 1e-8), "max_iter": (int, 500), "conv_ratio": (float, 1e-2),
    "grad_tol": (float, 1e-4), "jitter": (float, 1e-3),
    "gradient_method": (str, "adjoint"),
    "stages": (int, 10), "anneal": (str, "linear"),
    "p1": (float, None), "p2": (float, None), "device": (str, None),
    "shots": (int, 100_000), "seed": (int, 0), "out": (str, "runs"),
    "threads": (int, 1),
}


def config_from_flat(values: Mapping[str, Any]) -> ExperimentConfig:
    """Build a config from flat flag-style keys; unknown keys are errors."""
    unknown = set(values) - set(FLAT_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    v: dict[str, Any] = {k: d for k, (_, d) in FLAT_FIELDS.items()}
    v.update({k: val for k, val in values.items() if val is not None})
    if v["gradient_method"] not in GRADIENT_METHODS:
        raise ConfigError(f"gradient_method: must be one of {GRADIENT_METHODS}")
    optimizer = OptimizerConfig(
        learning_rate=v["lr"], beta1=v["beta1"], beta2=v["beta2"], eps=v["eps"],
        max_iter=v["max_iter"], conv_ratio=v["conv_ratio"],
        grad_tol=v["grad_tol"], seed=v["seed"], jitter=v["jitter"],
        gradient_method=v["gradient_method"])
    schedule = AnnealSchedule(stages=v["stages"], mapping=v["anneal"])
    try:
        return ExperimentConfig(
            n_s=v["ns"], n_a=v["na"], j=v["j"], h=v["h"], t_e=v["te"],
            encoding=v["encoding"], form=v["form"], depth=v["depth"],
            depth_cap=v["depth_cap"], initial=v["initial"],
            optimizer=optimizer, schedule=schedule,
            p1=v["p1"], p2=v["p2"], device=v["device"], shots=v["shots"],
            seed=v["seed"], out_dir=v["out"], threads=v["threads"])
    except ValueError as exc:  # OptimizerConfig/AnnealSchedule raise ValueError
        raise ConfigError(str(exc)) from exc


def _coerce(key: str, raw: str) -> Any:
    typ, _ = FLAT_FIELDS[key]
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from exc


def load_config_file(path: str) -> dict[str, Any]:
    """Flat TOML file whose keys mirror CLI flags."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    out = {}
    for key, val in data.items():
        key = key.replace("-", "_")
        if key not in FLAT_FIELDS:
            raise ConfigError(f"unknown config key in {path}: {key}")
        typ, _ = FLAT_FIELDS[key]
        out[key] = typ(val) if not isinstance(val, str) else _coerce(key, val)
    return out


def env_overrides(environ: Mapping[str, str] | None = None) -> dict[str, Any]:
    """FKCLOCK_<FLAG> environment variables, e.g. FKCLOCK_SEED=7."""
    environ = os.environ if environ is None else environ
    out = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower()
        if key not in FLAT_FIELDS:
            raise ConfigError(f"unknown config key from environment: {name}")
        out[key] = _coerce(key, raw)
    return out


def resolve_config(flag_values: Mapping[str, Any] | None = None,
                   config_file: str | None = None,
                   environ: Mapping[str, str] | None = None) -> ExperimentConfig:
    """Merge file < environment < flags into a validated config."""
    merged: dict[str, Any] = {}
    if config_file:
        merged.update(load_config_file(config_file))
    merged.update(env_overrides(environ))
    if flag_values:
        merged.update({k: v for k, v in flag_values.items() if v is not None})
    return config_from_flat(merged)


def with_depth(config: ExperimentConfig, depth: int) -> ExperimentConfig:
    return replace(config, depth=depth)
