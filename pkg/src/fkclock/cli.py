"""Command-line experiment runner.

Every run writes a fresh timestamped directory under the output root holding
``meta.json`` (the fully resolved configuration, tool version, and seed) plus
the subcommand's CSV/JSON artifacts. Exit codes: 0 success, 2 non-convergence,
1 error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import __version__
from .ansatz import AnsatzSpec
from .clock import encode_table
from .config import (FLAT_FIELDS, ConfigError, ExperimentConfig,
                     config_from_flat, resolve_config)
from .hamiltonian import first_excited_energy, gap_formula
from .noise import DEVICES, default_p2_grid, noise_sweep, rates_from_device
from .observables import (loschmidt_direct, loschmidt_hadamard_state,
                          magnetization, project_clock, rate_function)
from .sim import StateVector
from .trotter import (cx_count, infidelity_profile, level_times,
                      reference_state)
from .vqe import run_vqe, run_vqe_depth_sweep


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if value is None:
        return ""
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def make_run_dir(config: ExperimentConfig, command: str, argv: Sequence[str]) -> str:
    stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S-%f")
    run_dir = os.path.join(config.out_dir, f"{command}-{stamp}")
    suffix = 0
    while os.path.exists(run_dir):
        suffix += 1
        run_dir = os.path.join(config.out_dir, f"{command}-{stamp}-{suffix}")
    os.makedirs(run_dir)
    write_json(os.path.join(run_dir, "meta.json"), {
        "tool": "fkclock",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "created": _dt.datetime.now().isoformat(),
        "config": config.to_flat_dict(),
    })
    return run_dir


def save_theta(path: str, theta: np.ndarray, config: ExperimentConfig,
               extra: dict | None = None) -> None:
    payload = {"theta": [float(x) for x in theta],
               "n_params": int(theta.size),
               "config": config.to_flat_dict()}
    if extra:
        payload.update(extra)
    write_json(path, payload)


def load_theta(path: str) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return np.asarray(payload["theta"], dtype=float)


# ---------------------------------------------------------------- subcommands

def cmd_build(config: ExperimentConfig, args, argv) -> int:
    run_dir = make_run_dir(config, "build", argv)
    fk = config.build_hamiltonian()
    report = fk.count_strings()
    write_json(os.path.join(run_dir, "counts.json"), report)
    if args.dump_pauli:
        with open(os.path.join(run_dir, "pauli.txt"), "w", encoding="utf-8") as fh:
            fh.write(fk.pauli_sum().to_text() + "\n")
    if args.dump_clock:
        spec = config.clock_spec()
        print(f"# encode table ({spec.encoding}, n_a={spec.n_a})")
        for level, bits in encode_table(spec):
            print(f"{level} {bits}")
        from .clock import hop, projector
        for level in range(spec.levels):
            print(f"# projector level {level}")
            print(projector(level, spec).to_text())
        for level in range(spec.hops):
            print(f"# hop {level} -> {level + 1}")
            print(hop(level, spec).to_text())
    print(f"build: {report['total_terms']} terms, "
          f"{report['clock_strings_in_c2']} clock strings in C2, "
          f"gap formula {report['gap_formula']:.9f}; artifacts in {run_dir}")
    return 0


def cmd_vqe(config: ExperimentConfig, args, argv) -> int:
    run_dir = make_run_dir(config, "vqe", argv)
    cap = config.depth_cap if config.depth_cap else config.depth
    records = run_vqe_depth_sweep(config, depth_cap=cap)
    rec = records[-1]
    rows = []
    for i, (e, g, s) in enumerate(zip(rec.energies, rec.grad_norms, rec.stage_ids)):
        rows.append((i, s, e, g))
    write_csv(os.path.join(run_dir, "trace.csv"),
              ("iter", "stage", "energy", "grad_norm"), rows)
    save_theta(os.path.join(run_dir, "theta.json"), rec.theta, config, extra={
        "depth": rec.depth, "converged": rec.converged,
        "e_over_e1": rec.e_over_e1})
    for prior in records[:-1]:
        sub = os.path.join(run_dir, f"trace-depth{prior.depth}.csv")
        write_csv(sub, ("iter", "stage", "energy", "grad_norm"),
                  [(i, s, e, g) for i, (e, g, s) in enumerate(
                      zip(prior.energies, prior.grad_norms, prior.stage_ids))])
    status = "converged" if rec.converged else "NOT converged"
    print(f"vqe: depth {rec.depth} {status}, E/E1 = {rec.e_over_e1:.3e}, "
          f"{rec.iterations} iterations, {rec.wall_time:.1f}s; artifacts in {run_dir}")
    return 0 if rec.converged else 2


def cmd_trotter(config: ExperimentConfig, args, argv) -> int:
    run_dir = make_run_dir(config, "trotter", argv)
    times = level_times(config)
    spec = config.clock_spec()
    from .observables import magnetization_op
    from .sim import expectation
    mag_op = magnetization_op(config.n_s)
    rows = []
    for level in range(spec.levels):
        ref = reference_state(level, config)
        rows.append((level, times[level], expectation(ref, mag_op)))
    write_csv(os.path.join(run_dir, "reference.csv"),
              ("level", "time", "magnetization"), rows)
    write_json(os.path.join(run_dir, "counts.json"), {
        "cx_trotter": cx_count("trotter", config),
        "cx_ansatz": cx_count("ansatz", config),
        "depth": config.depth,
    })
    if args.theta:
        theta = load_theta(args.theta)
        profile = infidelity_profile(theta, config)
        write_csv(os.path.join(run_dir, "infidelity.csv"),
                  ("level", "time", "infidelity"),
                  [(lv, times[lv], v) for lv, v in enumerate(profile)])
    print(f"trotter: {spec.levels} levels; artifacts in {run_dir}")
    return 0


def _history_or_theta_state(config: ExperimentConfig, theta_path: str | None):
    if theta_path:
        theta = load_theta(theta_path)
        circuit = config.build_circuit()
        return circuit.apply(StateVector.zero(circuit.width), theta), "variational"
    return config.build_hamiltonian().history_state(), "exact"


def cmd_observe(config: ExperimentConfig, args, argv) -> int:
    run_dir = make_run_dir(config, "observe", argv)
    state, source = _history_or_theta_state(config, args.theta)
    spec = config.clock_spec()
    times = level_times(config)
    rows = []
    for level in range(spec.levels):
        _, prob = project_clock(state, level, spec)
        mag = magnetization(state, level, config.n_s, spec)
        rows.append((level, times[level], mag, prob))
    write_csv(os.path.join(run_dir, "observables.csv"),
              ("level", "time", "magnetization", "clock_prob"), rows)
    print(f"observe ({source} state): {spec.levels} levels; artifacts in {run_dir}")
    return 0


def cmd_echo(config: ExperimentConfig, args, argv) -> int:
    run_dir = make_run_dir(config, "echo", argv)
    state, source = _history_or_theta_state(config, args.theta)
    spec = config.clock_spec()
    times = level_times(config)
    rng = np.random.default_rng(config.seed)
    rows = []
    for level in range(spec.levels):
        direct = loschmidt_direct(state, 0, level, spec)
        echo = abs(direct) ** 2
        lam = rate_function(echo, config.n_s)
        re = loschmidt_hadamard_state(state, 0, level, "real",
                                      config.shots, rng, spec)
        im = loschmidt_hadamard_state(state, 0, level, "imag",
                                      config.shots, rng, spec)
        est = re.paper_estimate ** 2 + im.paper_estimate ** 2
        err = 2 * math.sqrt((re.paper_estimate * re.paper_stderr) ** 2 +
                            (im.paper_estimate * im.paper_stderr) ** 2)
        rows.append((times[level], echo, lam, est, err))
    write_csv(os.path.join(run_dir, "echo.csv"),
              ("time", "L", "lambda", "estimator", "stderr"), rows)
    print(f"echo ({source} state): {spec.levels} levels at {config.shots} shots; "
          f"artifacts in {run_dir}")
    return 0


def cmd_noise_sweep(config: ExperimentConfig, args, argv) -> int:
    run_dir = make_run_dir(config, "noise-sweep", argv)
    if not args.theta:
        raise ConfigError("theta: noise-sweep needs --theta from a converged vqe run")
    theta = load_theta(args.theta)
    if config.device:
        if config.device not in DEVICES:
            raise ConfigError(f"device: unknown preset {config.device!r}; "
                              f"choose from {sorted(DEVICES)}")
        rates = rates_from_device(DEVICES[config.device])
        config = config_from_flat({**{k: v for k, v in config.to_flat_dict().items()
                                      if k in FLAT_FIELDS},
                                   "p1": rates.p1, "p2": rates.p2})
        grid = np.array([rates.p2])
    else:
        grid = default_p2_grid() if config.p2 is None else np.array([config.p2])
    rows = noise_sweep(config, theta, grid)
    write_csv(os.path.join(run_dir, "sweep.csv"),
              ("p2", "f_vfk_mean", "f_vfk_std", "f_ts_mean", "f_ts_std", "ratio"),
              [(r["p2"], r["f_vfk_mean"], r["f_vfk_std"], r["f_ts_mean"],
                r["f_ts_std"], r["ratio"]) for r in rows])
    print(f"noise-sweep: {len(rows)} grid points; artifacts in {run_dir}")
    return 0


def cmd_count(config: ExperimentConfig, args, argv) -> int:
    run_dir = make_run_dir(config, "count", argv)
    spec = AnsatzSpec(config.n_s, config.n_a, config.depth)
    payload = {
        "ns": config.n_s, "na": config.n_a, "depth": config.depth,
        "n_params": spec.n_params,
        "cx_ansatz": spec.cx_count,
        "cx_trotter": cx_count("trotter", config),
        "gap_formula": gap_formula(config.n_a),
        "first_excited_energy": first_excited_energy(config.n_a),
    }
    if config.width <= 14:
        payload["strings"] = config.build_hamiltonian().count_strings()
    write_json(os.path.join(run_dir, "counts.json"), payload)
    if args.ansatz:
        print("ns,na,depth,n_params,cx_ansatz")
        print(f"{config.n_s},{config.n_a},{config.depth},"
              f"{spec.n_params},{spec.cx_count}")
    else:
        print(f"count: params {spec.n_params}, ansatz CX {spec.cx_count}, "
              f"trotter CX {payload['cx_trotter']}; artifacts in {run_dir}")
    return 0


def cmd_reproduce(config: ExperimentConfig, args, argv) -> int:
    from .reproduce import reproduce_figure
    run_dir = make_run_dir(config, f"reproduce-{args.figure}", argv)
    reproduce_figure(args.figure, args.scale, config, run_dir)
    print(f"reproduce {args.figure} ({args.scale}): artifacts in {run_dir}")
    return 0


# ------------------------------------------------------------------- parsing

_CONFIG_FLAGS: dict[str, dict] = {
    "ns": {"type": int, "help": "physical spin count"},
    "na": {"type": int, "help": "clock qubit count"},
    "j": {"type": float, "help": "Ising coupling"},
    "h": {"type": float, "help": "transverse field"},
    "te": {"type": float, "help": "total simulation time"},
    "encoding": {"choices": ("gray", "binary")},
    "form": {"choices": ("alternating", "single")},
    "depth": {"type": int, "help": "ansatz depth"},
    "depth_cap": {"type": int, "help": "retry up to this depth on non-convergence"},
    "initial": {"type": str, "help": "initial physical bit string"},
    "lr": {"type": float, "help": "ADAM learning rate"},
    "beta1": {"type": float}, "beta2": {"type": float}, "eps": {"type": float},
    "max_iter": {"type": int, "help": "iteration cap per stage"},
    "conv_ratio": {"type": float, "help": "convergence threshold on E/E1"},
    "grad_tol": {"type": float, "help": "intermediate-stage gradient stop"},
    "jitter": {"type": float, "help": "initial parameter jitter (radians)"},
    "gradient_method": {"choices": ("adjoint", "parameter_shift")},
    "stages": {"type": int, "help": "annealing stage count"},
    "anneal": {"choices": ("linear", "root")},
    "p1": {"type": float, "help": "single-qubit error probability"},
    "p2": {"type": float, "help": "two-qubit error probability"},
    "device": {"type": str, "help": "device preset name"},
    "shots": {"type": int},
    "seed": {"type": int},
    "out": {"type": str, "help": "output root directory"},
    "threads": {"type": int, "help": "recorded thread hint"},
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", dest="config_file", metavar="FILE",
                        help="flat TOML config; flags override it")
    for key, spec in _CONFIG_FLAGS.items():
        flag = "--" + key.replace("_", "-")
        parser.add_argument(flag, dest=key, default=None, **spec)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fkclock",
        description="Quantum dynamics as a ground-state problem: build clock "
                    "Hamiltonians, optimize history states, extract physics.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="compile the Hamiltonian and count strings")
    _add_config_flags(p)
    p.add_argument("--dump-pauli", action="store_true",
                   help="write the expanded Pauli sum as text")
    p.add_argument("--dump-clock", action="store_true",
                   help="print encode tables and clock operators")

    p = sub.add_parser("vqe", help="optimize the history state")
    _add_config_flags(p)

    p = sub.add_parser("trotter", help="reference evolution and gate counts")
    _add_config_flags(p)
    p.add_argument("--theta", help="theta.json for the infidelity profile")

    p = sub.add_parser("observe", help="per-level magnetization and weights")
    _add_config_flags(p)
    p.add_argument("--theta", help="theta.json (default: exact history state)")

    p = sub.add_parser("echo", help="Loschmidt echoes and the rate function")
    _add_config_flags(p)
    p.add_argument("--theta", help="theta.json (default: exact history state)")

    p = sub.add_parser("noise-sweep", help="fidelity ratio under gate noise")
    _add_config_flags(p)
    p.add_argument("--theta", help="theta.json from a converged vqe run")

    p = sub.add_parser("count", help="parameter and CX counting")
    _add_config_flags(p)
    p.add_argument("--ansatz", action="store_true",
                   help="print the ansatz parameter/CX table line")

    p = sub.add_parser("reproduce", help="regenerate figure datasets")
    _add_config_flags(p)
    p.add_argument("--figure", required=True,
                   choices=("fig2", "fig3", "fig4", "fig5", "fig6"))
    p.add_argument("--scale", default="desk", choices=("desk", "full"))
    return parser


_HANDLERS = {
    "build": cmd_build,
    "vqe": cmd_vqe,
    "trotter": cmd_trotter,
    "observe": cmd_observe,
    "echo": cmd_echo,
    "noise-sweep": cmd_noise_sweep,
    "count": cmd_count,
    "reproduce": cmd_reproduce,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    flag_values = {k: getattr(args, k) for k in _CONFIG_FLAGS if hasattr(args, k)}
    try:
        config = resolve_config(flag_values, args.config_file)
        return _HANDLERS[args.command](config, args, argv)
    except ConfigError as exc:
        print(f"fkclock: invalid config -- {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"fkclock: error -- {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
