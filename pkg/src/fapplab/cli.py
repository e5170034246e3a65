"""Command-line front end: one experiment per invocation, plain key=value
config files, seeded and byte-reproducible CSV/report output.

Exit codes: 0 success, 2 configuration error, 3 numerical tolerance failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import io
import sys
from math import pi

import numpy as np

from . import __version__
from .errors import ConfigError, ToleranceError
from . import bell as bell_mod
from . import echo as echo_mod
from . import friend as friend_mod
from . import reversal as rev_mod
from . import spincoarse as sc

EXPERIMENTS = ("qfunction", "classical-reverse", "echo", "friend", "bell")

# per-experiment parameter tables: name -> (parser, default, validator-description)
_POSITIVE = "must be positive"


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes"):
        return True
    if t in ("0", "false", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int_list(text: str) -> tuple:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _parse_float_list(text: str) -> tuple:
    return tuple(float(x) for x in text.split(",") if x.strip())


PARAM_TABLE = {
    "qfunction": {
        "j": (float, 10.0),
        "theta0": (float, pi / 3),
        "phi0": (float, 0.0),
        "grid_nodes": (int, 0),  # 0 means 2j+2 per axis
    },
    "classical-reverse": {
        "kick": (float, 6.0),
        "delta_kick": (float, 1e-2),
        "cell_q": (float, 3.0),
        "cell_p": (float, 2.0),
        "cell_width": (float, 0.05),
        "t_values": (_parse_int_list, (5, 10, 15)),
        "samples": (int, 100000),
    },
    "echo": {
        "j": (float, 10.0),
        "theta0": (float, pi / 3),
        "phi0": (float, 0.0),
        "sigma_scale": (float, 0.05),  # sigma = scale x mean level spacing
        "ensemble": (int, 500),
        "times": (_parse_float_list, ()),  # empty -> 0, 1/sigma, 2/sigma, 4/sigma
    },
    "friend": {
        "observer_dim": (int, 2),
    },
    "bell": {
        "sampled": (_parse_bool, False),
        "shots": (int, 10000),
    },
}


def parse_config_file(path: str) -> dict:
    raw = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
                key, _, value = stripped.partition("=")
                raw[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return raw


def resolve_config(experiment: str, raw: dict) -> dict:
    """Fill defaults, reject unknown keys, and range-check every parameter."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    table = PARAM_TABLE[experiment]
    cfg = {name: default for name, (_, default) in table.items()}
    for key, text in raw.items():
        if key in ("experiment", "seed", "out", "threads"):
            continue
        if key not in table:
            raise ConfigError(f"unknown config key {key!r} for experiment {experiment!r}")
        parse, _ = table[key]
        try:
            cfg[key] = parse(text)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {text!r} ({exc})") from exc
    _validate(experiment, cfg)
    return cfg


def _validate(experiment: str, cfg: dict):
    def positive(name):
        if cfg[name] <= 0:
            raise ConfigError(f"{name} {_POSITIVE}, got {cfg[name]}")

    if experiment == "qfunction":
        if cfg["j"] < 0.5 or (round(2 * cfg["j"]) != 2 * cfg["j"]):
            raise ConfigError(f"j must be a half-integer >= 1/2, got {cfg['j']}")
        if not 0 <= cfg["theta0"] <= pi:
            raise ConfigError("theta0 must lie in [0, pi]")
        if not 0 <= cfg["phi0"] < 2 * pi:
            raise ConfigError("phi0 must lie in [0, 2pi)")
        if cfg["grid_nodes"] < 0:
            raise ConfigError("grid_nodes must be non-negative")
    elif experiment == "classical-reverse":
        if cfg["kick"] < 0 or cfg["delta_kick"] < 0:
            raise ConfigError("kick strengths must be non-negative")
        positive("cell_width")
        if cfg["samples"] < 100:
            raise ConfigError("samples must be at least 100")
        if not cfg["t_values"] or any(t < 0 for t in cfg["t_values"]):
            raise ConfigError("t_values must be non-negative integers")
    elif experiment == "echo":
        if cfg["j"] < 0.5 or (round(2 * cfg["j"]) != 2 * cfg["j"]):
            raise ConfigError(f"j must be a half-integer >= 1/2, got {cfg['j']}")
        if cfg["sigma_scale"] < 0:
            raise ConfigError("sigma_scale must be non-negative")
        if cfg["ensemble"] < 100:
            raise ConfigError("ensemble must be at least 100")
        if any(t < 0 for t in cfg["times"]):
            raise ConfigError("times must be non-negative")
    elif experiment == "friend":
        if cfg["observer_dim"] not in (2, 3):
            raise ConfigError("observer_dim must be 2 or 3")
    elif experiment == "bell":
        if cfg["shots"] < 1:
            raise ConfigError("shots must be positive")


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    return str(value)


def _preamble(experiment: str, seed: int, threads: int, cfg: dict) -> list:
    lines = [f"# fapplab {__version__}",
             f"# experiment={experiment}",
             f"# seed={seed}",
             f"# threads={threads}"]
    for key in sorted(cfg):
        lines.append(f"# {key}={_format(cfg[key])}")
    return lines


def run(experiment: str, cfg: dict, seed: int, threads: int, out_path: str) -> str:
    """Dispatch, write the output file, and return a one-line summary."""
    buf = io.StringIO()
    for line in _preamble(experiment, seed, threads, cfg):
        buf.write(line + "\n")

    if experiment == "qfunction":
        summary = _run_qfunction(cfg, buf)
    elif experiment == "classical-reverse":
        summary = _run_reverse(cfg, seed, buf)
    elif experiment == "echo":
        summary = _run_echo(cfg, seed, buf)
    elif experiment == "friend":
        summary = _run_friend(cfg, buf)
    else:
        summary = _run_bell(cfg, seed, buf)

    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    return summary


def _run_qfunction(cfg: dict, buf) -> str:
    sys_ = sc.SpinSystem(cfg["j"])
    n = cfg["grid_nodes"] or sys_.dim + 1
    grid = sc.SphereGrid(n, n)
    omega = sc.SolidAngle(cfg["theta0"], cfg["phi0"])
    state = sc.coherent_state(sys_, omega)
    qf = sc.q_function_pure(state, sys_, grid)
    qf.write_csv(buf)
    return (f"qfunction j={cfg['j']} nodes={grid.size} "
            f"integral={qf.integral():.6f} clipped={qf.clipped_nodes}")


def _run_reverse(cfg: dict, seed: int, buf) -> str:
    mapping = rev_mod.ReversibleMap(cfg["kick"])
    region = rev_mod.CellRegion(center=rev_mod.PhasePoint(cfg["cell_q"], cfg["cell_p"]),
                                half_width=cfg["cell_width"] / 2)
    buf.write("t,probability,std_error,bound\n")
    child_seeds = np.random.SeedSequence(entropy=seed).generate_state(
        len(cfg["t_values"]), dtype=np.uint64)
    last = None
    for idx, t in enumerate(cfg["t_values"]):
        config = rev_mod.ReversalConfig(
            map=mapping, perturbed_kick=cfg["kick"] + cfg["delta_kick"], steps=int(t),
            region=region, samples=cfg["samples"], seed=int(child_seeds[idx]))
        result = rev_mod.reversal_probability(config)
        buf.write(f"{t},{result.probability!r},{result.std_error!r},{result.bound!r}\n")
        last = result
    return (f"classical-reverse K={cfg['kick']} dK={cfg['delta_kick']} "
            f"probability={last.probability:.6f} lyapunov={last.lyapunov_estimate:.4f}")


def _run_echo(cfg: dict, seed: int, buf) -> str:
    sys_ = sc.SpinSystem(cfg["j"])
    grid = sc.SphereGrid.for_spin(sys_)
    h0 = echo_mod.SpectralHamiltonian.random_dicke_diagonal(sys_, seed=seed)
    sigma = cfg["sigma_scale"] * h0.mean_spacing
    pert = echo_mod.GaussianPerturbation(sigma=sigma, means=np.zeros(sys_.dim),
                                         seed=seed + 1, h0=h0)
    times = cfg["times"]
    if not times:
        times = (0.0, 10.0, 20.0, 40.0) if sigma < echo_mod.SIGMA_BYPASS else \
            (0.0, 1 / sigma, 2 / sigma, 4 / sigma)
    psi = sc.coherent_state(sys_, sc.SolidAngle(cfg["theta0"], cfg["phi0"]))
    curve = echo_mod.echo_experiment(psi, h0, pert, np.array(times), cfg["ensemble"],
                                     sys_, grid)
    buf.write("t,mean_overlap,std_error,bound\n")
    for t, mo, se, b in zip(curve.times, curve.mean_overlap, curve.std_error,
                            curve.analytic_bound):
        buf.write(f"{float(t)!r},{float(mo)!r},{float(se)!r},{float(b)!r}\n")
    return (f"echo j={cfg['j']} sigma={sigma:.6f} "
            f"final_overlap={curve.mean_overlap[-1]:.6f}")


def _run_friend(cfg: dict, buf) -> str:
    report = friend_mod.run_pipeline(friend_mod.LabSpace(observer_dim=cfg["observer_dim"]))
    for key, value in report.items():
        buf.write(f"{key}={_format(value)}\n")
    return (f"friend observer_dim={cfg['observer_dim']} "
            f"p_plus={report['p_plus_post_message']:.6f} "
            f"message_purity={report['message_purity']:.6f}")


def _run_bell(cfg: dict, seed: int, buf) -> str:
    settings = bell_mod.ChshSettings.default()
    state = bell_mod.build_bell_state()
    buf.write("setting_pair,correlation\n")
    if cfg["sampled"]:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
        corr = {name: bell_mod.correlation_sampled(state, a, b, cfg["shots"], rng)
                for name, a, b in settings.pairs()}
        chsh = abs(corr["a1b1"] + corr["a1b2"] + corr["a2b1"] - corr["a2b2"])
    else:
        corr = {name: bell_mod.correlation(state, a, b) for name, a, b in settings.pairs()}
        chsh = bell_mod.chsh_value(state, settings)
    for name in ("a1b1", "a1b2", "a2b1", "a2b2"):
        buf.write(f"{name},{corr[name]!r}\n")
    classical = bell_mod.lhv_bound()
    buf.write(f"# chsh={chsh:.6f} lhv_bound={classical:.6f} margin={chsh - classical:.6f}\n")
    mode = "sampled" if cfg["sampled"] else "exact"
    return f"bell mode={mode} chsh={chsh:.6f} lhv_bound={classical:.6f}"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fapplab",
        description="Coarse-grained spin states, practical irreversibility, and "
                    "laboratory-level Bell experiments.")
    parser.add_argument("--experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="key=value parameter file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output file path")
    parser.add_argument("--threads", type=int, default=None,
                        help="accepted for interface compatibility; execution is "
                             "sequential and results never depend on it")
    args = parser.parse_args(argv)

    try:
        raw = parse_config_file(args.config) if args.config else {}
        experiment = args.experiment or raw.get("experiment")
        if experiment is None:
            raise ConfigError("no experiment selected (use --experiment or config)")
        try:
            seed = args.seed if args.seed is not None else int(raw.get("seed", 0))
            threads = args.threads if args.threads is not None else int(raw.get("threads", 1))
        except ValueError as exc:
            raise ConfigError(f"bad integer in config: {exc}") from exc
        if seed < 0:
            raise ConfigError("seed must be non-negative")
        if threads < 1:
            raise ConfigError("threads must be at least 1")
        out_path = args.out or raw.get("out") or f"{experiment}.csv"
        cfg = resolve_config(experiment, raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        summary = run(experiment, cfg, seed, threads, out_path)
    except ToleranceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
