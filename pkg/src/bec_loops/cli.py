"""Command-line drivers that write CSV data for each kind of run.

Exit codes: 0 success, 2 configuration error, 3 solver error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings

import numpy as np

from . import __version__
from .classical import classical_roots
from .config import RunConfig, load_config
from .errors import BecLoopsError, ConfigError
from .export import (
    write_branch,
    write_classical,
    write_csv,
    write_overlaps,
    write_spectrum,
    window_lines,
    write_trajectory,
)
from .gpe import StepControl, continue_branch, count_solutions, seed_from_linear, two_mode_linear_states
from .modes import ModeOverlapWarning, params_for_trap
from .quantum import scan_spectrum
from .sweep import (
    ParameterLattice,
    binomial_populations,
    final_overlaps,
    initial_ground_state,
    project_at_end,
    propagate,
    single_particle_oracle,
    total_variation,
)

log = logging.getLogger("bec_loops")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def _header(cfg: RunConfig, command: str) -> list[str]:
    return [f"bec_loops {__version__} {command}"] + cfg.header_lines()


def _path(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.output_dir, name)


def _classical_over(cfg: RunConfig, x0_values, g0: float):
    roots = []
    for x0 in x0_values:
        p = params_for_trap(cfg.trap.at(x0), cfg.grid, g0, cfg.N, cfg.overlap_threshold)
        roots.append(classical_roots(p))
    return roots


def cmd_scan_spectrum(cfg: RunConfig) -> list[str]:
    head = _header(cfg, "scan-spectrum")
    scan = scan_spectrum(cfg.trap, cfg.x0_values, cfg.g0, cfg.N, cfg.grid)
    roots = [classical_roots(p) for p in scan.params_trace]
    return [
        write_spectrum(_path(cfg, "spectrum.csv"), scan, head),
        write_classical(_path(cfg, "classical_roots.csv"), cfg.x0_values, roots, cfg.N, head),
    ]


def cmd_classical_roots(cfg: RunConfig) -> list[str]:
    head = _header(cfg, "classical-roots")
    roots = _classical_over(cfg, cfg.x0_values, cfg.g0)
    return [write_classical(_path(cfg, "classical_roots.csv"), cfg.x0_values, roots, cfg.N, head)]


def trace_two_mode_branches(cfg: RunConfig):
    """Full-GPE branches seeded on both two-mode levels at the right end of ``gpe_range``."""
    lo, hi = cfg.gpe_range
    seed_trap = cfg.trap.at(hi)
    ctl = StepControl(initial=cfg.gpe_initial_step, max_step=cfg.gpe_max_step)
    branches = {}
    for label, (_, psi) in zip(("lower", "upper"), two_mode_linear_states(seed_trap, cfg.grid)):
        seed = seed_from_linear(seed_trap, cfg.Ng0, psi)
        branches[label] = continue_branch(seed, (lo, hi), ctl, direction=-1)
    return branches


def cmd_gpe_trace(cfg: RunConfig) -> list[str]:
    head = _header(cfg, "gpe-trace")
    lo, hi = cfg.gpe_range
    files = []
    for label, br in trace_two_mode_branches(cfg).items():
        files.append(write_branch(_path(cfg, f"gpe_branch_{label}.csv"), br, head + [f"branch = {label}"]))

    step = float(np.diff(cfg.x0_values[:2])[0]) if len(cfg.x0_values) > 1 else 0.005
    xs = lo + step * np.arange(int(np.floor((hi - lo) / step + 1e-9)) + 1)
    files.append(write_classical(_path(cfg, "gpe_classical_roots.csv"), xs,
                                 _classical_over(cfg, xs, cfg.g0), cfg.N, head))

    if cfg.gpe_count_step > 0:
        rows = []
        n_c = int(np.floor((hi - lo) / cfg.gpe_count_step + 1e-9))
        for k, x0 in enumerate(lo + cfg.gpe_count_step * np.arange(n_c + 1)):
            sols = count_solutions(cfg.trap.at(x0), cfg.Ng0, (-np.inf, np.inf),
                                   cfg.gpe_n_starts, cfg.grid, seed=cfg.seed + k, basis="two-mode")
            rows += [(x0, len(sols), i, s.mu, s.energy_per_particle) for i, s in enumerate(sols)]
        files.append(write_csv(_path(cfg, "gpe_solution_counts.csv"), head + ["multistart basis = two-mode"],
                               ["x0", "n_solutions", "solution_index", "mu", "energy_per_particle"], rows))
    return files


def _g0_set(cfg: RunConfig):
    g = abs(cfg.Ng0) / cfg.N
    if g == 0:
        return [("zero", 0.0)]
    return [("zero", 0.0), ("plus", g), ("minus", -g)]


def cmd_sweep(cfg: RunConfig, oracle: bool = False) -> list[str]:
    head = _header(cfg, "sweep")
    proto = cfg.sweep
    lattice = ParameterLattice(cfg.trap, proto.x0_start, proto.x0_end, cfg.grid,
                               overlap_limit=cfg.overlap_limit)
    files = []
    for label, g0 in _g0_set(cfg):
        init = initial_ground_state(lattice, proto, g0, cfg.N)
        res = propagate(init, proto, cfg.trap, g0, cfg.N, lattice=lattice,
                        sample_every=cfg.sample_every)
        if cfg.projection_x0 is not None:
            p = params_for_trap(cfg.trap.at(cfg.projection_x0), cfg.grid, g0, cfg.N)
            dist = final_overlaps(res.final, p, f"instantaneous x0={cfg.projection_x0:.6f}")
        else:
            dist = project_at_end(res, g0, cfg.N)
        sub = head + [f"g0 = {g0!r}", f"g0N = {g0 * cfg.N!r}"]
        files.append(write_trajectory(_path(cfg, f"sweep_{label}_trajectory.csv"), res, sub))
        files.append(write_overlaps(_path(cfg, f"sweep_{label}_overlaps.csv"), dist, res, sub))
        if oracle and g0 == 0.0:
            a, b = single_particle_oracle(proto, lattice, res.t_final)
            ref = binomial_populations(a, b, cfg.N)
            tvd = total_variation(ref, res.final.populations)
            rows = zip(range(cfg.N + 1), ref, res.final.populations)
            files.append(write_csv(
                _path(cfg, "sweep_zero_oracle.csv"),
                sub + window_lines(res) + [f"mode1_probability = {abs(a) ** 2!r}", f"total_variation = {tvd:.3e}"],
                ["n", "binomial_probability", "propagated_probability"], rows,
            ))
    return files


def cmd_modes_report(cfg: RunConfig) -> list[str]:
    head = _header(cfg, "modes-report")
    rows = []
    for x0 in cfg.x0_values:
        p = params_for_trap(cfg.trap.at(x0), cfg.grid, cfg.g0, cfg.N, cfg.overlap_threshold)
        rows.append((x0, p.E1, p.E2, p.Omega, p.V1, p.V2, p.overlap, p.overlap_warning))
    return [write_csv(_path(cfg, "modes_report.csv"), head,
                      ["x0", "E1", "E2", "Omega", "V1", "V2", "overlap", "overlap_warning"], rows)]


COMMANDS = {
    "scan-spectrum": cmd_scan_spectrum,
    "gpe-trace": cmd_gpe_trace,
    "classical-roots": cmd_classical_roots,
    "sweep": cmd_sweep,
    "modes-report": cmd_modes_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bec-loops", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key=value configuration file")
        sp.add_argument("--out", help="output directory (overrides output_dir)")
        sp.add_argument("--seed", type=int, help="multistart seed (overrides seed)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key; may repeat")
        if name == "sweep":
            sp.add_argument("--oracle", action="store_true",
                            help="also write the binomial 2x2 oracle for g0 = 0")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        from .config import SCHEMA, _parse_value

        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = (s.strip() for s in item.split("=", 1))
            if k not in SCHEMA:
                raise ConfigError(f"unknown key {k!r}")
            overrides[k] = _parse_value(k, SCHEMA[k][0], v)
        if args.out is not None:
            overrides["output_dir"] = args.out
        if args.seed is not None:
            overrides["seed"] = args.seed
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ModeOverlapWarning)
            if args.command == "sweep":
                files = cmd_sweep(cfg, oracle=args.oracle)
            else:
                files = COMMANDS[args.command](cfg)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BecLoopsError as exc:
        print(f"solver error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
