"""CSV writers for every artifact the CLI produces.

Dialect: comma separated, '.' decimal point, floats with 17 significant
digits so doubles round-trip exactly, and '#'-prefixed header lines.
"""

from __future__ import annotations

import os
from collections.abc import Iterable, Sequence

import numpy as np

from .classical import ClassicalSolution
from .gpe import Branch
from .quantum import SpectrumScan
from .sweep import OverlapDistribution, SweepResult


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path, header: Sequence[str], columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n" if line else "#\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return str(path)


def read_csv(path) -> tuple[list[str], list[str], np.ndarray]:
    """Header lines (without '# '), column names, and the numeric table.

    Non-numeric cells read as NaN.
    """
    header, cols, rows = [], None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                header.append(line[2:] if line.startswith("# ") else line[1:])
            elif cols is None:
                cols = line.split(",")
            elif line:
                rows.append([_num(v) for v in line.split(",")])
    table = np.array(rows, dtype=float).reshape(-1, len(cols or []))
    return header, cols or [], table


def _num(v: str) -> float:
    try:
        return float(v)
    except ValueError:
        return float("nan")


def spectrum_rows(scan: SpectrumScan):
    for j, x0 in enumerate(scan.x0_values):
        for k in range(scan.levels.shape[0]):
            gap = scan.gaps[k - 1, j] if k > 0 else float("nan")
            yield x0, k, scan.levels[k, j], gap


def write_spectrum(path, scan: SpectrumScan, header: Sequence[str]) -> str:
    extra = ["Fock index n counts atoms in mode 1 (left well)"]
    return write_csv(
        path, list(header) + extra, ["x0", "level_index", "energy_per_particle", "gap_below"],
        spectrum_rows(scan),
    )


def classical_rows(x0_values, roots_per_x0: Sequence[Sequence[ClassicalSolution]], N: int):
    for x0, sols in zip(x0_values, roots_per_x0):
        for b, s in enumerate(sols):
            yield x0, s.theta, s.mu, s.energy / N, b


def write_classical(path, x0_values, roots_per_x0, N: int, header: Sequence[str]) -> str:
    extra = ["branch_id ranks the stationary states at each x0 by energy (0 = lowest)"]
    return write_csv(
        path, list(header) + extra, ["x0", "theta", "mu", "energy_per_particle", "branch_id"],
        classical_rows(x0_values, roots_per_x0, N),
    )


def write_branch(path, branch: Branch, header: Sequence[str]) -> str:
    flags = set(branch.turning_indices)
    tp = ",".join(f"{x:.10g}" for x in branch.turning_points) or "none"
    rows = (
        (x0, s.mu, s.energy_per_particle, i in flags) for i, (x0, s) in enumerate(branch.points)
    )
    extra = [f"closed = {branch.closed}", f"turning_points = {tp}"]
    return write_csv(path, list(header) + extra,
                     ["x0", "mu", "energy_per_particle", "turning_point_flag"], rows)


def write_trajectory(path, result: SweepResult, header: Sequence[str]) -> str:
    N = result.populations.shape[1] - 1
    cols = ["t", "x0"] + [f"p{n}" for n in range(N + 1)]
    rows = ([t, x] + list(p) for t, x, p in zip(result.times, result.x0, result.populations))
    return write_csv(path, list(header) + window_lines(result), cols, rows)


def write_overlaps(path, dist: OverlapDistribution, result: SweepResult | None, header: Sequence[str]) -> str:
    extra = [f"basis_tag = {dist.basis_tag}"]
    if result is not None:
        extra += window_lines(result)
    rows = ((n, p, dist.basis_tag) for n, p in enumerate(dist.probabilities))
    return write_csv(path, list(header) + extra, ["n", "probability", "basis_tag"], rows)


def window_lines(result: SweepResult) -> list[str]:
    lines = [f"t_final = {result.t_final!r}", f"x0_final = {result.x0_final!r}",
             f"norm_drift = {result.norm_drift:.3e}"]
    if result.truncated:
        lines.append(f"window_exit = {result.exit_reason}")
    return lines
