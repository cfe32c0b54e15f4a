"""Brute-force ground truth over the grid.

Evaluates every state's steady-state depth, ranks states by distance to
the target depth, and checks a trained run against that ranking.  This is
deliberately independent of anything the learner produces.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .environment import DepthCache, StateGrid, StateId, state_params
from .qlearn import RunResult


@dataclass(frozen=True)
class StateReport:
    state_id: int
    i: int
    j: int
    power: float
    speed: float
    depth: float
    abs_err: float
    rank: int
    in_band: bool


@dataclass
class GridReport:
    grid: StateGrid
    delta_opt: float
    tol_r: float
    rows: list[StateReport]

    @property
    def best(self) -> StateReport:
        return next(r for r in self.rows if r.rank == 1)

    def rank_of(self, s: StateId) -> int:
        flat = s.flat(self.grid)
        return next(r.rank for r in self.rows if r.state_id == flat)

    def band(self) -> list[StateReport]:
        return [r for r in self.rows if r.in_band]


@dataclass(frozen=True)
class Verdict:
    rank: int
    top_k: int
    in_top_k: bool
    depth_gap: float
    depth_ok: bool
    depth_tol: float

    @property
    def passed(self) -> bool:
        return self.in_top_k or self.depth_ok


def brute_force_rank(grid: StateGrid, cache: DepthCache, delta_opt: float,
                     tol_r: float = 0.1, jobs: int = 1) -> GridReport:
    """Exhaustive depth evaluation and stable ranking by |depth - target|
    (ties break on flat state id)."""
    cache.warm(jobs=jobs)
    entries = []
    for i in range(grid.n):
        for j in range(grid.n):
            s = StateId(i, j)
            res = cache.depth(s)
            if not res.converged:
                p, v = state_params(grid, s)
                raise RuntimeError(f"oracle: depth not steady at state ({i},{j}) "
                                   f"P={p:.1f} W, v={v:.1f} mm/min")
            p, v = state_params(grid, s)
            entries.append((abs(res.depth_mm - delta_opt), s.flat(grid), i, j, p, v,
                            res.depth_mm))
    entries.sort(key=lambda e: (e[0], e[1]))
    rows = [StateReport(flat, i, j, p, v, depth, err, rank + 1, err <= tol_r)
            for rank, (err, flat, i, j, p, v, depth) in enumerate(entries)]
    rows.sort(key=lambda r: r.state_id)
    return GridReport(grid, delta_opt, tol_r, rows)


def validate_run(report: GridReport, result: RunResult, k: int = 3,
                 depth_tol: float = 0.05) -> Verdict:
    """Is the learner's best state within the oracle's top-k, and how far
    is its depth from the target?  Both criteria are reported; passed is
    their disjunction."""
    if report.grid.n_states != result.qtable.shape[0]:
        raise ValueError("grid mismatch between oracle report and run result")
    rank = report.rank_of(result.best_state)
    gap = abs(result.best_depth - report.delta_opt)
    return Verdict(rank, k, rank <= k, gap, gap <= depth_tol, depth_tol)


def write_pv_map_csv(path, report: GridReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["state_id", "i", "j", "power_w", "speed_mmpm",
                    "depth_mm", "abs_err_mm", "rank", "in_band"])
        for r in report.rows:
            w.writerow([r.state_id, r.i, r.j, f"{r.power:.4f}", f"{r.speed:.4f}",
                        f"{r.depth:.4f}", f"{r.abs_err:.4f}", r.rank, int(r.in_band)])
