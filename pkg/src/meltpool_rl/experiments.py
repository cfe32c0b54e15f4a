"""Hyperparameter sweeps with replicated, seeded runs.

Each swept value gets R independent training runs; per-episode total
rewards are aggregated into a mean curve with an across-replicate
standard-deviation band.  Replicate seeds derive deterministically from
(base seed, value index, replicate index), so a sweep is reproducible
from its spec alone and replicates stay independent.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import stats

from .environment import DepthCache, RewardConfig, StateGrid
from .oracle import Verdict, brute_force_rank, validate_run
from .qlearn import EpisodeTrace, Hyperparams, RunResult, train
from .thermal import MaterialEnv

#: swept values used when a sweep spec does not list its own
DEFAULT_SWEEP_VALUES: dict[str, tuple] = {
    "n": (5, 10, 15, 20),
    "epsilon": (0.25, 0.5, 0.75, 1.0),
    "gamma": (0.25, 0.5, 0.75, 1.0),
    "alpha": (0.25, 0.5, 0.75, 1.0),
    "episodes": (10, 25, 50, 75, 100, 200),
}

SWEEPABLE = tuple(DEFAULT_SWEEP_VALUES)


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple = ()
    replicates: int = 10
    base_seed: int = 0

    def __post_init__(self):
        if self.param not in SWEEPABLE:
            raise ValueError(f"sweep.param must be one of {SWEEPABLE}, "
                             f"got {self.param!r}")
        if self.replicates < 1:
            raise ValueError("sweep.replicates must be >= 1")
        if not self.values:
            object.__setattr__(self, "values", DEFAULT_SWEEP_VALUES[self.param])


@dataclass
class ConvergenceCurve:
    mean: np.ndarray
    std: np.ndarray

    def __len__(self) -> int:
        return len(self.mean)


@dataclass
class ValueResult:
    value: object
    runs: list[RunResult]
    seeds: list[int]
    curve: ConvergenceCurve
    verdicts: list[Verdict]


def replicate_seed(base_seed: int, value_index: int, replicate: int) -> int:
    """Deterministic, pairwise-distinct seed for one replicate."""
    ss = np.random.SeedSequence([base_seed, value_index, replicate])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def aggregate_convergence(trace_sets: list[list[EpisodeTrace]]) -> ConvergenceCurve:
    """Per-episode mean and std of total reward across replicates."""
    lengths = {len(ts) for ts in trace_sets}
    if len(lengths) != 1:
        raise ValueError(f"ragged trace sets: episode counts {sorted(lengths)}")
    rewards = np.array([[tr.total_reward for tr in ts] for ts in trace_sets])
    return ConvergenceCurve(rewards.mean(axis=0), rewards.std(axis=0))


def curve_slope(curve: ConvergenceCurve) -> tuple[float, float]:
    """Least-squares slope of mean reward vs episode and the one-sided
    p-value for the slope being positive."""
    episodes = np.arange(len(curve))
    fit = stats.linregress(episodes, curve.mean)
    p_one_sided = fit.pvalue / 2 if fit.slope > 0 else 1 - fit.pvalue / 2
    return float(fit.slope), float(p_one_sided)


def run_sweep(spec: SweepSpec, material: MaterialEnv, grid: StateGrid,
              rc: RewardConfig, hp: Hyperparams, jobs: int = 1,
              caches: Optional[dict[int, DepthCache]] = None) -> list[ValueResult]:
    """R replicated runs per swept value, aggregated and oracle-checked.

    caches maps grid resolution -> warm DepthCache and may be shared
    across sweeps to avoid re-evaluating the thermal model.
    """
    caches = caches if caches is not None else {}
    out = []
    for vi, value in enumerate(spec.values):
        g = replace(grid, n=int(value)) if spec.param == "n" else grid
        if spec.param == "n":
            hp_v = hp
        elif spec.param == "episodes":
            hp_v = replace(hp, episodes=int(value))
        else:
            hp_v = replace(hp, **{spec.param: float(value)})
        if g.n not in caches:
            caches[g.n] = DepthCache(material, g)
            caches[g.n].warm(jobs=jobs)
        cache = caches[g.n]
        report = brute_force_rank(g, cache, rc.delta_opt, rc.tol_r)
        runs, seeds, verdicts = [], [], []
        for rep in range(spec.replicates):
            seed = replicate_seed(spec.base_seed, vi, rep)
            try:
                result = train(g, cache, rc, replace(hp_v, seed=seed))
            except Exception as exc:
                raise RuntimeError(f"sweep {spec.param}={value} replicate {rep} "
                                   f"failed: {exc}") from exc
            runs.append(result)
            seeds.append(seed)
            verdicts.append(validate_run(report, result))
        curve = aggregate_convergence([r.traces for r in runs])
        out.append(ValueResult(value, runs, seeds, curve, verdicts))
    return out
