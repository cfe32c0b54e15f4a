"""Tabular Q-learning over the process-parameter grid.

One table of shape (n^2, 8) holds a quality score per state-action pair,
initialized to zero.  Episodes start from a uniformly random state and run
epsilon-greedy until the landing state hits the target depth tolerance or
the epoch cap is reached.  The per-update rule is the standard one-step
temporal-difference target:

    Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))

with the max taken over the actions actually available at s' (edge states
have fewer than 8).  All randomness flows through a seeded PCG64 stream,
split one substream per episode, so runs are bit-reproducible.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .environment import (
    ACTIONS,
    N_ACTIONS,
    DepthCache,
    RewardConfig,
    StateGrid,
    StateId,
    state_from_flat,
    state_params,
    step,
    valid_actions,
)

GENERATOR_NAME = "numpy.random.PCG64"


@dataclass(frozen=True)
class Hyperparams:
    alpha: float = 0.25
    gamma: float = 0.25
    epsilon: float = 0.25
    episodes: int = 100
    n_epochs: int = 50
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("qlearn.alpha must be in (0, 1]")
        if not 0 <= self.gamma <= 1:
            raise ValueError("qlearn.gamma must be in [0, 1]")
        if not 0 <= self.epsilon <= 1:
            raise ValueError("qlearn.epsilon must be in [0, 1]")
        if self.episodes < 1:
            raise ValueError("qlearn.episodes must be >= 1")
        if self.n_epochs < 1:
            raise ValueError("qlearn.n_epochs must be >= 1")


@dataclass
class Transition:
    state: int
    action: int
    reward: float
    next_state: int
    depth_err: float


@dataclass
class EpisodeTrace:
    transitions: list[Transition] = field(default_factory=list)
    total_reward: float = 0.0
    epochs: int = 0
    terminated_early: bool = False


@dataclass
class RunResult:
    qtable: np.ndarray
    traces: list[EpisodeTrace]
    best_state: StateId
    best_power: float
    best_speed: float
    best_depth: float
    generator: str = GENERATOR_NAME


def new_qtable(n: int) -> np.ndarray:
    return np.zeros((n * n, N_ACTIONS))


def q_update(q: np.ndarray, s: int, a: int, r: float, s_next: int,
             next_valid: tuple[int, ...], hp: Hyperparams) -> float:
    """Apply the one-step update in place and return the new entry."""
    future = max(q[s_next, k] for k in next_valid)
    # algebraically identical to q + alpha*(target - q), but exact at alpha=1
    val = (1.0 - hp.alpha) * q[s, a] + hp.alpha * (r + hp.gamma * future)
    if not np.isfinite(val):
        raise ArithmeticError(f"non-finite Q-value at state {s}, action {a}")
    q[s, a] = val
    return val


def select_action(q: np.ndarray, s: int, valid: tuple[int, ...],
                  epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy over the valid actions; greedy ties are broken
    uniformly at random from the same stream (first-index tie-breaking
    would bias the all-zero initial table toward action 0)."""
    if rng.random() < epsilon:
        return int(rng.choice(valid))
    row = q[s, list(valid)]
    best = row.max()
    ties = [k for k, v in zip(valid, row) if v == best]
    return int(rng.choice(ties))


def run_episode(grid: StateGrid, cache: DepthCache, rc: RewardConfig,
                q: np.ndarray, hp: Hyperparams,
                rng: np.random.Generator) -> EpisodeTrace:
    """One episode: random start, then select/step/update until the
    landing state is within tol_delta of the target or the epoch cap.

    Termination is evaluated on the landing state, so even a lucky start
    records at least one transition.
    """
    trace = EpisodeTrace()
    s = state_from_flat(grid, int(rng.integers(grid.n_states)))
    while trace.epochs < hp.n_epochs:
        s_flat = s.flat(grid)
        valid = valid_actions(grid, s)
        a = select_action(q, s_flat, valid, hp.epsilon, rng)
        out = step(grid, cache, s, a, rc)
        nxt_flat = out.next_state.flat(grid)
        q_update(q, s_flat, a, out.reward, nxt_flat,
                 valid_actions(grid, out.next_state), hp)
        dd = abs(out.depth_mm - rc.delta_opt)
        trace.transitions.append(Transition(s_flat, a, out.reward, nxt_flat, dd))
        trace.total_reward += out.reward
        trace.epochs += 1
        s = out.next_state
        if out.terminal:
            trace.terminated_early = True
            break
    return trace


def replay(q: np.ndarray, grid: StateGrid, transitions, hp: Hyperparams) -> np.ndarray:
    """Re-apply recorded transitions to a table (no action selection);
    used to study the update rule on fixed trajectories."""
    for tr in transitions:
        q_update(q, tr.state, tr.action, tr.reward, tr.next_state,
                 valid_actions(grid, state_from_flat(grid, tr.next_state)), hp)
    return q


def best_state_of(q: np.ndarray, grid: StateGrid) -> StateId:
    """Learned optimum: the landing state of the globally maximal
    state-action entry.

    Each Q(s, a) scores the cell the action moves *to* (rewards are
    evaluated at the landing state), so the table maps onto the grid via
    s + a, and the strongest entry points at the best process parameters.
    Exact ties resolve to the lowest (flat id, action) for stable output.
    """
    best_flat, best_action, best_val = 0, None, -np.inf
    for flat in range(grid.n_states):
        s = state_from_flat(grid, flat)
        for k in valid_actions(grid, s):
            if q[flat, k] > best_val:
                best_flat, best_action, best_val = flat, k, q[flat, k]
    s = state_from_flat(grid, best_flat)
    if best_action is None or best_val <= 0:
        # nothing positive was ever learned; fall back to the strongest row
        return s
    di, dj = ACTIONS[best_action]
    return StateId(s.i + di, s.j + dj)


def train(grid: StateGrid, cache: DepthCache, rc: RewardConfig,
          hp: Hyperparams) -> RunResult:
    """Run hp.episodes episodes against one persistent Q-table.

    Each episode draws from its own spawned substream of the seeded
    PCG64 generator, so traces are reproducible episode by episode.
    """
    q = new_qtable(grid.n)
    streams = np.random.SeedSequence(hp.seed).spawn(hp.episodes)
    traces = [run_episode(grid, cache, rc, q, hp, np.random.default_rng(ss))
              for ss in streams]
    best = best_state_of(q, grid)
    p, v = state_params(grid, best)
    depth = cache.depth(best).depth_mm
    return RunResult(q, traces, best, p, v, depth)


def write_qtable_csv(path, q: np.ndarray) -> None:
    header = ["state_id"] + [f"a({di},{dj})" for di, dj in ACTIONS]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for flat, row in enumerate(q):
            w.writerow([flat] + [repr(float(x)) for x in row])


def write_qtable_json(path, q: np.ndarray, config_snapshot: dict, seed: int) -> None:
    payload = {
        "config": config_snapshot,
        "seed": seed,
        "generator": GENERATOR_NAME,
        "qtable": q.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_convergence_csv(path, traces) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["episode", "total_reward", "epochs", "terminated_early"])
        for e, tr in enumerate(traces):
            w.writerow([e, repr(tr.total_reward), tr.epochs, int(tr.terminated_early)])
