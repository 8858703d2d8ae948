"""Monte Carlo for CTMC paths: jump chain with exponential holding times.

Trajectories advance in lockstep as numpy arrays. Jump ``j`` of trajectory
``i`` consumes counter ``2j`` (holding time ``-ln U / gamma``) and ``2j + 1``
(neighbour choice) of the stream keyed by ``hash(master_seed, i)``.

Also provides an exact level-by-level sampler for passage times of
recurrent birth-death chains to 0 (Ray-Knight structure of the local times).
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .chain import Model, NumericError, StateSet, state_id
from .models import ParameterError
from .rng import GENERATOR_NAME, stream_keys, uniforms

HIT, TIME_CENSORED, JUMP_CENSORED = "hit", "time_censored", "jump_censored"
_STATUS = (HIT, TIME_CENSORED, JUMP_CENSORED)
TAIL_LEN = 32
RATE_LIMIT = 1e300


@dataclass(frozen=True)
class Caps:
    max_jumps: int = 10**6
    max_time: float = math.inf
    target: StateSet | None = None

    def __post_init__(self):
        if int(self.max_jumps) < 1:
            raise ParameterError("max_jumps must be >= 1")
        if not self.max_time > 0:
            raise ParameterError("max_time must be positive")

    def descriptor(self) -> dict:
        return {"max_jumps": int(self.max_jumps), "max_time": self.max_time,
                "target": None if self.target is None else self.target.name}


@dataclass(frozen=True)
class PathOutcome:
    status: str
    elapsed: float
    jumps: int
    final_state: object
    holding_tail: float


@dataclass(frozen=True, eq=False)
class Batch:
    """Outcomes of trajectories ``indices`` under one master seed."""

    status: np.ndarray          # int8 codes into _STATUS
    elapsed: np.ndarray
    jumps: np.ndarray
    final_states: np.ndarray    # (n, dim)
    holding_tail: np.ndarray
    indices: np.ndarray
    caps: Caps
    master_seed: int
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.elapsed.shape[0])

    def outcome(self, i: int) -> PathOutcome:
        return PathOutcome(_STATUS[int(self.status[i])], float(self.elapsed[i]), int(self.jumps[i]),
                           state_id(self.final_states[i]), float(self.holding_tail[i]))

    def outcomes(self) -> list[PathOutcome]:
        return [self.outcome(i) for i in range(len(self))]

    def mask(self, status: str) -> np.ndarray:
        return self.status == _STATUS.index(status)

    def fraction(self, status: str) -> float:
        return float(np.mean(self.mask(status))) if len(self) else 0.0

    def censored_sample(self):
        from .estimators import CensoredSample
        return CensoredSample(self.elapsed.copy(), ~self.mask(HIT), cap=self.caps.max_time)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "status", "elapsed", "jumps", "final_state", "holding_tail"])
            for i in range(len(self)):
                fs = state_id(self.final_states[i])
                w.writerow([int(self.indices[i]), _STATUS[int(self.status[i])], repr(float(self.elapsed[i])),
                            int(self.jumps[i]), fs if isinstance(fs, int) else " ".join(map(str, fs)),
                            repr(float(self.holding_tail[i]))])

    def summary(self) -> dict:
        return {"runs": len(self), **{s: int(np.sum(self.mask(s))) for s in _STATUS},
                "mean_elapsed": float(np.mean(self.elapsed)) if len(self) else None}


def _check_rates(g: np.ndarray, states: np.ndarray):
    bad = ~(g <= RATE_LIMIT)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NumericError(f"rate {g[i]!r} exceeds {RATE_LIMIT:g} at state {state_id(states[i])!r}",
                           state_id(states[i]))


def _run_chunk(model: Model, x0: np.ndarray, caps: Caps, keys: np.ndarray):
    n = keys.shape[0]
    dim = model.dim
    # outputs, indexed by trajectory
    o_state = np.repeat(x0.reshape(1, dim), n, axis=0)
    o_t = np.zeros(n)
    o_jumps = np.zeros(n, dtype=np.int64)
    o_tail = np.zeros(n)
    status = np.full(n, -1, dtype=np.int8)
    A = caps.target
    if A is not None:
        status[A.contains(o_state)] = 0
    # compact working set of live trajectories
    idx = np.flatnonzero(status < 0)
    state = o_state[idx].copy()
    t = np.zeros(idx.size)
    key = keys[idx]
    ring = np.zeros((idx.size, TAIL_LEN))
    jumps = 0  # live trajectories advance in lockstep, so they share the jump count
    max_jumps = int(caps.max_jumps)
    fast = model.up_prob is not None and dim == 1
    max_time = caps.max_time
    while idx.size:
        g = model.rates(state)
        _check_rates(g, state)
        ctr = np.uint64(2 * jumps)
        t_new = t - np.log(uniforms(key, ctr)) / g
        u = uniforms(key, ctr + np.uint64(1))
        if fast:
            new = state + np.where(u < model.up_prob(state[:, 0]), 1, -1)[:, None]
        else:
            new = np.empty_like(state)
            for rows, targets, probs in model.transition_blocks(state):
                cum = np.cumsum(probs, axis=1)
                k = np.argmax(u[rows, None] * cum[:, -1:] < cum, axis=1)
                new[rows] = targets[np.arange(rows.size), k]
        over = t_new > max_time
        ring[:, jumps % TAIL_LEN] = np.where(over, ring[:, jumps % TAIL_LEN], 1.0 / g)
        state = np.where(over[:, None], state, new)
        t = np.where(over, max_time, t_new)
        jumps += 1
        done = over.copy()
        code = np.where(over, 1, -1).astype(np.int8)
        if A is not None:
            hit = ~over & A.contains(state)
            code[hit] = 0
            done |= hit
        if jumps >= max_jumps:
            code[~done] = 2
            done[:] = True
        if np.any(done):
            d = idx[done]
            status[d] = code[done]
            o_state[d] = state[done]
            o_t[d] = t[done]
            # jump count: time-censored runs did not make their last jump
            o_jumps[d] = np.where(over[done], jumps - 1, jumps)
            o_tail[d] = ring[done].sum(axis=1)
            keep = ~done
            idx, state, t, key, ring = idx[keep], state[keep], t[keep], key[keep], ring[keep]
    return status, o_t, o_jumps, o_state, o_tail


def simulate_batch(model: Model, x0, caps: Caps, master_seed: int, n_runs: int | None = None,
                   indices=None, workers: int = 1, chunk: int = 50_000) -> Batch:
    """Simulate trajectories ``indices`` (default ``range(n_runs)``)."""
    x0s = model.states(x0)
    if x0s.shape[0] != 1:
        raise ParameterError("x0 must be a single state")
    if indices is None:
        indices = np.arange(int(n_runs), dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    keys = stream_keys(master_seed, indices)
    parts = [slice(i, min(i + chunk, len(indices))) for i in range(0, len(indices), chunk)] or [slice(0, 0)]
    if workers > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            res = list(ex.map(lambda sl: _run_chunk(model, x0s[0], caps, keys[sl]), parts))
    else:
        res = [_run_chunk(model, x0s[0], caps, keys[sl]) for sl in parts]
    status, t, jumps, final, tail = (np.concatenate([r[i] for r in res]) for i in range(5))
    meta = {"generator": GENERATOR_NAME, "master_seed": int(master_seed), "x0": state_id(x0s[0]),
            "caps": caps.descriptor(), "model": model.descriptor()}
    return Batch(status, t, jumps, final, tail, indices, caps, int(master_seed), meta)


def sample_path(model: Model, x0, seed: int, caps: Caps) -> PathOutcome:
    """One trajectory; identical to trajectory 0 of a batch with ``master_seed = seed``."""
    return simulate_batch(model, x0, caps, seed, indices=[0]).outcome(0)


def sample_passage_time(model: Model, x0, A: StateSet, seed: int, caps: Caps) -> tuple[float, bool]:
    """``(value, censored)`` for ``tau_A``; ``x0 in A`` gives ``(0.0, False)``."""
    c = Caps(caps.max_jumps, caps.max_time, A)
    out = sample_path(model, x0, seed, c)
    return out.elapsed, out.status != HIT


def passage_times(model: Model, x0, A: StateSet, caps: Caps, master_seed: int, n_runs: int,
                  workers: int = 1):
    """Batch version of :func:`sample_passage_time`; returns a ``CensoredSample``."""
    b = simulate_batch(model, x0, Caps(caps.max_jumps, caps.max_time, A), master_seed, n_runs,
                       workers=workers)
    return b.censored_sample()


def holding_times(model: Model, x, master_seed: int, n: int) -> np.ndarray:
    """First holding time at ``x`` for trajectories ``0..n-1`` (same draws as the engine)."""
    s = model.states(x)
    g = model.rates(s)[0]
    keys = stream_keys(master_seed, np.arange(n))
    return -np.log(uniforms(keys, np.zeros(n, dtype=np.uint64))) / g


@dataclass(frozen=True)
class ExplosionReport:
    p_explode_hat: float
    ci_low: float
    ci_high: float
    exploded: int
    runs: int
    diagnostics: dict

    def to_dict(self) -> dict:
        return {"p_explode_hat": self.p_explode_hat, "ci": [self.ci_low, self.ci_high],
                "exploded": self.exploded, "runs": self.runs, "diagnostics": self.diagnostics}


def classify_explosion(batch, max_time: float | None = None, theta_t: float = 0.1,
                       theta_h: float = 1e-3, confidence: float = 0.95) -> ExplosionReport:
    """Tally runs that hit the jump cap early with a summable-looking holding tail."""
    if isinstance(batch, Batch):
        status = np.array([_STATUS[int(c)] for c in batch.status])
        elapsed, tail = batch.elapsed, batch.holding_tail
        max_time = batch.caps.max_time if max_time is None else max_time
    else:
        if len(batch) == 0:
            raise ParameterError("empty batch")
        status = np.array([o.status for o in batch])
        elapsed = np.array([o.elapsed for o in batch])
        tail = np.array([o.holding_tail for o in batch])
    n = len(elapsed)
    if n == 0:
        raise ParameterError("empty batch")
    if max_time is None or not math.isfinite(max_time):
        raise ParameterError("classification needs a finite max_time")
    boom = (status == JUMP_CENSORED) & (elapsed < theta_t * max_time) & (tail < theta_h)
    k = int(np.sum(boom))
    ci = binomtest(k, n).proportion_ci(confidence_level=confidence, method="wilson")
    diag = {"theta_t": theta_t, "theta_h": theta_h, "max_time": max_time,
            "jump_censored": int(np.sum(status == JUMP_CENSORED)),
            "time_censored": int(np.sum(status == TIME_CENSORED)),
            "hit": int(np.sum(status == HIT)), "confidence": confidence, "interval": "wilson"}
    return ExplosionReport(k / n, float(ci.low), float(ci.high), k, n, diag)


# ---------------------------------------------------------------------------
# exact passage times of birth-death chains


@dataclass(frozen=True, eq=False)
class ExactPassage:
    values: np.ndarray       # min(tau_0, time_cap)
    censored: np.ndarray
    height_capped: int
    time_cap: float

    def censored_sample(self):
        from .estimators import CensoredSample
        return CensoredSample(self.values.copy(), self.censored.copy(), cap=self.time_cap)


def birth_death_passage_exact(model: Model, start: int, n: int, seed: int, time_cap: float,
                              max_height: int = 10**7) -> ExactPassage:
    """Sample ``min(tau_0, time_cap)`` from ``start`` for a birth-death chain on ``{0, 1, ...}``.

    Going up level by level: ``D_1 = 1`` (the final step into 0); given ``D_y``
    down-steps from ``y``, the up-steps from ``y`` are ``NegBin(D_y, q_y)`` since
    the last departure from any visited level is downward; then
    ``D_{y+1} = U_y + [y < start]``. Level ``y`` is left ``U_y + D_y`` times,
    each after an ``Exp(gamma_y)`` sojourn. Stops as soon as the running time
    passes the cap, so censoring is exact. Valid for chains that hit 0 a.s.
    """
    if model.up_prob is None or model.dim != 1:
        raise ParameterError("exact sampler needs a birth-death model")
    start = int(start)
    if start < 1:
        return ExactPassage(np.zeros(n), np.zeros(n, bool), 0, time_cap)
    rng = np.random.Generator(np.random.Philox(seed))
    t = np.zeros(n)
    d = np.ones(n, dtype=np.int64)
    alive = np.arange(n)
    censored = np.zeros(n, dtype=bool)
    capped = 0
    y = 1
    while alive.size:
        if y > max_height:
            censored[alive] = True
            t[alive] = time_cap
            capped = int(alive.size)
            break
        ys = np.array([[y]], dtype=np.int64)
        p = float(model.up_prob(ys[:, 0])[0])
        g = float(model.rates(ys)[0])
        da = d[alive]
        if p > 0:
            u = rng.negative_binomial(da, 1.0 - p) if p < 1 else None
            if u is None:
                raise ParameterError(f"level {y} never steps down; tau_0 is not finite")
        else:
            u = np.zeros_like(da)
        visits = u + da
        t[alive] += rng.gamma(visits.astype(float), 1.0 / g)
        over = t[alive] > time_cap
        if np.any(over):
            idx = alive[over]
            censored[idx] = True
            t[idx] = time_cap
        nd = u + (1 if y < start else 0)
        keep = ~over & ((nd > 0) | (y < start))
        d[alive] = nd
        alive = alive[keep]
        y += 1
    return ExactPassage(t, censored, capped, float(time_cap))
