"""Countable-state CTMC core: models, scalar fields, windows and the generator.

States are integer tuples of fixed length ``model.dim``; one-dimensional states
may be passed and are returned as plain ``int``. Every model function is
vectorised over an ``(n, dim)`` int64 array of states.

A model's kernel returns padded arrays ``targets (n, K, dim)`` and
``probs (n, K)``; padding slots carry probability 0 and point at the source state.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

STOCHASTIC_TOL = 1e-12


class EncodingError(ValueError):
    """A state is malformed or outside the model's state space."""


class NumericError(FloatingPointError):
    """A non-finite or out-of-range quantity was met at a specific state."""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class AuditError(RuntimeError):
    """A precondition of an audit (e.g. window closure) does not hold."""


def as_states(x, dim: int) -> np.ndarray:
    """Coerce a state or sequence of states to an ``(n, dim)`` int64 array."""
    arr = np.asarray(x)
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind == "f" and np.all(np.isfinite(arr)) and np.all(arr == np.round(arr)):
            arr = arr.astype(np.int64)
        else:
            raise EncodingError(f"states must be integers, got {x!r}")
    arr = arr.astype(np.int64, copy=False)
    if dim == 1:
        if arr.ndim == 0:
            return arr.reshape(1, 1)
        if arr.ndim == 1:
            return arr.reshape(-1, 1)
        if arr.ndim == 2 and arr.shape[1] == 1:
            return arr
    else:
        if arr.ndim == 1 and arr.shape[0] == dim:
            return arr.reshape(1, dim)
        if arr.ndim == 2 and arr.shape[1] == dim:
            return arr
    raise EncodingError(f"cannot read {x!r} as state(s) of dimension {dim}")


def state_id(row: np.ndarray):
    """Python-level StateId for one row: ``int`` in dimension 1, else a tuple."""
    row = np.asarray(row).ravel()
    if row.shape[0] == 1:
        return int(row[0])
    return tuple(int(v) for v in row)


@dataclass(frozen=True, eq=False)
class Model:
    """A CTMC given by holding rates ``gamma_x`` and an embedded kernel ``P``.

    ``valid`` is the state-space membership test. ``up_prob`` is set only for
    nearest-neighbour chains on the nonnegative integers (birth-death chains);
    it enables the specialised samplers in :mod:`ctmc_lab.simulate`.
    """

    name: str
    dim: int
    kernel: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    rate_fn: Callable[[np.ndarray], np.ndarray]
    valid: Callable[[np.ndarray], np.ndarray]
    params: Mapping = field(default_factory=dict)
    up_prob: Callable[[np.ndarray], np.ndarray] | None = None
    wide: Callable[[np.ndarray], np.ndarray] | None = None

    def states(self, x) -> np.ndarray:
        s = as_states(x, self.dim)
        ok = np.asarray(self.valid(s), dtype=bool)
        if not np.all(ok):
            bad = state_id(s[np.argmin(ok)])
            raise EncodingError(f"state {bad!r} is not in the state space of {self.name}")
        return s

    def encode(self, x) -> tuple:
        s = self.states(x)
        if s.shape[0] != 1:
            raise EncodingError("encode expects a single state")
        return tuple(int(v) for v in s[0])

    def decode(self, code: Sequence[int]):
        return state_id(self.states(np.asarray(code, dtype=np.int64).reshape(1, self.dim))[0])

    def rates(self, states: np.ndarray) -> np.ndarray:
        g = np.asarray(self.rate_fn(states), dtype=float)
        bad = ~(np.isfinite(g) & (g > 0))
        if np.any(bad):
            i = int(np.argmax(bad))
            raise NumericError(
                f"rate {g[i]!r} at state {state_id(states[i])!r} is not in (0, inf)",
                state_id(states[i]),
            )
        return g

    def transitions(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.kernel(states)

    def transition_blocks(self, states: np.ndarray):
        """Yield ``(rows, targets, probs)`` with wide-kernel rows (``self.wide``) kept apart,
        so a few high-degree states do not pad every row of a large batch."""
        if self.wide is None or states.shape[0] == 0:
            yield np.arange(states.shape[0]), *self.kernel(states)
            return
        w = np.asarray(self.wide(states), dtype=bool)
        for rows in (np.flatnonzero(~w), np.flatnonzero(w)):
            if rows.size:
                yield rows, *self.kernel(states[rows])

    def descriptor(self) -> dict:
        return {"family": self.name, "params": _jsonable(dict(self.params))}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "descriptor"):
        return obj.descriptor()
    return obj


def normalize_rows(probs: np.ndarray) -> np.ndarray:
    total = probs.sum(axis=1, keepdims=True)
    return probs / total


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A real function on states with auditable metadata claims."""

    fn: Callable[[np.ndarray], np.ndarray]
    name: str = "f"
    tends_to_infinity: bool = False
    bounded_by: float | None = None
    strictly_positive: bool = False

    def __call__(self, states: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(states), dtype=float)

    def at(self, model: Model, x) -> float:
        return float(self(model.states(x))[0])

    def power(self, p: float) -> "ScalarField":
        p = float(p)
        fn = self.fn
        return ScalarField(
            lambda s: np.asarray(fn(s), dtype=float) ** p,
            name=f"({self.name})^{p:g}",
            tends_to_infinity=self.tends_to_infinity and p > 0,
            bounded_by=self.bounded_by**p if (self.bounded_by is not None and p > 0) else None,
            strictly_positive=self.strictly_positive,
        )

    def compose(self, g: Callable[[np.ndarray], np.ndarray], name: str | None = None) -> "ScalarField":
        fn = self.fn
        return ScalarField(lambda s: g(np.asarray(fn(s), dtype=float)), name=name or f"g({self.name})")

    def __add__(self, other):
        if isinstance(other, ScalarField):
            f, g = self.fn, other.fn
            return ScalarField(lambda s: np.asarray(f(s), float) + np.asarray(g(s), float),
                               name=f"{self.name}+{other.name}")
        c = float(other)
        f = self.fn
        return ScalarField(lambda s: np.asarray(f(s), float) + c, name=f"{self.name}+{c:g}",
                           tends_to_infinity=self.tends_to_infinity)

    __radd__ = __add__

    def __mul__(self, other):
        c = float(other)
        f = self.fn
        return ScalarField(
            lambda s: c * np.asarray(f(s), float),
            name=f"{c:g}*{self.name}",
            tends_to_infinity=self.tends_to_infinity and c > 0,
            bounded_by=c * self.bounded_by if (self.bounded_by is not None and c > 0) else None,
            strictly_positive=self.strictly_positive and c > 0,
        )

    __rmul__ = __mul__

    def audit_claims(self, states: np.ndarray) -> dict:
        """Check boundedness and positivity claims on explicit states."""
        vals = self(states)
        out = {"finite": bool(np.all(np.isfinite(vals)))}
        if self.bounded_by is not None:
            out["bounded"] = bool(np.all(vals <= self.bounded_by))
        if self.strictly_positive:
            out["strictly_positive"] = bool(np.all(vals > 0))
        return out


class StateSet:
    """A (possibly infinite) set of states given by a vectorised membership test."""

    def __init__(self, contains: Callable[[np.ndarray], np.ndarray], name: str,
                 members: np.ndarray | None = None):
        self._contains = contains
        self.name = name
        self.members = members

    @classmethod
    def of(cls, states, dim: int = 1) -> "StateSet":
        arr = np.unique(as_states(states, dim), axis=0)
        index = _Index(arr)

        def contains(s):
            return index.lookup(s) >= 0

        label = ",".join(str(state_id(r)) for r in arr[:8]) + ("..." if len(arr) > 8 else "")
        return cls(contains, "{" + label + "}", members=arr)

    @classmethod
    def where(cls, predicate: Callable[[np.ndarray], np.ndarray], name: str) -> "StateSet":
        return cls(lambda s: np.asarray(predicate(s), dtype=bool), name)

    @classmethod
    def at_most(cls, level: int, coord: int = 0) -> "StateSet":
        return cls(lambda s: s[:, coord] <= level, f"{{x_{coord} <= {level}}}")

    @classmethod
    def empty(cls) -> "StateSet":
        return cls(lambda s: np.zeros(s.shape[0], dtype=bool), "{}", members=np.zeros((0, 1), np.int64))

    @property
    def finite(self) -> bool:
        return self.members is not None

    def contains(self, states: np.ndarray) -> np.ndarray:
        return np.asarray(self._contains(states), dtype=bool)

    def __repr__(self) -> str:
        return f"StateSet({self.name})"


class _Index:
    """Row lookup for a fixed set of integer states."""

    def __init__(self, states: np.ndarray):
        self.states = states
        self.dim = states.shape[1]
        self.lo = states.min(axis=0) if len(states) else np.zeros(self.dim, np.int64)
        hi = states.max(axis=0) if len(states) else np.zeros(self.dim, np.int64)
        span = (hi - self.lo + 1).astype(object)
        total = 1
        for v in span:
            total *= int(v)
        self.dense = total < 2**62
        if self.dense:
            self.span = (hi - self.lo + 1).astype(np.int64)
            self.strides = np.ones(self.dim, np.int64)
            for d in range(self.dim - 2, -1, -1):
                self.strides[d] = self.strides[d + 1] * self.span[d + 1]
            keys = self._keys(states)
            self.order = np.argsort(keys, kind="stable")
            self.sorted_keys = keys[self.order]
        else:
            self.table = {tuple(r): i for i, r in enumerate(states.tolist())}

    def _keys(self, s):
        return ((s - self.lo) * self.strides).sum(axis=1)

    def lookup(self, s: np.ndarray) -> np.ndarray:
        """Row index of each state, or -1 if absent."""
        if not self.dense:
            return np.fromiter((self.table.get(tuple(r), -1) for r in s.tolist()), np.int64, s.shape[0])
        if len(self.states) == 0:
            return np.full(s.shape[0], -1, np.int64)
        inside = np.all((s >= self.lo) & (s < self.lo + self.span), axis=1)
        keys = np.where(inside, self._keys(np.where(inside[:, None], s, self.lo)), -1)
        pos = np.searchsorted(self.sorted_keys, keys)
        pos = np.clip(pos, 0, len(self.sorted_keys) - 1)
        hit = inside & (self.sorted_keys[pos] == keys)
        return np.where(hit, self.order[pos], -1)


@dataclass(frozen=True, eq=False)
class Window:
    """A finite explicit list of states plus a truthful generator-closure flag."""

    states: np.ndarray
    closed: bool
    _index: _Index = field(repr=False, compare=False, default=None)

    def __len__(self) -> int:
        return int(self.states.shape[0])

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    def index_of(self, states: np.ndarray) -> np.ndarray:
        return self._index.lookup(states)

    def contains(self, states: np.ndarray) -> np.ndarray:
        return self.index_of(states) >= 0

    def digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.states, dtype="<i8").tobytes()).hexdigest()[:16]

    def describe(self) -> dict:
        lo = self.states.min(axis=0).tolist() if len(self) else []
        hi = self.states.max(axis=0).tolist() if len(self) else []
        return {"size": len(self), "min": lo, "max": hi, "digest": self.digest(), "closed": self.closed}


def make_window(model: Model, states) -> Window:
    """Build a window over explicit states, auditing duplicates and closure."""
    s = model.states(states)
    if len(np.unique(s, axis=0)) != len(s):
        raise ValueError("window states must be distinct")
    closed = True
    for _, targets, probs in model.transition_blocks(s):
        t = targets.reshape(-1, model.dim)[probs.reshape(-1) > 0]
        closed &= bool(np.all(np.asarray(model.valid(t), dtype=bool)))
    return Window(s, closed, _Index(s))


def window_range(model: Model, lo: int, hi: int) -> Window:
    """Window ``{lo, ..., hi}`` for a one-dimensional model."""
    return make_window(model, np.arange(int(lo), int(hi) + 1, dtype=np.int64))


def window_box(model: Model, lo: Sequence[int], hi: Sequence[int], where=None) -> Window:
    """All lattice points of the box ``[lo, hi]`` (inclusive) that are valid states."""
    axes = [np.arange(int(a), int(b) + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    grid = grid[np.asarray(model.valid(grid), dtype=bool)]
    if where is not None:
        grid = grid[np.asarray(where(grid), dtype=bool)]
    return make_window(model, grid)


# ---------------------------------------------------------------------------
# generator and drifts


def increments(model: Model, f: ScalarField, states: np.ndarray):
    """Return ``(probs, f(y) - f(x))`` per padded kernel slot, checking finiteness."""
    return _increments(model, f, states, *model.transitions(states))


def _increments(model, f, states, targets, probs):
    n, k = probs.shape
    fx = f(states)
    fy = f(targets.reshape(n * k, model.dim)).reshape(n, k)
    live = probs > 0
    bad_y = live & ~np.isfinite(fy)
    if np.any(bad_y) or not np.all(np.isfinite(fx)):
        if not np.all(np.isfinite(fx)):
            i = int(np.argmin(np.isfinite(fx)))
            where = state_id(states[i])
        else:
            i, j = np.argwhere(bad_y)[0]
            where = state_id(targets[i, j])
        raise NumericError(f"field {f.name} is not finite at state {where!r}", where)
    delta = np.where(live, fy - fx[:, None], 0.0)
    return probs, delta


def _blockwise(model, f, states, reduce):
    out = np.zeros(states.shape[0])
    for rows, targets, probs in model.transition_blocks(states):
        p, delta = _increments(model, f, states[rows], targets, probs)
        out[rows] = reduce(p, delta)
    return out


def mean_drifts(model: Model, f: ScalarField, states: np.ndarray) -> np.ndarray:
    return _blockwise(model, f, states, lambda p, d: (p * d).sum(axis=1))


def moment_drifts(model: Model, f: ScalarField, states: np.ndarray, rho: float = 2.0) -> np.ndarray:
    if rho < 1:
        raise ValueError("rho must be >= 1")
    return _blockwise(model, f, states, lambda p, d: (p * np.abs(d) ** rho).sum(axis=1))


def generator(model: Model, f: ScalarField, states: np.ndarray) -> np.ndarray:
    """Vectorised ``Gamma f(x) = gamma_x * m_f(x)``."""
    return model.rates(states) * mean_drifts(model, f, states)


def embedded_step_distribution(model: Model, x) -> list[tuple[object, float]]:
    """``P(x, .)`` as a list of ``(state, probability)`` over ``y != x``."""
    s = model.states(x)
    if s.shape[0] != 1:
        raise EncodingError("expected a single state")
    targets, probs = model.transitions(s)
    out = [(state_id(t), float(p)) for t, p in zip(targets[0], probs[0]) if p > 0]
    return out


def mean_drift(model: Model, f: ScalarField, x) -> float:
    return float(mean_drifts(model, f, model.states(x))[0])


def moment_drift(model: Model, f: ScalarField, x, rho: float = 2.0) -> float:
    return float(moment_drifts(model, f, model.states(x), rho)[0])


def apply_generator(model: Model, f: ScalarField, x) -> float:
    return float(generator(model, f, model.states(x))[0])


def audit_model(model: Model, window: Window) -> dict:
    """Stochasticity, positivity and kernel-shape audit on a window."""
    s = window.states
    sums = np.zeros(len(s))
    self_loop = np.zeros(len(s), dtype=bool)
    nonempty = np.zeros(len(s), dtype=bool)
    in_range = targets_valid = True
    for rows, targets, probs in model.transition_blocks(s):
        live = probs > 0
        sums[rows] = probs.sum(axis=1)
        self_loop[rows] = np.any(live & np.all(targets == s[rows][:, None, :], axis=2), axis=1)
        nonempty[rows] = live.any(axis=1)
        in_range &= bool(np.all((probs[live] > 0) & (probs[live] <= 1.0)))
        targets_valid &= bool(np.all(np.asarray(model.valid(targets[live]), dtype=bool)))
    rates = np.asarray(model.rate_fn(s), dtype=float)
    return {
        "max_sum_error": float(np.max(np.abs(sums - 1.0))) if len(s) else 0.0,
        "stochastic": bool(np.all(np.abs(sums - 1.0) <= STOCHASTIC_TOL)),
        "probabilities_in_range": in_range,
        "nonempty": bool(np.all(nonempty)),
        "no_self_loops": not bool(np.any(self_loop)),
        "rates_positive_finite": bool(np.all(np.isfinite(rates) & (rates > 0))),
        "targets_valid": targets_valid,
    }
