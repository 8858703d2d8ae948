"""Model zoo: birth-death chains, critical Lamperti chains, simple random walks,
the reflected quadrant walk, the two-ray chain and the mock tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .chain import Model, ScalarField, NumericError
from .itlog import domain_threshold, iterated_log, log_product


class ParameterError(ValueError):
    """Invalid model or criterion parameters."""


# ---------------------------------------------------------------------------
# rate profiles


@dataclass(frozen=True)
class RateProfile:
    """Holding rate as a function of a scalar size ``r`` (``|x|``, ``||x||`` or height).

    Tags: ``constant(c)``, ``power(c, beta)`` = ``c r^beta``,
    ``logtower(c, k, l, kappa)`` = ``c L_k(r) L_l(r) ln_(l)(r)^kappa``,
    ``exponential(c, base)`` = ``c base^r``, ``table`` and ``custom``.
    Below the threshold ``x0`` the constant ``c`` is used.
    """

    tag: str
    c: float = 1.0
    beta: float = 0.0
    k: int = -1
    l: int = 0
    kappa: float = 0.0
    base: float = 2.0
    x0: float | None = None
    values: tuple | None = None
    fn: Callable | None = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ParameterError(f"rate constant must be in (0, inf), got {self.c}")
        if self.tag not in {"constant", "power", "logtower", "exponential", "table", "custom"}:
            raise ParameterError(f"unknown rate profile tag {self.tag!r}")
        if self.tag == "logtower" and (self.k < -1 or self.l < 0):
            raise ParameterError("logtower needs k >= -1 and l >= 0")
        if self.tag == "logtower" and self.x0 is not None:
            s0 = domain_threshold(max(self.k, self.l, 0))
            if self.x0 < s0:
                raise ParameterError(f"logtower splice point x0={self.x0:g} is below the domain threshold {s0:.6g}")
        if self.tag == "exponential" and not self.base > 0:
            raise ParameterError("exponential base must be positive")
        if self.tag == "table":
            if not self.values or any(not (v > 0 and math.isfinite(v)) for v in self.values):
                raise ParameterError("table rates must be positive and finite")
        if self.tag == "custom" and self.fn is None:
            raise ParameterError("custom profile needs a callable")

    @classmethod
    def constant(cls, c: float = 1.0) -> "RateProfile":
        return cls("constant", c=c)

    @classmethod
    def power(cls, c: float, beta: float, x0: float = 1.0) -> "RateProfile":
        return cls("power", c=c, beta=beta, x0=x0)

    @classmethod
    def logtower(cls, c: float, k: int, l: int, kappa: float, x0: float | None = None) -> "RateProfile":
        return cls("logtower", c=c, k=k, l=l, kappa=kappa, x0=x0)

    @classmethod
    def exponential(cls, c: float = 1.0, base: float = 2.0) -> "RateProfile":
        return cls("exponential", c=c, base=base, x0=0.0)

    @classmethod
    def table(cls, values: Sequence[float], c: float = 1.0) -> "RateProfile":
        return cls("table", c=c, values=tuple(float(v) for v in values), x0=0.0)

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray], np.ndarray], label: str, c: float = 1.0,
               x0: float = 0.0) -> "RateProfile":
        return cls("custom", c=c, fn=fn, label=label, x0=x0)

    @property
    def threshold(self) -> float:
        if self.x0 is not None:
            return float(self.x0)
        if self.tag == "logtower":
            return float(math.ceil(domain_threshold(max(self.k, self.l, 0))))
        if self.tag == "power":
            return 1.0
        return 0.0

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.full(r.shape, self.c, dtype=float)
        if self.tag == "constant":
            return out
        hi = r >= self.threshold
        if not np.any(hi):
            return out
        rr = r[hi]
        if self.tag == "power":
            out[hi] = self.c * rr**self.beta
        elif self.tag == "logtower":
            lev = max(self.l, 0)
            val = self.c * np.asarray(log_product(self.k, rr)) * np.asarray(log_product(self.l, rr))
            if self.kappa:
                val = val * np.asarray(iterated_log(lev, rr)) ** self.kappa
            out[hi] = val
        elif self.tag == "exponential":
            with np.errstate(over="ignore"):
                out[hi] = self.c * self.base**rr
        elif self.tag == "table":
            idx = rr.astype(np.int64)
            if np.any(idx >= len(self.values)) or np.any(idx != rr):
                raise NumericError(f"rate table has no entry for r={rr.max()}")
            out[hi] = np.asarray(self.values)[idx]
        else:
            out[hi] = np.asarray(self.fn(rr), dtype=float)
        return out

    def descriptor(self) -> dict:
        d = {"tag": self.tag, "c": self.c, "x0": self.threshold}
        if self.tag == "power":
            d["beta"] = self.beta
        elif self.tag == "logtower":
            d.update(k=self.k, l=self.l, kappa=self.kappa)
        elif self.tag == "exponential":
            d["base"] = self.base
        elif self.tag == "table":
            d["values"] = list(self.values)
        elif self.tag == "custom":
            d["label"] = self.label
        return d


def _dim1(states: np.ndarray) -> np.ndarray:
    return states[:, 0]


# ---------------------------------------------------------------------------
# nearest-neighbour chains on the nonnegative integers


def make_birth_death(up: Callable[[np.ndarray], np.ndarray], rate: RateProfile, name: str,
                     params: dict | None = None) -> Model:
    """Nearest-neighbour chain on ``{0, 1, ...}``: ``x -> x+1`` w.p. ``up(x)``, else ``x-1``.

    State 0 always jumps to 1. ``up`` is only called on ``x >= 1``.
    """

    def up_prob(x: np.ndarray) -> np.ndarray:
        p = np.ones(x.shape, dtype=float)
        pos = x >= 1
        if np.any(pos):
            p[pos] = np.asarray(up(x[pos]), dtype=float)
        return p

    def kernel(states):
        x = states[:, 0]
        p = up_prob(x)
        q = 1.0 - p
        up_t = np.where(p > 0, x + 1, x)
        dn_t = np.where(q > 0, x - 1, x)
        targets = np.stack([up_t, dn_t], axis=1)[:, :, None]
        probs = np.stack([p, q], axis=1)
        return targets, probs

    def rates(states):
        return rate(states[:, 0].astype(float))

    def valid(states):
        return states[:, 0] >= 0

    prm = {"rate": rate.descriptor()}
    prm.update(params or {})
    return Model(name, 1, kernel, rates, valid, prm, up_prob=up_prob)


def make_pure_birth(rate: RateProfile) -> Model:
    return make_birth_death(lambda x: np.ones(x.shape), rate, "pure_birth")


def make_pure_death(rate: RateProfile) -> Model:
    """Always ``x -> x-1`` for ``x >= 1``; ``0 -> 1``."""
    return make_birth_death(lambda x: np.zeros(x.shape), rate, "pure_death")


def make_biased_walk(p: float, rate: RateProfile) -> Model:
    if not 0 < p < 1:
        raise ParameterError("p must lie in (0, 1)")
    return make_birth_death(lambda x: np.full(x.shape, p), rate, "biased_walk", {"p": p})


def make_srw_half_line(rate: RateProfile) -> Model:
    return make_birth_death(lambda x: np.full(x.shape, 0.5), rate, "srw_half_line")


def lamperti_drift(k: int, C: float, x) -> np.ndarray:
    """Target drift ``sum_{i<k} 1/(2 L_i(x)) + C / L_k(x)`` (unit jump variance)."""
    x = np.asarray(x, dtype=float)
    m = C / np.asarray(log_product(k, x))
    for i in range(k):
        m = m + 0.5 / np.asarray(log_product(i, x))
    return m


def make_lamperti(k: int, C: float, rate: RateProfile, regime: str | None = None,
                  clamp: float = 1e-3) -> Model:
    """``k``-critical Lamperti chain with +-1 jumps, so that ``v(x) = 1``.

    Above ``x0 = ceil(exp_(k)(2))`` the up-probability is
    ``clip((1 + m(x)) / 2, clamp, 1 - clamp)``; below it the walk is symmetric
    (and reflected at 0).
    """
    if k < 0:
        raise ParameterError("k must be >= 0")
    if C == 0.5:
        raise ParameterError("C = 1/2 is the critical boundary; classification undefined")
    implied = "recurrent" if C < 0.5 else "transient"
    if regime is not None and regime != implied:
        raise ParameterError(f"C={C} gives a {implied} chain, not {regime}")
    x0 = int(math.ceil(domain_threshold(k)))

    def up(x):
        p = np.full(x.shape, 0.5)
        hi = x >= x0
        if np.any(hi):
            m = lamperti_drift(k, C, x[hi])
            p[hi] = np.clip(0.5 * (1.0 + m), clamp, 1.0 - clamp)
        return p

    return make_birth_death(up, rate, "lamperti",
                            {"k": k, "C": C, "regime": implied, "clamp": clamp, "x0": x0})


# ---------------------------------------------------------------------------
# simple random walk on Z^d and the two-ray chain


def make_srw(d: int, rate: RateProfile) -> Model:
    """Simple random walk on ``Z^d`` with rates evaluated at ``||x||``."""
    if d not in (1, 2, 3):
        raise ParameterError(f"dimension {d} not supported (1, 2 or 3)")
    steps = np.concatenate([np.eye(d, dtype=np.int64), -np.eye(d, dtype=np.int64)])
    w = 1.0 / (2 * d)

    def kernel(states):
        targets = states[:, None, :] + steps[None, :, :]
        probs = np.full((states.shape[0], 2 * d), w)
        return targets, probs

    def rates(states):
        return rate(np.sqrt((states.astype(float) ** 2).sum(axis=1)))

    def valid(states):
        return np.ones(states.shape[0], dtype=bool)

    return Model("srw", d, kernel, rates, valid, {"d": d, "rate": rate.descriptor()})


def make_two_ray(p: float, rate_pos: RateProfile, rate_neg: RateProfile) -> Model:
    """Chain on ``Z`` biased outward with probability ``p`` on each ray, fair at 0."""
    if not 0.5 < p < 1:
        raise ParameterError("p must lie in (1/2, 1)")

    def kernel(states):
        x = states[:, 0]
        sgn = np.sign(x)
        out_t = np.where(x == 0, 1, x + sgn)
        in_t = np.where(x == 0, -1, x - sgn)
        po = np.where(x == 0, 0.5, p)
        targets = np.stack([out_t, in_t], axis=1)[:, :, None]
        probs = np.stack([po, 1.0 - po], axis=1)
        return targets, probs

    def rates(states):
        x = states[:, 0]
        r = np.abs(x).astype(float)
        return np.where(x >= 0, rate_pos(r), rate_neg(r))

    def valid(states):
        return np.ones(states.shape[0], dtype=bool)

    return Model("two_ray", 1, kernel, rates, valid,
                 {"p": p, "rate_pos": rate_pos.descriptor(), "rate_neg": rate_neg.descriptor()})


def _seq(v, n: int) -> np.ndarray:
    if callable(v):
        return np.array([v(i) for i in range(1, n + 1)], dtype=float)
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape[0] < n:
        raise ParameterError(f"sequence has {arr.shape[0]} entries, need {n}")
    return arr[:n]


def make_mock_tree(p: float, pi, K=1.0, l=0, delta=1.0, n_branch: int = 1000,
                   c: float = 1.0, root_rate: float = 1.0) -> Model:
    """Rays ``{1,2,...} x {n}`` glued at a root ``o = (0, 0)``.

    From the root the chain enters branch ``n`` at height 1 w.p. ``pi_n``; on
    each branch it moves up w.p. ``p`` and down (to the root from height 1)
    otherwise. On branch ``n`` the rate is
    ``K_n c L_{l_n}(x1) ln_(l_n)(x1)^{delta_n}`` (constant ``K_n c`` below
    ``exp_(l_n)(2)``).

    ``pi`` is either an explicit probability vector (its length fixes the
    branch count and it must sum to 1 within 1e-9) or a weight function
    ``n -> w_n``, truncated to ``n_branch`` branches and renormalised.
    """
    if not 0.5 < p < 1:
        raise ParameterError("p must lie in (1/2, 1)")
    if callable(pi):
        w = np.array([pi(i) for i in range(1, n_branch + 1)], dtype=float)
        if np.any(~(w > 0)) or not np.all(np.isfinite(w)):
            raise ParameterError("branch weights must be positive")
        probs_root = w / w.sum()
        pi_desc = {"weights": "callable", "n_branch": n_branch}
    else:
        probs_root = np.asarray(pi, dtype=float)
        if probs_root.ndim != 1 or np.any(~(probs_root > 0)):
            raise ParameterError("pi must be a positive vector")
        if abs(probs_root.sum() - 1.0) > 1e-9:
            raise ParameterError(f"pi sums to {probs_root.sum():.12g}, not 1 within 1e-9")
        probs_root = probs_root / probs_root.sum()
        n_branch = probs_root.shape[0]
        pi_desc = probs_root.tolist()
    Kn = _seq(K, n_branch)
    ln_ = _seq(l, n_branch).astype(int)
    dn = _seq(delta, n_branch)
    if np.any(Kn <= 0):
        raise ParameterError("K_n must be positive")
    cum_root = np.cumsum(probs_root)
    branches = np.arange(1, n_branch + 1, dtype=np.int64)

    def kernel(states):
        n = states.shape[0]
        x1, br = states[:, 0], states[:, 1]
        root = x1 == 0
        width = n_branch if np.any(root) else 2
        targets = np.repeat(states[:, None, :], width, axis=1)
        probs = np.zeros((n, width))
        nr = ~root
        up = np.stack([x1 + 1, br], axis=1)
        dn_state = np.stack([x1 - 1, np.where(x1 - 1 == 0, 0, br)], axis=1)
        targets[nr, 0] = up[nr]
        targets[nr, 1] = dn_state[nr]
        probs[nr, 0] = p
        probs[nr, 1] = 1.0 - p
        if np.any(root):
            targets[root] = np.stack([np.ones(n_branch, np.int64), branches], axis=1)[None]
            probs[root] = probs_root[None]
        return targets, probs

    def rates(states):
        x1, br = states[:, 0], states[:, 1]
        out = np.full(states.shape[0], float(root_rate))
        nr = x1 > 0
        if np.any(nr):
            b = br[nr] - 1
            r = x1[nr].astype(float)
            val = c * Kn[b]
            for lev in np.unique(ln_[b]):
                sel = ln_[b] == lev
                thr = domain_threshold(int(lev))
                rr = r[sel]
                hi = rr >= thr
                tower = np.ones_like(rr)
                if np.any(hi):
                    tower[hi] = (np.asarray(log_product(int(lev), rr[hi]))
                                 * np.asarray(iterated_log(int(lev), rr[hi])) ** dn[b][sel][hi])
                val[sel] = val[sel] * tower
            out[nr] = val
        return out

    def valid(states):
        x1, br = states[:, 0], states[:, 1]
        return ((x1 == 0) & (br == 0)) | ((x1 >= 1) & (br >= 1) & (br <= n_branch))

    params = {"p": p, "pi": pi_desc, "n_branch": n_branch, "c": c, "root_rate": root_rate,
              "K": Kn.tolist() if n_branch <= 16 else "sequence",
              "l": ln_.tolist() if n_branch <= 16 else "sequence",
              "delta": dn.tolist() if n_branch <= 16 else "sequence"}
    model = Model("mock_tree", 2, kernel, rates, valid, params, wide=lambda s: s[:, 0] == 0)
    return model


# ---------------------------------------------------------------------------
# reflected random walk in the quadrant


@dataclass(frozen=True)
class QuadrantGeometry:
    """Squeeze map of the jump covariance and the resulting wedge angles.

    ``Phi`` maps the covariance ``[[s1^2, lam], [lam, s2^2]]`` to the identity;
    ``psi`` is the opening angle of the image of the quadrant, i.e. the angle
    between ``Phi e1`` and ``Phi e2``. Boundary drift angles ``psi1``, ``psi2``
    are measured from the inward normal of each image ray and are positive
    when the drift leans toward the vertex.
    """

    s1: float
    s2: float
    lam: float
    m1: tuple | None = None
    m2: tuple | None = None

    def __post_init__(self):
        if not (self.s1 > 0 and self.s2 > 0):
            raise ParameterError("s1, s2 must be positive")
        if self.det <= 0:
            raise ParameterError(f"degenerate covariance: s1^2 s2^2 - lam^2 = {self.det:g} <= 0")

    @property
    def det(self) -> float:
        return self.s1**2 * self.s2**2 - self.lam**2

    @property
    def d(self) -> float:
        return math.sqrt(self.det)

    @property
    def covariance(self) -> np.ndarray:
        return np.array([[self.s1**2, self.lam], [self.lam, self.s2**2]])

    @property
    def phi(self) -> np.ndarray:
        d, s2, lam = self.d, self.s2, self.lam
        return np.array([[s2 / d, -lam / (s2 * d)], [0.0, 1.0 / s2]])

    @property
    def psi(self) -> float:
        return math.atan2(self.d, -self.lam)

    def squeeze(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ self.phi.T

    def _ray2(self):
        return np.array([math.cos(self.psi), math.sin(self.psi)]), np.array([math.sin(self.psi), -math.cos(self.psi)])

    @property
    def psi1(self) -> float | None:
        if self.m1 is None:
            return None
        n = self.phi @ np.asarray(self.m1, dtype=float)
        return math.atan2(-n[0], n[1])

    @property
    def psi2(self) -> float | None:
        if self.m2 is None:
            return None
        n = self.phi @ np.asarray(self.m2, dtype=float)
        u, nu = self._ray2()
        return math.atan2(-float(n @ u), float(n @ nu))

    @property
    def chi(self) -> float | None:
        if self.m1 is None or self.m2 is None:
            return None
        return chi_exponent(self.psi, self.psi1, self.psi2)

    def descriptor(self) -> dict:
        return {"s1": self.s1, "s2": self.s2, "lam": self.lam, "d": self.d, "psi": self.psi,
                "phi": self.phi.tolist(), "psi1": self.psi1, "psi2": self.psi2, "chi": self.chi}


def chi_exponent(psi: float, psi1: float, psi2: float) -> float:
    return (psi1 + psi2) / psi


def quadrant_weights(s1: float, s2: float, lam: float) -> dict:
    """Symmetric 8-neighbour weights with zero mean and covariance ``[[s1^2, lam], [lam, s2^2]]``.

    With weight ``a`` on each of ``+-e1``, ``b`` on ``+-e2``, ``c`` on ``+-(e1+e2)``
    and ``d`` on ``+-(e1-e2)`` the moment equations have the unique solution below.
    """
    a = (1.0 - s2**2) / 2.0
    b = (1.0 - s1**2) / 2.0
    c = (s1**2 + s2**2 - 1.0 + lam) / 4.0
    d = (s1**2 + s2**2 - 1.0 - lam) / 4.0
    w = {"e1": a, "e2": b, "e1+e2": c, "e1-e2": d}
    if min(w.values()) < -1e-15:
        raise ParameterError(
            f"covariance (s1^2={s1**2:g}, lam={lam:g}, s2^2={s2**2:g}) has no nonnegative "
            "8-neighbour realisation (need s1, s2 <= 1 and s1^2 + s2^2 - 1 >= |lam|)")
    return {k: max(v, 0.0) for k, v in w.items()}


def make_quadrant(s1: float, s2: float, lam: float, m1, m2, rate: RateProfile):
    """Reflected walk on ``Z_+^2``; returns ``(model, geometry)``.

    Interior rows use :func:`quadrant_weights`. On ``{x2 = 0, x1 > 0}`` the
    chain steps ``+e2`` w.p. ``m1[1]`` and ``+-e1`` with net drift ``m1[0]``;
    symmetrically on ``{x1 = 0}``. The corner jumps to ``(1,0)``, ``(0,1)``,
    ``(1,1)`` with equal probability.
    """
    geom = QuadrantGeometry(s1, s2, lam, tuple(map(float, m1)), tuple(map(float, m2)))
    w = quadrant_weights(s1, s2, lam)
    for lab, m, (i, j) in (("m1", m1, (0, 1)), ("m2", m2, (1, 0))):
        inward, along = float(m[j]), float(m[i])
        if not 0 < inward <= 1 or abs(along) > 1 - inward + 1e-15:
            raise ParameterError(f"boundary drift {lab}={tuple(m)} not realisable with unit jumps")
    steps = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1], [1, -1], [-1, 1]], np.int64)
    w_int = np.array([w["e1"], w["e1"], w["e2"], w["e2"], w["e1+e2"], w["e1+e2"], w["e1-e2"], w["e1-e2"]])

    def boundary_row(m, i, j):
        # steps: +e_j (inward), +e_i, -e_i
        inward, along = float(m[j]), float(m[i])
        rest = 1.0 - inward
        return np.array([inward, (rest + along) / 2.0, (rest - along) / 2.0])

    b1 = boundary_row(m1, 0, 1)
    b2 = boundary_row(m2, 1, 0)
    b1_steps = np.array([[0, 1], [1, 0], [-1, 0]], np.int64)
    b2_steps = np.array([[1, 0], [0, 1], [0, -1]], np.int64)
    corner_steps = np.array([[1, 0], [0, 1], [1, 1]], np.int64)

    def kernel(states):
        n = states.shape[0]
        x1, x2 = states[:, 0], states[:, 1]
        steps_all = np.zeros((n, 8, 2), np.int64)
        probs = np.zeros((n, 8))
        inter = (x1 > 0) & (x2 > 0)
        e1 = (x2 == 0) & (x1 > 0)
        e2 = (x1 == 0) & (x2 > 0)
        cor = (x1 == 0) & (x2 == 0)
        steps_all[inter] = steps
        probs[inter] = w_int
        steps_all[e1, :3] = b1_steps
        probs[e1, :3] = b1
        steps_all[e2, :3] = b2_steps
        probs[e2, :3] = b2
        steps_all[cor, :3] = corner_steps
        probs[cor, :3] = 1.0 / 3.0
        steps_all[probs == 0] = 0
        return states[:, None, :] + steps_all, probs

    def rates(states):
        return rate(np.sqrt((states.astype(float) ** 2).sum(axis=1)))

    def valid(states):
        return (states[:, 0] >= 0) & (states[:, 1] >= 0)

    model = Model("quadrant", 2, kernel, rates, valid,
                  {"s1": s1, "s2": s2, "lam": lam, "m1": list(map(float, m1)),
                   "m2": list(map(float, m2)), "rate": rate.descriptor(), "weights": w})
    return model, geom


@dataclass(frozen=True, eq=False)
class HarmonicField(ScalarField):
    """``h(y) = ||y||^beta cos(beta * arg(y) - beta1)`` evaluated at ``y = Phi x``."""

    geometry: QuadrantGeometry | None = None
    beta: float = 1.0
    beta1: float = 0.0

    @property
    def beta2(self) -> float:
        return self.beta * self.geometry.psi - self.beta1

    def in_squeezed(self, y) -> np.ndarray:
        return _harmonic(np.asarray(y, dtype=float), self.beta, self.beta1)


def _harmonic(y: np.ndarray, beta: float, beta1: float) -> np.ndarray:
    r = np.hypot(y[..., 0], y[..., 1])
    theta = np.arctan2(y[..., 1], y[..., 0])
    return r**beta * np.cos(beta * theta - beta1)


def harmonic_field(geometry: QuadrantGeometry, beta: float, beta1: float) -> HarmonicField:
    beta2 = beta * geometry.psi - beta1
    for lab, ang in (("beta1", beta1), ("beta2", beta2)):
        if not -math.pi / 2 < ang < math.pi / 2:
            raise ParameterError(f"{lab}={ang:.6g} outside (-pi/2, pi/2); h not positive on the wedge")
    phi = geometry.phi

    def fn(states):
        return _harmonic(states.astype(float) @ phi.T, beta, beta1)

    return HarmonicField(fn, name=f"h[beta={beta:g},beta1={beta1:g}]", tends_to_infinity=beta > 0,
                         geometry=geometry, beta=float(beta), beta1=float(beta1))


def shell_drift_profile(model: Model, f: ScalarField, r_lo: float, r_hi: float,
                        max_points: int = 20000, seed: int = 0) -> dict:
    """Measure ``alpha0 = <||x|| m_f(x)>``, ``beta0 = <v_f(x)>`` and ``C = alpha0/beta0``
    over lattice points with ``r_lo <= ||x|| <= r_hi``.
    """
    from .chain import mean_drifts, moment_drifts

    d = model.dim
    rng = np.random.default_rng(seed)
    pts = rng.integers(-int(r_hi), int(r_hi) + 1, size=(max_points * 4, d))
    norm = np.sqrt((pts.astype(float) ** 2).sum(axis=1))
    pts = pts[(norm >= r_lo) & (norm <= r_hi)][:max_points]
    norm = np.sqrt((pts.astype(float) ** 2).sum(axis=1))
    m = mean_drifts(model, f, pts)
    v = moment_drifts(model, f, pts, 2.0)
    alpha0 = float(np.mean(norm * m))
    beta0 = float(np.mean(v))
    return {"alpha0": alpha0, "beta0": beta0, "C": alpha0 / beta0, "points": int(len(pts))}
