"""Exact expected passage and explosion times on finite truncations.

For ``x`` in the window but not in ``A`` the first-jump decomposition gives
``u(x) - sum_y P(x,y) u(y) = 1/gamma_x``. Neighbours outside the window
contribute a boundary value: 0 (``absorbing_zero``, an underestimate) or a
penalty ``M`` (``absorbing_penalty``, an overestimate when ``M`` dominates the
remaining time). Higher moments reuse the same matrix:
``u_k - P u_k = sum_{j=1..k} C(k,j) j!/gamma^j P u_{k-j}``, ``u_0 = 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, bicgstab, splu, spilu

from .chain import Model, StateSet, Window, _jsonable, state_id
from .models import ParameterError

ZERO, PENALTY = "absorbing_zero", "absorbing_penalty"
DIRECT_LIMIT = 200_000
BAND_LIMIT = 64  # banded systems factor in O(n * band^2) at any size
RESIDUAL_TOL = 1e-9


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Truncation:
    window: Window
    target: StateSet | None = None
    policy: str = ZERO
    penalty: float | None = None

    def __post_init__(self):
        if self.policy not in (ZERO, PENALTY):
            raise ParameterError(f"unknown boundary policy {self.policy!r}")

    def with_policy(self, policy: str, penalty: float | None = None) -> "Truncation":
        return replace(self, policy=policy, penalty=penalty if penalty is not None else self.penalty)


@dataclass(frozen=True, eq=False)
class SolveResult:
    kind: str
    k: int
    states: np.ndarray
    values: np.ndarray
    residual: float
    policy: str
    penalty: float | None
    method: str
    window_digest: str
    upper: np.ndarray | None = None
    window_growth: dict | None = None
    extras: dict = field(default_factory=dict)

    def index(self, x) -> int:
        s = np.asarray(x, dtype=np.int64).reshape(1, -1)
        hit = np.flatnonzero(np.all(self.states == s, axis=1))
        if hit.size == 0:
            raise KeyError(f"state {x!r} not in the solved window")
        return int(hit[0])

    def value_at(self, x) -> float:
        return float(self.values[self.index(x)])

    def values_at(self, states) -> np.ndarray:
        return np.array([self.value_at(s) for s in states])

    def to_dict(self, probes: Sequence | None = None) -> dict:
        if probes is None:
            idx = np.unique(np.linspace(0, len(self.values) - 1, min(len(self.values), 11)).astype(int))
        else:
            idx = [self.index(p) for p in probes]
        out = {
            "kind": self.kind, "k": self.k, "policy": self.policy, "penalty": self.penalty,
            "method": self.method, "residual": self.residual, "window_digest": self.window_digest,
            "window_size": int(len(self.values)),
            "values": [[state_id(self.states[i]), float(self.values[i])] for i in idx],
        }
        if self.upper is not None:
            out["upper"] = [[state_id(self.states[i]), float(self.upper[i])] for i in idx]
        if self.window_growth is not None:
            out["window_growth"] = self.window_growth
        out.update(self.extras)
        return _jsonable(out)

    def to_json(self, probes=None) -> str:
        return json.dumps(self.to_dict(probes), sort_keys=True)


class _System:
    """``I - P`` restricted to the unknowns, with outside/boundary bookkeeping."""

    def __init__(self, model: Model, trunc: Truncation):
        w = trunc.window
        s = w.states
        self.model = model
        self.states = s
        inA = trunc.target.contains(s) if trunc.target is not None else np.zeros(len(s), bool)
        self.inA = inA
        unk = np.flatnonzero(~inA)
        self.unk = unk
        n = unk.size
        su = s[unk]
        self.gamma = model.rates(su)
        col_of = np.full(len(s), -1, dtype=np.int64)
        col_of[unk] = np.arange(n)
        self.p_out = np.zeros(n)
        self.p_A = np.zeros(n)
        ri, ci, vi = [], [], []
        for rows, targets, probs in model.transition_blocks(su):
            K = probs.shape[1]
            tidx = w.index_of(targets.reshape(-1, model.dim)).reshape(rows.size, K)
            live = probs > 0
            self.p_out[rows] = (probs * (live & (tidx < 0))).sum(axis=1)
            # column index among unknowns (-1 for A or outside)
            cols = np.where(tidx >= 0, col_of[np.maximum(tidx, 0)], -1)
            inner = live & (cols >= 0)
            ri.append(np.repeat(rows, K).reshape(rows.size, K)[inner])
            ci.append(cols[inner])
            vi.append(probs[inner])
            # A-neighbours carry the u_0 = 1 terms
            self.p_A[rows] = (probs * (live & (tidx >= 0) & (cols < 0))).sum(axis=1)
        cat = (lambda a: np.concatenate(a)) if ri else (lambda a: np.zeros(0))
        self.P = sp.csr_matrix((cat(vi), (cat(ri).astype(np.int64), cat(ci).astype(np.int64))), shape=(n, n))
        self.A = (sp.identity(n, format="csc") - self.P.tocsc()).tocsc()
        self.n = n
        self._lu = None
        coo = self.P.tocoo()
        band = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0
        self.method = "direct" if n <= DIRECT_LIMIT or band <= BAND_LIMIT else "iterative"

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0)
        if self.method == "direct":
            if self._lu is None:
                try:
                    self._lu = splu(self.A)
                except RuntimeError as exc:
                    raise SolverError(f"singular system on {self.n} unknowns: {exc}") from exc
            x = self._lu.solve(b)
            for _ in range(2):
                r = b - self.A @ x
                x = x + self._lu.solve(r)
        else:
            if self._lu is None:
                self._lu = spilu(self.A, drop_tol=1e-6, fill_factor=20)
            M = LinearOperator(self.A.shape, matvec=self._lu.solve)
            x, info = bicgstab(self.A, b, rtol=1e-13, atol=0.0, maxiter=20 * self.n, M=M)
            if info != 0:
                raise SolverError(f"iterative solve did not converge (info={info}) on {self.n} unknowns")
        if not np.all(np.isfinite(x)):
            raise SolverError(f"non-finite solution; system is singular or ill-conditioned (n={self.n})")
        return x


def default_penalty(model: Model, window: Window) -> float:
    s = window.states
    diam = float(np.max(s.max(axis=0) - s.min(axis=0)) + 1) if len(s) else 1.0
    return 10.0 * diam * float(np.max(1.0 / model.rates(s)))


def _penalty_for(model, trunc):
    if trunc.policy == ZERO:
        return 0.0
    return trunc.penalty if trunc.penalty is not None else default_penalty(model, trunc.window)


def _moments(model: Model, trunc: Truncation, kmax: int):
    sysm = _System(model, trunc)
    M = _penalty_for(model, trunc)
    n = sysm.n
    out = [np.ones(n)]  # u_0 on unknowns
    resid = []
    for k in range(1, kmax + 1):
        rhs = np.zeros(n)
        for j in range(1, k + 1):
            lower = out[k - j]
            # P u_{k-j}: inner part + A part (u_0 = 1 on A, else 0) + outside boundary
            pu = sysm.P @ lower
            if k - j == 0:
                pu = pu + sysm.p_A + sysm.p_out
            else:
                pu = pu + sysm.p_out * math.factorial(k - j) * M ** (k - j)
            rhs += math.comb(k, j) * math.factorial(j) / sysm.gamma**j * pu
        rhs_full = rhs + sysm.p_out * (math.factorial(k) * M**k if M else 0.0)
        u = sysm.solve(rhs_full)
        r = u - sysm.P @ u - rhs_full
        resid.append(float(np.max(np.abs(r))) if n else 0.0)
        out.append(u)
    return sysm, M, out, resid


def _result(kind, k, model, trunc, sysm, M, u_unknown, resid, upper=None) -> SolveResult:
    vals = np.zeros(len(sysm.states))
    vals[sysm.unk] = u_unknown
    return SolveResult(kind, k, sysm.states, vals, resid, trunc.policy, M if trunc.policy == PENALTY else None,
                       sysm.method, trunc.window.digest(), upper=upper)


def _check_resid(resid: float, tol: float):
    if not resid < tol:
        raise SolverError(f"fixed-point residual {resid:.3e} exceeds tolerance {tol:.1e}")


def solve_mean_hitting(model: Model, trunc: Truncation, bracket: bool = False,
                       tol: float = RESIDUAL_TOL) -> SolveResult:
    """``E_x tau_A`` on the truncation; ``bracket=True`` adds the penalty-policy values as ``upper``."""
    if trunc.target is None or not np.any(trunc.target.contains(trunc.window.states)):
        raise ParameterError("hitting problems need a target set A with states in the window")
    sysm, M, us, resid = _moments(model, trunc, 1)
    _check_resid(resid[0], tol)
    upper = None
    if bracket:
        other = trunc.with_policy(PENALTY) if trunc.policy == ZERO else trunc
        s2, M2, us2, r2 = _moments(model, other, 1)
        _check_resid(r2[0], tol * max(1.0, float(np.max(np.abs(us2[1])))))
        upper = np.zeros(len(s2.states))
        upper[s2.unk] = us2[1]
    res = _result("mean_hitting", 1, model, trunc, sysm, M, us[1], resid[0], upper)
    return res


def solve_moment_hitting(model: Model, trunc: Truncation, k: int, tol: float | None = None,
                         lower_growth: dict | None = None) -> SolveResult:
    """``E_x tau_A^k``; refuses when ``lower_growth`` reports a divergent lower moment."""
    if k < 0:
        raise ParameterError("k must be >= 0")
    if lower_growth is not None and lower_growth.get("converged") is False:
        raise SolverError("a lower moment diverges under window growth; refusing higher moments")
    if trunc.target is None:
        raise ParameterError("hitting problems need a target set A")
    if k == 0:
        s = trunc.window.states
        inA = trunc.target.contains(s)
        vals = np.where(inA, 0.0, 1.0)
        return SolveResult("moment_hitting", 0, s, vals, 0.0, trunc.policy, None, "closed_form",
                           trunc.window.digest())
    sysm, M, us, resid = _moments(model, trunc, k)
    scale = max(1.0, float(np.max(np.abs(us[k])))) if sysm.n else 1.0
    t = tol if tol is not None else RESIDUAL_TOL * scale
    _check_resid(resid[-1], t)
    res = _result("moment_hitting", k, model, trunc, sysm, M, us[k], resid[-1])
    return replace(res, extras={"lower_moments_residuals": resid})


def solve_mean_explosion(model: Model, trunc: Truncation, tol: float = RESIDUAL_TOL) -> SolveResult:
    """Expected exit time of the window with no target: a lower bound on ``E_x zeta``."""
    t = Truncation(trunc.window, None, ZERO)
    sysm, M, us, resid = _moments(model, t, 1)
    _check_resid(resid[0], tol)
    return _result("mean_explosion", 1, model, t, sysm, M, us[1], resid[0])


def window_growth(model: Model, windows: Sequence[Window], probes: Sequence, target: StateSet | None = None,
                  kind: str = "mean_hitting", k: int = 1, rtol: float = 0.01) -> dict:
    """Probe values across nested windows; diverged if the last relative change exceeds ``rtol``."""
    table = []
    sizes = []
    for w in windows:
        tr = Truncation(w, target, ZERO)
        if kind == "mean_explosion":
            r = solve_mean_explosion(model, tr)
        elif k == 1:
            r = solve_mean_hitting(model, tr)
        else:
            r = solve_moment_hitting(model, tr, k)
        table.append([r.value_at(p) for p in probes])
        sizes.append(len(w))
    vals = np.array(table)
    rel = []
    for i in range(1, len(vals)):
        denom = np.maximum(np.abs(vals[i]), 1e-300)
        rel.append(float(np.max(np.abs(vals[i] - vals[i - 1]) / denom)))
    converged = bool(rel and rel[-1] <= rtol)
    gap = (vals[-1] - vals[-2]).tolist() if len(vals) >= 2 else None
    return _jsonable({"sizes": sizes, "probes": [p if isinstance(p, int) else list(p) for p in probes],
                      "values": vals.tolist(), "relative_changes": rel, "converged": converged,
                      "extrapolation_gap": gap, "rtol": rtol})
