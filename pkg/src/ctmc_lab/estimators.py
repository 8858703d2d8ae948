"""Moments under censoring, survival-tail regression and implosion scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chain import Model, ScalarField, StateSet, Window, _jsonable, state_id
from .models import ParameterError

FINITE, INFINITE, INCONCLUSIVE = "consistent_finite", "consistent_infinite", "inconclusive"


@dataclass(frozen=True, eq=False)
class CensoredSample:
    """Values with censoring flags. A censored value is the elapsed time when the
    run was stopped, so it never exceeds ``cap`` and lower-bounds the true value."""

    values: np.ndarray
    censored: np.ndarray
    cap: float = math.inf

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        c = np.asarray(self.censored, dtype=bool)
        if v.shape != c.shape:
            raise ParameterError("values and censored flags differ in length")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ParameterError("values must be finite and nonnegative")
        if np.any(v[~c] > self.cap):
            raise ParameterError("uncensored values must not exceed the cap")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "censored", c)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def censored_mass(self) -> float:
        return float(np.mean(self.censored)) if len(self) else 0.0

    @classmethod
    def uncensored(cls, values) -> "CensoredSample":
        v = np.asarray(values, dtype=float)
        return cls(v, np.zeros(v.shape, bool))

    def truncated(self, cap: float) -> "CensoredSample":
        """The sample one would have observed with a smaller time cap."""
        if cap > self.cap:
            raise ParameterError("can only lower the cap")
        over = self.values >= cap
        return CensoredSample(np.minimum(self.values, cap), self.censored | over, cap)


def estimate_moment(sample: CensoredSample, q: float) -> tuple[float, bool]:
    """Empirical ``E[value^q]``; the flag marks a lower bound (some mass censored)."""
    if len(sample) == 0:
        raise ParameterError("empty sample")
    if not q > 0:
        raise ParameterError("q must be positive")
    v = sample.values
    est = float(np.mean(v)) if q == 1 else float(np.mean(v**q))
    return est, bool(sample.censored_mass > 0)


def moment_stderr(sample: CensoredSample, q: float) -> float:
    v = sample.values**q
    return float(np.std(v, ddof=1) / math.sqrt(len(v))) if len(v) > 1 else math.inf


def moment_growth(sample: CensoredSample, q: float, caps: Sequence[float]) -> dict:
    """``E[min(tau, T)^q]`` for increasing ``T`` and the log-log slope between the last two caps.

    A slope near 0 means the moment stabilises; a slope bounded away from 0
    means it keeps growing with the cap.
    """
    caps = sorted(float(c) for c in caps)
    vals = [estimate_moment(sample.truncated(c), q)[0] for c in caps]
    slopes = [math.log(vals[i] / vals[i - 1]) / math.log(caps[i] / caps[i - 1]) for i in range(1, len(caps))]
    return {"q": q, "caps": caps, "moments": vals, "slopes": slopes, "final_slope": slopes[-1] if slopes else None}


@dataclass(frozen=True)
class TailReport:
    p_hat: float
    stderr: float
    stderr_ols: float
    fit_range: dict
    censored_mass: float
    n_points: int
    p0: float | None = None
    probes: tuple = ()
    conclusive: bool = True

    def verdict(self, q: float) -> str:
        """Finiteness of ``E tau^q`` given the fitted tail, with a 2-stderr band."""
        if not self.conclusive:
            return INCONCLUSIVE
        if q < self.p_hat - 2 * self.stderr:
            return FINITE
        if q > self.p_hat + 2 * self.stderr:
            return INFINITE
        return INCONCLUSIVE

    def verdict_vs(self, p0: float) -> dict:
        """Compare against a threshold ``p0``; probes ``q = p0 / 2`` and ``2 p0``."""
        return {"p0": p0, "within_2se": bool(abs(self.p_hat - p0) <= 2 * self.stderr),
                "probes": {f"{q:g}": self.verdict(q) for q in (0.5 * p0, p0, 2 * p0)}}

    def to_dict(self) -> dict:
        d = {"p_hat": self.p_hat, "stderr": self.stderr, "stderr_ols": self.stderr_ols,
             "fit_range": self.fit_range, "censored_mass": self.censored_mass, "n_points": self.n_points,
             "conclusive": self.conclusive}
        if self.p0 is not None:
            d["vs_p0"] = self.verdict_vs(self.p0)
        return _jsonable(d)


def _ols(x, y, w=None):
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    resid = y - ym - slope * (x - xm)
    se = math.sqrt(np.sum(resid**2) / max(len(x) - 2, 1) / sxx)
    return float(slope), float(se)


def estimate_tail_exponent(sample: CensoredSample, lo: float = 0.90, hi: float = 0.999,
                           min_points: int = 200, p0: float | None = None, n_boot: int = 64,
                           seed: int = 0) -> TailReport:
    """Regress ``log S(t)`` on ``log t`` over the ``[lo, hi]`` quantiles of the uncensored values.

    ``S(t) = #{values > t} / n`` uses every sample (censored ones sit above every
    uncensored value below the cap). ``stderr`` is a Poisson-weight bootstrap of
    the slope: survival ordinates are cumulative sums, so the plain OLS error
    (kept as ``stderr_ols``) understates the spread.
    """
    if not 0 < lo < hi < 1:
        raise ParameterError("need 0 < lo < hi < 1")
    n = len(sample)
    if n == 0:
        raise ParameterError("empty sample")
    v = sample.values
    order = np.argsort(v, kind="stable")
    vs = v[order]
    unc = ~sample.censored[order]
    u_vals = vs[unc]
    fit = {"quantiles": [lo, hi]}
    if u_vals.size == 0:
        return TailReport(math.nan, math.inf, math.inf, fit, sample.censored_mass, 0, p0, conclusive=False)
    t_lo, t_hi = np.quantile(u_vals, [lo, hi])
    fit.update(t_lo=float(t_lo), t_hi=float(t_hi))
    # survival just after each sorted value: (#strictly greater)/n
    greater = n - np.searchsorted(vs, vs, side="right")
    sel = unc & (vs >= t_lo) & (vs <= t_hi) & (greater > 0) & (vs > 0)
    # one point per distinct value
    sel &= np.r_[vs[1:] != vs[:-1], True]
    k = int(np.sum(sel))
    if k < min_points:
        return TailReport(math.nan, math.inf, math.inf, fit, sample.censored_mass, k, p0, conclusive=False)
    x = np.log(vs[sel])
    slope, se = _ols(x, np.log(greater[sel] / n))
    rng = np.random.Generator(np.random.Philox(seed))
    boots = []
    for _ in range(n_boot):
        w = rng.poisson(1.0, n).astype(float)
        tot = w.sum()
        above = tot - np.cumsum(w)  # weight strictly after position i (ties handled by sel)
        ok = sel & (w > 0) & (above > 0)
        if np.sum(ok) < 3:
            continue
        b_slope, _ = _ols(np.log(vs[ok]), np.log(above[ok] / tot))
        boots.append(b_slope)
    se_boot = float(np.std(boots, ddof=1)) if len(boots) > 2 else se
    return TailReport(-slope, max(se_boot, se), se, fit, sample.censored_mass, k, p0)


def implosion_scan(model: Model, A: StateSet, starts: Sequence, method: str = "solver",
                   window: Window | None = None, runs: int = 10_000, seed: int = 0, caps=None,
                   level: ScalarField | None = None, workers: int = 1) -> dict:
    """Estimate ``E_x tau_A`` per start and regress it on the level ``level(x)``.

    ``level`` defaults to the identity (1-d) or Euclidean norm. A flat slope is
    the implosion signature; a growing one indicates non-implosion.
    """
    from . import fields
    from .simulate import Caps, passage_times
    from .solver import Truncation, solve_mean_hitting

    starts_arr = model.states(starts)
    if level is None:
        level = fields.identity() if model.dim == 1 else fields.norm()
    inA = A.contains(starts_arr)
    means = np.zeros(len(starts_arr))
    errs = np.zeros(len(starts_arr))
    if method == "solver":
        if window is None:
            raise ParameterError("solver scans need a window")
        res = solve_mean_hitting(model, Truncation(window, A))
        for i, s in enumerate(starts_arr):
            means[i] = 0.0 if inA[i] else res.value_at(s)
    elif method == "mc":
        caps = caps or Caps()
        for i, s in enumerate(starts_arr):
            if inA[i]:
                continue
            smp = passage_times(model, s, A, caps, seed + i, runs, workers=workers)
            means[i], _ = estimate_moment(smp, 1.0)
            errs[i] = moment_stderr(smp, 1.0)
    else:
        raise ParameterError(f"unknown scan method {method!r}")
    lv = level(starts_arr)
    use = ~inA
    slope = math.nan
    if np.sum(use) >= 2:
        slope = float(np.polyfit(lv[use], means[use], 1)[0])
    return _jsonable({
        "starts": [state_id(s) for s in starts_arr], "levels": lv.tolist(), "means": means.tolist(),
        "stderr": errs.tolist(), "excluded": [state_id(s) for s in starts_arr[inA]],
        "sup_hat": float(np.max(means)) if len(means) else 0.0, "slope": slope, "method": method,
    })
