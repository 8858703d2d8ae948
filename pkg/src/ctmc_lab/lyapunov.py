"""Drift-criterion checkers.

Each checker audits the hypotheses of one Lyapunov criterion on a finite
window and returns a :class:`Certificate`. Inequalities are tested as
``lhs <= rhs + SLACK``; a state that only passes thanks to the slack is
flagged marginal. Asymptotic ("outside a finite set") hypotheses are only
ever checked on the window, so every certificate is conditional on it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .chain import (AuditError, Model, ScalarField, StateSet, Window, generator, increments,
                    make_window, state_id, _jsonable)
from .itlog import LogPowerScale, iterated_log, log_product  # noqa: F401  (re-exported)
from .models import ParameterError
from .quadrature import (IntegralResult, integral_inverse_near_zero, is_nondecreasing,
                         tail_diverges)

SLACK = 1e-10

CRITERIA = (
    "moment_upper", "moment_lower", "foster", "explosion_uniform", "explosion_modulated",
    "conditional_explosion", "non_explosion", "implosion", "non_implosion", "implosion_modulated",
)

CERTIFIED, REFUTED, TOO_SMALL = "certified", "refuted", "window_too_small"


# ---------------------------------------------------------------------------
# conditions and audits


@dataclass(frozen=True, eq=False)
class Condition:
    """``lhs(x) <= rhs(x)`` (or ``<`` when strict) on the states selected by ``region``."""

    name: str
    text: str
    lhs: Callable[[np.ndarray], np.ndarray]
    rhs: Callable[[np.ndarray], np.ndarray]
    region: Callable[[np.ndarray], np.ndarray] | None = None
    strict: bool = False

    def evaluate(self, states: np.ndarray):
        lhs = np.asarray(self.lhs(states), dtype=float)
        rhs = np.asarray(self.rhs(states), dtype=float)
        lhs = np.broadcast_to(lhs, (states.shape[0],))
        rhs = np.broadcast_to(rhs, (states.shape[0],))
        if self.strict:
            ok = lhs < rhs
            marginal = np.zeros_like(ok)
        else:
            ok = lhs <= rhs + SLACK
            marginal = ok & (lhs > rhs)
        ok = ok & np.isfinite(lhs) & ~np.isnan(rhs)
        return lhs, rhs, ok, marginal

    def audit(self, window: Window) -> "ConditionAudit":
        s = window.states
        if self.region is not None:
            s = s[np.asarray(self.region(s), dtype=bool)]
        lhs, rhs, ok, marginal = self.evaluate(s)
        return ConditionAudit(self, s, lhs.copy(), rhs.copy(), ok, marginal)


@dataclass(frozen=True, eq=False)
class ConditionAudit:
    condition: Condition
    states: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    ok: np.ndarray
    marginal: np.ndarray

    @property
    def size(self) -> int:
        return int(self.states.shape[0])

    @property
    def passed(self) -> bool:
        return bool(np.all(self.ok))

    def violators(self) -> np.ndarray:
        return self.states[~self.ok]

    def first_violation(self) -> dict | None:
        bad = np.flatnonzero(~self.ok)
        if bad.size == 0:
            return None
        i = int(bad[0])
        return {"condition": self.condition.name, "inequality": self.condition.text,
                "state": state_id(self.states[i]), "lhs": float(self.lhs[i]), "rhs": float(self.rhs[i])}

    def summary(self) -> dict:
        return {"name": self.condition.name, "inequality": self.condition.text, "region_size": self.size,
                "violations": int(np.sum(~self.ok)), "marginal": int(np.sum(self.marginal))}


@dataclass(frozen=True)
class SublevelSet:
    """``{x in window : f(x) <= height}``."""

    field: ScalarField
    height: float
    members: np.ndarray

    @classmethod
    def of(cls, f: ScalarField, height: float, window: Window) -> "SublevelSet":
        s = window.states
        return cls(f, float(height), s[f(s) <= height])

    def __len__(self) -> int:
        return int(self.members.shape[0])

    def contains(self, states: np.ndarray) -> np.ndarray:
        return self.field(states) <= self.height

    def as_state_set(self) -> StateSet:
        f, h = self.field, self.height
        return StateSet(lambda s: f(s) <= h, f"{{{f.name} <= {h:g}}}")


def sublevel_stability(model: Model, f: ScalarField, height: float, windows: Sequence[Window]) -> dict:
    """Member counts of ``{f <= height}`` across nested windows."""
    counts = [len(SublevelSet.of(f, height, w)) for w in windows]
    stable = len(counts) >= 2 and counts[-1] == counts[-2]
    return {"counts": counts, "stable": bool(stable)}


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True, eq=False)
class Certificate:
    criterion: str
    constants: dict
    window: Window
    verdict: str
    witness: dict | None
    granted_bound: dict | None
    audits: tuple
    model: dict
    assumptions: tuple = ()
    reason: str = ""
    diagnostics: dict = field(default_factory=dict)
    bound_fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    rerun_fn: Callable[[Window], "Certificate"] | None = field(default=None, repr=False)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    @property
    def refuted(self) -> bool:
        return self.verdict == REFUTED

    @property
    def marginal_count(self) -> int:
        return int(sum(int(np.sum(a.marginal)) for a in self.audits))

    def bound_at(self, states: np.ndarray) -> np.ndarray:
        """Quantitative consequence at ``states`` (e.g. ``f(x)/eps``), if the criterion grants one."""
        if self.bound_fn is None:
            raise ValueError(f"{self.criterion} grants no pointwise bound")
        return np.asarray(self.bound_fn(states), dtype=float)

    def rerun(self, window: Window) -> "Certificate":
        return self.rerun_fn(window)

    def replay(self) -> bool:
        """Re-evaluate every stored inequality on the stored window; bit-exact comparison."""
        again = self.rerun(self.window)
        if again.verdict != self.verdict or len(again.audits) != len(self.audits):
            return False
        for a, b in zip(self.audits, again.audits):
            if not (np.array_equal(a.states, b.states) and np.array_equal(a.lhs, b.lhs)
                    and np.array_equal(a.rhs, b.rhs) and np.array_equal(a.ok, b.ok)):
                return False
        return True

    def violations(self) -> dict:
        return {a.condition.name: a.violators() for a in self.audits}

    def witness_reproduces(self) -> bool:
        """Re-evaluate the witness state alone; it must still violate its condition."""
        if self.witness is None:
            return False
        cond = next(a.condition for a in self.audits if a.condition.name == self.witness["condition"])
        s = np.asarray(self.witness["state"], dtype=np.int64).reshape(1, self.window.dim)
        _, _, ok, _ = cond.evaluate(s)
        return not bool(ok[0])

    def to_dict(self) -> dict:
        return _jsonable({
            "criterion": self.criterion,
            "model": self.model,
            "constants": self.constants,
            "window": self.window.describe(),
            "verdict": self.verdict,
            "reason": self.reason,
            "witness": self.witness,
            "granted_bound": self.granted_bound,
            "assumptions": list(self.assumptions),
            "conditions": [a.summary() for a in self.audits],
            "marginal_states": self.marginal_count,
            "diagnostics": self.diagnostics,
        })

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def _assemble(criterion, model, window, constants, conditions, granted, *, bound_fn=None,
              assumptions=(), rerun=None, drift_names=None, pre_reason="", diagnostics=None):
    if not window.closed:
        raise AuditError("window is not generator-closed: some neighbour of a window state is not a valid state")
    audits = tuple(c.audit(window) for c in conditions)
    drift_names = drift_names if drift_names is not None else [c.name for c in conditions]
    witness = None
    reason = pre_reason
    for a in audits:
        witness = a.first_violation()
        if witness is not None:
            break
    if pre_reason:
        verdict = REFUTED
    elif witness is not None:
        verdict = REFUTED
        reason = f"{witness['condition']} fails at {witness['state']!r}"
    elif all(a.size == 0 for a in audits if a.condition.name in drift_names):
        verdict = TOO_SMALL
        reason = "audit region is empty on this window"
    else:
        verdict = CERTIFIED
    return Certificate(
        criterion=criterion, constants=dict(constants), window=window, verdict=verdict,
        witness=witness, granted_bound=granted if verdict == CERTIFIED else None, audits=audits,
        model=model.descriptor(), assumptions=tuple(assumptions), reason=reason,
        diagnostics=diagnostics or {}, bound_fn=bound_fn if verdict == CERTIFIED else None,
        rerun_fn=rerun,
    )


def _gen(model, f):
    return lambda s: generator(model, f, s)


def _positive(name, v):
    if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
        raise ParameterError(f"{name} must be a positive finite number, got {v!r}")


def _needs_infinite(f: ScalarField):
    if not f.tends_to_infinity:
        raise ParameterError(f"field {f.name} must claim tends_to_infinity")


def _needs_bounded(f: ScalarField) -> float:
    if f.bounded_by is None:
        raise ParameterError(f"field {f.name} carries no boundedness claim")
    return float(f.bounded_by)


def _bounded_condition(f: ScalarField, b: float) -> Condition:
    return Condition("bounded", f"{f.name} <= {b:g}", f, lambda s: np.full(s.shape[0], b))


def _integral(g, b) -> IntegralResult:
    return integral_inverse_near_zero(g, b)


# ---------------------------------------------------------------------------
# checkers


def check_moment_upper(model: Model, f: ScalarField, p: float, a: float, c: float,
                       window: Window) -> Certificate:
    """``Gamma f^p <= -c f^{p-2}`` off ``{f <= a}`` grants ``E_x tau^q < inf`` for ``q < p/2``."""
    _needs_infinite(f)
    for n, v in (("p", p), ("a", a), ("c", c)):
        _positive(n, v)
    fp = f.power(p)
    cond = Condition("drift", f"Gamma f^{p:g} <= -{c:g} f^{p - 2:g}", _gen(model, fp),
                     lambda s: -c * f(s) ** (p - 2.0), region=lambda s: f(s) > a)
    return _assemble(
        "moment_upper", model, window, {"p": p, "a": a, "c": c}, [cond],
        {"statement": f"E_x tau^q < inf for all q < {p / 2:g}", "target": f"{{{f.name} <= {a:g}}}",
         "q_max": p / 2},
        rerun=lambda w: check_moment_upper(model, f, p, a, c, w))


def check_moment_lower(model: Model, f: ScalarField, g: ScalarField, p: float, r: float, a: float,
                       b: float, c1: float, c2: float, window: Window) -> Certificate:
    """Four hypotheses granting ``E_x tau^q = inf`` for ``q > p``."""
    _needs_infinite(g)
    if not r > 1:
        raise ParameterError("r must exceed 1")
    for n, v in (("p", p), ("a", a), ("b", b), ("c1", c1), ("c2", c2)):
        _positive(n, v)
    gr = g.power(r)
    fp = f.power(p)
    gen_g = _gen(model, g)
    conds = [
        Condition("f_le_bg", f"{f.name} <= {b:g} {g.name}", f, lambda s: b * g(s)),
        Condition("g_drift_lower", f"Gamma g >= -{c1:g}", lambda s: -gen_g(s),
                  lambda s: np.full(s.shape[0], c1), region=lambda s: g(s) > a),
        Condition("g_r_drift", f"Gamma g^{r:g} <= {c2:g} g^{r - 1:g}", _gen(model, gr),
                  lambda s: c2 * g(s) ** (r - 1.0), region=lambda s: g(s) > a),
        Condition("f_p_submartingale", f"Gamma f^{p:g} >= 0",
                  lambda s: -generator(model, fp, s), lambda s: np.zeros(s.shape[0]),
                  region=lambda s: f(s) > a * b),
    ]
    return _assemble(
        "moment_lower", model, window, {"p": p, "r": r, "a": a, "b": b, "c1": c1, "c2": c2}, conds,
        {"statement": f"E_x tau^q = inf for all q > {p:g}", "target": f"{{{g.name} <= {a:g}}}",
         "q_min": p},
        drift_names=["g_drift_lower", "g_r_drift", "f_p_submartingale"],
        rerun=lambda w: check_moment_lower(model, f, g, p, r, a, b, c1, c2, w))


def _finite_set(F, dim) -> StateSet:
    if isinstance(F, StateSet):
        return F
    return StateSet.of(F, dim)


def check_foster(model: Model, f: ScalarField, F, eps: float, window: Window) -> Certificate:
    """``Gamma f <= -eps`` off a finite ``F`` with ``inf_{F^c} f > max_F f``; grants ``E_x tau_F <= f(x)/eps``."""
    _positive("eps", eps)
    F = _finite_set(F, model.dim)
    if not F.finite or len(F.members) == 0:
        raise ParameterError("F must be a nonempty finite state set")
    members = model.states(F.members)
    if not np.all(window.contains(members)):
        raise ParameterError("F must be contained in the audit window")
    fmax = float(np.max(f(members)))
    off = lambda s: ~F.contains(s)  # noqa: E731
    conds = [
        Condition("drift", f"Gamma f <= -{eps:g} off F", _gen(model, f),
                  lambda s: np.full(s.shape[0], -eps), region=off),
        Condition("level_separation", "max_F f < f(x) off F", lambda s: np.full(s.shape[0], fmax),
                  f, region=off, strict=True),
    ]
    return _assemble(
        "foster", model, window, {"eps": eps, "F": F.name, "max_F_f": fmax}, conds,
        {"statement": f"E_x tau_F <= f(x)/{eps:g}", "target": F.name},
        bound_fn=lambda s: np.where(F.contains(s), 0.0, f(s) / eps),
        drift_names=["drift"],
        rerun=lambda w: check_foster(model, f, F, eps, w))


def _check_positive_on(f: ScalarField, window: Window):
    vals = f(window.states)
    if not np.all(vals > 0):
        i = int(np.argmin(vals > 0))
        raise ParameterError(f"field {f.name} is not strictly positive at {state_id(window.states[i])!r}")


def check_explosion_uniform(model: Model, f: ScalarField, eps: float, window: Window) -> Certificate:
    """``Gamma f <= -eps`` everywhere with ``f > 0``; grants ``E_x zeta <= f(x)/eps``."""
    _positive("eps", eps)
    if not f.strictly_positive:
        raise ParameterError(f"field {f.name} must claim strict positivity")
    _check_positive_on(f, window)
    cond = Condition("drift", f"Gamma f <= -{eps:g}", _gen(model, f), lambda s: np.full(s.shape[0], -eps))
    return _assemble(
        "explosion_uniform", model, window, {"eps": eps}, [cond],
        {"statement": f"E_x zeta <= f(x)/{eps:g}"},
        bound_fn=lambda s: f(s) / eps,
        rerun=lambda w: check_explosion_uniform(model, f, eps, w))


def check_explosion_modulated(model: Model, f: ScalarField, g, window: Window) -> Certificate:
    """``Gamma f <= -g(f)`` with ``int_0^b dy/g < inf``; grants ``E_x zeta < inf``."""
    b = _needs_bounded(f)
    _check_positive_on(f, window)
    if not is_nondecreasing(g, b * 1e-9, b):
        raise ParameterError("modulator must be positive and nondecreasing on (0, b]")
    integ = _integral(g, b)
    conds = [_bounded_condition(f, b),
             Condition("drift", "Gamma f <= -g(f)", _gen(model, f), lambda s: -np.asarray(g(f(s)), float))]
    return _assemble(
        "explosion_modulated", model, window, {"b": b, "B_hat": integ.value, "g": getattr(g, "name", "g")},
        conds, {"statement": "E_x zeta < inf", "B_hat": integ.value},
        pre_reason="" if integ.converged else "non-integrable singularity",
        drift_names=["drift"],
        diagnostics={"quadrature_panels": integ.panels},
        rerun=lambda w: check_explosion_modulated(model, f, g, w))


def check_conditional_explosion(model: Model, f: ScalarField, A: StateSet, eps: float, x0,
                                window: Window) -> Certificate:
    """``f(x0) < inf_A f`` and ``Gamma f <= -eps`` off ``A``; grants ``E_x0(zeta | tau_A = inf) < inf``.

    Positivity of ``f`` also yields ``P_x0(tau_A < inf) <= f(x0) / inf_A f``.
    """
    _positive("eps", eps)
    _check_positive_on(f, window)
    x0s = model.states(x0)
    f0 = float(f(x0s)[0])
    inA = A.contains(window.states)
    if not np.any(inA):
        raise ParameterError("window contains no state of A")
    infA = float(np.min(f(window.states[inA])))
    conds = [
        Condition("start_below_A", "f(x0) < inf_A f", lambda s: np.full(s.shape[0], f0),
                  lambda s: np.full(s.shape[0], infA), region=lambda s: np.all(s == x0s[0], axis=1), strict=True),
        Condition("drift", f"Gamma f <= -{eps:g} off A", _gen(model, f),
                  lambda s: np.full(s.shape[0], -eps), region=lambda s: ~A.contains(s)),
    ]
    if not np.any(window.contains(x0s)):
        raise ParameterError("x0 must lie in the audit window")
    return _assemble(
        "conditional_explosion", model, window,
        {"eps": eps, "x0": state_id(x0s[0]), "A": A.name, "f_x0": f0, "inf_A_f": infA}, conds,
        {"statement": "E_x0(zeta | tau_A = inf) < inf", "hit_A_upper": f0 / infA,
         "escape_lower": 1.0 - f0 / infA},
        drift_names=["drift"],
        rerun=lambda w: check_conditional_explosion(model, f, A, eps, x0, w))


def check_non_explosion(model: Model, f: ScalarField, g, window: Window) -> Certificate:
    """``Gamma f <= g(f)`` with ``G(z) = int^z dy/g -> inf``; grants ``P_x(zeta = inf) = 1``."""
    _needs_infinite(f)
    fv = f(window.states)
    top = max(float(np.max(fv)), 2.0) if len(fv) else 2.0
    if not is_nondecreasing(g, 1e-6, top):
        raise ParameterError("modulator must be positive and nondecreasing")
    tail = tail_diverges(g, z0=1.0)
    cond = Condition("drift", "Gamma f <= g(f)", _gen(model, f), lambda s: np.asarray(g(f(s)), float))
    return _assemble(
        "non_explosion", model, window, {"g": getattr(g, "name", "g")}, [cond],
        {"statement": "P_x(zeta = inf) = 1"},
        pre_reason="" if not tail.converged else "modulator rejected: tail of 1/g integrable",
        diagnostics={"tail_blocks": tail.panels, "tail": tail.reason},
        rerun=lambda w: check_non_explosion(model, f, g, w))


_RECURRENCE = "embedded chain is recurrent (assumed, not verified)"


def check_implosion(model: Model, f: ScalarField, a: float, eps: float, window: Window) -> Certificate:
    """Bounded ``f <= b`` with ``Gamma f <= -eps`` off ``{f <= a}``; grants ``E_x tau <= b/eps`` uniformly."""
    b = _needs_bounded(f)
    _positive("eps", eps)
    if not 0 < a < b:
        raise ParameterError(f"a must lie in (0, b) = (0, {b:g})")
    sub = SublevelSet.of(f, a, window)
    conds = [_bounded_condition(f, b),
             Condition("drift", f"Gamma f <= -{eps:g} off {{f <= {a:g}}}", _gen(model, f),
                       lambda s: np.full(s.shape[0], -eps), region=lambda s: f(s) > a)]
    return _assemble(
        "implosion", model, window, {"a": a, "b": b, "eps": eps}, conds,
        {"statement": f"E_x tau <= {b:g}/{eps:g} uniformly", "uniform_bound": b / eps,
         "target": f"{{{f.name} <= {a:g}}}"},
        bound_fn=lambda s: np.full(s.shape[0], b / eps),
        assumptions=(_RECURRENCE,), drift_names=["drift"],
        diagnostics={"sublevel_size": len(sub)},
        rerun=lambda w: check_implosion(model, f, a, eps, w))


def check_non_implosion(model: Model, f: ScalarField, a: float, eps: float, c: float, r: float,
                        window: Window) -> Certificate:
    """``Gamma f >= -eps`` and ``Gamma f^r <= c f^{r-1}`` off ``{f <= a}``: no implosion."""
    _needs_infinite(f)
    if not r > 1:
        raise ParameterError("r must exceed 1")
    for n, v in (("a", a), ("eps", eps), ("c", c)):
        _positive(n, v)
    gen_f = _gen(model, f)
    off = lambda s: f(s) > a  # noqa: E731
    conds = [
        Condition("drift_lower", f"Gamma f >= -{eps:g}", lambda s: -gen_f(s),
                  lambda s: np.full(s.shape[0], eps), region=off),
        Condition("r_drift", f"Gamma f^{r:g} <= {c:g} f^{r - 1:g}", _gen(model, f.power(r)),
                  lambda s: c * f(s) ** (r - 1.0), region=off),
    ]
    return _assemble(
        "non_implosion", model, window, {"a": a, "eps": eps, "c": c, "r": r}, conds,
        {"statement": f"no uniform bound on E_x tau_{{f <= {a:g}}}"},
        rerun=lambda w: check_non_implosion(model, f, a, eps, c, r, w))


def check_implosion_modulated(model: Model, f: ScalarField, g, a: float, window: Window) -> Certificate:
    """``Gamma f <= -g(f)`` off ``{f <= a}`` with ``B = int_0^b dy/g < inf``; grants ``E_x tau <= B``."""
    b = _needs_bounded(f)
    if not 0 < a < b:
        raise ParameterError(f"a must lie in (0, b) = (0, {b:g})")
    if np.any(f(window.states) < 0):
        raise ParameterError(f"field {f.name} must be nonnegative")
    if not is_nondecreasing(g, b * 1e-9, b):
        raise ParameterError("modulator must be positive and nondecreasing on (0, b]")
    integ = _integral(g, b)
    conds = [_bounded_condition(f, b),
             Condition("drift", f"Gamma f <= -g(f) off {{f <= {a:g}}}", _gen(model, f),
                       lambda s: -np.asarray(g(f(s)), float), region=lambda s: f(s) > a)]
    return _assemble(
        "implosion_modulated", model, window,
        {"a": a, "b": b, "B_hat": integ.value, "g": getattr(g, "name", "g")}, conds,
        {"statement": f"E_x tau <= {integ.value:.12g} uniformly", "uniform_bound": integ.value,
         "target": f"{{{f.name} <= {a:g}}}"},
        bound_fn=lambda s: np.full(s.shape[0], integ.value),
        pre_reason="" if integ.converged else "non-integrable singularity",
        assumptions=(_RECURRENCE,), drift_names=["drift"],
        diagnostics={"quadrature_panels": integ.panels},
        rerun=lambda w: check_implosion_modulated(model, f, g, a, w))


# ---------------------------------------------------------------------------
# condition R


def condition_r_report(model: Model, f: ScalarField, scale: LogPowerScale,
                       shells: Sequence[np.ndarray | Window]) -> list[dict]:
    """Per shell, ``sup |R_g| / |D_g|`` with ``R_g = m_{g o f} - D_g`` and
    ``D_g = g'(f) m_f + g''(f) v_f / 2``. States whose own or neighbouring
    ``f``-values fall below the scale's domain threshold are skipped.
    """
    rows = []
    prev = None
    thr = scale.threshold
    for j, sh in enumerate(shells):
        s = sh.states if isinstance(sh, Window) else model.states(sh)
        targets, probs = model.transitions(s) if len(s) else (np.zeros((0, 1, model.dim), np.int64), np.zeros((0, 1)))
        n, k = probs.shape
        fx = f(s)
        fy = f(targets.reshape(n * k, model.dim)).reshape(n, k)
        live = probs > 0
        fy = np.where(live, fy, fx[:, None])
        keep = (fx >= thr) & np.all(fy >= thr, axis=1)
        s, fx, fy, probs = s[keep], fx[keep], fy[keep], probs[keep]
        row = {"shell": j, "states": int(len(s)), "skipped": int(np.sum(~keep))}
        if len(s) == 0:
            row.update(sup_ratio=None, indeterminate=True)
            rows.append(row)
            continue
        delta = fy - fx[:, None]
        m = (probs * delta).sum(axis=1)
        v = (probs * delta**2).sum(axis=1)
        gx = scale(fx)
        m_exact = (probs * (scale(fy.ravel()).reshape(fy.shape) - gx[:, None])).sum(axis=1)
        D = scale.d1(fx) * m + 0.5 * scale.d2(fx) * v
        R = m_exact - D
        if np.any(D == 0):
            row.update(sup_ratio=None, indeterminate=True,
                       zero_D_state=state_id(s[int(np.argmax(D == 0))]), sup_abs_R=float(np.max(np.abs(R))))
        else:
            ratio = float(np.max(np.abs(R) / np.abs(D)))
            row.update(sup_ratio=ratio, indeterminate=False, f_range=[float(fx.min()), float(fx.max())])
            if prev is not None:
                row["decreased"] = ratio <= prev
            prev = ratio
        rows.append(row)
    return rows


def dyadic_shells(model: Model, f: ScalarField, window: Window, js: Sequence[int]) -> list[np.ndarray]:
    """States of ``window`` with ``f`` in ``(2^j, 2^{j+1}]`` for each ``j``."""
    fv = f(window.states)
    return [window.states[(fv > 2.0**j) & (fv <= 2.0 ** (j + 1))] for j in js]


def doubled(model: Model, window: Window) -> Window:
    """A window twice as wide along every axis, containing the original (1-d and boxes)."""
    lo = window.states.min(axis=0)
    hi = window.states.max(axis=0)
    new_hi = hi + (hi - lo + 1)
    axes = [np.arange(int(a), int(b) + 1, dtype=np.int64) for a, b in zip(lo, new_hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    grid = grid[np.asarray(model.valid(grid), dtype=bool)]
    return make_window(model, grid)


CHECKERS = {
    "moment_upper": check_moment_upper,
    "moment_lower": check_moment_lower,
    "foster": check_foster,
    "explosion_uniform": check_explosion_uniform,
    "explosion_modulated": check_explosion_modulated,
    "conditional_explosion": check_conditional_explosion,
    "non_explosion": check_non_explosion,
    "implosion": check_implosion,
    "non_implosion": check_non_implosion,
    "implosion_modulated": check_implosion_modulated,
}
