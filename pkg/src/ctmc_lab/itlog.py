"""Iterated logarithms ``ln_(k)``, their products ``L_k`` and the ``ln_(l)^eta`` scale family.

``ln_(0) s = s``, ``ln_(k) s = ln(ln_(k-1) s)``, ``L_k(s) = prod_{i<=k} ln_(i) s`` and
``L_k = 1`` for ``k < 0``. ``exp_(k)`` is the inverse of ``ln_(k)``.
"""

from __future__ import annotations

import math

import numpy as np


class DomainError(ValueError):
    """Argument below the domain threshold of an iterated logarithm."""


def iterated_exp(k: int, s: float) -> float:
    """``exp_(k)(s)``; returns ``inf`` on overflow."""
    if k < 0:
        raise ValueError(f"level must be >= 0, got {k}")
    out = float(s)
    for _ in range(k):
        if out > 709.0:
            return math.inf
        out = math.exp(out)
    return out


def domain_threshold(k: int) -> float:
    """Smallest admissible argument ``s0 = exp_(k)(2)`` for level ``k``."""
    return iterated_exp(max(k, 0), 2.0)


def _check_domain(k: int, s: np.ndarray) -> None:
    s0 = domain_threshold(k)
    # relative slack so exp_(k)(2) itself round-trips
    bad = ~(s >= s0 * (1.0 - 1e-12))
    if np.any(bad):
        worst = float(np.min(s[bad])) if np.any(np.isfinite(s[bad])) else float("nan")
        raise DomainError(f"ln_({k}) requires s >= exp_({k})(2) = {s0:.6g}; got {worst:.6g}")


def iterated_log(k: int, s):
    """``ln_(k)(s)`` for scalar or array ``s >= exp_(k)(2)``."""
    if k < 0:
        raise ValueError(f"level must be >= 0, got {k}")
    arr = np.asarray(s, dtype=float)
    _check_domain(k, arr)
    out = arr
    for _ in range(k):
        out = np.log(out)
    return out if np.ndim(s) else float(out)


def log_product(k: int, s):
    """``L_k(s) = prod_{i=0..k} ln_(i)(s)``; ``L_k = 1`` for ``k < 0``."""
    arr = np.asarray(s, dtype=float)
    if k < 0:
        out = np.ones_like(arr)
        return out if np.ndim(s) else 1.0
    _check_domain(k, arr)
    level = arr
    out = arr.copy()
    for _ in range(k):
        level = np.log(level)
        out = out * level
    return out if np.ndim(s) else float(out)


class LogPowerScale:
    """The scale ``g(s) = ln_(l)(s) ** eta`` with analytic first and second derivatives.

    Uses ``h = ln_(l)``, ``h' = 1 / L_{l-1}`` and
    ``h'' = -h' * sum_{i<l} 1 / L_i``.
    """

    def __init__(self, level: int, eta: float):
        if level < 0:
            raise ValueError("level must be >= 0")
        if eta == 0:
            raise ValueError("eta must be nonzero")
        self.level = int(level)
        self.eta = float(eta)

    @property
    def threshold(self) -> float:
        return domain_threshold(self.level)

    def _parts(self, s):
        s = np.asarray(s, dtype=float)
        h = iterated_log(self.level, s) if s.ndim else np.asarray(iterated_log(self.level, s))
        h1 = 1.0 / np.asarray(log_product(self.level - 1, s), dtype=float)
        inv_sum = np.zeros_like(s)
        for i in range(self.level):
            inv_sum = inv_sum + 1.0 / np.asarray(log_product(i, s), dtype=float)
        h2 = -h1 * inv_sum
        return np.asarray(h, dtype=float), h1, h2

    def __call__(self, s):
        h, _, _ = self._parts(s)
        return h**self.eta

    def d1(self, s):
        h, h1, _ = self._parts(s)
        return self.eta * h ** (self.eta - 1.0) * h1

    def d2(self, s):
        h, h1, h2 = self._parts(s)
        eta = self.eta
        return eta * (eta - 1.0) * h ** (eta - 2.0) * h1**2 + eta * h ** (eta - 1.0) * h2

    def __repr__(self) -> str:
        return f"LogPowerScale(level={self.level}, eta={self.eta})"
