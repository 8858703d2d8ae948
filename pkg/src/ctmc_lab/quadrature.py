"""Integrals of ``1/g`` near a singularity at 0 and tail-divergence tests.

``∫_0^b dy/g`` is summed over geometric panels ``[b 2^{-(j+1)}, b 2^{-j}]``,
each integrated by ``scipy.integrate.quad``. Once the panel contributions
settle into a geometric pattern the remaining tail is extrapolated from the
contribution ratio; a ratio at or above one means divergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad


@dataclass(frozen=True)
class Modulator:
    """A positive, nondecreasing function ``g`` on ``(0, inf)`` or ``(0, b]``."""

    fn: Callable[[float], float] = field(compare=False)
    name: str

    def __call__(self, y):
        return self.fn(y)

    @classmethod
    def power(cls, alpha: float, scale: float = 1.0) -> "Modulator":
        return cls(lambda y: scale * np.asarray(y, dtype=float) ** alpha, f"{scale:g}*y^{alpha:g}")

    @classmethod
    def constant(cls, c: float) -> "Modulator":
        return cls(lambda y: np.full(np.shape(y), float(c)) if np.ndim(y) else float(c), f"const{c:g}")

    @classmethod
    def affine(cls, a: float = 1.0, b: float = 1.0) -> "Modulator":
        return cls(lambda y: a + b * np.asarray(y, dtype=float), f"{a:g}+{b:g}*y")

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "Modulator":
        return cls(lambda y: np.exp(rate * np.asarray(y, dtype=float)), f"exp({rate:g}y)")

    def descriptor(self) -> dict:
        return {"name": self.name}


def modulator_from_descriptor(desc: dict) -> Modulator:
    kind = desc["kind"]
    kw = {k: v for k, v in desc.items() if k != "kind"}
    builders = {"power": Modulator.power, "constant": Modulator.constant,
                "affine": Modulator.affine, "exponential": Modulator.exponential}
    if kind not in builders:
        raise ValueError(f"unknown modulator kind {kind!r}")
    return builders[kind](**kw)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    converged: bool
    panels: int
    reason: str = ""


_DIVERGE_RATIO = 1.0 - 1e-3
_MAX_PARTIAL = 1e6


def _panel(g, lo, hi) -> float:
    val, _ = quad(lambda y: 1.0 / float(g(y)), lo, hi, limit=200, epsabs=0.0, epsrel=1e-12)
    return val


def integral_inverse_near_zero(g: Callable[[float], float], b: float, max_panels: int = 1000,
                               rtol: float = 1e-12) -> IntegralResult:
    """``∫_0^b dy / g(y)`` with geometric refinement toward the singular end."""
    if not b > 0:
        raise ValueError("upper limit b must be positive")
    total = 0.0
    prev = None
    ratios: list[float] = []
    hi = float(b)
    for j in range(max_panels):
        lo = hi * 0.5
        if lo == 0.0:
            break
        piece = _panel(g, lo, hi)
        if not math.isfinite(piece):
            return IntegralResult(math.inf, False, j + 1, "non-integrable singularity")
        total += piece
        if total > _MAX_PARTIAL:
            return IntegralResult(math.inf, False, j + 1, "non-integrable singularity")
        if prev is not None and prev > 0:
            ratios.append(piece / prev)
        if len(ratios) >= 8:
            r = ratios[-1]
            if r >= _DIVERGE_RATIO:
                return IntegralResult(math.inf, False, j + 1, "non-integrable singularity")
            tail = piece * r / (1.0 - r)
            # power-like tails: once the ratio is locked the geometric tail is exact
            steady = max(ratios[-4:]) - min(ratios[-4:]) <= 1e-9 * r
            if tail <= rtol * total or (steady and len(ratios) >= 16):
                return IntegralResult(total + tail, True, j + 1)
        prev = piece
        hi = lo
    return IntegralResult(math.inf, False, max_panels, "non-integrable singularity")


def tail_diverges(g: Callable[[float], float], z0: float = 1.0, max_blocks: int = 200) -> IntegralResult:
    """Test whether ``G(z) = ∫^z dy/g`` grows without bound as ``z -> inf``.

    Uses dyadic blocks ``[z0 2^j, z0 2^{j+1}]``; ``converged`` in the result means
    the tail integral is finite, i.e. the modulator is *not* admissible for
    the non-explosion criterion.
    """
    total = 0.0
    prev = None
    lo = float(z0)
    for j in range(max_blocks):
        hi = lo * 2.0
        piece = _panel(g, lo, hi) if math.isfinite(hi) else 0.0
        total += piece
        if prev is not None and j >= 8:
            if prev == 0.0 or piece == 0.0:
                return IntegralResult(total, True, j + 1, "tail integrable")
            r = piece / prev
            if r >= _DIVERGE_RATIO:
                return IntegralResult(math.inf, False, j + 1, "tail diverges")
            tail = piece * r / (1.0 - r)
            if tail <= 1e-12 * max(total, 1e-300):
                return IntegralResult(total + tail, True, j + 1, "tail integrable")
        prev = piece
        lo = hi
    return IntegralResult(total, True, max_blocks, "tail integrable")


def finite_on_bounded(g: Callable[[float], float], z: float, lo: float = 1e-8) -> bool:
    """``∫_lo^z dy / g`` is finite (local integrability away from 0)."""
    if z <= lo:
        return True
    val, _ = quad(lambda y: 1.0 / float(g(y)), lo, z, limit=200)
    return bool(math.isfinite(val))


def is_nondecreasing(g: Callable[[float], float], lo: float, hi: float, n: int = 257) -> bool:
    grid = np.geomspace(max(lo, 1e-12), hi, n)
    vals = np.array([float(g(y)) for y in grid])
    return bool(np.all(np.diff(vals) >= -1e-12 * np.abs(vals[1:])) and np.all(vals > 0))
