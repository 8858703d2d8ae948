"""Lyapunov fields used across the examples, plus a descriptor loader."""

from __future__ import annotations

import numpy as np
from scipy.special import polygamma

from .chain import ScalarField


def identity(coord: int = 0) -> ScalarField:
    return ScalarField(lambda s: s[:, coord].astype(float), name=f"x{coord}" if coord else "id",
                       tends_to_infinity=True)


def norm() -> ScalarField:
    return ScalarField(lambda s: np.sqrt((s.astype(float) ** 2).sum(axis=1)), name="norm",
                       tends_to_infinity=True)


def affine(a: float, b: float = 0.0, coord: int = 0) -> ScalarField:
    """``a * x + b`` on the chosen coordinate."""
    return ScalarField(lambda s: a * s[:, coord].astype(float) + b, name=f"{a:g}*x+{b:g}",
                       tends_to_infinity=a > 0, strictly_positive=(a >= 0 and b > 0))


def constant(c: float) -> ScalarField:
    return ScalarField(lambda s: np.full(s.shape[0], float(c)), name=f"const{c:g}",
                       bounded_by=float(c) if c > 0 else None, strictly_positive=c > 0)


def tail_inverse_square(scale: float = 1.0) -> ScalarField:
    """``scale * sum_{n >= x} n^-2`` via the trigamma function; defined for ``x >= 1``."""

    def fn(s):
        x = s[:, 0].astype(float)
        out = np.full(x.shape, np.nan)
        ok = x >= 1
        out[ok] = scale * polygamma(1, x[ok])
        return out

    return ScalarField(fn, name="tail_sum_n^-2", bounded_by=scale * np.pi**2 / 6, strictly_positive=True)


def one_minus_geometric(base: float = 2.0) -> ScalarField:
    """``1 - base^{-x}``, bounded by 1."""
    return ScalarField(lambda s: 1.0 - base ** (-s[:, 0].astype(float)), name=f"1-{base:g}^-x",
                       bounded_by=1.0)


def inverse_on_ray(floor_value: float = 1.0) -> ScalarField:
    """``1/x`` for ``x >= 1`` and ``floor_value`` for ``x <= 0`` (two-ray chain)."""

    def fn(s):
        x = s[:, 0].astype(float)
        return np.where(x >= 1, 1.0 / np.maximum(x, 1.0), floor_value)

    return ScalarField(fn, name="inv_ray", bounded_by=max(1.0, floor_value), strictly_positive=True)


def from_callable(fn, name: str, **claims) -> ScalarField:
    return ScalarField(fn, name=name, **claims)


_BUILDERS = {
    "identity": identity,
    "norm": lambda: norm(),
    "affine": affine,
    "constant": constant,
    "tail_inverse_square": tail_inverse_square,
    "one_minus_geometric": one_minus_geometric,
    "inverse_on_ray": inverse_on_ray,
}


def field_from_descriptor(desc: dict) -> ScalarField:
    kind = desc["kind"]
    if kind not in _BUILDERS:
        raise ValueError(f"unknown field kind {kind!r}; known: {sorted(_BUILDERS)}")
    kw = {k: v for k, v in desc.items() if k != "kind"}
    return _BUILDERS[kind](**kw)


def field_kinds() -> list[str]:
    return sorted(_BUILDERS)
