"""Experiment configuration: JSON schema, validation and object builders."""

from __future__ import annotations

import copy

import jsonschema

from . import fields, models
from .chain import Model, StateSet, make_window, window_box, window_range
from .models import RateProfile
from .quadrature import modulator_from_descriptor

SCHEMA_VERSION = "1"

_num = {"type": "number"}
_int = {"type": "integer"}
_state = {"oneOf": [_int, {"type": "array", "items": _int, "minItems": 1}]}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


RATE_SCHEMA = _obj({
    "tag": {"enum": ["constant", "power", "logtower", "exponential", "table"]},
    "c": _num, "beta": _num, "k": _int, "l": _int, "kappa": _num, "base": _num, "x0": _num,
    "values": {"type": "array", "items": _num},
}, ["tag"])

MODEL_SCHEMA = _obj({
    "family": {"enum": ["pure_birth", "pure_death", "biased_walk", "srw_half_line", "lamperti", "srw",
                        "two_ray", "mock_tree", "quadrant"]},
    "params": _obj({
        "rate": RATE_SCHEMA, "rate_pos": RATE_SCHEMA, "rate_neg": RATE_SCHEMA,
        "p": _num, "k": _int, "C": _num, "regime": {"enum": ["recurrent", "transient"]}, "clamp": _num,
        "d": _int, "s1": _num, "s2": _num, "lam": _num,
        "m1": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
        "m2": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
        "pi": {"type": "array", "items": _num}, "pi_power": _num, "n_branch": _int,
        "K_power": _num, "l_branch": _int, "delta": _num, "c": _num, "root_rate": _num,
    }),
}, ["family"])

FIELD_SCHEMA = _obj({
    "kind": {"enum": fields.field_kinds()}, "a": _num, "b": _num, "coord": _int, "c": _num,
    "scale": _num, "base": _num, "floor_value": _num,
}, ["kind"])

MODULATOR_SCHEMA = _obj({
    "kind": {"enum": ["power", "constant", "affine", "exponential"]},
    "alpha": _num, "scale": _num, "c": _num, "a": _num, "b": _num, "rate": _num,
}, ["kind"])

WINDOW_SCHEMA = _obj({"lo": _state, "hi": _state, "states": {"type": "array", "items": _state}})

STATESET_SCHEMA = _obj({"states": {"type": "array", "items": _state}, "at_most": _int, "coord": _int})

CAPS_SCHEMA = _obj({"max_jumps": _int, "max_time": _num})

CHECK_SCHEMA = _obj({
    "criterion": {"enum": ["moment_upper", "moment_lower", "foster", "explosion_uniform",
                           "explosion_modulated", "conditional_explosion", "non_explosion", "implosion",
                           "non_implosion", "implosion_modulated"]},
    "field": FIELD_SCHEMA, "g_field": FIELD_SCHEMA, "modulator": MODULATOR_SCHEMA,
    "constants": _obj({k: _num for k in ("eps", "c", "c1", "c2", "p", "r", "a", "b")}),
    "F": {"type": "array", "items": _state}, "A": STATESET_SCHEMA, "x0": _state,
    "window": WINDOW_SCHEMA, "assert_certified": {"type": "boolean"},
}, ["criterion", "field", "window"])

SOLVE_SCHEMA = _obj({
    "kind": {"enum": ["mean_hitting", "moment_hitting", "mean_explosion"]},
    "window": WINDOW_SCHEMA, "target": STATESET_SCHEMA, "k": _int,
    "policy": {"enum": ["absorbing_zero", "absorbing_penalty"]}, "penalty": _num,
    "bracket": {"type": "boolean"}, "probes": {"type": "array", "items": _state},
    "doublings": _int,
}, ["kind", "window"])

SIMULATE_SCHEMA = _obj({
    "x0": _state, "runs": _int, "caps": CAPS_SCHEMA, "target": STATESET_SCHEMA,
    "classify": _obj({"theta_t": _num, "theta_h": _num}), "csv": {"type": "boolean"}, "workers": _int,
}, ["x0", "runs", "caps"])

ESTIMATE_SCHEMA = _obj({
    "x0": _state, "runs": _int, "caps": CAPS_SCHEMA, "target": STATESET_SCHEMA,
    "sampler": {"enum": ["engine", "exact_birth_death"]},
    "q": {"type": "array", "items": _num}, "tail": _obj({"lo": _num, "hi": _num}), "p0": _num,
    "growth_caps": {"type": "array", "items": _num}, "workers": _int,
}, ["x0", "runs", "caps", "target"])

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ctmc-lab experiment config",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "model": MODEL_SCHEMA,
        "task": {"enum": ["check", "solve", "simulate", "estimate", "scenario"]},
        "check": CHECK_SCHEMA, "solve": SOLVE_SCHEMA, "simulate": SIMULATE_SCHEMA,
        "estimate": ESTIMATE_SCHEMA,
        "scenario": _obj({"name": {"type": "string"}}, ["name"]),
        "seed": _int,
        "output": _obj({"dir": {"type": "string"}, "report": {"type": "string"}}),
    },
    "required": ["task"],
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"task": {"const": t}}}, "then": {"required": [t] + ([] if t == "scenario" else ["model"])}}
        for t in ("check", "solve", "simulate", "estimate", "scenario")
    ],
}


class ConfigError(ValueError):
    pass


def validate(cfg: dict) -> dict:
    """Validate against the schema; the message lists every offending location."""
    v = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errs = sorted(v.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errs:
        lines = []
        for e in errs:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            lines.append(f"{where}: {e.message}")
        raise ConfigError("invalid config:\n  " + "\n  ".join(lines))
    return copy.deepcopy(cfg)


def build_rate(d: dict | None, default: RateProfile | None = None) -> RateProfile:
    if d is None:
        if default is None:
            raise ConfigError("missing rate profile")
        return default
    d = dict(d)
    tag = d.pop("tag")
    if tag == "constant":
        return RateProfile.constant(d.get("c", 1.0))
    if tag == "power":
        return RateProfile.power(d.get("c", 1.0), d["beta"], d.get("x0", 1.0))
    if tag == "logtower":
        return RateProfile.logtower(d.get("c", 1.0), d["k"], d["l"], d.get("kappa", 0.0), d.get("x0"))
    if tag == "exponential":
        return RateProfile.exponential(d.get("c", 1.0), d.get("base", 2.0))
    return RateProfile.table(d["values"], d.get("c", 1.0))


def build_model(desc: dict):
    """Returns ``(model, extras)``; extras holds the quadrant geometry when relevant."""
    fam = desc["family"]
    p = desc.get("params", {})
    one = RateProfile.constant(1.0)
    rate = lambda: build_rate(p.get("rate"), one)  # noqa: E731
    if fam == "pure_birth":
        return models.make_pure_birth(rate()), {}
    if fam == "pure_death":
        return models.make_pure_death(rate()), {}
    if fam == "biased_walk":
        return models.make_biased_walk(p["p"], rate()), {}
    if fam == "srw_half_line":
        return models.make_srw_half_line(rate()), {}
    if fam == "lamperti":
        return models.make_lamperti(p["k"], p["C"], rate(), p.get("regime"), p.get("clamp", 1e-3)), {}
    if fam == "srw":
        return models.make_srw(p["d"], rate()), {}
    if fam == "two_ray":
        return models.make_two_ray(p["p"], build_rate(p.get("rate_pos"), one), build_rate(p.get("rate_neg"), one)), {}
    if fam == "mock_tree":
        if "pi" in p:
            pi = p["pi"]
        else:
            a = p.get("pi_power", 2.0)
            pi = lambda n: float(n) ** (-a)  # noqa: E731
        kp = p.get("K_power", 0.0)
        m = models.make_mock_tree(p["p"], pi, K=lambda n: float(n) ** kp, l=p.get("l_branch", 0),
                                  delta=p.get("delta", 1.0), n_branch=p.get("n_branch", 1000),
                                  c=p.get("c", 1.0), root_rate=p.get("root_rate", 1.0))
        return m, {}
    if fam == "quadrant":
        m, geom = models.make_quadrant(p["s1"], p["s2"], p["lam"], p["m1"], p["m2"], rate())
        return m, {"geometry": geom}
    raise ConfigError(f"unknown family {fam!r}")


def build_window(model: Model, d: dict):
    if "states" in d:
        return make_window(model, d["states"])
    lo, hi = d["lo"], d["hi"]
    if model.dim == 1:
        return window_range(model, lo, hi)
    return window_box(model, lo, hi)


def build_stateset(model: Model, d: dict | None) -> StateSet | None:
    if d is None:
        return None
    if "states" in d:
        return StateSet.of(d["states"], model.dim)
    if "at_most" in d:
        return StateSet.at_most(d["at_most"], d.get("coord", 0))
    raise ConfigError("state set needs 'states' or 'at_most'")


def build_field(d: dict):
    return fields.field_from_descriptor(d)


def build_modulator(d: dict):
    return modulator_from_descriptor(d)
