"""``ctmc-lab`` command line: run a JSON experiment config or a canned scenario.

Exit codes: 0 ok, 1 error, 2 a certificate was refuted while ``assert_certified`` was set.
The output directory defaults to ``$CTMC_LAB_OUT`` (else ``./ctmc_lab_out``).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .chain import _jsonable
from .config import (SCHEMA_VERSION, ConfigError, build_field, build_model, build_modulator, build_stateset,
                     build_window, validate)
from .estimators import estimate_moment, estimate_tail_exponent, moment_growth, moment_stderr
from .lyapunov import CHECKERS
from .scenarios import SCENARIOS, run_scenario
from .simulate import Caps, birth_death_passage_exact, classify_explosion, simulate_batch
from .solver import Truncation, solve_mean_explosion, solve_mean_hitting, solve_moment_hitting, window_growth

OUT_ENV = "CTMC_LAB_OUT"
EXIT_OK, EXIT_ERROR, EXIT_REFUTED = 0, 1, 2


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "ctmc_lab_out"))


def versions() -> dict:
    return {"ctmc_lab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _state_arg(model, x):
    return model.states(x)[0] if model.dim > 1 else int(model.states(x)[0, 0])


def _run_check(model, spec: dict) -> tuple[dict, int]:
    crit = spec["criterion"]
    w = build_window(model, spec["window"])
    f = build_field(spec["field"])
    k = dict(spec.get("constants", {}))
    g = build_modulator(spec["modulator"]) if "modulator" in spec else None
    fn = CHECKERS[crit]
    if crit == "moment_upper":
        cert = fn(model, f, k["p"], k["a"], k["c"], w)
    elif crit == "moment_lower":
        cert = fn(model, f, build_field(spec["g_field"]), k["p"], k["r"], k["a"], k["b"], k["c1"], k["c2"], w)
    elif crit == "foster":
        cert = fn(model, f, spec["F"], k["eps"], w)
    elif crit == "explosion_uniform":
        cert = fn(model, f, k["eps"], w)
    elif crit in ("explosion_modulated", "non_explosion"):
        cert = fn(model, f, g, w)
    elif crit == "conditional_explosion":
        cert = fn(model, f, build_stateset(model, spec["A"]), k["eps"], spec["x0"], w)
    elif crit == "implosion":
        cert = fn(model, f, k["a"], k["eps"], w)
    elif crit == "non_implosion":
        cert = fn(model, f, k["a"], k["eps"], k["c"], k["r"], w)
    else:
        cert = fn(model, f, g, k["a"], w)
    code = EXIT_REFUTED if spec.get("assert_certified") and not cert.certified else EXIT_OK
    return {"certificate": cert.to_dict()}, code


def _doubling_windows(model, wspec: dict, n: int):
    if "states" in wspec:
        raise ConfigError("window growth needs a lo/hi window")
    lo, hi = wspec["lo"], wspec["hi"]
    out = []
    for i in range(n + 1):
        if model.dim == 1:
            out.append(build_window(model, {"lo": lo, "hi": lo + (hi - lo + 1) * 2**i - 1}))
        else:
            out.append(build_window(model, {"lo": lo, "hi": [a + (b - a + 1) * 2**i - 1 for a, b in zip(lo, hi)]}))
    return out


def _run_solve(model, spec: dict) -> dict:
    w = build_window(model, spec["window"])
    A = build_stateset(model, spec.get("target"))
    tr = Truncation(w, A, spec.get("policy", "absorbing_zero"), spec.get("penalty"))
    kind = spec["kind"]
    probes = spec.get("probes")
    growth = None
    if spec.get("doublings"):
        ws = _doubling_windows(model, spec["window"], spec["doublings"])
        pr = probes or [_state_arg(model, w.states[min(1, len(w) - 1)])]
        growth = window_growth(model, ws, pr, A, kind=kind, k=spec.get("k", 1))
    if kind == "mean_hitting":
        r = solve_mean_hitting(model, tr, bracket=spec.get("bracket", False))
    elif kind == "moment_hitting":
        r = solve_moment_hitting(model, tr, spec.get("k", 1))
    else:
        r = solve_mean_explosion(model, tr)
    out = r.to_dict(probes)
    if growth is not None:
        out["window_growth"] = growth
    return {"solve": out}


def _run_simulate(model, spec: dict, seed: int, out_dir: Path) -> dict:
    caps = Caps(spec["caps"].get("max_jumps", 10**6), spec["caps"].get("max_time", float("inf")),
                build_stateset(model, spec.get("target")))
    b = simulate_batch(model, spec["x0"], caps, seed, spec["runs"], workers=spec.get("workers", 1))
    res = {"summary": b.summary(), "meta": b.meta}
    if "classify" in spec:
        res["explosion"] = classify_explosion(b, **spec["classify"]).to_dict()
    if spec.get("csv"):
        path = out_dir / "trajectories.csv"
        b.to_csv(path)
        res["csv"] = path.name
    return {"simulate": res}


def _run_estimate(model, spec: dict, seed: int) -> dict:
    A = build_stateset(model, spec["target"])
    cap = spec["caps"].get("max_time", float("inf"))
    if spec.get("sampler", "engine") == "exact_birth_death":
        if not (A.finite and A.members.shape[0] == 1 and int(A.members[0, 0]) == 0):
            raise ConfigError("exact_birth_death sampler supports target {0} only")
        smp = birth_death_passage_exact(model, spec["x0"], spec["runs"], seed, cap).censored_sample()
        sampler = "exact_birth_death (numpy Philox)"
    else:
        caps = Caps(spec["caps"].get("max_jumps", 10**6), cap, A)
        smp = simulate_batch(model, spec["x0"], caps, seed, spec["runs"], workers=spec.get("workers", 1)).censored_sample()
        sampler = "engine"
    res = {"sampler": sampler, "runs": len(smp), "censored_mass": smp.censored_mass, "moments": {}}
    for q in spec.get("q", [1.0]):
        est, lower = estimate_moment(smp, q)
        res["moments"][f"{q:g}"] = {"estimate": est, "stderr": moment_stderr(smp, q), "lower_bound": lower}
        if spec.get("growth_caps"):
            res["moments"][f"{q:g}"]["growth"] = moment_growth(smp, q, spec["growth_caps"])
    if "tail" in spec or "p0" in spec:
        t = spec.get("tail", {})
        rep = estimate_tail_exponent(smp, t.get("lo", 0.90), t.get("hi", 0.999), p0=spec.get("p0"))
        res["tail"] = rep.to_dict()
    return {"estimate": res}


def run_config(cfg: dict, out_dir: Path | None = None) -> tuple[dict, int]:
    """Validate and execute; returns ``(report, exit_code)``. Raises on invalid configs."""
    cfg = validate(cfg)
    seed = int(cfg.get("seed", 0))
    out = Path(cfg.get("output", {}).get("dir", out_dir or default_out_dir()))
    out.mkdir(parents=True, exist_ok=True)
    task = cfg["task"]
    code = EXIT_OK
    report = {"schema_version": SCHEMA_VERSION, "task": task, "seed": seed, "versions": versions(),
              "config": cfg}
    if task == "scenario":
        res = run_scenario(cfg["scenario"]["name"], cfg.get("seed"))
        report["result"] = res
        code = EXIT_OK if res["pass"] else EXIT_REFUTED
    else:
        model, extras = build_model(cfg["model"])
        report["model"] = model.descriptor()
        if "geometry" in extras:
            report["geometry"] = extras["geometry"].descriptor()
        if task == "check":
            res, code = _run_check(model, cfg["check"])
        elif task == "solve":
            res = _run_solve(model, cfg["solve"])
        elif task == "simulate":
            res = _run_simulate(model, cfg["simulate"], seed, out)
        else:
            res = _run_estimate(model, cfg["estimate"], seed)
        report["result"] = res
    return _jsonable(report), code


def write_report(report: dict, out: Path, name: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    meta = {"written_at": _dt.datetime.now(_dt.timezone.utc).isoformat(), "host": platform.node(),
            "report": name}
    (out / (name + ".meta.json")).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return path


def _cmd_run(args) -> int:
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        report, code = run_config(cfg, Path(args.out) if args.out else None)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - report any failure as exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = Path(cfg.get("output", {}).get("dir") or args.out or default_out_dir())
    path = write_report(report, out, cfg.get("output", {}).get("report", "report.json"))
    print(f"{report['task']}: wrote {path}")
    if code == EXIT_REFUTED:
        print("certificate not certified (assert_certified)", file=sys.stderr)
    return code


def _cmd_scenario(args) -> int:
    if args.name not in SCENARIOS:
        print(f"error: unknown scenario {args.name!r}. Available:", file=sys.stderr)
        for n in sorted(SCENARIOS):
            print(f"  {n}", file=sys.stderr)
        return EXIT_ERROR
    try:
        res = run_scenario(args.name, args.seed)
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = _jsonable({"schema_version": SCHEMA_VERSION, "task": "scenario", "versions": versions(),
                        "result": res})
    out = Path(args.out) if args.out else default_out_dir()
    path = write_report(report, out, f"{args.name}.json")
    for k, c in res["checks"].items():
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {k}: {c['value']} (target {c['target']})")
    print(f"{args.name}: {'PASS' if res['pass'] else 'FAIL'} -> {path}")
    return EXIT_OK if res["pass"] else EXIT_REFUTED


def _cmd_list(args) -> int:
    for n in sorted(SCENARIOS):
        doc = (SCENARIOS[n].__doc__ or "").strip().splitlines()
        print(n if not doc else f"{n}  {doc[0]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ctmc-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run an experiment config (JSON)")
    r.add_argument("config")
    r.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV})")
    r.set_defaults(func=_cmd_run)
    s = sub.add_parser("scenario", help="run a canned scenario")
    s.add_argument("name")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_scenario)
    ls = sub.add_parser("list-scenarios", help="list scenario names")
    ls.set_defaults(func=_cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
