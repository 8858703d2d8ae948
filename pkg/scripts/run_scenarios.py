"""Run every canned scenario at its pinned seed and print the per-check table."""

import argparse
import json
from pathlib import Path

from ctmc_lab.scenarios import SCENARIOS, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("names", nargs="*", default=sorted(SCENARIOS))
    ap.add_argument("--out", type=Path, default=None, help="write <name>.json reports here")
    args = ap.parse_args()
    bad = 0
    for name in args.names:
        rep = run_scenario(name)
        bad += not rep["pass"]
        print(f"{name:28s} seed={rep['seed']}  {'PASS' if rep['pass'] else 'FAIL'}")
        for k, c in rep["checks"].items():
            print(f"    {k:34s} {'ok ' if c['pass'] else 'BAD'} {c['value']!r:>28}  target {c['target']}")
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{name}.json").write_text(json.dumps(rep, indent=2, sort_keys=True))
    raise SystemExit(1 if bad else 0)


if __name__ == "__main__":
    main()
