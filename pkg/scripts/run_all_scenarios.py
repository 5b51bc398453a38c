"""Run every registered scenario into runs/<name>/ and print a status table."""
import argparse
import time
from pathlib import Path

from caplap.scenarios import list_scenarios, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("runs"))
    args = ap.parse_args()
    worst = 0
    for name, claim in list_scenarios():
        t0 = time.perf_counter()
        status, outcome = run_scenario(name, out_dir=args.out / name)
        dt = time.perf_counter() - t0
        print(f"{name:20s} exit={status} {dt:6.2f}s  {claim}")
        if outcome is not None:
            for r in outcome.reports:
                print(f"    {r.name:28s} {r.status:9s} margin={r.margin:.3g}")
        worst = max(worst, status)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
