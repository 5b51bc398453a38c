"""Grid-convergence tables for the exact-solution cases."""
import argparse
import json
from pathlib import Path

from caplap.persist import sanitize
from caplap.scenarios import convergence_table

CASES = [("manufactured_plap", {"p": 1.5}), ("manufactured_plap", {"p": 2.0}),
         ("manufactured_plap", {"p": 3.0}), ("heat_mode", {}), ("affine_steady", {})]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--json", type=Path, help="also write all tables here")
    args = ap.parse_args()
    out = []
    for case, params in CASES:
        rows = convergence_table(case, args.N, **params)
        label = case + "".join(f" {k}={v:g}" for k, v in params.items())
        print(label)
        for r in rows:
            order = "" if r["order"] is None else f"{r['order']:.3f}"
            print(f"  N={r['N']:<5d} error={r['error']:.3e}  order={order}")
        out.append({"case": case, "params": params, "rows": rows})
    if args.json:
        args.json.write_text(json.dumps(sanitize(out), indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
