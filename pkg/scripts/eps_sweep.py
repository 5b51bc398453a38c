"""Peak gradient and eigenvalue along a sweep of the regularisation eps.

Shows the eps-uniform gradient bound on the disk and the eps^2 approach of
lambda_eps to its limit.
"""
import argparse

import numpy as np

from caplap.elliptic_eigen import eigen_pair
from caplap.field_ops import GridFunction
from caplap.geometry import RadialBall, build_grid
from caplap.parabolic import ProblemSpec, SolverConfig, evolve


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--q", type=float, default=1.0)
    ap.add_argument("--phi", type=float, default=0.5)
    ap.add_argument("--N", type=int, default=64)
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
    args = ap.parse_args()
    grid = build_grid(RadialBall(2, 1.0), args.N)
    u0 = GridFunction(grid, 0.25 * grid.nodes**2)
    print(f"{'eps':>8} {'max sup|Du|':>14} {'lambda_eps':>14}")
    for e in args.eps:
        spec = ProblemSpec(p=args.p, q=args.q, eps=e, phi_bdry=args.phi)
        _, mon = evolve(u0, spec, SolverConfig(dt=0.01, t_end=2.0))
        lam = eigen_pair(grid, spec).lambda_eps
        print(f"{e:8.0e} {np.max(mon.sup_grad):14.6f} {lam:14.6f}")


if __name__ == "__main__":
    main()
