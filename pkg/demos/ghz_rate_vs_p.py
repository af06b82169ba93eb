"""Shared-GHZ rate against link probability for the 4-, 3- and 2-fusion rules.

    python3 demos/ghz_rate_vs_p.py --size 40 --trials 500
"""
import argparse

import numpy as np

from ghznet import ProtocolConfig, build_square_grid, estimate_rate
from ghznet.bounds import gcc_bound, max_flow_bound
from ghznet.percolation import newman_ziff_bond_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=40)
    ap.add_argument("--q", type=float, default=1.0)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    L = args.size
    g = build_square_grid(L, L, (1, 1), (L - 2, L - 2))
    p_grid = np.round(np.arange(0.3, 1.01, 0.1), 2)
    F = newman_ziff_bond_sweep(g, 50, args.seed, p_grid).mean("largest")
    print(f"{L}x{L} grid, consumers {g.distance} hops apart, q={args.q}")
    print(f"{'p':>5} {'4p':>7} {'F^2':>7} {'n=4':>14} {'n=3':>14} {'n=2':>14}")
    for p, f in zip(p_grid, F):
        cells = []
        for n in (4, 3, 2):
            est = estimate_rate(g, ProtocolConfig(n=n, p=p, q=args.q, trials=args.trials, seed=args.seed))
            cells.append(f"{est.mean:7.3f}+-{est.stderr:.3f}")
        print(f"{p:5.2f} {max_flow_bound(p):7.3f} {gcc_bound(f):7.3f} " + " ".join(cells))


if __name__ == "__main__":
    main()
