"""Sift a key from GHZ states shared across a simulated grid.

    python3 demos/qkd_from_network.py --size 20 --p 0.8 --trials 2000
"""
import argparse
from collections import Counter

from ghznet import ProtocolConfig, build_square_grid
from ghznet.cli import simulated_shares
from ghznet.qkd import key_to_hex, run_qkd


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=20)
    ap.add_argument("--p", type=float, default=0.8)
    ap.add_argument("--q", type=float, default=1.0)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    L = args.size
    g = build_square_grid(L, L, (L // 4, L // 2), (3 * L // 4, L // 2))
    shares = simulated_shares(g, ProtocolConfig(n=4, p=args.p, q=args.q, trials=args.trials, seed=args.seed))
    res = run_qkd(shares, args.seed)
    print(f"{len(shares)} shared GHZ states in {args.trials} cycles")
    print("most common (m, l) splits:", Counter((s.m, s.l) for s in shares).most_common(5))
    print(f"sift rate {res.sift_rate:.3f}, {len(res.key_a)} key bits, mismatches {res.mismatches}")
    print("key prefix:", key_to_hex(res.key_a)[:32])


if __name__ == "__main__":
    main()
