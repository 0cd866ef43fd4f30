#!/usr/bin/env python3
"""Empirical noise growth of homomorphic NAND against the (N+1)^L budget.

Encrypts random leaves at the shipped classical parameters, folds NAND
trees of increasing depth, and prints the largest decoder input |sk . c_N|
seen per depth next to the q/4 decision boundary.

Usage: python scripts/fhe_noise_growth.py [--depth 3] [--trials 20]
"""

import argparse

import numpy as np

from deletia import configs, dualfhe as fhe
from deletia.zqcore import centered


def decoder_noise(keys, ct) -> int:
    q = keys.params.q
    last = ct.matrix.column(ct.matrix.cols - 1)
    v = centered(last.dot(keys.sk), q)
    # distance from the nearest codeword (0 or the centered top gadget power)
    k = ct.matrix.cols // (keys.params.m + 1)
    cw = abs(centered(2 ** (k - 1) % q, q))
    return min(abs(v), abs(abs(v) - cw))


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = configs.FHE_CLASSICAL
    rng = np.random.default_rng(args.seed)
    keys = fhe.fhe_keygen(params, rng)
    print(f"q = {params.q}, N = {params.ncols}, q/4 = {params.q // 4}")
    for depth in range(1, args.depth + 1):
        worst = 0
        wrong = 0
        for _ in range(args.trials):
            leaves = [int(v) for v in rng.integers(0, 2, size=1 << depth)]
            cts = [fhe.fhe_encrypt_c(keys, b, rng) for b in leaves]
            vals = list(leaves)
            while len(cts) > 1:
                cts = [fhe.fhe_eval_nand(cts[i], cts[i + 1])
                       for i in range(0, len(cts), 2)]
                vals = [1 - (vals[i] & vals[i + 1])
                        for i in range(0, len(vals), 2)]
            worst = max(worst, decoder_noise(keys, cts[0]))
            wrong += fhe.fhe_decrypt(keys, cts[0]) != vals[0]
        print(f"  depth {depth}: max decoder offset {worst:>10d}"
              f"   errors {wrong}/{args.trials}")


if __name__ == "__main__":
    main()
