"""How far the B_N compression of lambda(f) on Z^d sits below sup |symbol|.

For each random f (unit l^1 norm, support in B_3) prints the DFT lower bound,
the power-iteration value, a dense SVD of the same compression (when small
enough) and the gap, for a range of N.  The gap shrinks roughly like 1/N^2,
driven by the curvature of |F| at its maximum.
"""

import argparse

import numpy as np

from cqms_lab.algebra import random_element, weighted_l1
from cqms_lab.groups import FreeAbelian
from cqms_lab.operators import compress, compressed_norm_lower, dft_norm_oracle


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=1)
    parser.add_argument("--samples", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--radii", type=int, nargs="+", default=[16, 32, 64, 128])
    args = parser.parse_args()
    G = FreeAbelian(args.d)
    rng = np.random.default_rng(args.seed)
    print("sample N dft_lower power svd gap")
    for i in range(args.samples):
        f = random_element(G, 3, int(rng.integers(1, 7)), rng, complex_coeffs=True)
        f = f.scale(1.0 / float(weighted_l1(f, 0)))
        lo, _ = dft_norm_oracle(f)
        for N in args.radii:
            c = compressed_norm_lower(f, 0, N, tol=1e-12, max_iter=200_000).value
            op = compress(f, 0, N)
            svd = np.linalg.svd(op.matrix.toarray(), compute_uv=False)[0] if op.shape[1] <= 3000 else float("nan")
            print(f"{i} {N} {lo:.6f} {c:.6f} {svd:.6f} {lo - c:.2e}")


if __name__ == "__main__":
    main()
