"""Convergence of sum_n (2n+1) lambda_n(h)^2 to its limit h/2.

Prints, per h, the final partial sum and the order at which the relative
deficit first drops below each tolerance.
"""

import argparse

import numpy as np

from cryo_transport.spectral import trace_partial_sums


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, nargs="+", default=[0.1, 0.25, 0.5, 1.0])
    ap.add_argument("--n-max", type=int, default=10_000)
    args = ap.parse_args()
    tols = (1e-2, 1e-3, 1e-4)
    print("h,limit,final_sum," + ",".join(f"n_at_{t:g}" for t in tols))
    for h in args.h:
        s = trace_partial_sums(h, args.n_max)
        deficit = (h / 2 - s) / (h / 2)
        hits = []
        for t in tols:
            idx = np.nonzero(deficit < t)[0]
            hits.append(str(int(idx[0]) + 1) if idx.size else "")
        print(f"{h},{h / 2:.17g},{s[-1]:.17g}," + ",".join(hits))


if __name__ == "__main__":
    main()
