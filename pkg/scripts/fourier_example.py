"""Reconstruct the ten-breakpoint reference signal from 31 noisy Fourier coefficients.

Usage: python3 scripts/fourier_example.py [--sigma 1e-12] [--seed 0] [--s 15]
"""

import argparse

import numpy as np

from localdirac.fourier import REFERENCE_SIGNAL, add_noise, fourier_coefficients, reconstruct_signal


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma", type=float, default=1e-12)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--s", type=int, default=15)
    args = ap.parse_args()

    c = add_noise(fourier_coefficients(REFERENCE_SIGNAL, args.s), args.sigma, seed=args.seed)
    sig, diag = reconstruct_signal(c, REFERENCE_SIGNAL.r, truth=REFERENCE_SIGNAL)
    np.set_printoptions(precision=12, suppress=False)
    print("breakpoints:", sig.breakpoints)
    print("values:     ", sig.values)
    print("slopes:     ", sig.slopes)
    print(f"candidates {diag['n_candidates']}, selector gap {diag['selector_gap']:.2e}, "
          f"{diag['seconds']:.1f} s")
    for stage in ("errors_algebraic", "errors"):
        e = diag[stage]
        print(f"{stage:17s} t {e['t']:.3e}  f {e['f']:.3e}  f' {e['fprime']:.3e}")


if __name__ == "__main__":
    main()
