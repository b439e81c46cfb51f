"""Scan the nodal not-locally-free family and tabulate U+ / U- against rho.

    python scripts/nodal_branch_scan.py --num 12 --den 4
"""
import argparse
from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq

from spectralsheaf.grunbaum import NotLocallyFree, poly_f
from spectralsheaf.scalars import fmt_scalar
from spectralsheaf.spectral import classify_sheaf, nodal_branch


@dataclass
class ScanConfig:
    num: int = 6
    den: int = 3
    full: bool = False  # also run the gcd cross-check through classify_sheaf


def rhos(cfg: ScanConfig):
    seen = set()
    for q in range(1, cfg.den + 1):
        for p in range(1, cfg.num + 1):
            r = Fraction(p, q)
            if r not in seen:
                seen.add(r)
                yield mpq(r.numerator, r.denominator)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--num", type=int, default=ScanConfig.num)
    ap.add_argument("--den", type=int, default=ScanConfig.den)
    ap.add_argument("--full", action="store_true")
    cfg = ScanConfig(**vars(ap.parse_args()))
    flips = 0
    print(f"{'rho':>8} {'label(rho)':>10} {'label(-rho)':>11}")
    for r in sorted(rhos(cfg)):
        K12 = -r * r / 6
        a, b = nodal_branch(r, K12).label, nodal_branch(-r, K12).label
        if cfg.full:
            assert classify_sheaf(NotLocallyFree(r, poly_f([1]))).tag == a
        flips += a != b
        print(f"{fmt_scalar(r):>8} {a:>10} {b:>11}")
    total = len(list(rhos(cfg)))
    print(f"flip holds for {flips}/{total} values")


if __name__ == "__main__":
    main()
