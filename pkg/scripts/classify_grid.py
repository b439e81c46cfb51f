"""Classify the generic family over a grid of (K11, K12) and write a JSON table.

The grid covers three slices: K10 = K14 = 0, the not-locally-free locus, and
random (K10, K14).  Each row records the curve kind, the class tag and the gcd
orders at the support.
"""
import argparse
import json
import random
import time
from dataclasses import asdict, dataclass

from gmpy2 import mpq

from spectralsheaf.errors import SpectralError
from spectralsheaf.grunbaum import Generic, poly_f
from spectralsheaf.scalars import fmt_scalar
from spectralsheaf.spectral import classify_sheaf


@dataclass
class GridConfig:
    values: tuple = (-2, -1, 1, 2, 3)
    f: tuple = (1, 1)
    seed: int = 0
    out: str = "classify_grid.json"


def params_for(slice_, K11, K12, rng):
    t = 3 * K12 + K11 * K11 / 2
    if slice_ == "interesting":
        return 0, K11, K12, 0
    if slice_ == "not-locally-free":
        return t * K11, K11, K12, -t * t
    return mpq(rng.randint(-5, 5)), K11, K12, mpq(rng.randint(-5, 5))


def run(cfg: GridConfig):
    rng = random.Random(cfg.seed)
    f = poly_f([mpq(c) for c in cfg.f])
    rows = []
    for slice_ in ("interesting", "not-locally-free", "random"):
        for a in cfg.values:
            for b in cfg.values:
                K = params_for(slice_, mpq(a), mpq(b), rng)
                t0 = time.perf_counter()
                row = {"slice": slice_, "K": [fmt_scalar(x) for x in K]}
                try:
                    cls = classify_sheaf(Generic(*K, f))
                    row.update(curve=cls.curve.kind, tag=cls.tag, gcd_orders=[e.gcd_order for e in cls.evidence])
                except SpectralError as e:
                    row.update(error=f"{type(e).__name__}: {e}")
                row["seconds"] = round(time.perf_counter() - t0, 3)
                rows.append(row)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=GridConfig.seed)
    ap.add_argument("--out", default=GridConfig.out)
    cfg = GridConfig(seed=ap.parse_args().seed, out=ap.parse_args().out)
    rows = run(cfg)
    with open(cfg.out, "w") as fh:
        json.dump({"config": asdict(cfg), "rows": rows}, fh, indent=2)
    tags = {}
    for r in rows:
        key = (r["slice"], r.get("tag", "error"))
        tags[key] = tags.get(key, 0) + 1
    for (s, t), n in sorted(tags.items()):
        print(f"{s:>17} {t:>14} {n:4d}")
    print(f"wrote {len(rows)} rows to {cfg.out}")


if __name__ == "__main__":
    main()
