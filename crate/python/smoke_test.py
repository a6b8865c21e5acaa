#!/usr/bin/env python3
"""Smoke test for the unitfrac_py extension module.

Builds nothing itself; expects the cdylib to exist already:

    cargo build -p unitfrac-py --release
    python3 python/smoke_test.py

The script copies the cdylib next to itself under the importable name
`unitfrac_py.so` and exercises the main types and operations end to end.
"""

import fractions
import math
import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent


def locate_cdylib() -> pathlib.Path:
    for profile in ("release", "debug"):
        cand = ROOT / "target" / profile / "libunitfrac_py.so"
        if cand.exists():
            return cand
    sys.exit("cdylib not found; run `cargo build -p unitfrac-py --release` first")


def main() -> None:
    src = locate_cdylib()
    dst = HERE / "unitfrac_py.so"
    if not dst.exists() or src.stat().st_mtime > dst.stat().st_mtime:
        shutil.copy2(src, dst)
    sys.path.insert(0, str(HERE))

    import unitfrac_py as uf

    # rational helpers
    assert uf.harmonic_sum(2, 6) == "29/20"
    m = uf.find_m("1/2", 10)
    lo = fractions.Fraction(uf.harmonic_sum(10, m))
    assert lo >= fractions.Fraction(1, 2) > lo - fractions.Fraction(1, m)

    # sieve-backed operations
    sieve = uf.FactorSieve(200_000)
    assert sieve.factorize(360) == [(2, 3), (3, 2), (5, 1)]
    assert sieve.is_smooth(360, 9)
    assert not sieve.is_smooth(360, 7)
    assert sieve.psi_prime(1000, 10) == len(sieve.smooth_members(1, 1000, 10))

    # decomposition round-trip
    d = sieve.decompose("1/2", 10)
    terms = d["terms"]
    assert sum(fractions.Fraction(1, t) for t in terms) == fractions.Fraction(1, 2)
    assert terms == sorted(set(terms)) and terms[0] >= 10
    rep = uf.verify("1/2", 10, terms)
    assert rep["ok"], rep
    bad = uf.verify("1/2", 10, [2])
    assert not bad["ok"] and not bad["in_range"]

    tight = sieve.tightness(terms, 2.0)
    assert tight["passes"], tight

    # exact subset solving and counting agree
    sol = sieve.solve_subset(12, 144, 12, "1/12")
    assert sum(fractions.Fraction(1, t) for t in sol) == fractions.Fraction(1, 12)
    cnt = sieve.count_representations(12, 144, 12, "1/12")
    assert cnt["count"] >= 1 and cnt["method"] == "exact-convolution"

    # density estimates
    assert abs(uf.rho(1.0) - 1.0) < 1e-12
    assert abs(uf.rho(2.0) - (1.0 - math.log(2.0))) < 1e-6
    exact, main = sieve.lemma2(100_000, 2.0, 1000)
    assert 0.0 < main < exact < 1.0, (exact, main)

    case = sieve.lemma4(5000, 0.3)
    assert case["outcome"] in ("case1", "case2"), case

    # minimal-ratio brute force recovers the classic 1 = 1/2 + 1/3 + 1/6
    mr = uf.min_ratio("1", 2, 8)
    assert mr["witness"] == [2, 3, 6]
    assert abs(mr["ratio"] - 3.0) < 1e-12

    print(
        f"smoke test passed: {len(terms)} terms for 1/2 from N=10; "
        f"count(1/12 over 12-smooth (12,144]) = {cnt['count']}"
    )


if __name__ == "__main__":
    main()
