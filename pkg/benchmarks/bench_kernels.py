#!/usr/bin/env python3
"""Benchmark the compiled axiom kernels against their plain-Python twins.

Each kernel is one function compiled with numba when available; the
fallback path (what ``PRVOTE_NO_NUMBA=1`` selects) is the same function
object uncompiled, reachable here through ``.py_func``.  The table reports
per-call milliseconds on experiment-scale inputs.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--fallback-repeat N]
"""

import argparse
import time

import numpy as np

from prvote import kernels
from prvote.core import Instance
from prvote.sampling import CultureSpec, sample_committee, sample_profile


def _time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best * 1000


def build_cases():
    approval = Instance(
        sample_profile(
            CultureSpec("resampling", n=100, m=50, seed=7, p=0.4, phi=0.4)
        ),
        10,
    )
    ranked = Instance(
        sample_profile(CultureSpec("mallows", n=100, m=50, seed=7, phi=0.8)), 10
    )
    small_weak = Instance(
        sample_profile(CultureSpec("mallows", n=30, m=14, seed=7, phi=0.6)), 5
    )
    fa = kernels.FastInstance(approval)
    fr = kernels.FastInstance(ranked)
    fw = kernels.FastInstance(small_weak)
    committee = sample_committee(approval, 3)
    rcommittee = sample_committee(ranked, 3)
    wcommittee = sample_committee(small_weak, 3)

    in_a, wlist_a = fa._committee(committee)
    in_r, wlist_r = fr._committee(rcommittee)
    _in_w, wlist_w = fw._committee(wcommittee)
    budget = lambda: np.array([50_000_000], dtype=np.int64)
    chosen = lambda k: np.zeros(k + 1, dtype=np.int64)
    return [
        (
            "ejr_plus (n=100 m=50 k=10)",
            kernels._ejr_plus_impl,
            (fa.approves, fa._sat(wlist_a), in_a, fa.n, fa.m, fa.k),
        ),
        (
            "pjr_plus (n=100 m=50 k=10)",
            kernels._pjr_plus_impl,
            (fa.approves, fa._wmask(wlist_a), in_a, len(wlist_a), fa.n, fa.m, fa.k),
        ),
        (
            "ejr search (n=100 m=50 k=10)",
            kernels._ejr_impl,
            (
                fa.cand_words,
                fa._sat(wlist_a),
                fa.n,
                fa.m,
                fa.k,
                fa.words,
                budget(),
                chosen(fa.k),
            ),
        ),
        (
            "pjr search (n=100 m=50 k=10)",
            kernels._pjr_impl,
            (
                fa.cand_words,
                fa._wmask(wlist_a),
                len(wlist_a),
                fa.n,
                fa.m,
                fa.k,
                fa.words,
                budget(),
                chosen(fa.k),
            ),
        ),
        (
            "psc (n=100 m=50 k=10)",
            kernels._psc_impl,
            (
                fr.rank_mat,
                np.bitwise_or.reduce(
                    (kernels.U1 << np.array(sorted(rcommittee), dtype=np.uint64))
                ),
                fr.n,
                fr.m,
                fr.k,
            ),
        ),
        (
            "rank_ejr_plus (n=100 m=50 k=10)",
            kernels._rank_ejr_plus_impl,
            (fr.rank_mat, in_r, fr.n, fr.m, fr.k, fr.max_rank),
        ),
        (
            "rank_pjr_plus (n=100 m=50 k=10)",
            kernels._rank_pjr_plus_impl,
            (fr.rank_mat, in_r, wlist_r, fr.n, fr.m, fr.k, fr.max_rank),
        ),
        (
            "solid-coalition scan (n=30 m=14)",
            kernels._gpsc_impl,
            (fw.rank_mat, wlist_w, fw.n, fw.m, fw.k, True),
        ),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument(
        "--fallback-repeat",
        type=int,
        default=1,
        help="repetitions for the slow uncompiled path",
    )
    args = parser.parse_args()

    if not kernels.NUMBA_ENABLED:
        raise SystemExit(
            "numba is disabled (PRVOTE_NO_NUMBA?); the comparison needs the"
            " compiled path"
        )

    print(f"{'kernel':36s} {'numba ms':>10s} {'python ms':>12s} {'speedup':>9s}")
    for name, fn, call_args in build_cases():
        fn(*call_args)  # trigger compilation outside the timer
        jit_ms = _time(fn, call_args, args.repeat)
        py_ms = _time(fn.py_func, call_args, args.fallback_repeat)
        print(f"{name:36s} {jit_ms:10.3f} {py_ms:12.1f} {py_ms / jit_ms:8.0f}x")


if __name__ == "__main__":
    main()
