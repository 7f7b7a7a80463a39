"""Compare the numba edit-distance kernel against the pure-numpy fallback.

Run: python3 scripts/benchmark_editdist.py
"""

import random
import time

from todkit import editdist


def bench(fn, pairs, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for a, b in pairs:
            fn(a, b)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = random.Random(0)
    alphabet = "abcdefghij "
    pairs = [
        (
            "".join(rng.choice(alphabet) for _ in range(rng.randrange(20, 200))),
            "".join(rng.choice(alphabet) for _ in range(rng.randrange(20, 200))),
        )
        for _ in range(500)
    ]

    # warm up (numba compilation happens on first call)
    if not editdist.USE_NUMBA:
        raise SystemExit("numba path disabled (TODKIT_NO_NUMBA); nothing to compare")
    editdist._levenshtein_numba(editdist._encode("warm"), editdist._encode("up"))
    for a, b in pairs[:5]:
        editdist._levenshtein_numpy(editdist._encode(a), editdist._encode(b))

    t_numba = bench(lambda a, b: editdist._levenshtein_numba(editdist._encode(a), editdist._encode(b)), pairs)
    t_numpy = bench(lambda a, b: editdist._levenshtein_numpy(editdist._encode(a), editdist._encode(b)), pairs)

    mismatches = sum(
        editdist._levenshtein_numba(editdist._encode(a), editdist._encode(b))
        != editdist._levenshtein_numpy(editdist._encode(a), editdist._encode(b))
        for a, b in pairs
    )
    print(f"pairs: {len(pairs)}   mismatches: {mismatches}")
    print(f"numba : {t_numba:.4f} s  ({len(pairs) / t_numba:,.0f} pairs/s)")
    print(f"numpy : {t_numpy:.4f} s  ({len(pairs) / t_numpy:,.0f} pairs/s)")
    print(f"speedup: {t_numpy / t_numba:.1f}x")


if __name__ == "__main__":
    main()
