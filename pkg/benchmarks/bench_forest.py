"""Compiled vs numpy tree kernels: fit and predict time on synthetic frames.

    python benchmarks/bench_forest.py [--trees 100] [--repeat 3]

Both backends must grow identical forests; the script checks that before
timing anything.
"""
import argparse
import time

import numpy as np

from causal_fl.forest import CATEGORICAL, ForestParams, backend, fit_xy

SIZES = [(100, 3), (300, 4), (1000, 6)]


def frame(n, p, seed=0):
    rng = np.random.default_rng(seed)
    cols = {f"x{j}": rng.normal(size=n).tolist() for j in range(p - 1)}
    cols["c"] = [str(v) for v in rng.integers(0, 5, n)]
    logit = np.asarray(cols["x0"]) + (np.asarray(cols["c"]) == "2")
    y = (rng.random(n) < 1 / (1 + np.exp(-2 * logit))).astype(float).tolist()
    return cols, y


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trees", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    params = ForestParams(n_trees=args.trees)
    kinds = {"c": CATEGORICAL}
    print(f"{'n':>6} {'p':>3} {'backend':>9} {'fit s':>8} {'predict s':>10}")
    speedups = []
    for n, p in SIZES:
        cols, y = frame(n, p)
        row = {}
        for name in ("python", "compiled"):
            backend.use(name)
            t_fit, model = timed(lambda: fit_xy(cols, y, params, seed=1, kinds=kinds), args.repeat)
            t_pred, pred = timed(lambda: model.predict_columns(cols), args.repeat)
            row[name] = (t_fit, t_pred, model.to_json(), pred)
            print(f"{n:>6} {p:>3} {name:>9} {t_fit:>8.3f} {t_pred:>10.4f}")
        assert row["python"][2] == row["compiled"][2], "backends grew different forests"
        assert np.array_equal(row["python"][3], row["compiled"][3])
        speedups.append(row["python"][0] / row["compiled"][0])
        print(f"{'':>6} {'':>3} {'speedup':>9} {speedups[-1]:>8.1f}x")
    print(f"identical forests on all sizes; median fit speedup {np.median(speedups):.1f}x")


if __name__ == "__main__":
    main()
