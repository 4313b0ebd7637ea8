"""Time the compiled ARMA-GARCH recursions against the pure-Python fallback.

Usage: python3 benchmarks/bench_recursions.py [--n 5000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from vineinfer import _recursions_py

try:
    from vineinfer import _recursions as _compiled
except ImportError:  # extension not built
    _compiled = None


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    z = rng.standard_normal(args.n)
    pars = (0.01, 0.3, -0.1, 0.05, 0.1, 0.85)
    x, _ = _recursions_py.garch_simulate(z, *pars, 1.0)
    x = np.ascontiguousarray(x)

    backends = {"python": _recursions_py}
    if _compiled is not None:
        backends["cython"] = _compiled
    else:
        print("compiled extension unavailable; timing the Python fallback only")

    results = {}
    for name, mod in backends.items():
        for fn, arg in (("arma_garch_recursion", x), ("garch_simulate", z)):
            f = getattr(mod, fn)
            t = min(timeit.repeat(lambda: f(arg, *pars, 1.0), number=1, repeat=args.repeat))
            results[(name, fn)] = (t, f(arg, *pars, 1.0))

    print(f"n = {args.n}")
    print(f"{'function':<24}{'backend':<10}{'seconds':>12}{'speed-up':>10}")
    for fn in ("arma_garch_recursion", "garch_simulate"):
        base = results[("python", fn)][0]
        for name in backends:
            t = results[(name, fn)][0]
            print(f"{fn:<24}{name:<10}{t:>12.6f}{base / t:>9.1f}x")
        if "cython" in backends:
            a, b = results[("python", fn)][1], results[("cython", fn)][1]
            diff = max(np.max(np.abs(p - q)) for p, q in zip(a, b))
            print(f"{'':<24}max |python - cython| = {diff:.2e}")


if __name__ == "__main__":
    main()
