"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from qkr import kernels


def cases(rng):
    src = rng.normal(size=256) + 1j * rng.normal(size=256)
    coef = rng.normal(size=2 * 42 + 1) + 1j * rng.normal(size=2 * 42 + 1)
    return {
        "bessel_jn_array(z=200)": lambda k: k.bessel_jn_array(200.0, 240),
        "banded_apply(N=256, band=42)": lambda k: k.banded_apply(src, coef),
        "orbit(n=10^5)": lambda k: k.orbit(0.3, 1.7, 5.0, 100_000),
        "tangent_orbit(n=10^5)": lambda k: k.tangent_orbit(0.3, 1.7, 1.0, 0.0, 5.0, 100_000),
        "lyapunov_log_growth(n=5000)": lambda k: k.lyapunov_log_growth(0.3, 1.7, 5.0, 5000, 10),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = {name: kernels.get_backend(name) for name in kernels.available_backends()}
    if len(backends) < 2:
        print("compiled kernels not built; only the Python fallback is available")
    print(f"{'kernel':<32}" + "".join(f"{name:>14}" for name in backends) + f"{'speed-up':>12}")
    for label, fn in cases(np.random.default_rng(0)).items():
        times = {}
        for name, mod in backends.items():
            fn(mod)
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        ratio = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<32}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times.values()) + f"{ratio:>11.1f}x")


if __name__ == "__main__":
    main()
