"""Time the hot 2D stencil kernels: numpy reference vs numba twins.

The solver's inner loops (cell Laplacian, variable-viscosity stress
divergence, flux-form scalar advection, staggered vector advection)
exist twice with identical semantics. This script times both sets on
padded arrays of a few desk-scale grid sizes, checks that the outputs
agree bitwise, and prints the speedups. Run it from the repo root:

    python3 benchmarks/bench_stencils.py [--sizes 64x128,256x512] [--repeats 30]

Numba compilation happens once per kernel and is excluded from the
timings (a warmup call precedes the loop). Without numba installed the
script still runs and reports the numpy timings alone.
"""

import argparse
import time

import numpy as np

from aggflow import _stencils_numpy

try:
    from aggflow import _stencils_numba
except ImportError:
    _stencils_numba = None


def _padded(rng, nx, nz):
    return rng.standard_normal((nx + 4, nz + 4))


def _cases(rng, nx, nz, hx, hz):
    """Kernel name -> (callable args) for one grid size."""
    nu = 0.5 + 0.25 * rng.random((nx + 4, nz + 4))
    u = _padded(rng, nx + 1, nz)
    w = _padded(rng, nx, nz + 1)
    s = _padded(rng, nx, nz)
    return {
        "laplacian_cells_2d": (s, hx, hz),
        "stress_div_2d": (nu, u, w, hx, hz),
        "advect_scalar_2d": (u, w, s, hx, hz),
        "advect_vector_2d": (u, w, hx, hz),
    }


def _time(fn, args, repeats):
    fn(*args)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _agree(a, b):
    if isinstance(a, tuple):
        return all(_agree(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="64x128,128x256,256x512",
                    help="comma-separated nx x nz grid sizes")
    ap.add_argument("--repeats", type=int, default=30,
                    help="timing repetitions per kernel (best is kept)")
    args = ap.parse_args()

    sizes = []
    for tok in args.sizes.split(","):
        nx, _, nz = tok.strip().partition("x")
        sizes.append((int(nx), int(nz)))

    if _stencils_numba is None:
        print("numba not importable; timing the numpy kernels only")
    rng = np.random.default_rng(1234)
    header = f"{'kernel':<22}{'grid':>10}{'numpy ms':>12}"
    if _stencils_numba is not None:
        header += f"{'numba ms':>12}{'speedup':>10}"
    print(header)
    for nx, nz in sizes:
        hx, hz = 1.0 / nx, 2.0 / nz
        cases = _cases(rng, nx, nz, hx, hz)
        for name, call_args in cases.items():
            t_np = _time(getattr(_stencils_numpy, name), call_args,
                         args.repeats)
            line = f"{name:<22}{f'{nx}x{nz}':>10}{1e3 * t_np:>12.3f}"
            if _stencils_numba is not None:
                fn_nb = getattr(_stencils_numba, name)
                if not _agree(getattr(_stencils_numpy, name)(*call_args),
                              fn_nb(*call_args)):
                    raise SystemExit(
                        f"{name}: numba and numpy outputs differ at {nx}x{nz}")
                t_nb = _time(fn_nb, call_args, args.repeats)
                line += f"{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.2f}"
            print(line)


if __name__ == "__main__":
    main()
