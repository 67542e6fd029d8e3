"""Compare the numba and numpy twins of the hot kernels.

Run as:  python benchmarks/bench_kernels.py
The numba column reads n/a when the jit backend is unavailable (numba not
installed, or EBK_NO_NUMBA set).
"""
import time

import numpy as np

from ebk import kernels
from ebk.profiles import FAMILY_PNORM

K_MAX_ENUM = 1500
K_MAX_RATIOS = 300
BISECT_TARGETS = 200_000
REPEAT = 3


def best_of(fn):
    times = []
    for _ in range(REPEAT):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    yield (f"primitive_directions(2, {K_MAX_ENUM})",
           lambda force: kernels.primitive_directions(2, K_MAX_ENUM,
                                                      force=force))

    targets = np.linspace(1e-3, np.pi / 2 - 1e-3, BISECT_TARGETS)
    params = np.array([4.0])
    yield (f"bisect_family(pnorm s=4, {BISECT_TARGETS:,} targets)",
           lambda force: kernels.bisect_family(FAMILY_PNORM, params,
                                               0.0, np.pi / 2, targets,
                                               force=force))

    K = kernels.primitive_directions(2, K_MAX_RATIOS)
    a = np.linalg.norm(K, axis=1)
    W = np.stack(np.meshgrid(np.arange(9.0), np.arange(9.0)),
                 axis=-1).reshape(-1, 2) + 0.5
    yield (f"extremal_ratios({len(K):,} entries x {len(W)} points)",
           lambda force: kernels.extremal_ratios(K, a, W, True, force=force))


def main() -> None:
    kernels.warmup()
    print(f"backend: {kernels.active_backend()}")
    print(f"{'kernel':52s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, fn in cases():
        t_np = best_of(lambda: fn("numpy"))
        if kernels.HAS_NUMBA:
            t_nb = best_of(lambda: fn("numba"))
            print(f"{name:52s} {t_np:9.4f}s {t_nb:9.4f}s {t_np / t_nb:7.1f}x")
        else:
            print(f"{name:52s} {t_np:9.4f}s {'n/a':>10s} {'n/a':>8s}")


if __name__ == "__main__":
    main()
