"""Time the numba kernels against their numpy counterparts.

Both versions are imported in the same process (the environment flag only
changes which one the public wrappers call), warmed up once, then timed with
``timeit``; the best of ``--repeat`` runs is reported.

Example::

    python3 benchmarks/bench_kernels.py --sizes 16 64 200
"""
import argparse
import sys
import timeit

import numpy as np

from weakcap import _accel
from weakcap.channels import AwgnChannel, ma1_covariance
from weakcap.numkit import _kernels as K
from weakcap.oracle import _ba_nb, _ba_np, discretize


def cases(n, ba_m):
    a = ma1_covariance(0.3, n).matrix.copy()
    L = np.linalg.cholesky(a)
    diag = np.full(n, 1.25)
    off = np.full(n - 1, -0.5)
    b = np.ones((n, 1))
    dc = discretize(AwgnChannel(1.0), np.linspace(-1.0, 1.0, ba_m), K=800)
    W = dc.transition
    h = (W * np.log(np.where(W > 0, W, 1.0))).sum(axis=1)
    r0 = np.full(ba_m, 1.0 / ba_m)
    hist = np.empty(200_001)
    return {
        "jacobi eigen": lambda k: k["jacobi_eigen"](a.copy(), 1e-12, 100),
        "cholesky": lambda k: k["cholesky"](a.copy()),
        "cholesky inverse": lambda k: k["cholesky_inverse"](L),
        "tridiagonal solve": lambda k: k["tridiag_ldl_solve"](diag, off, b),
        f"blahut-arimoto m={ba_m} K=800": lambda k: k["ba"](W, h, r0.copy(), 1e-7, 200_000, hist),
    }


def kernels(suffix):
    table = {name: getattr(K, f"{name}_{suffix}")
             for name in ("jacobi_eigen", "cholesky", "cholesky_inverse", "tridiag_ldl_solve")}
    table["ba"] = _ba_nb if suffix == "nb" else _ba_np
    return table


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 200],
                    help="matrix orders to time (default: 16 64 200)")
    ap.add_argument("--ba-m", type=int, default=65, help="input grid size for Blahut-Arimoto")
    ap.add_argument("--repeat", type=int, default=5, help="timing repeats; the best is kept")
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba unavailable (or WEAKCAP_DISABLE_NUMBA set): only the numpy path exists", file=sys.stderr)
        return 1
    nb, npk = kernels("nb"), kernels("np")
    print(f"{'kernel':34s} {'n':>5s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speed-up':>9s}")
    for n in args.sizes:
        for label, call in cases(n, args.ba_m).items():
            if label.startswith("blahut") and n != args.sizes[0]:
                continue
            times = []
            for table in (nb, npk):
                call(table)  # warm-up / compile
                number = max(1, int(0.2 / max(timeit.timeit(lambda: call(table), number=1), 1e-6)))
                best = min(timeit.repeat(lambda: call(table), number=number, repeat=args.repeat)) / number
                times.append(best * 1e3)
            shown = "-" if label.startswith("blahut") else str(n)
            print(f"{label:34s} {shown:>5s} {times[0]:12.4f} {times[1]:12.4f} {times[1] / times[0]:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
