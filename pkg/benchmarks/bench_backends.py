"""Wall-clock comparison of the compiled and pure-Python kernels.

    python benchmarks/bench_backends.py [--n 200] [--repeats 3]

Runs the lasso initialization and one FPGD-SP sweep over all columns on
synthetic subspace data with each backend and prints median timings.
"""

import argparse
import statistics
import time

import numpy as np

from srsg import _backend
from srsg.data import Dataset, build_knn_graph, normalize_columns
from srsg.fpgd import SolverConfig, lipschitz_constant, run_fpgd
from srsg.l1graph import LassoConfig
from srsg.support import support_coefficients


def subspace_points(n, ambient=30, dim=3, k=3, seed=0):
    rng = np.random.default_rng(seed)
    per = -(-n // k)
    blocks = []
    for _ in range(k):
        basis, _ = np.linalg.qr(rng.standard_normal((ambient, dim)))
        blocks.append(basis @ rng.standard_normal((dim, per)))
    return normalize_columns(Dataset(points=np.hstack(blocks)[:, :n]))


def lasso_all(kernels, data, cfg):
    X = data.points
    gram = np.ascontiguousarray(X.T @ X)
    Z = np.zeros((data.n, data.n))
    for i in range(data.n):
        z = np.zeros(data.n)
        kernels.lasso_cd(gram, np.ascontiguousarray(gram[:, i]), i, cfg.lambda_l1, cfg.max_iters, cfg.kkt_tol, z)
        Z[:, i] = z
    return Z


def fpgd_sweep(kernels, data, Z, knn, lf):
    solver = SolverConfig(max_iters=200, stable_window=0)
    for i in range(data.n):
        c = support_coefficients(Z, knn, i)
        run_fpgd(Z[:, i].copy(), i, data, c, 0.1, solver, lipschitz=lf, kernels=kernels)


def timed(fn, repeats):
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args()

    data = subspace_points(args.n)
    knn = build_knn_graph(data, 5)
    lf = lipschitz_constant(data)
    cfg = LassoConfig()
    print(f"n={data.n} d={data.d} available={_backend.available()}")
    rows = []
    for name in _backend.available():
        kernels = _backend.load(name)
        Z = lasso_all(kernels, data, cfg)
        t_lasso = timed(lambda: lasso_all(kernels, data, cfg), args.repeats)
        t_fpgd = timed(lambda: fpgd_sweep(kernels, data, Z, knn, lf), args.repeats)
        rows.append((name, t_lasso, t_fpgd))
        print(f"{name:>9}  lasso {t_lasso:8.3f}s  fpgd sweep {t_fpgd:8.3f}s")
    if len(rows) == 2:
        (_, la, fa), (_, lb, fb) = rows
        print(f"speedup    lasso {lb / la:7.1f}x  fpgd sweep {fb / fa:7.1f}x")


if __name__ == "__main__":
    main()
