"""Fast proximal gradient descent with support projection (FPGD-SP).

Solves, for one column ``i``,

    min_{z : z_i = 0}  ||x_i - X z||^2 + gamma * sum_{t : c_t > 0} c_t 1[z_t != 0]

with the accelerated scheme

    m   = (1 - a_k) z + a_k v,                 a_k = 2 / (k + 1)
    z   = T(m - s grad f(m))                   (hard thresholding)
    v~  = v - lam_k grad f(m),                 lam_k = eta * k
    v   = P_A(v~),  A = (C & supp z) | ~C      (support projection)

where ``C = {t : c_t > 0}``. The step ``s`` is chosen below
``min(2 tau / G^2, 1 / L_f)`` so that the support of ``z`` restricted to
``C`` can only shrink. ``G`` bounds the gradient norm along the run; it
is estimated up front, monitored every iteration, and doubled on
violation (the run then restarts from ``z0``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _backend
from ._util import spectral_norm_sq
from .data import Dataset
from .errors import ParameterError

logger = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "SolverState",
    "ConvergenceTrace",
    "StepViolation",
    "prox_hard_threshold",
    "support_project",
    "gradient",
    "fpgd_step",
    "run_fpgd",
    "restricted_least_squares",
    "lipschitz_constant",
    "step_size_bounds",
    "initial_grad_bound",
    "stationarity_certificate",
]


class StepViolation(ParameterError):
    """The gradient norm exceeded the assumed bound ``G``."""

    def __init__(self, grad_norm, bound):
        super().__init__(f"gradient norm {grad_norm:.6g} exceeds bound {bound:.6g}")
        self.grad_norm = grad_norm
        self.bound = bound


@dataclass(frozen=True)
class SolverConfig:
    """Settings for :func:`run_fpgd`.

    ``step_s`` and ``grad_bound_G`` default to ``None``, meaning they are
    derived per column from the data (``s = safety * s_max``). ``step_eta``
    defaults to ``s / 2``. Setting ``stable_window = 0`` disables early
    stopping so the solver runs exactly ``max_iters`` iterations.
    """

    step_s: Optional[float] = None
    step_eta: Optional[float] = None
    max_iters: int = 1000
    safety: float = 0.9
    grad_bound_G: Optional[float] = None
    stable_window: int = 10
    obj_tol: float = 1e-10
    max_restarts: int = 5

    def __post_init__(self):
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")
        if not 0 < self.safety < 1:
            raise ParameterError("safety must lie in (0, 1)")
        if self.step_s is not None and not self.step_s > 0:
            raise ParameterError("step_s must be positive")
        if self.step_eta is not None and not self.step_eta > 0:
            raise ParameterError("step_eta must be positive")
        if self.grad_bound_G is not None and not self.grad_bound_G > 0:
            raise ParameterError("grad_bound_G must be positive")
        if self.stable_window < 0 or self.max_restarts < 0:
            raise ParameterError("stable_window and max_restarts must be >= 0")


@dataclass
class SolverState:
    z: np.ndarray
    v: np.ndarray
    k: int = 0
    support_history: List[np.ndarray] = field(default_factory=list)
    grad_norm: float = float("nan")

    @classmethod
    def start(cls, z0, c):
        z0 = np.array(z0, dtype=np.float64)
        in_c = np.asarray(c) > 0
        return cls(z=z0.copy(), v=z0.copy(), k=0, support_history=[np.flatnonzero(in_c & (z0 != 0))])


@dataclass
class ConvergenceTrace:
    """Per-iteration record of one FPGD-SP run.

    ``objective[k-1]``, ``support_size[k-1]`` and ``grad_norm[k-1]`` belong
    to iteration ``k``; ``lambda_k`` is ``eta * k``. ``k0`` is the first
    iteration of the terminal support, ``v_before_k0`` and
    ``objective_before_k0`` are ``v`` and the objective at iteration
    ``k0 - 1``.
    """

    objective: np.ndarray
    support_size: np.ndarray
    grad_norm: np.ndarray
    step_s: float
    step_eta: float
    initial_objective: float
    k0: int
    v_before_k0: np.ndarray
    objective_before_k0: float
    status: str
    grad_bound: float
    restarts: int
    certified: bool
    s_max: float
    lipschitz: float
    tau: float

    @property
    def iterations(self) -> int:
        return len(self.objective)

    @property
    def lambda_k(self) -> np.ndarray:
        return self.step_eta * np.arange(1, self.iterations + 1)

    def rows(self):
        """``(iteration, objective, support_size, grad_norm, s, lambda_k)`` tuples."""
        lam = self.lambda_k
        for k in range(self.iterations):
            yield (k + 1, float(self.objective[k]), int(self.support_size[k]),
                   float(self.grad_norm[k]), self.step_s, float(lam[k]))


def prox_hard_threshold(u, s: float, gamma: float, c, i: int) -> np.ndarray:
    """Proximal map of ``s * gamma * sum_{c_t > 0} c_t 1[v_t != 0]`` under ``v_i = 0``.

    Coordinate ``t`` is zeroed when ``t == i`` or when ``c_t > 0`` and
    ``|u_t| <= sqrt(2 s gamma c_t)``; otherwise ``u_t`` passes through.
    Exact ties at the threshold are zeroed.
    """
    if not s > 0 or not gamma > 0:
        raise ParameterError("s and gamma must be positive")
    u = np.asarray(u, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    in_c = c > 0
    thr = np.sqrt(2.0 * s * gamma * np.where(in_c, c, 0.0))
    out = u.copy()
    out[in_c & (np.abs(u) <= thr)] = 0.0
    out[i] = 0.0
    return out


def support_project(u, keep) -> np.ndarray:
    """Copy the coordinates of ``u`` listed in ``keep`` and zero the rest.

    ``keep`` may be an index array or a boolean mask.
    """
    u = np.asarray(u, dtype=np.float64)
    keep = np.asarray(keep)
    out = np.zeros_like(u)
    if keep.dtype == bool:
        out[keep] = u[keep]
    elif keep.size:
        idx = keep.astype(np.intp)
        out[idx] = u[idx]
    return out


def gradient(data: Dataset, i: int, z) -> np.ndarray:
    """``2 X'(X z - x_i)`` with coordinate ``i`` zeroed."""
    X = data.points
    g = 2.0 * (X.T @ (X @ z - X[:, i]))
    g[i] = 0.0
    return g


def fpgd_step(state: SolverState, data: Dataset, c, i: int, s: float, eta: float,
              gamma: float, grad_bound: Optional[float] = None) -> SolverState:
    """One FPGD-SP iteration (reference implementation, numpy).

    Raises
    ------
    StepViolation
        If ``grad_bound`` is given and ``||grad f(m)||`` exceeds it.
    """
    c = np.asarray(c, dtype=np.float64)
    k = state.k + 1
    alpha = 2.0 / (k + 1.0)
    lam_k = eta * k
    m = (1.0 - alpha) * state.z + alpha * state.v
    g = gradient(data, i, m)
    gn = float(np.linalg.norm(g))
    if grad_bound is not None and gn > grad_bound:
        raise StepViolation(gn, grad_bound)
    z = prox_hard_threshold(m - s * g, s, gamma, c, i)
    in_c = c > 0
    keep = (in_c & (z != 0)) | ~in_c
    v = support_project(state.v - lam_k * g, keep)
    history = state.support_history + [np.flatnonzero(in_c & (z != 0))]
    return SolverState(z=z, v=v, k=k, support_history=history, grad_norm=gn)


def lipschitz_constant(data: Dataset) -> float:
    """``L_f = 2 * sigma_max(X'X)``."""
    return 2.0 * spectral_norm_sq(data.points)


def step_size_bounds(data: Dataset, c, gamma: float, G: float, lipschitz: Optional[float] = None):
    """Return ``(s_max, L_f, tau)`` with ``s_max = min(2 tau / G^2, 1 / L_f)``.

    ``tau = gamma * min_{c_t > 0} c_t``; when no coefficient is positive
    ``tau`` is ``inf`` and ``s_max = 1 / L_f``.
    """
    c = np.asarray(c, dtype=np.float64)
    lf = lipschitz_constant(data) if lipschitz is None else float(lipschitz)
    pos = c[c > 0]
    tau = gamma * float(pos.min()) if pos.size else float("inf")
    inv_l = 1.0 / lf if lf > 0 else float("inf")
    s_max = min(2.0 * tau / (G * G), inv_l) if np.isfinite(tau) else inv_l
    return s_max, lf, tau


def initial_grad_bound(data: Dataset, i: int, z0, lipschitz: Optional[float] = None) -> float:
    """``2 ||X|| (||x_i|| + ||X|| ||z0||)`` plus a small margin."""
    lf = lipschitz_constant(data) if lipschitz is None else float(lipschitz)
    xn = np.sqrt(lf / 2.0)
    return 2.0 * xn * (np.linalg.norm(data.points[:, i]) + xn * np.linalg.norm(z0)) + 1e-6


_STATUS = {0: "stable", 1: "max_iters", 2: "grad_bound_violation"}


def run_fpgd(z0, i: int, data: Dataset, c, gamma: float, cfg: SolverConfig = SolverConfig(),
             lipschitz: Optional[float] = None, kernels=None):
    """Run FPGD-SP from ``z0`` on column ``i``.

    Returns
    -------
    z : ndarray
        Final iterate (before any least-squares refit).
    trace : ConvergenceTrace
        ``trace.certified`` is False when the gradient bound could not be
        established within ``cfg.max_restarts`` doublings, or when an
        explicit ``cfg.step_s`` is not below the theoretical bound.
    """
    kernels = kernels or _backend.kernels
    X = data.points
    n = data.n
    z0 = np.array(z0, dtype=np.float64)
    if z0.shape != (n,):
        raise ParameterError(f"z0 must have length {n}")
    if not np.all(np.isfinite(z0)):
        raise ParameterError("z0 must be finite")
    if z0[i] != 0.0:
        raise ParameterError("z0 must vanish at its own index")
    if not gamma > 0:
        raise ParameterError("gamma must be positive")
    c = np.ascontiguousarray(c, dtype=np.float64)
    lf = lipschitz_constant(data) if lipschitz is None else float(lipschitz)
    G = cfg.grad_bound_G if cfg.grad_bound_G is not None else initial_grad_bound(data, i, z0, lf)

    xr = np.ascontiguousarray(X.T)
    x = np.ascontiguousarray(X[:, i])
    M = cfg.max_iters
    z = np.zeros(n)
    v = np.zeros(n)
    vsnap = np.zeros(n)
    tr_obj = np.zeros(M)
    tr_supp = np.zeros(M, dtype=np.int_)
    tr_grad = np.zeros(M)

    restarts = 0
    while True:
        s_max, lf, tau = step_size_bounds(data, c, gamma, G, lf)
        s = cfg.step_s if cfg.step_s is not None else cfg.safety * s_max
        eta = cfg.step_eta if cfg.step_eta is not None else 0.5 * s
        iters, status, k0, obj0, obj_k0m1 = kernels.fpgd_run(
            xr, x, c, z0, i, s, eta, gamma, G, M, cfg.stable_window, cfg.obj_tol,
            z, v, vsnap, tr_obj, tr_supp, tr_grad,
        )
        if status != 2 or restarts >= cfg.max_restarts:
            break
        restarts += 1
        G *= 2.0
        logger.debug("column %d: gradient bound violated, G -> %g", i, G)

    if status == 2:
        # keep the iterations completed before the violation
        iters -= 1
    s_max, _, _ = step_size_bounds(data, c, gamma, G, lf)
    certified = status != 2 and s < s_max
    trace = ConvergenceTrace(
        objective=tr_obj[:iters].copy(),
        support_size=tr_supp[:iters].copy(),
        grad_norm=tr_grad[:iters].copy(),
        step_s=float(s),
        step_eta=float(eta),
        initial_objective=float(obj0),
        k0=int(k0),
        v_before_k0=vsnap.copy(),
        objective_before_k0=float(obj_k0m1),
        status=_STATUS[int(status)],
        grad_bound=float(G),
        restarts=restarts,
        certified=bool(certified),
        s_max=float(s_max),
        lipschitz=float(lf),
        tau=float(tau),
    )
    return z.copy(), trace


def restricted_least_squares(data: Dataset, i: int, support, c) -> np.ndarray:
    """Minimize ``||x_i - X z||^2`` over ``z`` supported on
    ``(support | {t : c_t <= 0}) - {i}``.

    Solved in the least-squares sense on the free columns (SVD based), so
    rank-deficient problems return the minimum-norm exact minimizer.
    """
    X = data.points
    n = data.n
    c = np.asarray(c)
    free = np.zeros(n, dtype=bool)
    free[np.asarray(support, dtype=np.intp)] = True
    free |= c <= 0
    free[i] = False
    idx = np.flatnonzero(free)
    z = np.zeros(n)
    if idx.size:
        sol, *_ = np.linalg.lstsq(X[:, idx], X[:, i], rcond=None)
        z[idx] = sol
    return z


def stationarity_certificate(z_star, i: int, data: Dataset, c, gamma: float, eps: float,
                             lipschitz: Optional[float] = None, atol: float = 1e-9):
    """Near-stationarity check of a refit solution for the full per-column objective.

    Builds ``z~`` from ``z_star`` by setting to ``eps`` every zero
    coordinate with a negative coefficient (other than ``i``), then
    evaluates the minimum-norm Frechet subgradient ``u`` of
    ``||x_i - X z||^2 + gamma * sum_t c_t 1[z_t != 0]`` at ``z~``:
    zero at ``i`` and at zero coordinates with ``c_t > 0``, the gradient
    elsewhere. A zero coordinate with ``c_t < 0`` has an empty
    subdifferential and yields ``u_norm = inf``.

    Returns
    -------
    (u_norm, bound, passed)
        ``bound = L_f * |C-| * eps`` and ``passed = u_norm <= bound + atol``;
        ``atol`` absorbs floating-point error in ``z_star``.
    """
    c = np.asarray(c, dtype=np.float64)
    z = np.array(z_star, dtype=np.float64)
    lf = lipschitz_constant(data) if lipschitz is None else float(lipschitz)
    neg = c < 0
    neg[i] = False
    bump = neg & (z == 0.0)
    z[bump] = eps
    g = gradient(data, i, z)
    zero = z == 0.0
    if np.any(zero & (c < 0) & (np.arange(z.size) != i)):
        u_norm = float("inf")
    else:
        u = g.copy()
        u[zero & (c > 0)] = 0.0
        u[i] = 0.0
        u_norm = float(np.linalg.norm(u))
    bound = lf * int(neg.sum()) * eps
    return u_norm, bound, bool(u_norm <= bound + atol)
