"""Rate diagnostics for a single FPGD-SP run.

Given a trace and the least-squares minimizer ``z*`` on the terminal
support, the final-stage guarantee reads, for every ``k >= k0``,

    F(z_k) - F(z*) <= U / (k (k + 1)),
    U = k0 (k0 - 1) (F(z_{k0-1}) - F(z*)) + ||v_{k0-1} - z*||^2 / eta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .fpgd import ConvergenceTrace, restricted_least_squares

__all__ = ["RateReport", "rate_report"]


@dataclass
class RateReport:
    k0: int
    f_star: float
    U: float
    z_star: np.ndarray
    gap: np.ndarray
    bound: np.ndarray

    def violations(self, slack: float = 1e-9) -> np.ndarray:
        """Iterations ``k >= k0`` at which the gap exceeds the bound plus slack."""
        k = np.arange(1, self.gap.size + 1)
        bad = (k >= self.k0) & (self.gap > self.bound + slack)
        return k[bad]

    def log_slope(self, floor: float = 1e-12):
        """Least-squares slope of ``log gap`` against ``log k`` over the final
        stage, restricted to gaps above ``floor``. Returns ``(slope, decades)``."""
        k = np.arange(1, self.gap.size + 1)
        keep = (k >= self.k0) & (self.gap > floor)
        if keep.sum() < 3:
            return float("nan"), 0.0
        lk = np.log(k[keep])
        lg = np.log10(self.gap[keep])
        slope = np.polyfit(lk, lg * np.log(10.0), 1)[0]
        return float(slope), float(lg.max() - lg.min())


def rate_report(trace: ConvergenceTrace, z_raw, i: int, data: Dataset, c, gamma: float) -> RateReport:
    """Gap and theoretical bound per iteration for one run."""
    c = np.asarray(c, dtype=np.float64)
    support = np.flatnonzero((c > 0) & (np.asarray(z_raw) != 0.0))
    z_star = restricted_least_squares(data, i, support, c)
    # the indicator of z* must match the terminal support on C
    in_c = c > 0
    z_star[in_c & (np.asarray(z_raw) == 0.0)] = 0.0
    f_star = _objective_on_support(z_star, i, data, c, gamma, support)
    k0 = trace.k0
    U = k0 * (k0 - 1) * (trace.objective_before_k0 - f_star) + float(
        np.sum((trace.v_before_k0 - z_star) ** 2)
    ) / trace.step_eta
    k = np.arange(1, trace.iterations + 1, dtype=np.float64)
    gap = trace.objective - f_star
    bound = np.where(k >= k0, U / (k * (k + 1.0)), np.nan)
    return RateReport(k0=k0, f_star=f_star, U=U, z_star=z_star, gap=gap, bound=bound)


def _objective_on_support(z, i, data, c, gamma, support):
    # the l0 term counts the terminal support even if a refit coefficient
    # happens to land within the nonzero threshold
    r = data.points[:, i] - data.points @ z
    return float(r @ r) + gamma * float(c[support].sum())
