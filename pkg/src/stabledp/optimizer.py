"""Deterministic ERM solver and a configurable minibatch SGD engine.

``solve_erm`` is proximal gradient descent with backtracking on the smooth
part; with no L1 term the proximal step is the identity and the method is
plain gradient descent. The L1 term is handled by soft-thresholding so
elastic-net solutions reach exact zeros, which downstream feature
selection relies on.

``sgd_run`` exposes the knobs that control uniform stability: step count,
step size, batch size, gradient clipping, norm-contracting dropout, and
iterate averaging. Batch order and dropout randomness come from streams
derived per purpose (and per step, for dropout) from the config seed, so
two runs on neighboring datasets with the same seed are maximally coupled:
they see the same batch index sequence and the same per-step dropout
generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import Dataset, ObjectiveSpec, gradient, smooth_objective, strong_convexity_constant
from .rng import derive_rng

__all__ = [
    "SgdConfig",
    "SolveReport",
    "ConvergenceError",
    "solve_erm",
    "sgd_run",
    "s_dropout",
    "clip_gradient",
    "soft_threshold",
    "convergence_sensitivity_correction",
]


class ConvergenceError(RuntimeError):
    """Solver ran out of iterations; carries the best iterate found."""

    def __init__(self, message: str, report: "SolveReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SgdConfig:
    """Minibatch SGD configuration.

    ``averaging``, when given, is a weight per step (nonnegative, summing
    to 1); the returned iterate is the weighted average of the post-step
    iterates instead of the final one.
    """

    steps_T: int
    step_size: float | Callable[[int], float]
    batch_size_b: int
    clip_bound_G: float | None = None
    dropout_rate_s: float | None = None
    averaging: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        if self.steps_T < 0:
            raise ValueError(f"steps_T must be >= 0, got {self.steps_T}")
        if self.batch_size_b < 1:
            raise ValueError(f"batch_size_b must be >= 1, got {self.batch_size_b}")
        if self.clip_bound_G is not None and self.clip_bound_G <= 0:
            raise ValueError(f"clip_bound_G must be > 0, got {self.clip_bound_G}")
        if self.dropout_rate_s is not None and not 0 < self.dropout_rate_s <= 1:
            raise ValueError(f"dropout_rate_s must be in (0, 1], got {self.dropout_rate_s}")
        if self.averaging is not None:
            w = np.asarray(self.averaging, dtype=float)
            if w.shape != (self.steps_T,):
                raise ValueError(
                    f"averaging needs one weight per step ({self.steps_T}), got {w.shape}"
                )
            if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-9:
                raise ValueError("averaging weights must be nonnegative and sum to 1")
            object.__setattr__(self, "averaging", tuple(float(v) for v in w))

    def step_at(self, t: int) -> float:
        if callable(self.step_size):
            return float(self.step_size(t))
        return float(self.step_size)


@dataclass
class SolveReport:
    """Result of a solve: weights plus optimality/convergence diagnostics.

    ``loss_gap_bound`` is an upper bound on objective(w) - objective(w*)
    and ``weight_gap_bound`` on ||w - w*||; either feeds the sensitivity
    correction for inexact minimizers.
    """

    weights: np.ndarray
    final_gradient_norm: float
    iterations_used: int
    loss_gap_bound: float | None = None
    weight_gap_bound: float | None = None
    trajectory: np.ndarray | None = None

    def __post_init__(self):
        if self.final_gradient_norm < 0:
            raise ValueError("final_gradient_norm must be >= 0")


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    """Proximal map of t * ||.||_1: shrink toward 0, exact zeros inside [-t, t]."""
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _smooth_curvature(spec: ObjectiveSpec, S: Dataset) -> float:
    """Tight-ish upper bound on the gradient Lipschitz constant of the smooth part.

    Estimates the top eigenvalue of X^T X / n by deterministic power
    iteration (padded by 10%) and clamps with the trace bound, which is a
    certain upper bound.
    """
    X = S.features
    trace_bound = float(np.mean(np.sum(X**2, axis=1)))
    v = np.ones(S.d) / math.sqrt(S.d)
    lam_max = trace_bound
    for _ in range(50):
        u = X.T @ (X @ v) / S.n
        nrm = float(np.linalg.norm(u))
        if nrm <= 0:
            lam_max = 0.0
            break
        lam_max = nrm
        v = u / nrm
    top = min(trace_bound, 1.1 * lam_max)
    factor = 0.25 if spec.loss_kind == "logistic" else 2.0
    return factor * top + 2.0 * spec.l2_coefficient


def solve_erm(spec: ObjectiveSpec, S: Dataset, tolerance: float = 1e-8,
              max_iters: int = 100_000, w0: np.ndarray | None = None) -> SolveReport:
    """Minimize the regularized objective to a given optimality residual.

    Proximal gradient descent at the safe fixed step 1/L for the smooth
    part's curvature bound L (plain gradient descent when there is no L1
    term). The step only shrinks, permanently, if the curvature estimate
    ever proves too small (monotonicity safeguard). The residual is the
    proximal-gradient mapping norm, which reduces to the smooth gradient
    norm when there is no L1 term. Deterministic given (spec, S,
    tolerance): no randomness anywhere.

    Raises :class:`ConvergenceError` (carrying the best iterate) if the
    residual is still above ``tolerance`` after ``max_iters`` steps.
    """
    if tolerance <= 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}")
    lam_sc = strong_convexity_constant(spec)  # raises if not strongly convex
    c1 = spec.l1_coefficient
    w = np.zeros(S.d) if w0 is None else np.asarray(w0, dtype=float).copy()
    alpha = 1.0 / max(_smooth_curvature(spec, S), 1e-12)

    f_w = smooth_objective(spec, w, S)
    residual = math.inf
    for it in range(1, max_iters + 1):
        g = gradient(spec, w, S)
        while True:
            w_next = w - alpha * g
            if c1 > 0:
                w_next = soft_threshold(w_next, alpha * c1)
            delta = w_next - w
            f_next = smooth_objective(spec, w_next, S)
            model = f_w + float(g @ delta) + float(delta @ delta) / (2.0 * alpha)
            if f_next <= model + 1e-15 * max(1.0, abs(f_w)):
                break
            alpha *= 0.5
            if alpha < 1e-18:
                raise ConvergenceError(
                    f"step-size safeguard collapsed at iteration {it}",
                    SolveReport(w, float(np.linalg.norm(g)), it),
                )
        residual = float(np.linalg.norm(w_next - w) / alpha)
        w, f_w = w_next, f_next
        if residual <= tolerance:
            gap = residual * residual / (2.0 * lam_sc)
            return SolveReport(
                weights=w,
                final_gradient_norm=residual,
                iterations_used=it,
                loss_gap_bound=gap,
            )

    gap = residual * residual / (2.0 * lam_sc)
    report = SolveReport(w, residual, max_iters, loss_gap_bound=gap)
    raise ConvergenceError(
        f"no convergence after {max_iters} iterations (residual {residual:.3e} "
        f"> tolerance {tolerance:.3e})",
        report,
    )


def clip_gradient(g: np.ndarray, G: float) -> np.ndarray:
    """Rescale g to norm G when ||g|| > G; direction preserved, else unchanged."""
    if G <= 0:
        raise ValueError(f"G must be > 0, got {G}")
    g = np.asarray(g, dtype=float)
    nrm = float(np.linalg.norm(g))
    if nrm <= G:
        return g
    return g * (G / nrm)


def s_dropout(v: np.ndarray, s: float, rng: np.random.Generator) -> np.ndarray:
    """Randomly zero components of v until ||result|| <= s * ||v||.

    The contraction holds on every invocation (worst case, not in
    expectation); v = 0 returns 0 and s = 1 may return v unchanged.
    """
    if not 0 < s <= 1:
        raise ValueError(f"s must be in (0, 1], got {s}")
    v = np.asarray(v, dtype=float)
    target = s * float(np.linalg.norm(v))
    out = v.copy()
    while float(np.linalg.norm(out)) > target:
        alive = np.flatnonzero(out)
        out[alive[rng.integers(alive.size)]] = 0.0
    return out


def sgd_run(spec: ObjectiveSpec, S: Dataset, cfg: SgdConfig,
            w0: np.ndarray | None = None, keep_trajectory: bool = False) -> SolveReport:
    """Run T steps of minibatch proximal SGD; bit-reproducible given the seed.

    Per step: draw the next without-replacement batch, compute the smooth
    gradient, clip to G if configured, apply s-dropout if configured, step,
    then soft-threshold for the L1 term. With ``averaging`` set, the
    weighted average of post-step iterates is returned instead of the final
    iterate.
    """
    if cfg.batch_size_b > S.n:
        raise ValueError(f"batch_size_b={cfg.batch_size_b} exceeds n={S.n}")
    batch_rng = derive_rng(cfg.seed, 0)
    w = np.zeros(S.d) if w0 is None else np.asarray(w0, dtype=float).copy()
    avg = np.zeros(S.d) if cfg.averaging is not None else None
    traj = [] if keep_trajectory else None

    order = batch_rng.permutation(S.n)
    cursor = 0
    for t in range(cfg.steps_T):
        if cursor >= S.n:
            order = batch_rng.permutation(S.n)
            cursor = 0
        batch_idx = order[cursor:cursor + cfg.batch_size_b]
        cursor += cfg.batch_size_b
        g = gradient(spec, w, S.subset(batch_idx))
        if cfg.clip_bound_G is not None:
            g = clip_gradient(g, cfg.clip_bound_G)
        if cfg.dropout_rate_s is not None:
            g = s_dropout(g, cfg.dropout_rate_s, derive_rng(cfg.seed, 1, t))
        alpha = cfg.step_at(t)
        w = w - alpha * g
        if spec.l1_coefficient > 0:
            w = soft_threshold(w, alpha * spec.l1_coefficient)
        if not np.all(np.isfinite(w)):
            raise FloatingPointError(f"non-finite iterate at step {t}")
        if avg is not None:
            avg += cfg.averaging[t] * w
        if traj is not None:
            traj.append(w.copy())

    result = avg if avg is not None else w
    grad_norm = float(np.linalg.norm(gradient(spec, result, S)))
    return SolveReport(
        weights=result,
        final_gradient_norm=grad_norm,
        iterations_used=cfg.steps_T,
        trajectory=np.array(traj) if traj is not None else None,
    )


def convergence_sensitivity_correction(base_sensitivity: float, report: SolveReport,
                                       lambda_sc: float) -> float:
    """Inflate a sensitivity bound for an inexact minimizer.

    Returns base + 2 * delta where delta is the weight-gap bound, taken
    from the report directly or converted from the loss gap as
    sqrt(2 * gap / lambda_sc).
    """
    if lambda_sc <= 0:
        raise ValueError(f"lambda_sc must be > 0, got {lambda_sc}")
    if base_sensitivity < 0:
        raise ValueError(f"base_sensitivity must be >= 0, got {base_sensitivity}")
    if report.weight_gap_bound is not None:
        delta = report.weight_gap_bound
    elif report.loss_gap_bound is not None:
        delta = math.sqrt(2.0 * report.loss_gap_bound / lambda_sc)
    else:
        raise ValueError("report carries neither a weight-gap nor a loss-gap bound")
    return base_sensitivity + 2.0 * delta
