"""Closed-form uniform-stability and output-sensitivity calculators.

Two absolute stability constants are implemented:

* ``beta_l2_erm``:      beta = 2 L^2 kappa^2 / (n lam)   (L2-penalized ERM)
* ``beta_elastic_net``: beta = 2 L^2 kappa   / (n lam gamma)

Note the asymmetry: the elastic-net constant scales with kappa, the L2
constant with kappa^2. Both are implemented exactly as stated by their
sources; the asymmetry is surfaced here rather than silently normalized.

Sensitivity bounds on the trained weights come in three flavors: a direct
bound for L2-penalized ERM (``sensitivity_l2_direct``), a conversion from any
stability constant for Lipschitz losses (``sensitivity_via_lipschitz``), and the
strong-convexity conversion sqrt(2 beta / lambda_sc) (``sensitivity_via_strong_convexity``)
which is the one output perturbation calibrates against. The ``lambda_sc``
paired with a beta is always the strong-convexity constant of the full
objective, not the raw regularization weight.

Relative scalings for optimizer knobs (steps, step size, batch size,
dropout rate, clipping bound) are big-O rows without constants, so
``stability_knob_scaling`` only ever multiplies an existing certificate.

Further published worst-case stability scalings, recorded here for
reference only (no absolute constants are known, so no calculator is
offered): Nesterov-accelerated GD O(T^2) in the step count; heavy-ball
O(1/(1 - sqrt(gamma))) in its momentum; multi-task learning O(1/T) in the
task count; bridge regression O(lam^-((2-p)/p) / (p(p-1))); k-partite
ranking O(1/lam); batch normalization O(gamma^2/sigma^2) through the
improved Lipschitz constant. Two companion facts worth keeping in mind
when tuning: the expected generalization gap is itself bounded by beta
(population-level, so not empirically verifiable here), and for
sigma-smooth iterative algorithms the excess empirical (training) error
grows at least like sigma/(n beta) as stability tightens, so beta cannot
be pushed down for free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "StabilityCert",
    "SensitivityBound",
    "user_cert",
    "beta_l2_erm",
    "beta_elastic_net",
    "sensitivity_l2_direct",
    "sensitivity_via_lipschitz",
    "sensitivity_via_strong_convexity",
    "privacy_enhancement",
    "privacy_error_bound",
    "stability_knob_scaling",
    "SCALING_KNOBS",
]

PROVENANCES = ("l2_erm", "elastic_net", "user_supplied", "knob_scaled")
SCALING_KNOBS = ("steps", "step_size", "batch", "dropout", "clip")


@dataclass(frozen=True)
class StabilityCert:
    """A uniform-stability constant with provenance.

    ``lambda_sc`` is the strong-convexity constant the beta pairs with;
    ``scaling_factors`` records every knob multiplier applied on top of the
    base formula.
    """

    beta: float
    lambda_sc: float
    provenance: str
    scaling_factors: tuple = ()

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.lambda_sc <= 0:
            raise ValueError(f"lambda_sc must be > 0, got {self.lambda_sc}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")


@dataclass(frozen=True)
class SensitivityBound:
    """L2 (and derived L1) bound on ||w_S - w_S'|| over neighboring datasets."""

    l2_value: float
    l1_value: float
    method: str
    d: int

    def __post_init__(self):
        if self.l2_value < 0:
            raise ValueError(f"l2_value must be >= 0, got {self.l2_value}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")


def _bound(l2: float, method: str, d: int) -> SensitivityBound:
    return SensitivityBound(l2_value=l2, l1_value=math.sqrt(d) * l2, method=method, d=int(d))


def _require_positive(**kwargs):
    for name, value in kwargs.items():
        if value <= 0:
            raise ValueError(f"{name} must be > 0, got {value}")


def user_cert(beta: float, lambda_sc: float) -> StabilityCert:
    """Wrap an externally known stability constant."""
    return StabilityCert(beta=beta, lambda_sc=lambda_sc, provenance="user_supplied")


def beta_l2_erm(L: float, kappa: float, n: int, lam: float,
                lambda_sc: float | None = None) -> StabilityCert:
    """beta = 2 L^2 kappa^2 / (n lam) for L2-penalized ERM.

    ``lam`` here is the strong-convexity constant of the penalized
    objective (equal to the regularization weight under the (lam/2)||w||^2
    convention); ``lambda_sc`` defaults to it.
    """
    _require_positive(L=L, kappa=kappa, n=n, lam=lam)
    beta = 2.0 * L * L * kappa * kappa / (n * lam)
    return StabilityCert(beta=beta, lambda_sc=lam if lambda_sc is None else lambda_sc,
                         provenance="l2_erm")


def beta_elastic_net(L: float, kappa: float, n: int, lam: float, gamma: float,
                     lambda_sc: float | None = None) -> StabilityCert:
    """beta = 2 L^2 kappa / (n lam gamma) for elastic-net penalized ERM.

    The paired strong-convexity constant defaults to 2 lam gamma, the
    second derivative of the lam gamma ||w||^2 term.
    """
    _require_positive(L=L, kappa=kappa, n=n, lam=lam, gamma=gamma)
    if gamma > 1:
        raise ValueError(f"gamma must be <= 1, got {gamma}")
    beta = 2.0 * L * L * kappa / (n * lam * gamma)
    return StabilityCert(beta=beta,
                         lambda_sc=2.0 * lam * gamma if lambda_sc is None else lambda_sc,
                         provenance="elastic_net")


def sensitivity_l2_direct(L: float, kappa: float, n: int, lam: float, d: int = 1) -> SensitivityBound:
    """Direct L2-ERM weight sensitivity: 4 L kappa / (n lam)."""
    _require_positive(L=L, kappa=kappa, n=n, lam=lam)
    return _bound(4.0 * L * kappa / (n * lam), "l2_direct", d)


def sensitivity_via_lipschitz(beta: float, L: float, kappa: float, d: int = 1) -> SensitivityBound:
    """Stability-to-sensitivity conversion for Lipschitz losses: 2 beta / (L kappa)."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    _require_positive(L=L, kappa=kappa)
    return _bound(2.0 * beta / (L * kappa), "lipschitz", d)


def sensitivity_via_strong_convexity(cert: StabilityCert, d: int = 1) -> SensitivityBound:
    """Strong-convexity conversion: ||w_S - w_S'|| <= sqrt(2 beta / lambda_sc)."""
    return _bound(math.sqrt(2.0 * cert.beta / cert.lambda_sc), "strong_convexity", d)


def privacy_enhancement(epsilon: float, beta1: float, beta2: float) -> float:
    """Improved privacy level sqrt(beta2/beta1) * epsilon under unchanged noise.

    Valid only when the stability guarantee actually improved (beta2 <= beta1).
    """
    _require_positive(epsilon=epsilon, beta1=beta1, beta2=beta2)
    if beta2 > beta1:
        raise ValueError(
            f"beta2={beta2} > beta1={beta1} is not an improvement; no privacy gain"
        )
    return math.sqrt(beta2 / beta1) * epsilon


def privacy_error_bound(L: float, d: int, epsilon: float, cert: StabilityCert) -> float:
    """Upper bound on the expected excess empirical loss due to output noise.

    Bound: (L d / epsilon) * sqrt(2 beta / lambda_sc), for per-coordinate
    Laplace noise at scale sqrt(2 beta / lambda_sc) / epsilon.
    """
    _require_positive(L=L, d=d, epsilon=epsilon)
    return (L * d / epsilon) * math.sqrt(2.0 * cert.beta / cert.lambda_sc)


def stability_knob_scaling(base_cert: StabilityCert, knob: str, old_value: float, new_value: float,
                   lipschitz_L: float | None = None) -> StabilityCert:
    """Rescale a stability certificate when one optimizer knob moves.

    Relative multipliers only (the underlying scalings are big-O without
    constants): steps, step_size, and dropout scale beta by new/old;
    batch by old/new; clip by min(G_new, L) / min(G_old, L).
    """
    if knob not in SCALING_KNOBS:
        raise ValueError(f"unsupported knob {knob!r}; supported: {SCALING_KNOBS}")
    _require_positive(old_value=old_value, new_value=new_value)
    if knob in ("steps", "step_size", "dropout"):
        mult = new_value / old_value
    elif knob == "batch":
        mult = old_value / new_value
    else:  # clip
        if lipschitz_L is None or lipschitz_L <= 0:
            raise ValueError("clip scaling needs a positive lipschitz_L")
        mult = min(new_value, lipschitz_L) / min(old_value, lipschitz_L)
    return StabilityCert(
        beta=base_cert.beta * mult,
        lambda_sc=base_cert.lambda_sc,
        provenance="knob_scaled",
        scaling_factors=base_cert.scaling_factors + ((knob, mult),),
    )
