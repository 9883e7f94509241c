"""Core data types, loss functions, and their analytic constants.

A classification/regression problem is a ``Dataset`` (feature matrix plus
labels) together with an ``ObjectiveSpec`` describing the loss and the
regularization penalty. Two penalty modes exist:

* ``l2``:      mean loss + c * ||w||^2 with c = lam/2 (``l2_form="half"``,
               the default) or c = lam (``l2_form="full"``). The factor is
               explicit because both conventions are common and silently
               mixing them doubles or halves every downstream noise scale.
* ``elastic``: mean loss + lam * (gamma * ||w||^2 + eta * ||w||_1), with
               eta defaulting to 1 - gamma.

The strong-convexity constant of the full objective is always
``2 * l2_coefficient``; sensitivity and noise-scale formulas elsewhere in
the package take that constant, never the raw ``lam`` symbol.

Weight vectors are plain 1-D float64 ``numpy`` arrays throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dataset",
    "ObjectiveSpec",
    "as_signed_labels",
    "per_example_loss",
    "per_example_grad",
    "objective",
    "smooth_objective",
    "gradient",
    "objective_subgradient",
    "strong_convexity_constant",
]

LOSS_KINDS = ("logistic", "squared")
PENALTIES = ("l2", "elastic")
L2_FORMS = ("half", "full")


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (n x d) with one label per row.

    Rows are immutable after construction and safe to share across workers.
    Labels may be class indices or +/-1; binary mapping happens at training
    time via :func:`as_signed_labels`.
    """

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"features must be 2-D, got ndim={X.ndim}")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError(
                f"labels length {y.shape[0] if y.ndim == 1 else y.shape} "
                f"does not match n={X.shape[0]}"
            )
        if not np.all(np.isfinite(X)):
            raise ValueError("features contain non-finite entries")
        object.__setattr__(self, "features", _readonly(X))
        object.__setattr__(self, "labels", _readonly(y))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def max_row_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.features, axis=1)))

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.features[idx], self.labels[idx])

    def replace_record(self, i: int, x: np.ndarray, y: float) -> "Dataset":
        """Neighboring dataset: record i swapped for (x, y)."""
        X = np.array(self.features)
        lab = np.array(self.labels)
        X[i] = np.asarray(x, dtype=float)
        lab[i] = float(y)
        return Dataset(X, lab)


@dataclass(frozen=True)
class ObjectiveSpec:
    """Loss kind, penalty, and the analytic constants attached to them.

    ``lipschitz_L`` is the Lipschitz constant of the per-example loss in w
    over the feasible region. For logistic loss with row norms bounded by
    kappa it defaults to kappa (|sigmoid - label| <= 1). For squared loss
    it must be supplied when a stability bound needs it.
    """

    loss_kind: str
    lam: float
    penalty: str = "l2"
    gamma: float = 1.0
    eta: float | None = None
    kappa: float = 1.0
    lipschitz_L: float | None = None
    l2_form: str = "half"

    def __post_init__(self):
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}, got {self.loss_kind!r}")
        if self.penalty not in PENALTIES:
            raise ValueError(f"penalty must be one of {PENALTIES}, got {self.penalty!r}")
        if self.l2_form not in L2_FORMS:
            raise ValueError(f"l2_form must be one of {L2_FORMS}, got {self.l2_form!r}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.eta is None and self.penalty == "elastic":
            object.__setattr__(self, "eta", 1.0 - self.gamma)
        if self.eta is not None and self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.lipschitz_L is None and self.loss_kind == "logistic":
            object.__setattr__(self, "lipschitz_L", self.kappa)
        if self.lipschitz_L is not None and self.lipschitz_L <= 0:
            raise ValueError(f"lipschitz_L must be > 0, got {self.lipschitz_L}")

    @property
    def l2_coefficient(self) -> float:
        """c such that the smooth penalty is c * ||w||^2."""
        if self.penalty == "elastic":
            return self.lam * self.gamma
        return self.lam * (0.5 if self.l2_form == "half" else 1.0)

    @property
    def l1_coefficient(self) -> float:
        """c such that the nonsmooth penalty is c * ||w||_1."""
        if self.penalty == "elastic":
            return self.lam * (self.eta if self.eta is not None else 1.0 - self.gamma)
        return 0.0

    @property
    def L(self) -> float:
        if self.lipschitz_L is None:
            raise ValueError("lipschitz_L was not declared for this objective")
        return self.lipschitz_L


def as_signed_labels(labels: np.ndarray, positive=None) -> np.ndarray:
    """Map labels to +/-1. With ``positive`` given, one-vs-rest binarization."""
    y = np.asarray(labels, dtype=float)
    if positive is not None:
        return np.where(y == positive, 1.0, -1.0)
    vals = np.unique(y)
    if set(vals.tolist()) <= {-1.0, 1.0}:
        return y
    if vals.size != 2:
        raise ValueError(
            f"labels take {vals.size} distinct values; pass `positive` for one-vs-rest"
        )
    return np.where(y == vals[1], 1.0, -1.0)


def _check_dims(w: np.ndarray, d: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.shape[0] != d:
        raise ValueError(
            f"weight dimension {w.shape[0] if w.ndim == 1 else w.shape} "
            f"does not match feature dimension {d}"
        )
    return w


def _softplus(z):
    # log(1 + exp(z)), stable for large |z|
    z = np.asarray(z, dtype=float)
    return np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0)


def _loss_values(spec: ObjectiveSpec, w: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    z = X @ w
    if spec.loss_kind == "logistic":
        return _softplus(-y * z)
    return (z - y) ** 2


def per_example_loss(spec: ObjectiveSpec, w: np.ndarray, x: np.ndarray, y: float) -> float:
    """Loss of the model w on a single item (x, y). No penalty term.

    Logistic: log(1 + exp(-y <w, x>)) with y in {-1, +1}.
    Squared:  (<w, x> - y)^2.
    """
    x = np.asarray(x, dtype=float)
    w = _check_dims(w, x.shape[0])
    if spec.loss_kind == "logistic" and y not in (-1, 1):
        raise ValueError(f"logistic loss needs y in {{-1, +1}}, got {y}")
    return float(_loss_values(spec, w, x[None, :], np.array([y]))[0])


def per_example_grad(spec: ObjectiveSpec, w: np.ndarray, x: np.ndarray, y: float) -> np.ndarray:
    """Gradient in w of the per-example loss (smooth part only, no penalty)."""
    x = np.asarray(x, dtype=float)
    w = _check_dims(w, x.shape[0])
    z = float(x @ w)
    if spec.loss_kind == "logistic":
        # d/dw log(1+exp(-y z)) = -y x sigmoid(-y z)
        return -y * x / (1.0 + np.exp(y * z))
    return 2.0 * (z - y) * x


def smooth_objective(spec: ObjectiveSpec, w: np.ndarray, S: Dataset) -> float:
    """Mean loss plus the smooth (L2) penalty; excludes any L1 term."""
    w = _check_dims(w, S.d)
    mean_loss = float(np.mean(_loss_values(spec, w, S.features, S.labels)))
    return mean_loss + spec.l2_coefficient * float(w @ w)


def objective(spec: ObjectiveSpec, w: np.ndarray, S: Dataset) -> float:
    """Full regularized objective, exactly matching the declared penalty mode."""
    w = _check_dims(w, S.d)
    val = smooth_objective(spec, w, S)
    c1 = spec.l1_coefficient
    if c1 > 0:
        val += c1 * float(np.sum(np.abs(w)))
    return val


def gradient(spec: ObjectiveSpec, w: np.ndarray, S: Dataset) -> np.ndarray:
    """Gradient of the smooth part (mean loss + L2 term).

    The L1 term contributes no gradient here; solvers handle it through a
    proximal step.
    """
    w = _check_dims(w, S.d)
    X, y = S.features, S.labels
    z = X @ w
    if spec.loss_kind == "logistic":
        coeff = -y / (1.0 + np.exp(y * z))
    else:
        coeff = 2.0 * (z - y)
    g = (X.T @ coeff) / S.n
    return g + 2.0 * spec.l2_coefficient * w


def objective_subgradient(spec: ObjectiveSpec, w: np.ndarray, S: Dataset) -> np.ndarray:
    """A subgradient of the full objective (sign(0) taken as 0)."""
    g = gradient(spec, w, S)
    c1 = spec.l1_coefficient
    if c1 > 0:
        g = g + c1 * np.sign(w)
    return g


def strong_convexity_constant(spec: ObjectiveSpec) -> float:
    """Strong-convexity constant of the full objective: 2 * l2_coefficient.

    Under the default (lam/2)||w||^2 convention this equals lam; for the
    elastic penalty it equals 2 * lam * gamma.
    """
    c = 2.0 * spec.l2_coefficient
    if c <= 0:
        raise ValueError("objective not strongly convex (zero L2 regularization)")
    return c
