"""Covariance kernels and the fixed additive composition used for forecasting.

The model covariance is a sum of base kernels over a scalar time input
(measured in years):

    PER   seasonal pattern with a fixed, non-trained period
    LIN   linear trend (Bayesian linear regression)
    RBF   smooth non-linear trend
    SM1   quasi-periodic short-range structure (RBF envelope times cosine)
    SM2   quasi-periodic long-range structure
    WN    observation noise, white on the diagonal

A second periodic term (PER2) can be enabled for series with two seasonal
patterns.  All operations here are pure functions: they never mutate their
inputs and are safe to call concurrently.

Hyperparameters are always positive; optimization happens in log space, so
every gradient in this module is taken with respect to ``log(parameter)``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

__all__ = [
    "InvalidHyperparameterError",
    "Term",
    "KernelSpec",
    "HyperParams",
    "eval_kernel",
    "build_gram",
    "build_cross",
    "grad_gram",
    "zero_lag_variance",
]


class InvalidHyperparameterError(ValueError):
    """Raised when hyperparameters are missing, non-positive, or non-finite."""


# Parameter names contributed by each term kind, in trainable-vector order.
# Fixed periods are deliberately absent: they are never optimized.
TERM_PARAMS: dict[str, tuple[str, ...]] = {
    "PER": ("s2_per", "ell_per"),
    "PER2": ("s2_per2", "ell_per2"),
    "LIN": ("s2_bias", "s2_lin"),
    "RBF": ("s2_rbf", "ell_rbf"),
    "SM1": ("s2_sm1", "ell_sm1", "tau_sm1"),
    "SM2": ("s2_sm2", "ell_sm2", "tau_sm2"),
    "WN": ("s2_noise",),
}

VARIANCE_PARAMS = (
    "s2_per",
    "s2_per2",
    "s2_bias",
    "s2_lin",
    "s2_rbf",
    "s2_sm1",
    "s2_sm2",
    "s2_noise",
)

LENGTHSCALE_PARAMS = (
    "ell_per",
    "ell_per2",
    "ell_rbf",
    "ell_sm1",
    "tau_sm1",
    "ell_sm2",
    "tau_sm2",
)


@dataclass(frozen=True)
class Term:
    """One enabled component of the composition.

    ``period`` is required for PER/PER2 and forbidden otherwise.  It seeds
    the ``period``/``period2`` fields when hyperparameters are constructed
    from a spec; evaluation reads the copy stored on the hyperparameters.
    """

    kind: str
    period: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in TERM_PARAMS:
            raise ValueError(f"unknown kernel term {self.kind!r}; expected one of {sorted(TERM_PARAMS)}")
        if self.kind in ("PER", "PER2"):
            if self.period is None or not np.isfinite(self.period) or self.period <= 0:
                raise ValueError(f"{self.kind} term requires a finite period > 0, got {self.period!r}")
        elif self.period is not None:
            raise ValueError(f"{self.kind} term does not take a period")


@dataclass(frozen=True)
class KernelSpec:
    """Declarative description of the additive composition.

    A spec lists which terms are enabled (each kind at most once) and the
    fixed period of each periodic term.  Specs used for forecasting must
    include a WN term (the regression noise lives inside the kernel);
    the training layer enforces that, while the covariance algebra here
    accepts any non-empty term set.
    """

    terms: tuple[Term, ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("kernel spec needs at least one term")
        kinds = [t.kind for t in self.terms]
        if len(set(kinds)) != len(kinds):
            raise ValueError(f"duplicate kernel terms in {kinds}")

    def kinds(self) -> tuple[str, ...]:
        return tuple(t.kind for t in self.terms)

    def has(self, kind: str) -> bool:
        return any(t.kind == kind for t in self.terms)

    def term(self, kind: str) -> Term:
        for t in self.terms:
            if t.kind == kind:
                return t
        raise KeyError(kind)

    def trainable_names(self) -> tuple[str, ...]:
        """Ordered names of the trainable hyperparameters.

        The order (terms as listed, each term's parameters in their
        canonical order) defines the layout of every log-space vector:
        gradients, priors, and the optimizer all use it.
        """
        names: list[str] = []
        for t in self.terms:
            names.extend(TERM_PARAMS[t.kind])
        return tuple(names)


@dataclass(frozen=True, kw_only=True)
class HyperParams:
    """Full set of kernel hyperparameters.

    Every variance (``s2_*``), lengthscale (``ell_*``) and cosine-period
    parameter (``tau_*``) must be strictly positive.  ``period`` and
    ``period2`` are fixed constants, excluded from the trainable vector.

    The SM cosine is ``cos((x1 - x2) / tau)``: ``tau`` equals the cycle
    length divided by 2*pi, not the cycle length itself.
    """

    s2_per: float | None = None
    ell_per: float | None = None
    period: float | None = None
    s2_per2: float | None = None
    ell_per2: float | None = None
    period2: float | None = None
    s2_bias: float | None = None
    s2_lin: float | None = None
    s2_rbf: float | None = None
    ell_rbf: float | None = None
    s2_sm1: float | None = None
    ell_sm1: float | None = None
    tau_sm1: float | None = None
    s2_sm2: float | None = None
    ell_sm2: float | None = None
    tau_sm2: float | None = None
    s2_noise: float | None = None

    def get(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise InvalidHyperparameterError(f"hyperparameter {name!r} is not set")
        return value

    def to_log_vector(self, spec: KernelSpec) -> np.ndarray:
        """Log of the trainable parameters, in ``spec.trainable_names()`` order."""
        validate_hyperparams(spec, self)
        return np.log([self.get(name) for name in spec.trainable_names()])

    def with_log_vector(self, spec: KernelSpec, u: np.ndarray) -> "HyperParams":
        """Copy of self with the trainables replaced by ``exp(u)``.

        Fixed periods and any fields outside the spec are left untouched.
        """
        names = spec.trainable_names()
        u = np.asarray(u, dtype=float)
        if u.shape != (len(names),):
            raise ValueError(f"expected log vector of shape ({len(names)},), got {u.shape}")
        with np.errstate(over="ignore"):
            values = np.exp(u)
        return dataclasses.replace(self, **dict(zip(names, values.tolist())))


def validate_hyperparams(spec: KernelSpec, theta: HyperParams) -> None:
    """Check positivity and finiteness of every parameter the spec uses."""
    for name in spec.trainable_names():
        value = getattr(theta, name)
        if value is None:
            raise InvalidHyperparameterError(f"spec enables {name!r} but it is not set")
        if not np.isfinite(value) or value <= 0:
            raise InvalidHyperparameterError(f"{name} must be finite and > 0, got {value!r}")
    for kind, field in (("PER", "period"), ("PER2", "period2")):
        if spec.has(kind):
            value = getattr(theta, field)
            if value is None or not np.isfinite(value) or value <= 0:
                raise InvalidHyperparameterError(f"{field} must be finite and > 0, got {value!r}")


def _term_cov(term: Term, theta: HyperParams, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Covariance of one term, broadcasting x1 against x2."""
    kind = term.kind
    d = x1 - x2
    if kind == "RBF":
        ell = theta.get("ell_rbf")
        return theta.get("s2_rbf") * np.exp(-(d * d) / (2.0 * ell * ell))
    if kind in ("PER", "PER2"):
        suffix = "" if kind == "PER" else "2"
        s2 = theta.get("s2_per" + suffix)
        ell = theta.get("ell_per" + suffix)
        p = theta.get("period" + suffix)
        s = np.sin(np.pi * np.abs(d) / p)
        return s2 * np.exp(-2.0 * s * s / (ell * ell))
    if kind == "LIN":
        return theta.get("s2_bias") + theta.get("s2_lin") * (x1 * x2)
    if kind in ("SM1", "SM2"):
        idx = kind[-1]
        s2 = theta.get("s2_sm" + idx)
        ell = theta.get("ell_sm" + idx)
        tau = theta.get("tau_sm" + idx)
        return s2 * np.exp(-(d * d) / (2.0 * ell * ell)) * np.cos(d / tau)
    if kind == "WN":
        return np.where(x1 == x2, theta.get("s2_noise"), 0.0)
    raise AssertionError(kind)


def _term_grads(term: Term, theta: HyperParams, x1: np.ndarray, x2: np.ndarray) -> list[np.ndarray]:
    """Partials of one term w.r.t. log of each of its parameters.

    Returned in the same order as ``TERM_PARAMS[term.kind]``.
    """
    kind = term.kind
    d = x1 - x2
    if kind == "RBF":
        ell = theta.get("ell_rbf")
        k = theta.get("s2_rbf") * np.exp(-(d * d) / (2.0 * ell * ell))
        return [k, k * (d * d) / (ell * ell)]
    if kind in ("PER", "PER2"):
        suffix = "" if kind == "PER" else "2"
        s2 = theta.get("s2_per" + suffix)
        ell = theta.get("ell_per" + suffix)
        p = theta.get("period" + suffix)
        sin2 = np.sin(np.pi * np.abs(d) / p) ** 2
        k = s2 * np.exp(-2.0 * sin2 / (ell * ell))
        return [k, 4.0 * k * sin2 / (ell * ell)]
    if kind == "LIN":
        ones = np.ones(np.broadcast_shapes(x1.shape, x2.shape))
        return [theta.get("s2_bias") * ones, theta.get("s2_lin") * (x1 * x2)]
    if kind in ("SM1", "SM2"):
        idx = kind[-1]
        s2 = theta.get("s2_sm" + idx)
        ell = theta.get("ell_sm" + idx)
        tau = theta.get("tau_sm" + idx)
        env = s2 * np.exp(-(d * d) / (2.0 * ell * ell))
        k = env * np.cos(d / tau)
        return [k, k * (d * d) / (ell * ell), env * np.sin(d / tau) * d / tau]
    if kind == "WN":
        return [np.where(x1 == x2, theta.get("s2_noise"), 0.0)]
    raise AssertionError(kind)


def _check_finite(out: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(out)):
        raise InvalidHyperparameterError(f"{what} produced non-finite covariance values")


def eval_kernel(spec: KernelSpec, theta: HyperParams, x1: float, x2: float) -> float:
    """Covariance between two time points (in years) under the composition.

    The WN term contributes only when ``x1 == x2`` exactly; time indices are
    built from integer steps so equality of repeated points is well defined.
    """
    validate_hyperparams(spec, theta)
    a = np.asarray(float(x1))
    b = np.asarray(float(x2))
    total = sum(_term_cov(t, theta, a, b) for t in spec.terms)
    out = float(total)
    if not np.isfinite(out):
        raise InvalidHyperparameterError("kernel evaluated to a non-finite value")
    return out


def build_gram(spec: KernelSpec, theta: HyperParams, x: np.ndarray) -> np.ndarray:
    """n-by-n covariance matrix K[i, j] = k(x[i], x[j]).

    Symmetric by construction.  The WN term lands on the diagonal and on any
    exact duplicate time points.
    """
    validate_hyperparams(spec, theta)
    x = _as_points(x, "x")
    col = x[:, None]
    row = x[None, :]
    gram = np.zeros((x.size, x.size))
    for t in spec.terms:
        gram = gram + _term_cov(t, theta, col, row)
    _check_finite(gram, "build_gram")
    return gram


def build_cross(spec: KernelSpec, theta: HyperParams, x_star: np.ndarray, x: np.ndarray) -> np.ndarray:
    """m-by-n cross-covariance matrix between test and training points.

    The WN term never contributes here: predictions target the latent
    function, whose noise is independent of the training noise, so even a
    test point that exactly duplicates a training point only sees the
    signal covariance (its prediction shrinks toward the latent mean).
    """
    validate_hyperparams(spec, theta)
    x_star = _as_points(x_star, "x_star", allow_empty=True)
    x = _as_points(x, "x")
    col = x_star[:, None]
    row = x[None, :]
    cross = np.zeros((x_star.size, x.size))
    for t in spec.terms:
        if t.kind == "WN":
            continue
        cross = cross + _term_cov(t, theta, col, row)
    _check_finite(cross, "build_cross")
    return cross


def grad_gram(spec: KernelSpec, theta: HyperParams, x: np.ndarray) -> np.ndarray:
    """Partials of the Gram matrix w.r.t. each log-space trainable.

    Returns an array of shape ``(p, n, n)`` whose first axis follows
    ``spec.trainable_names()``.
    """
    validate_hyperparams(spec, theta)
    x = _as_points(x, "x")
    col = x[:, None]
    row = x[None, :]
    mats: list[np.ndarray] = []
    for t in spec.terms:
        for g in _term_grads(t, theta, col, row):
            mats.append(np.broadcast_to(g, (x.size, x.size)))
    out = np.stack(mats)
    _check_finite(out, "grad_gram")
    return out


def zero_lag_variance(spec: KernelSpec, theta: HyperParams, x: np.ndarray, include_noise: bool = False) -> np.ndarray:
    """Per-point prior variance k(x_i, x_i), excluding noise by default.

    Used for predictive variances: the latent-function variance at a test
    point never includes the white-noise term.
    """
    validate_hyperparams(spec, theta)
    x = _as_points(x, "x", allow_empty=True)
    out = np.zeros(x.size)
    for t in spec.terms:
        if t.kind == "WN" and not include_noise:
            continue
        out = out + _term_cov(t, theta, x, x)
    _check_finite(out, "zero_lag_variance")
    return out


def _as_points(x: np.ndarray, name: str, allow_empty: bool = False) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be a 1-D array of time points, got shape {x.shape}")
    if x.size == 0 and not allow_empty:
        raise ValueError(f"{name} must contain at least one point")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite time points")
    return x
