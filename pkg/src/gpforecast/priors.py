"""Lognormal priors over the kernel hyperparameters.

Each positive hyperparameter gets a prior ``log(theta) ~ Normal(nu, lam)``
(``lam`` is the variance of the log).  The default constants were calibrated
empirically on a large collection of monthly series; they keep every
parameter within a plausible order of magnitude while leaving fat tails:

    all variances (incl. noise and the linear bias/slope)   nu = -1.5
    ell_per  (periodic lengthscale)                         nu =  0.2
    ell_rbf                                                 nu =  1.1
    ell_sm1                                                 nu = -0.7
    tau_sm1                                                 nu =  0.5
    ell_sm2                                                 nu =  1.1
    tau_sm2                                                 nu =  1.6

with ``lam = 1.0`` everywhere.  All variances share a single prior (each
component gets the same prior chance of being switched off), and all
lengthscale-type parameters share the same log-variance.  A second periodic
term reuses the ``ell_per`` entry and the shared variance prior.

Priors can be saved to and loaded from a plain-text file (one
``name = nu lam`` line per parameter) so alternative calibrations can be
dropped in.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .kernels import (
    LENGTHSCALE_PARAMS,
    VARIANCE_PARAMS,
    HyperParams,
    InvalidHyperparameterError,
    KernelSpec,
)

__all__ = [
    "LogNormalPrior",
    "PriorSpec",
    "default_priors",
    "log_prior",
    "grad_log_prior",
    "median_hyperparams",
    "save_priors",
    "load_priors",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LogNormalPrior:
    """Prior ``log(theta) ~ Normal(nu, lam)`` with lam the variance."""

    nu: float
    lam: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.nu) and np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"invalid lognormal prior (nu={self.nu!r}, lam={self.lam!r})")

    def median(self) -> float:
        return math.exp(self.nu)

    def quantile(self, q: float) -> float:
        return math.exp(self.nu + math.sqrt(self.lam) * float(ndtri(q)))

    def logpdf(self, theta: float) -> float:
        """Lognormal density of theta itself (includes the 1/theta Jacobian)."""
        if not np.isfinite(theta) or theta <= 0:
            raise InvalidHyperparameterError(f"lognormal prior needs theta > 0, got {theta!r}")
        u = math.log(theta)
        return -u - 0.5 * math.log(self.lam) - 0.5 * _LOG_2PI - (u - self.nu) ** 2 / (2.0 * self.lam)

    def dlogpdf_dlog(self, u: float) -> float:
        """Derivative of ``logpdf(exp(u))`` with respect to ``u``."""
        return -1.0 - (u - self.nu) / self.lam


@dataclass(frozen=True)
class PriorSpec:
    """Mapping from trainable-parameter name to its lognormal prior."""

    entries: dict[str, LogNormalPrior]

    def __post_init__(self) -> None:
        variances = [self.entries[n] for n in VARIANCE_PARAMS if n in self.entries]
        if len({(p.nu, p.lam) for p in variances}) > 1:
            raise ValueError("all variance parameters must share a single prior")
        lams = {self.entries[n].lam for n in LENGTHSCALE_PARAMS if n in self.entries}
        if len(lams) > 1:
            raise ValueError("all lengthscale-type parameters must share one log-variance")

    def __getitem__(self, name: str) -> LogNormalPrior:
        try:
            return self.entries[name]
        except KeyError:
            raise KeyError(f"no prior defined for hyperparameter {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def names(self) -> tuple[str, ...]:
        return tuple(self.entries)


def default_priors() -> PriorSpec:
    """The calibrated default priors (see the module docstring)."""
    variance = LogNormalPrior(nu=-1.5, lam=1.0)
    entries = {name: variance for name in VARIANCE_PARAMS}
    entries["ell_per"] = LogNormalPrior(nu=0.2, lam=1.0)
    entries["ell_per2"] = LogNormalPrior(nu=0.2, lam=1.0)
    entries["ell_rbf"] = LogNormalPrior(nu=1.1, lam=1.0)
    entries["ell_sm1"] = LogNormalPrior(nu=-0.7, lam=1.0)
    entries["tau_sm1"] = LogNormalPrior(nu=0.5, lam=1.0)
    entries["ell_sm2"] = LogNormalPrior(nu=1.1, lam=1.0)
    entries["tau_sm2"] = LogNormalPrior(nu=1.6, lam=1.0)
    return PriorSpec(entries=entries)


def _names_for(priors: PriorSpec, theta: HyperParams, spec: KernelSpec | None) -> tuple[str, ...]:
    if spec is not None:
        return spec.trainable_names()
    return tuple(n for n in priors.names() if getattr(theta, n) is not None)


def log_prior(priors: PriorSpec, theta: HyperParams, spec: KernelSpec | None = None) -> float:
    """Sum of lognormal log-densities over the trainable parameters.

    With ``spec`` given, the sum runs over exactly the spec's trainables;
    otherwise over every parameter set on ``theta`` that has a prior.
    """
    return sum(priors[name].logpdf(theta.get(name)) for name in _names_for(priors, theta, spec))


def grad_log_prior(priors: PriorSpec, theta: HyperParams, spec: KernelSpec | None = None) -> np.ndarray:
    """Gradient of the log-prior w.r.t. the log-space trainable vector."""
    names = _names_for(priors, theta, spec)
    u = np.log([theta.get(name) for name in names])
    return np.array([priors[name].dlogpdf_dlog(u_k) for name, u_k in zip(names, u)])


def log_prior_vector(priors: PriorSpec, names: tuple[str, ...], u: np.ndarray) -> float:
    """Log-prior evaluated directly on a log-space vector."""
    total = 0.0
    for name, u_k in zip(names, u):
        p = priors[name]
        total += -u_k - 0.5 * math.log(p.lam) - 0.5 * _LOG_2PI - (u_k - p.nu) ** 2 / (2.0 * p.lam)
    return total


def grad_log_prior_vector(priors: PriorSpec, names: tuple[str, ...], u: np.ndarray) -> np.ndarray:
    return np.array([priors[name].dlogpdf_dlog(u_k) for name, u_k in zip(names, u)])


def median_hyperparams(spec: KernelSpec, priors: PriorSpec | None = None) -> HyperParams:
    """Hyperparameters at the prior medians, periods copied from the spec.

    This is the training start point: in log space the medians are the
    prior means, which makes a single optimizer start reproducible.
    """
    priors = priors if priors is not None else default_priors()
    values: dict[str, float] = {name: priors[name].median() for name in spec.trainable_names()}
    if spec.has("PER"):
        values["period"] = spec.term("PER").period
    if spec.has("PER2"):
        values["period2"] = spec.term("PER2").period
    return HyperParams(**values)


def save_priors(priors: PriorSpec, path) -> None:
    """Write priors as ``name = nu lam`` lines (parse back with load_priors)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# lognormal hyperparameter priors: name = nu lam\n")
        for name in priors.names():
            p = priors[name]
            fh.write(f"{name} = {p.nu!r} {p.lam!r}\n")


def format_priors(priors: PriorSpec) -> str:
    buf = io.StringIO()
    buf.write("# lognormal hyperparameter priors: name = nu lam\n")
    for name in priors.names():
        p = priors[name]
        buf.write(f"{name} = {p.nu!r} {p.lam!r}\n")
    return buf.getvalue()


def load_priors(path) -> PriorSpec:
    """Parse a priors file written by :func:`save_priors`.

    Unknown parameter names, bad numbers, and missing entries for known
    names are all reported with the offending line number.
    """
    known = set(VARIANCE_PARAMS) | set(LENGTHSCALE_PARAMS)
    entries: dict[str, LogNormalPrior] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected 'name = nu lam'")
            name, _, rest = line.partition("=")
            name = name.strip()
            if name not in known:
                raise ValueError(f"{path}: line {lineno}: unknown hyperparameter {name!r}")
            if name in entries:
                raise ValueError(f"{path}: line {lineno}: duplicate entry for {name!r}")
            parts = rest.split()
            if len(parts) != 2:
                raise ValueError(f"{path}: line {lineno}: expected two numbers (nu lam)")
            try:
                nu, lam = float(parts[0]), float(parts[1])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: could not parse numbers {parts!r}") from None
            try:
                entries[name] = LogNormalPrior(nu=nu, lam=lam)
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    missing = sorted(known - set(entries))
    if missing:
        raise ValueError(f"{path}: missing priors for {missing}")
    return PriorSpec(entries=entries)
