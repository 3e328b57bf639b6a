"""High-probability evidence from Monte-Carlo counts and pair statistics.

These functions turn raw observation records (binomial counts, antithetic
pair tallies, pairwise dot-product means) into the one-sided confidence
values the certificate formulas consume, with explicit failure-budget
accounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import betaincinv

from .certificates import SmoothingParams, max_gradient_norm

__all__ = [
    "BinomialObservation",
    "PairObservation",
    "GradientEstimate",
    "ConfidenceBudget",
    "budget_for_method",
    "binomial_lower_bound",
    "gradient_deviation_bound",
    "gradient_norm_upper_bound",
    "dipole_mass_lower_bounds",
]


@dataclass(frozen=True)
class BinomialObservation:
    """Success count over a fixed number of independent indicator draws."""

    successes: int
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.successes <= self.trials:
            raise ValueError(
                f"successes must lie in [0, trials]: {self.successes}/{self.trials}"
            )


@dataclass(frozen=True)
class PairObservation:
    """Joint outcome counts of (f(x+eps), f(x-eps)) over antithetic pairs.

    n11 counts pairs hitting the target class on both sides, n10 only on
    the +eps side, n01 only on the -eps side, n00 on neither.
    """

    n11: int
    n10: int
    n01: int
    n00: int

    def __post_init__(self):
        for name in ("n11", "n10", "n01", "n00"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.n == 0:
            raise ValueError("pair observation needs at least one pair")

    @property
    def n(self) -> int:
        return self.n11 + self.n10 + self.n01 + self.n00


@dataclass(frozen=True)
class GradientEstimate:
    """Mean pairwise dot-product statistic for the squared-gradient norm.

    pair_dot_mean estimates sigma^4 * ||grad||^2 from n_pairs disjoint
    sample pairs in dimension dim.  abs_dot_cap, when recorded by the
    sampler, is the largest |eps . eps'| seen and bounds the statistic.
    """

    pair_dot_mean: float
    n_pairs: int
    dim: int
    abs_dot_cap: float | None = None

    def __post_init__(self):
        if self.n_pairs < 1:
            raise ValueError(f"n_pairs must be >= 1, got {self.n_pairs}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.abs_dot_cap is not None and abs(self.pair_dot_mean) > self.abs_dot_cap * (1 + 1e-12):
            raise ValueError(
                f"pair_dot_mean {self.pair_dot_mean!r} exceeds recorded cap {self.abs_dot_cap!r}"
            )


@dataclass(frozen=True)
class ConfidenceBudget:
    """Total failure probability and its split across estimated statistics."""

    eta: float
    split: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must be in (0, 1), got {self.eta!r}")
        if sum(a for _, a in self.split) > self.eta * (1 + 1e-12):
            raise ValueError(f"allocations exceed eta: {self.split!r}")

    def allocation(self, name: str) -> float:
        for key, value in self.split:
            if key == name:
                return value
        raise KeyError(name)


def budget_for_method(method: str, eta: float) -> ConfidenceBudget:
    """Documented failure-budget split for each certification method.

    "first" spends the whole budget on the value bound; "second" halves it
    between the value and the gradient bound; "dipole" (and "best", which
    reuses dipole evidence) halves it between the two mass bounds.
    """
    if method == "first":
        return ConfidenceBudget(eta, (("p", eta),))
    if method == "second":
        return ConfidenceBudget(eta, (("p", eta / 2), ("grad", eta / 2)))
    if method in ("dipole", "best"):
        return ConfidenceBudget(eta, (("sym", eta / 2), ("asym", eta / 2)))
    raise ValueError(f"unknown method {method!r}")


def binomial_lower_bound(obs: BinomialObservation, alpha: float) -> float:
    """Exact one-sided (Clopper-Pearson) lower confidence limit.

    Returns the p solving Pr[Binomial(trials, p) >= successes] = alpha,
    via the inverse regularized incomplete beta function; 0 when there
    are no successes.  The true value falls below the bound with
    probability at most alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha!r}")
    if obs.successes == 0:
        return 0.0
    return float(betaincinv(obs.successes, obs.trials - obs.successes + 1, alpha))


def gradient_deviation_bound(
    n_pairs: int, dim: int, params: SmoothingParams, eta: float
) -> float:
    """One-sided deviation allowance for the pairwise dot-product mean.

    With probability at most eta the statistic undershoots its expectation
    by more than the returned t.  Two-case sub-exponential form:

        t = 4 sigma^2 sqrt(-(d/n) ln eta)      if -2 ln eta <= d n
        t = -(4 sqrt(2) sigma^2 / n) ln eta    otherwise
    """
    if n_pairs < 1 or dim < 1:
        raise ValueError("n_pairs and dim must be >= 1")
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must be in (0, 1), got {eta!r}")
    s2 = params.sigma * params.sigma
    log_eta = math.log(eta)
    if -2.0 * log_eta <= dim * n_pairs:
        return 4.0 * s2 * math.sqrt(-(dim / n_pairs) * log_eta)
    return -(4.0 * math.sqrt(2.0) * s2 / n_pairs) * log_eta


def gradient_norm_upper_bound(
    est: GradientEstimate, params: SmoothingParams, eta_alloc: float, p_lb: float
) -> float:
    """Upper confidence value for the gradient norm, capped at the physical max.

    The certificate shrinks as the gradient bound grows, so soundness
    needs a value that exceeds the true norm with probability 1 - eta:
    sigma^-2 sqrt(pair_dot_mean + t), clamped into [0, cap(p_lb)].
    """
    if not p_lb > 0.5:
        raise ValueError(f"certification context requires p_lb > 0.5, got {p_lb!r}")
    if not eta_alloc > 0.0:
        raise ValueError(f"eta_alloc must be > 0, got {eta_alloc!r}")
    t = gradient_deviation_bound(est.n_pairs, est.dim, params, eta_alloc)
    raw = math.sqrt(max(est.pair_dot_mean + t, 0.0)) / (params.sigma * params.sigma)
    return min(raw, max_gradient_norm(p_lb, params))


def dipole_mass_lower_bounds(obs: PairObservation, eta: float) -> tuple[float, float]:
    """Joint lower bounds on the symmetric and asymmetric masses.

    Each mass gets an exact binomial bound at eta/2; by the union bound
    both hold simultaneously with probability at least 1 - eta.  The
    asymmetric mass uses the (1, 0) count alone: the mirrored (0, 1)
    count estimates the same quantity but the two are not independent
    draws, so it serves only as a symmetry diagnostic.
    """
    n = obs.n
    sym_lb = binomial_lower_bound(BinomialObservation(obs.n11, n), eta / 2)
    asym_lb = binomial_lower_bound(BinomialObservation(obs.n10, n), eta / 2)
    return sym_lb, asym_lb
