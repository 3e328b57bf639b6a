"""Certified-radius computations for Gaussian-smoothed classifiers.

Three certificate families are provided, all as closed forms or monotone
root-finding problems over the standard-normal primitives:

* first order: radius from the smoothed top-class value alone,
* second order: radius from the value plus a bound on the gradient norm,
* dipole: radius from the symmetric/asymmetric mass split measured with
  antithetic sample pairs.

Bound evaluators return the guaranteed smoothed value at a given distance;
radius solvers invert them at the 0.5 decision level by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .normal import std_cdf, std_pdf, std_quantile

__all__ = [
    "SmoothingParams",
    "FirstOrderEvidence",
    "SecondOrderEvidence",
    "DipoleEvidence",
    "Certificate",
    "METHODS",
    "max_gradient_norm",
    "first_order_radius",
    "anchor_mass",
    "second_order_lower_bound",
    "second_order_radius",
    "dipole_lower_bound",
    "dipole_radius",
    "smoothed_value_upper_bound",
    "BoundCurveRequest",
    "RadiusCurveRequest",
    "certificate_curve",
]

METHODS = ("first", "second", "dipole", "best")

ANCHOR_RESIDUAL_TOL = 1e-10
RADIUS_TOL_SIGMAS = 1e-6
_RADIUS_CAP_SIGMAS = 40.0


@dataclass(frozen=True)
class SmoothingParams:
    """Isotropic Gaussian smoothing noise with standard deviation sigma."""

    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError(f"sigma must be finite and positive, got {self.sigma!r}")


@dataclass(frozen=True)
class FirstOrderEvidence:
    """Lower bound on (or exact value of) the smoothed top-class value."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p outside [0, 1]: {self.p!r}")


@dataclass(frozen=True)
class SecondOrderEvidence:
    """Smoothed value plus an upper bound on its gradient L2 norm.

    grad_norm may exceed the physical maximum sigma^-1 * pdf(quantile(p));
    consumers clamp it to that cap, which degrades the certificate to
    first order rather than erroring on noisy estimates.
    """

    p: float
    grad_norm: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p outside [0, 1]: {self.p!r}")
        if not self.grad_norm >= 0.0:
            raise ValueError(f"grad_norm must be >= 0, got {self.grad_norm!r}")


@dataclass(frozen=True)
class DipoleEvidence:
    """Lower bounds on the symmetric and asymmetric top-class masses.

    sym is the mass where the classifier hits the class at both x+eps and
    x-eps; asym is the mass where only x+eps hits.  Their sum never
    exceeds the smoothed value, hence sym + asym <= 1.
    """

    sym: float
    asym: float

    def __post_init__(self):
        if not 0.0 <= self.sym <= 1.0 or not 0.0 <= self.asym <= 1.0:
            raise ValueError(f"masses outside [0, 1]: {self.sym!r}, {self.asym!r}")
        if self.sym + self.asym > 1.0 + 1e-12:
            raise ValueError(f"sym + asym exceeds 1: {self.sym + self.asym!r}")


@dataclass(frozen=True)
class Certificate:
    """A certified L2 radius with its provenance.

    label and evidence are populated by the sampling pipeline; the radius
    is 0 whenever the pipeline abstained.
    """

    radius: float
    method: str
    abstained: bool
    eta: float
    label: int | None = None
    evidence: object | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not (math.isfinite(self.radius) and self.radius >= 0.0):
            raise ValueError(f"radius must be finite and >= 0, got {self.radius!r}")
        if self.abstained and self.radius != 0.0:
            raise ValueError("abstained certificates must have radius 0")


def max_gradient_norm(p: float, params: SmoothingParams) -> float:
    """Largest gradient norm any smoothed classifier can have at value p."""
    return std_pdf(std_quantile(p)) / params.sigma


def first_order_radius(p: float, params: SmoothingParams) -> float:
    """Certified radius from the smoothed value alone: sigma * quantile(p).

    Returns 0 (abstention) for p <= 0.5.
    """
    if p <= 0.5:
        return 0.0
    return params.sigma * std_quantile(p)


def anchor_mass(p: float, grad_norm: float, params: SmoothingParams) -> float:
    """Probability mass below the lower face of the worst-case slab.

    Solves, by bisection on [0, (1-p)/2],

        pdf(quantile(a)) - pdf(quantile(a + p)) = -sigma * grad_norm

    whose left-hand side increases strictly in a (its derivative is
    quantile(a + p) - quantile(a) > 0).  A gradient at or beyond the
    physical cap pdf(quantile(p))/sigma is clamped to the cap, which
    makes the worst case the plain halfspace (a = 0).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"anchor_mass requires 0 < p < 1, got {p!r}")
    if not grad_norm >= 0.0:
        raise ValueError(f"grad_norm must be >= 0, got {grad_norm!r}")
    hi = 0.5 * (1.0 - p)
    if grad_norm == 0.0:
        # Symmetric sandwich: the slab is centred, exactly (1-p)/2 below.
        return hi
    target = -params.sigma * grad_norm
    if target <= -std_pdf(std_quantile(p)):
        return 0.0

    def residual(a: float) -> float:
        return std_pdf(std_quantile(a)) - std_pdf(std_quantile(a + p)) - target

    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = residual(mid)
        if abs(r) <= ANCHOR_RESIDUAL_TOL:
            return mid
        if r < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _interval_bound(q_lo: float, q_hi: float, shift: float) -> float:
    """Mass of [quantile^-1 interval] after shifting the Gaussian by `shift`."""
    return float(std_cdf(q_hi - shift)) - float(std_cdf(q_lo - shift))


def second_order_lower_bound(
    ev: SecondOrderEvidence, params: SmoothingParams, rho: float
) -> float:
    """Guaranteed smoothed value at any point within distance rho.

    Strictly decreasing in rho; equals ev.p at rho = 0; with the gradient
    at its physical cap it coincides with the first-order bound.
    """
    if rho < 0.0:
        raise ValueError(f"rho must be >= 0, got {rho!r}")
    if rho == 0.0:
        return ev.p
    a = anchor_mass(ev.p, ev.grad_norm, params)
    return _interval_bound(std_quantile(a), std_quantile(a + ev.p), rho / params.sigma)


def _largest_radius(bound_at: "callable", sigma: float) -> float:
    """Largest rho with bound_at(rho) >= 0.5, assuming bound_at decreases.

    Bracket found by doubling from sigma (capped at 40 sigma), then
    bisection to an absolute tolerance of 1e-6 * sigma.
    """
    hi = sigma
    while bound_at(hi) >= 0.5:
        hi *= 2.0
        if hi >= _RADIUS_CAP_SIGMAS * sigma:
            return _RADIUS_CAP_SIGMAS * sigma
    lo = 0.0
    tol = RADIUS_TOL_SIGMAS * sigma
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bound_at(mid) >= 0.5:
            lo = mid
        else:
            hi = mid
    return lo


def second_order_radius(ev: SecondOrderEvidence, params: SmoothingParams) -> float:
    """Certified radius from the smoothed value and a gradient-norm bound.

    Abstains (returns 0) for p <= 0.5.  With exact evidence this never
    falls below the first-order radius at the same p, and it reduces to
    it exactly when the gradient sits at its physical cap.
    """
    if ev.p <= 0.5:
        return 0.0
    a = anchor_mass(ev.p, ev.grad_norm, params)
    q_lo = std_quantile(a)
    q_hi = std_quantile(a + ev.p)
    return _largest_radius(
        lambda rho: _interval_bound(q_lo, q_hi, rho / params.sigma), params.sigma
    )


def dipole_lower_bound(ev: DipoleEvidence, params: SmoothingParams, rho: float) -> float:
    """Guaranteed smoothed value at distance rho from antithetic-pair evidence.

    Equals sym + asym at rho = 0, decreases strictly in rho, and increases
    in each mass separately.  With asym = 0 it matches the zero-gradient
    second-order bound; with sym = 0 it matches the first-order bound.
    """
    if rho < 0.0:
        raise ValueError(f"rho must be >= 0, got {rho!r}")
    if rho == 0.0:
        return ev.sym + ev.asym
    shift = rho / params.sigma
    asym_part = float(std_cdf(std_quantile(ev.asym) - shift))
    sym_part = _interval_bound(
        std_quantile(0.5 * (1.0 - ev.sym)), std_quantile(0.5 * (1.0 + ev.sym)), shift
    )
    return asym_part + sym_part


def dipole_radius(ev: DipoleEvidence, params: SmoothingParams) -> float:
    """Certified radius from the dipole mass split; abstains at sym+asym <= 0.5."""
    if ev.sym + ev.asym <= 0.5:
        return 0.0
    q_asym = std_quantile(ev.asym)
    q_lo = std_quantile(0.5 * (1.0 - ev.sym))
    q_hi = std_quantile(0.5 * (1.0 + ev.sym))

    def bound_at(rho: float) -> float:
        shift = rho / params.sigma
        return float(std_cdf(q_asym - shift)) + _interval_bound(q_lo, q_hi, shift)

    return _largest_radius(bound_at, params.sigma)


def smoothed_value_upper_bound(
    p: float, grad_norm: float, params: SmoothingParams, rho: float
) -> float:
    """Guaranteed *upper* bound on the smoothed value at distance rho.

    Obtained by applying the lower bound to the complementary classifier:
    1 - second_order_lower_bound(1 - p, grad_norm, rho).
    """
    return 1.0 - second_order_lower_bound(
        SecondOrderEvidence(1.0 - p, grad_norm), params, rho
    )


@dataclass(frozen=True)
class BoundCurveRequest:
    """Bound-versus-distance sweep at fixed evidence (value + gradient bound)."""

    p: float
    grad_norm: float
    sigma: float
    rho_min: float = 0.0
    rho_max: float = 3.0
    steps: int = 100


@dataclass(frozen=True)
class RadiusCurveRequest:
    """Radius-versus-p sweep for a list of gradient norms.

    Gradients are given as fractions of the p-dependent physical maximum,
    so frac 1.0 reproduces the first-order radius pointwise and frac 0.0
    is the zero-gradient curve.
    """

    p_min: float
    p_max: float
    steps: int
    grad_fracs: tuple[float, ...]
    sigma: float


def _grid(lo: float, hi: float, steps: int) -> list[float]:
    if steps < 1:
        raise ValueError(f"grid needs at least one point, got steps={steps}")
    if hi < lo:
        raise ValueError(f"inverted grid: [{lo}, {hi}]")
    if steps > 1 and hi == lo:
        raise ValueError(f"degenerate grid: {steps} points on [{lo}, {hi}]")
    if steps == 1:
        return [lo]
    h = (hi - lo) / (steps - 1)
    return [lo + i * h for i in range(steps)]


def certificate_curve(request) -> tuple[list[str], list[tuple]]:
    """Tabulate a certificate curve; returns (header, rows).

    Rows are strictly ordered on the sweep variable, one per grid point.
    """
    if isinstance(request, BoundCurveRequest):
        if request.rho_min < 0.0:
            raise ValueError("rho_min must be >= 0")
        params = SmoothingParams(request.sigma)
        ev = SecondOrderEvidence(request.p, request.grad_norm)
        rows = [
            (rho, second_order_lower_bound(ev, params, rho))
            for rho in _grid(request.rho_min, request.rho_max, request.steps)
        ]
        return ["rho", "bound"], rows
    if isinstance(request, RadiusCurveRequest):
        if not request.grad_fracs:
            raise ValueError("at least one gradient fraction is required")
        if any(not 0.0 <= f <= 1.0 for f in request.grad_fracs):
            raise ValueError(f"gradient fractions outside [0, 1]: {request.grad_fracs}")
        if not (0.0 < request.p_min and request.p_max < 1.0):
            raise ValueError("p grid must lie inside (0, 1)")
        params = SmoothingParams(request.sigma)
        header = ["p"] + [f"radius_gfrac_{f:g}" for f in request.grad_fracs]
        rows = []
        for p in _grid(request.p_min, request.p_max, request.steps):
            cap = max_gradient_norm(p, params)
            rows.append(
                tuple(
                    [p]
                    + [
                        second_order_radius(SecondOrderEvidence(p, f * cap), params)
                        for f in request.grad_fracs
                    ]
                )
            )
        return header, rows
    raise TypeError(f"unsupported curve request: {request!r}")
