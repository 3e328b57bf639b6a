"""Seeded Monte-Carlo orchestration and the two-stage certification pipeline.

Sampling is organized in fixed 4096-sample chunks, each driven by its own
counter-based (Philox) stream keyed on (seed, stage, chunk index).  Chunk
results are merged in ascending chunk order, so counts, pair statistics
and certificates are bit-identical for any worker count and across runs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .certificates import (
    Certificate,
    DipoleEvidence,
    FirstOrderEvidence,
    SecondOrderEvidence,
    SmoothingParams,
    dipole_radius,
    first_order_radius,
    max_gradient_norm,
    second_order_radius,
)
from .estimation import (
    BinomialObservation,
    GradientEstimate,
    PairObservation,
    binomial_lower_bound,
    budget_for_method,
    dipole_mass_lower_bounds,
    gradient_deviation_bound,
)

__all__ = [
    "CHUNK",
    "SamplingPlan",
    "SamplingError",
    "sample_counts",
    "sample_dipole_pairs",
    "sample_gradient_pairs",
    "certify",
]

CHUNK = 4096  # samples per RNG stream; even, so disjoint pairs never straddle

_STAGE_SELECT = 0
_STAGE_ESTIMATE = 1
_SEED_MASK = (1 << 64) - 1


class SamplingError(RuntimeError):
    """Classifier failure during sampling, tagged with the sample range."""


@dataclass(frozen=True)
class SamplingPlan:
    """Sample budget and reproducibility knobs for one certification.

    n0 drives stage-1 class selection, n the stage-2 estimate.  n must be
    even whenever the plan feeds pair-based estimators.
    """

    n0: int
    n: int
    sigma: float
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.n0 < 1:
            raise ValueError(f"n0 must be >= 1, got {self.n0}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be finite and positive, got {self.sigma!r}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @property
    def params(self) -> SmoothingParams:
        return SmoothingParams(self.sigma)


def _chunk_rng(seed: int, stage: int, index: int) -> np.random.Generator:
    key = np.array(
        [seed & _SEED_MASK, ((stage & 0xFF) << 56) | (index & ((1 << 56) - 1))],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def _map_chunks(total: int, workers: int, chunk_fn):
    """Run chunk_fn(index, start, size) per chunk; results in chunk order."""
    sizes = [
        (i, start, min(CHUNK, total - start))
        for i, start in enumerate(range(0, total, CHUNK))
    ]
    if workers == 1 or len(sizes) == 1:
        return [chunk_fn(*job) for job in sizes]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: chunk_fn(*job), sizes))


def _worker_classifiers(classifier, workers: int):
    """One classifier handle per worker when the classifier supports cloning."""
    if workers > 1 and hasattr(classifier, "clone"):
        return [classifier] + [classifier.clone() for _ in range(workers - 1)]
    return [classifier]


def _release_clones(handles) -> None:
    for handle in handles[1:]:
        handle.close()


def _classify_noisy(classifier, x, eps, start: int):
    try:
        return classifier.classify(x[None, :] + eps)
    except Exception as exc:
        raise SamplingError(
            f"classifier failed on samples [{start}, {start + eps.shape[0]})"
        ) from exc


def _class_histogram(classifier, x, plan: SamplingPlan, total: int, stage: int):
    x = np.asarray(x, dtype=float)
    num_classes = classifier.num_classes
    handles = _worker_classifiers(classifier, plan.workers)

    def one_chunk(index, start, size):
        rng = _chunk_rng(plan.seed, stage, index)
        eps = rng.standard_normal((size, x.size)) * plan.sigma
        labels = _classify_noisy(handles[index % len(handles)], x, eps, start)
        return np.bincount(labels, minlength=num_classes)

    try:
        partials = _map_chunks(total, plan.workers, one_chunk)
    finally:
        _release_clones(handles)
    hist = np.zeros(num_classes, dtype=np.int64)
    for part in partials:
        hist += part
    return hist


def sample_counts(classifier, x, plan: SamplingPlan, target_class: int) -> BinomialObservation:
    """Count target-class hits over n i.i.d. Gaussian perturbations of x."""
    hist = _class_histogram(classifier, x, plan, plan.n, _STAGE_ESTIMATE)
    return BinomialObservation(int(hist[target_class]), plan.n)


def sample_dipole_pairs(classifier, x, plan: SamplingPlan, target_class: int) -> PairObservation:
    """Tally joint outcomes of (f(x+eps), f(x-eps)) over n/2 antithetic pairs.

    A pair costs two classifier evaluations, so the plan's n is the total
    evaluation budget, matching the plain sampler.
    """
    if plan.n % 2 != 0:
        raise ValueError("dipole sampling needs an even n")
    x = np.asarray(x, dtype=float)
    n_pairs = plan.n // 2
    handles = _worker_classifiers(classifier, plan.workers)

    def one_chunk(index, start, size):
        rng = _chunk_rng(plan.seed, _STAGE_ESTIMATE, index)
        eps = rng.standard_normal((size, x.size)) * plan.sigma
        handle = handles[index % len(handles)]
        plus = _classify_noisy(handle, x, eps, start) == target_class
        minus = _classify_noisy(handle, x, -eps, start) == target_class
        return np.array(
            [
                np.count_nonzero(plus & minus),
                np.count_nonzero(plus & ~minus),
                np.count_nonzero(~plus & minus),
                np.count_nonzero(~plus & ~minus),
            ],
            dtype=np.int64,
        )

    try:
        partials = _map_chunks(n_pairs, plan.workers, one_chunk)
    finally:
        _release_clones(handles)
    n11, n10, n01, n00 = np.sum(partials, axis=0)
    return PairObservation(int(n11), int(n10), int(n01), int(n00))


def sample_gradient_pairs(
    classifier, x, plan: SamplingPlan, target_class: int
) -> tuple[BinomialObservation, GradientEstimate]:
    """Draw n perturbations; count all indicators and form n/2 disjoint pairs.

    The same samples back both statistics: the full count feeds the value
    bound while consecutive disjoint pairs (2i, 2i+1) accumulate the mean
    of (eps f) . (eps' f'), the squared-gradient statistic.
    """
    if plan.n % 2 != 0:
        raise ValueError("gradient pair sampling needs an even n")
    x = np.asarray(x, dtype=float)
    handles = _worker_classifiers(classifier, plan.workers)

    def one_chunk(index, start, size):
        rng = _chunk_rng(plan.seed, _STAGE_ESTIMATE, index)
        eps = rng.standard_normal((size, x.size)) * plan.sigma
        hits = (
            _classify_noisy(handles[index % len(handles)], x, eps, start)
            == target_class
        )
        even, odd = eps[0::2], eps[1::2]
        dots = np.einsum("ij,ij->i", even, odd)
        both = hits[0::2] & hits[1::2]
        dot_cap = float(np.max(np.abs(dots))) if dots.size else 0.0
        return int(np.count_nonzero(hits)), float(dots[both].sum()), dot_cap

    try:
        partials = _map_chunks(plan.n, plan.workers, one_chunk)
    finally:
        _release_clones(handles)
    successes = sum(part[0] for part in partials)
    dot_sum = 0.0
    dot_cap = 0.0
    for _, chunk_sum, chunk_cap in partials:  # ascending chunk order: bit-stable
        dot_sum += chunk_sum
        dot_cap = max(dot_cap, chunk_cap)
    n_pairs = plan.n // 2
    obs = BinomialObservation(successes, plan.n)
    est = GradientEstimate(dot_sum / n_pairs, n_pairs, x.size, abs_dot_cap=dot_cap)
    return obs, est


def _capped_gradient_bound(est: GradientEstimate, params, eta_alloc: float, p_lb: float) -> float:
    t = gradient_deviation_bound(est.n_pairs, est.dim, params, eta_alloc)
    raw = math.sqrt(max(est.pair_dot_mean + t, 0.0)) / (params.sigma * params.sigma)
    if p_lb <= 0.0:
        return 0.0
    return min(raw, max_gradient_norm(p_lb, params))


def certify(classifier, x, plan: SamplingPlan, eta: float, method: str = "first") -> Certificate:
    """Two-stage certification of the smoothed classifier at x.

    Stage 1 picks the majority class from n0 samples (ties to the lowest
    class index); stage 2 runs the method's sampler and estimator with
    the documented eta split and solves for the radius.  The pipeline
    abstains whenever the value evidence does not exceed 0.5.  Method
    "best" reuses the dipole evidence and returns the larger of the
    first-order and dipole radii, both valid under the same event.
    """
    budget = budget_for_method(method, eta)
    x = np.asarray(x, dtype=float)
    params = plan.params
    hist = _class_histogram(classifier, x, plan, plan.n0, _STAGE_SELECT)
    label = int(np.argmax(hist))

    if method == "first":
        obs = sample_counts(classifier, x, plan, label)
        p_lb = binomial_lower_bound(obs, budget.allocation("p"))
        evidence = FirstOrderEvidence(p_lb)
        radius = first_order_radius(p_lb, params)
    elif method == "second":
        obs, est = sample_gradient_pairs(classifier, x, plan, label)
        p_lb = binomial_lower_bound(obs, budget.allocation("p"))
        grad_ub = _capped_gradient_bound(est, params, budget.allocation("grad"), p_lb)
        evidence = SecondOrderEvidence(p_lb, grad_ub)
        radius = second_order_radius(evidence, params)
    elif method in ("dipole", "best"):
        pairs = sample_dipole_pairs(classifier, x, plan, label)
        sym_lb, asym_lb = dipole_mass_lower_bounds(pairs, eta)
        evidence = DipoleEvidence(sym_lb, asym_lb)
        radius = dipole_radius(evidence, params)
        if method == "best":
            radius = max(radius, first_order_radius(sym_lb + asym_lb, params))
    else:
        raise ValueError(f"unknown method {method!r}")

    abstained = radius <= 0.0
    return Certificate(
        radius=0.0 if abstained else radius,
        method=method,
        abstained=abstained,
        eta=eta,
        label=label,
        evidence=evidence,
    )
