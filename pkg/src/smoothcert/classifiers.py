"""Hard base classifiers for experiments and their analytic smoothing oracles.

Halfspaces and slabs admit closed-form smoothed values and gradient norms,
so they double as exact oracles for the Monte-Carlo pipeline and as the
worst-case constructions that realize the certificate equality cases.
A nearest-neighbour classifier backs the dataset experiments, and an
external line-protocol client lets out-of-process models (e.g. neural
networks) serve as base classifiers.
"""

from __future__ import annotations

import math
import shlex
import subprocess
import threading
from dataclasses import dataclass

import numpy as np

from .certificates import SmoothingParams, anchor_mass, max_gradient_norm
from .normal import std_cdf, std_pdf, std_quantile

__all__ = [
    "Halfspace",
    "Slab",
    "NearestNeighbor",
    "halfspace_oracle",
    "slab_oracle",
    "worst_case_slab",
    "nn_classify",
    "swiss_roll_dataset",
    "ProtocolError",
    "HandshakeError",
    "BrokenStreamError",
    "DimensionMismatchError",
    "ExternalClassifier",
    "PROTOCOL_TAG",
]


def _as_vector(w, name: str = "w") -> np.ndarray:
    v = np.asarray(w, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return v


class Halfspace:
    """Linear classifier: label 1 exactly on the halfspace w.z <= b."""

    def __init__(self, w, b: float):
        self.w = _as_vector(w)
        self.norm = float(np.linalg.norm(self.w))
        if self.norm == 0.0:
            raise ValueError("w must be nonzero")
        self.b = float(b)
        self.num_classes = 2

    @property
    def dim(self) -> int:
        return self.w.size

    def classify(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {points.shape[-1]}")
        return (points @ self.w <= self.b).astype(np.int64)


class Slab:
    """Classifier that is 1 exactly on the slab lo <= w.z <= hi.

    lo may be -inf (the halfspace limit) and hi may be +inf.
    """

    def __init__(self, w, lo: float, hi: float):
        self.w = _as_vector(w)
        self.norm = float(np.linalg.norm(self.w))
        if self.norm == 0.0:
            raise ValueError("w must be nonzero")
        if not lo < hi:
            raise ValueError(f"slab needs lo < hi, got [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)
        self.num_classes = 2

    @property
    def dim(self) -> int:
        return self.w.size

    def classify(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {points.shape[-1]}")
        proj = points @ self.w
        return ((proj >= self.lo) & (proj <= self.hi)).astype(np.int64)


def _projected(x, w: np.ndarray, dim: int) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise ValueError(f"x must have shape ({dim},), got {x.shape}")
    return float(x @ w)


def halfspace_oracle(
    h: Halfspace, x, params: SmoothingParams
) -> tuple[float, float]:
    """Exact smoothed value and gradient norm of a halfspace at x.

    p = cdf((b - w.x) / (sigma |w|)); the gradient always sits at its
    physical maximum pdf(quantile(p)) / sigma, the linear worst case.
    """
    z = (h.b - _projected(x, h.w, h.dim)) / (params.sigma * h.norm)
    p = float(std_cdf(z))
    return p, std_pdf(z) / params.sigma


def slab_oracle(s: Slab, x, params: SmoothingParams) -> tuple[float, float]:
    """Exact smoothed value and gradient norm of a slab at x."""
    t = _projected(x, s.w, s.dim)
    scale = params.sigma * s.norm
    z_lo = (s.lo - t) / scale if math.isfinite(s.lo) else -math.inf
    z_hi = (s.hi - t) / scale if math.isfinite(s.hi) else math.inf
    p = float(std_cdf(z_hi)) - float(std_cdf(z_lo))
    grad = abs(std_pdf(z_lo) - std_pdf(z_hi)) / params.sigma
    return p, grad


def worst_case_slab(
    p: float, grad_norm: float, x, direction, params: SmoothingParams
) -> Slab:
    """Slab realizing the second-order certificate equality case at x.

    The slab normal is `direction` (a unit vector); its faces sit at the
    anchor-mass quantiles, so slab_oracle reproduces (p, grad_norm).  A
    gradient more than 1e-12 above the physical cap is rejected.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"worst_case_slab requires 0 < p < 1, got {p!r}")
    u = _as_vector(direction, "direction")
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    cap = max_gradient_norm(p, params)
    if grad_norm > cap + 1e-12:
        raise ValueError(
            f"infeasible evidence: grad_norm {grad_norm!r} exceeds the cap {cap!r}"
        )
    a = anchor_mass(p, min(grad_norm, cap), params)
    center = _projected(x, u, u.size)
    lo = center + params.sigma * std_quantile(a)
    hi = center + params.sigma * std_quantile(a + p)
    return Slab(u, lo, hi)


class NearestNeighbor:
    """1-NN classifier over a labelled point set; ties go to the lowest index."""

    def __init__(self, points, labels):
        self.points = np.asarray(points, dtype=float)
        self.labels = np.asarray(labels, dtype=np.int64)
        if self.points.ndim != 2 or self.points.shape[0] == 0:
            raise ValueError("dataset must be a non-empty (n, d) array")
        if self.labels.shape != (self.points.shape[0],):
            raise ValueError("labels must match the number of points")
        if np.any(self.labels < 0):
            raise ValueError("labels must be non-negative")
        self.num_classes = int(self.labels.max()) + 1
        self._sq_norms = np.einsum("ij,ij->i", self.points, self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def classify(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {points.shape[-1]}")
        # argmin over squared distances; np.argmin picks the first (lowest
        # index) minimizer, which is the documented tie rule.
        d2 = self._sq_norms[None, :] - 2.0 * (points @ self.points.T)
        return self.labels[np.argmin(d2, axis=1)]


def nn_classify(ds: NearestNeighbor, z) -> int:
    """Label of the dataset point nearest to a single query point."""
    z = np.asarray(z, dtype=float)
    return int(ds.classify(z[None, :])[0])


def swiss_roll_dataset(
    n_per_class: int = 400, noise: float = 0.1, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Two interleaved 2-d spirals with Gaussian jitter.

    Class 0 follows (t cos t, t sin t) for t in [1.5*pi, 4.5*pi]; class 1
    is the same spiral rotated by pi.  The seed is independent of any
    sampling seed used later for certification.
    """
    rng = np.random.default_rng(seed)
    t = rng.uniform(1.5 * math.pi, 4.5 * math.pi, size=2 * n_per_class)
    jitter = rng.normal(scale=noise, size=(2 * n_per_class, 2))
    base = np.stack([t * np.cos(t), t * np.sin(t)], axis=1)
    base[n_per_class:] *= -1.0  # rotation by pi
    points = base + jitter
    labels = np.repeat([0, 1], n_per_class)
    return points, labels


# ---------------------------------------------------------------------------
# External classifier wire protocol (line-oriented over stdio)
#
#   handshake (adapter -> harness):  CSMOOTH/1 d=<dim> classes=<m>\n
#   request   (harness -> adapter):  B <k>\n  then k lines of d reals
#   response  (adapter -> harness):  one line of k integer labels in [0, m)
#   shutdown  (harness -> adapter):  Q\n ; adapter exits 0
#
# All numbers ASCII, '\n' newlines, reals formatted with 17 significant
# digits so they round-trip exactly.

PROTOCOL_TAG = "CSMOOTH/1"


class ProtocolError(RuntimeError):
    """Adapter answered outside the protocol; carries the offending line."""

    def __init__(self, message: str, line: str | None = None):
        super().__init__(message if line is None else f"{message} (line: {line!r})")
        self.line = line


class HandshakeError(ProtocolError):
    pass


class BrokenStreamError(ProtocolError):
    pass


class DimensionMismatchError(ProtocolError):
    pass


class ExternalClassifier:
    """Client for a base classifier served over the stdio line protocol.

    One instance talks to one adapter process; access is serialized with a
    lock, so it is safe (if not parallel) to share across threads.  For
    true parallelism give each worker its own process via :meth:`clone`.
    """

    def __init__(self, command):
        if isinstance(command, str):
            command = shlex.split(command)
        self._command = list(command)
        self._lock = threading.Lock()
        self._proc = subprocess.Popen(
            self._command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )
        line = self._read_line()
        fields = line.split()
        if len(fields) != 3 or fields[0] != PROTOCOL_TAG:
            raise HandshakeError("malformed handshake", line)
        try:
            if not fields[1].startswith("d=") or not fields[2].startswith("classes="):
                raise ValueError
            self.dim = int(fields[1][2:])
            self.num_classes = int(fields[2][8:])
        except ValueError:
            raise HandshakeError("malformed handshake", line) from None
        if self.dim < 1 or self.num_classes < 1:
            raise HandshakeError("handshake declared a degenerate model", line)

    def _read_line(self) -> str:
        line = self._proc.stdout.readline()
        if line == "":
            raise BrokenStreamError("adapter closed its output stream")
        return line.rstrip("\n")

    def classify(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[0] == 0:
            raise ValueError("batch must be a non-empty (k, d) array")
        if points.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"batch dimension {points.shape[1]} != handshake dimension {self.dim}"
            )
        k = points.shape[0]
        with self._lock:
            request = [f"B {k}"]
            request.extend(
                " ".join(format(v, ".17g") for v in row) for row in points
            )
            try:
                self._proc.stdin.write("\n".join(request) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise BrokenStreamError("adapter closed its input stream") from exc
            line = self._read_line()
        parts = line.split()
        if len(parts) != k:
            raise ProtocolError(f"expected {k} labels, got {len(parts)}", line)
        try:
            labels = np.array([int(tok) for tok in parts], dtype=np.int64)
        except ValueError:
            raise ProtocolError("non-integer label in response", line) from None
        if np.any(labels < 0) or np.any(labels >= self.num_classes):
            raise ProtocolError(
                f"label outside [0, {self.num_classes})", line
            )
        return labels

    def clone(self) -> "ExternalClassifier":
        """Spawn a fresh adapter process running the same command."""
        return ExternalClassifier(self._command)

    def close(self) -> int:
        """Send the shutdown line and reap the adapter; returns its exit code."""
        with self._lock:
            if self._proc.poll() is None:
                try:
                    self._proc.stdin.write("Q\n")
                    self._proc.stdin.flush()
                    self._proc.stdin.close()
                except (BrokenPipeError, OSError):
                    pass
            code = self._proc.wait()
        return code

    def __enter__(self) -> "ExternalClassifier":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
