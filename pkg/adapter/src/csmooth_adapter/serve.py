"""Reference model server for the CSMOOTH/1 stdio line protocol.

Lets any process-launchable model act as a base classifier for a smoothing
harness.  Protocol (all ASCII, '\\n' newlines):

    adapter -> harness:  CSMOOTH/1 d=<dim> classes=<m>
    harness -> adapter:  B <k>   then k lines, each d space-separated reals
    adapter -> harness:  one line of k integer labels in [0, m)
    harness -> adapter:  Q       adapter exits 0

Request handling is stateless, so serving is deterministic whenever the
model is.  A malformed request produces one diagnostic line on stderr and
a nonzero exit.  Two demo models ship built in: a halfspace (label 1
exactly where w.z <= b) and a nearest-neighbour classifier over a labelled
CSV point set (ties to the lowest point index).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np


class HalfspaceModel:
    """Label 1 on w.z <= b, 0 elsewhere."""

    def __init__(self, w, b: float):
        self.w = np.asarray(w, dtype=float)
        if self.w.ndim != 1 or self.w.size == 0 or not np.linalg.norm(self.w) > 0:
            raise ValueError("w must be a nonzero vector")
        self.b = float(b)
        self.dim = self.w.size
        self.classes = 2

    def classify(self, points: np.ndarray) -> np.ndarray:
        return (points @ self.w <= self.b).astype(np.int64)


class NearestNeighborModel:
    """Label of the nearest reference point; ties go to the lowest index."""

    def __init__(self, points, labels):
        self.points = np.asarray(points, dtype=float)
        self.labels = np.asarray(labels, dtype=np.int64)
        if self.points.ndim != 2 or self.points.shape[0] == 0:
            raise ValueError("reference set must be a non-empty (n, d) array")
        if self.labels.shape != (self.points.shape[0],) or np.any(self.labels < 0):
            raise ValueError("labels must be non-negative, one per point")
        self.dim = self.points.shape[1]
        self.classes = int(self.labels.max()) + 1
        self._sq_norms = np.einsum("ij,ij->i", self.points, self.points)

    @classmethod
    def from_csv(cls, path: str) -> "NearestNeighborModel":
        table = np.loadtxt(path, delimiter=",", ndmin=2)
        return cls(table[:, :-1], table[:, -1].astype(int))

    def classify(self, points: np.ndarray) -> np.ndarray:
        d2 = self._sq_norms[None, :] - 2.0 * (points @ self.points.T)
        return self.labels[np.argmin(d2, axis=1)]


@dataclass(frozen=True)
class AdapterConfig:
    """Model plus the protocol dimensions it will declare.

    dim and classes must match the served model; a mismatch is refused at
    startup rather than surfacing as garbage labels mid-run.
    """

    model: object
    dim: int
    classes: int

    def __post_init__(self):
        if self.dim != self.model.dim or self.classes != self.model.classes:
            raise ValueError(
                f"declared d={self.dim} classes={self.classes} does not match "
                f"the model (d={self.model.dim} classes={self.model.classes})"
            )


class RequestError(Exception):
    pass


def _read_batch(stdin, k: int, dim: int) -> np.ndarray:
    rows = np.empty((k, dim))
    for i in range(k):
        line = stdin.readline()
        if line == "":
            raise RequestError(f"input closed inside a batch ({i} of {k} points read)")
        parts = line.split()
        if len(parts) != dim:
            raise RequestError(
                f"point {i} has {len(parts)} coordinates, expected {dim}: {line.strip()!r}"
            )
        try:
            rows[i] = [float(tok) for tok in parts]
        except ValueError:
            raise RequestError(f"point {i} is not numeric: {line.strip()!r}") from None
    return rows


def serve(config: AdapterConfig, stdin=None, stdout=None) -> int:
    """Answer protocol requests until the shutdown line; returns exit code."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stdout.write(f"CSMOOTH/1 d={config.dim} classes={config.classes}\n")
    stdout.flush()
    while True:
        line = stdin.readline()
        if line == "":
            raise RequestError("input closed before the shutdown line")
        line = line.rstrip("\n")
        if line == "Q":
            return 0
        fields = line.split()
        if len(fields) != 2 or fields[0] != "B":
            raise RequestError(f"unrecognized request: {line!r}")
        try:
            k = int(fields[1])
        except ValueError:
            raise RequestError(f"batch count is not an integer: {line!r}") from None
        if k < 1:
            raise RequestError(f"batch count must be >= 1: {line!r}")
        labels = config.model.classify(_read_batch(stdin, k, config.dim))
        stdout.write(" ".join(str(int(v)) for v in labels) + "\n")
        stdout.flush()


def _float_list(text: str):
    return [float(tok) for tok in text.split(",")]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="csmooth-adapter",
        description="Serve a base classifier over the CSMOOTH/1 stdio protocol.",
    )
    parser.add_argument("--model", choices=("halfspace", "nn"), required=True)
    parser.add_argument("--w", type=_float_list, help="halfspace normal, comma separated")
    parser.add_argument("--b", type=float, help="halfspace offset")
    parser.add_argument("--data", help="CSV of labelled points for nn (x0..x_{d-1},label)")
    parser.add_argument("--dim", type=int, help="declared dimension (validated)")
    parser.add_argument("--classes", type=int, help="declared class count (validated)")
    args = parser.parse_args(argv)

    try:
        if args.model == "halfspace":
            if args.w is None or args.b is None:
                parser.error("halfspace needs --w and --b")
            model = HalfspaceModel(args.w, args.b)
        else:
            if args.data is None:
                parser.error("nn needs --data")
            model = NearestNeighborModel.from_csv(args.data)
        config = AdapterConfig(
            model=model,
            dim=args.dim if args.dim is not None else model.dim,
            classes=args.classes if args.classes is not None else model.classes,
        )
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    try:
        return serve(config)
    except RequestError as exc:
        print(f"csmooth-adapter: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
