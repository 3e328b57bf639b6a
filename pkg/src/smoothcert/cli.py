"""Command-line harness: certify single points, tabulate certificate curves,
and run the desk-scale dataset and comparison experiments.

Output is data only (JSON records or CSV with '\\n' line endings); figures
are rendered externally from the emitted tables.  Exit codes: 0 success,
1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import engine
from .certificates import (
    BoundCurveRequest,
    RadiusCurveRequest,
    certificate_curve,
)
from .classifiers import (
    ExternalClassifier,
    Halfspace,
    NearestNeighbor,
    Slab,
    swiss_roll_dataset,
)

WORKERS_ENV = "SMOOTHCERT_WORKERS"

# Relative-change histogram bins used by `compare`; open-ended at both ends.
REL_CHANGE_BIN_EDGES = (
    -1.0, -0.5, -0.2, -0.1, -0.05, -0.02, -0.005,
    0.005, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0,
)


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must be strictly between 0 and 1: {text}")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return value


def _count_at_least(minimum: int):
    def parse(text: str) -> int:
        value = int(text)
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}: {text}")
        return value

    return parse


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text}")


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _joined(vec) -> str:
    return ";".join(format(float(v), ".17g") for v in vec)


class _Output:
    def __init__(self, path: str):
        self.path = path

    def __enter__(self):
        if self.path in (None, "-"):
            self.stream = sys.stdout
            self._owned = False
        else:
            self.stream = open(self.path, "w", newline="")
            self._owned = True
        return self.stream

    def __exit__(self, *exc):
        if self._owned:
            self.stream.close()


def _write_table(stream, fmt: str, header: list[str], rows) -> None:
    if fmt == "csv":
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    else:
        for row in rows:
            stream.write(json.dumps(dict(zip(header, row))) + "\n")


def _add_sampling_flags(sub, n_default: int = 100_000):
    sub.add_argument("--sigma", type=_positive, default=0.25, help="smoothing noise std")
    sub.add_argument("--n0", type=_count_at_least(1), default=100,
                     help="stage-1 class-selection samples")
    sub.add_argument("--n", type=_count_at_least(2), default=n_default,
                     help="stage-2 estimation samples")
    sub.add_argument("--eta", type=_fraction, default=0.001,
                     help="total certificate failure budget")
    sub.add_argument("--seed", type=int, default=0, help="sampling seed")
    sub.add_argument("--workers", type=_count_at_least(1), default=None,
                     help=f"worker threads (default ${WORKERS_ENV} or 1)")


def _add_classifier_flags(sub, kinds=("halfspace", "slab", "nn", "external")):
    sub.add_argument("--classifier", choices=kinds, required=True)
    sub.add_argument("--w", type=_float_list, help="normal vector, comma separated")
    sub.add_argument("--b", type=float, help="halfspace offset")
    sub.add_argument("--lo", type=float, help="slab lower face (w.z >= lo)")
    sub.add_argument("--hi", type=float, help="slab upper face (w.z <= hi)")
    sub.add_argument("--data", help="CSV of points for nn: columns x0..x_{d-1},label")
    sub.add_argument("--adapter-cmd", help="command line serving the wire protocol")


def _build_classifier(args, parser: argparse.ArgumentParser):
    kind = args.classifier
    if kind == "halfspace":
        if args.w is None or args.b is None:
            parser.error("halfspace needs --w and --b")
        return Halfspace(args.w, args.b)
    if kind == "slab":
        if args.w is None or args.lo is None or args.hi is None:
            parser.error("slab needs --w, --lo and --hi")
        return Slab(args.w, args.lo, args.hi)
    if kind == "nn":
        if args.data is None:
            parser.error("nn needs --data")
        table = np.loadtxt(args.data, delimiter=",", ndmin=2)
        return NearestNeighbor(table[:, :-1], table[:, -1].astype(int))
    if kind == "external":
        if args.adapter_cmd is None:
            parser.error("external needs --adapter-cmd")
        return ExternalClassifier(args.adapter_cmd)
    parser.error(f"unknown classifier {kind}")


def _evidence_fields(cert) -> dict:
    fields = {"p_lb": None, "grad_ub": None, "sym_lb": None, "asym_lb": None}
    ev = cert.evidence
    if hasattr(ev, "sym"):
        fields["sym_lb"] = ev.sym
        fields["asym_lb"] = ev.asym
        fields["p_lb"] = ev.sym + ev.asym
    else:
        fields["p_lb"] = ev.p
        if hasattr(ev, "grad_norm"):
            fields["grad_ub"] = ev.grad_norm
    return fields


# The worker count is an execution knob, not a certification input; leaving
# it out keeps the record byte-identical across worker counts.
CERTIFY_COLUMNS = [
    "command", "classifier", "w", "b", "lo", "hi", "data", "adapter_cmd", "x",
    "sigma", "n0", "n", "eta", "method", "seed", "label", "radius",
    "abstained", "p_lb", "grad_ub", "sym_lb", "asym_lb",
]


def cmd_certify(args, parser) -> int:
    workers = args.workers if args.workers is not None else _default_workers()
    classifier = _build_classifier(args, parser)
    try:
        x = np.asarray(args.x, dtype=float)
        plan = engine.SamplingPlan(args.n0, args.n, args.sigma, args.seed, workers)
        cert = engine.certify(classifier, x, plan, args.eta, args.method)
    finally:
        if hasattr(classifier, "close"):
            classifier.close()
    record = {
        "command": "certify",
        "classifier": args.classifier,
        "w": _joined(args.w) if args.w is not None else None,
        "b": args.b,
        "lo": args.lo,
        "hi": args.hi,
        "data": args.data,
        "adapter_cmd": args.adapter_cmd,
        "x": _joined(args.x),
        "sigma": args.sigma,
        "n0": args.n0,
        "n": args.n,
        "eta": args.eta,
        "method": args.method,
        "seed": args.seed,
        "label": cert.label,
        "radius": cert.radius,
        "abstained": cert.abstained,
    }
    record.update(_evidence_fields(cert))
    with _Output(args.output) as out:
        if args.format == "json":
            out.write(json.dumps(record) + "\n")
        else:
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(CERTIFY_COLUMNS)
            writer.writerow([_fmt(record[k]) for k in CERTIFY_COLUMNS])
    return 0


def cmd_curve(args, parser) -> int:
    if args.kind == "bound":
        if args.p is None:
            parser.error("bound curve needs --p")
        request = BoundCurveRequest(
            p=args.p, grad_norm=args.grad, sigma=args.sigma,
            rho_min=args.rho_min, rho_max=args.rho_max, steps=args.steps,
        )
    else:
        request = RadiusCurveRequest(
            p_min=args.p_min, p_max=args.p_max, steps=args.steps,
            grad_fracs=args.grad_fracs, sigma=args.sigma,
        )
    header, rows = certificate_curve(request)
    with _Output(args.output) as out:
        _write_table(out, "csv", header, rows)
    return 0


SWISSROLL_COLUMNS = [
    "x0", "x1", "label", "predicted", "p_lb_first", "radius_first",
    "p_lb_second", "grad_ub", "radius_second", "gain", "region",
]


def _derived_seed(*key) -> int:
    return int(np.random.SeedSequence(key).generate_state(1, dtype=np.uint64)[0])


def cmd_swissroll(args, parser) -> int:
    workers = args.workers if args.workers is not None else _default_workers()
    points, labels = swiss_roll_dataset(args.per_class, args.noise, args.data_seed)
    nn = NearestNeighbor(points, labels)
    if args.max_points > 0:
        stride = max(1, len(points) // args.max_points)
        picked = list(range(0, len(points), stride))[: args.max_points]
    else:
        picked = []

    rows = []
    for j, idx in enumerate(picked):
        x = points[idx]
        plan_first = engine.SamplingPlan(
            args.n0, args.n, args.sigma, _derived_seed(args.seed, j, 0), workers)
        plan_second = engine.SamplingPlan(
            args.n0, args.n, args.sigma, _derived_seed(args.seed, j, 1), workers)
        cert_first = engine.certify(nn, x, plan_first, args.eta, "first")
        cert_second = engine.certify(nn, x, plan_second, args.eta, "second")
        rows.append({
            "x0": float(x[0]),
            "x1": float(x[1]),
            "label": int(labels[idx]),
            "predicted": cert_first.label,
            "p_lb_first": cert_first.evidence.p,
            "radius_first": cert_first.radius,
            "p_lb_second": cert_second.evidence.p,
            "grad_ub": cert_second.evidence.grad_norm,
            "radius_second": cert_second.radius,
            "gain": cert_second.radius - cert_first.radius,
        })

    # Interior/boundary split at the run-median gradient bound: low-gradient
    # points sit inside their class region, high-gradient ones at its edge.
    grads = sorted(r["grad_ub"] for r in rows)
    median = grads[len(grads) // 2] if grads else 0.0
    for r in rows:
        r["region"] = "interior" if r["grad_ub"] <= median else "boundary"
    interior = [r["gain"] for r in rows if r["region"] == "interior"]
    boundary = [r["gain"] for r in rows if r["region"] == "boundary"]
    summary = {
        "record": "summary",
        "points": len(rows),
        "mean_gain_interior": float(np.mean(interior)) if interior else None,
        "mean_gain_boundary": float(np.mean(boundary)) if boundary else None,
        "gain_positive": sum(1 for r in rows if r["gain"] > 0),
    }

    with _Output(args.output) as out:
        if args.format == "csv":
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(SWISSROLL_COLUMNS)
            for r in rows:
                writer.writerow([_fmt(r[k]) for k in SWISSROLL_COLUMNS])
            print(json.dumps(summary), file=sys.stderr)
        else:
            for r in rows:
                out.write(json.dumps({k: r[k] for k in SWISSROLL_COLUMNS}) + "\n")
            out.write(json.dumps(summary) + "\n")
    return 0


COMPARE_COLUMNS = [
    "index", "x", "label_first", "radius_first", "label_higher",
    "radius_higher", "rel_change", "status",
]


def _compare_points(args, parser, dim: int) -> np.ndarray:
    if args.points_file is not None:
        pts = np.loadtxt(args.points_file, delimiter=",", ndmin=2)
        if pts.shape[1] != dim:
            parser.error(f"points have dimension {pts.shape[1]}, classifier wants {dim}")
        return pts
    if args.grid is not None:
        try:
            lo, hi, count = args.grid.split(":")
            lo, hi, count = float(lo), float(hi), int(count)
        except ValueError:
            parser.error("--grid must be lo:hi:count")
        if count < 1 or hi < lo or (count > 1 and hi == lo):
            parser.error("degenerate --grid")
        pts = np.zeros((count, dim))
        pts[:, 0] = np.linspace(lo, hi, count)
        return pts
    parser.error("compare needs --points-file or --grid")


def cmd_compare(args, parser) -> int:
    workers = args.workers if args.workers is not None else _default_workers()
    classifier = _build_classifier(args, parser)
    try:
        points = _compare_points(args, parser, classifier.dim)
        rows = []
        rel_changes = []
        counts = {"compared": 0, "both_abstain": 0, "first_abstain": 0,
                  "higher_abstain": 0, "label_mismatch": 0}
        for i, x in enumerate(points):
            # Baseline and higher-order arms use independent smoothing samples.
            plan_first = engine.SamplingPlan(
                args.n0, args.n, args.sigma, _derived_seed(args.seed, i, 0), workers)
            plan_higher = engine.SamplingPlan(
                args.n0, args.n, args.sigma, _derived_seed(args.seed, i, 1), workers)
            cert_first = engine.certify(classifier, x, plan_first, args.eta, "first")
            cert_higher = engine.certify(classifier, x, plan_higher, args.eta, args.method)
            rel = None
            if cert_first.abstained and cert_higher.abstained:
                status = "both_abstain"
            elif cert_first.abstained:
                status = "first_abstain"
            elif cert_higher.abstained:
                status = "higher_abstain"
            elif cert_first.label != cert_higher.label:
                status = "label_mismatch"
            else:
                status = "compared"
                rel = (cert_higher.radius - cert_first.radius) / cert_first.radius
                rel_changes.append(rel)
            counts[status] += 1
            rows.append({
                "index": i,
                "x": _joined(x),
                "label_first": cert_first.label,
                "radius_first": cert_first.radius,
                "label_higher": cert_higher.label,
                "radius_higher": cert_higher.radius,
                "rel_change": rel,
                "status": status,
            })
    finally:
        if hasattr(classifier, "close"):
            classifier.close()

    edges = list(REL_CHANGE_BIN_EDGES)
    hist = [0] * (len(edges) + 1)
    for rel in rel_changes:
        hist[np.searchsorted(edges, rel, side="right")] += 1
    summary = {
        "record": "summary",
        "method": args.method,
        "points": len(points),
        **counts,
        "positive": sum(1 for r in rel_changes if r > 0),
        "negative": sum(1 for r in rel_changes if r < 0),
        "mean_rel_change": float(np.mean(rel_changes)) if rel_changes else None,
        "bin_edges": edges,
        "bin_counts": hist,
    }

    with _Output(args.output) as out:
        if args.format == "csv":
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(COMPARE_COLUMNS)
            for r in rows:
                writer.writerow([_fmt(r[k]) for k in COMPARE_COLUMNS])
            print(json.dumps(summary), file=sys.stderr)
        else:
            for r in rows:
                out.write(json.dumps({k: r[k] for k in COMPARE_COLUMNS}) + "\n")
            out.write(json.dumps(summary) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothcert",
        description="Robustness certificates for Gaussian-smoothed classifiers.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_cert = subs.add_parser("certify", help="certify a single input point")
    _add_classifier_flags(p_cert)
    p_cert.add_argument("--x", type=_float_list, required=True,
                        help="input point, comma separated")
    _add_sampling_flags(p_cert)
    p_cert.add_argument("--method", choices=("first", "second", "dipole", "best"),
                        default="first")
    p_cert.add_argument("--format", choices=("json", "csv"), default="json")
    p_cert.add_argument("--output", default="-")
    p_cert.set_defaults(func=cmd_certify)

    p_curve = subs.add_parser("curve", help="tabulate certificate curves")
    p_curve.add_argument("--kind", choices=("bound", "radius"), required=True)
    p_curve.add_argument("--sigma", type=_positive, default=1.0)
    p_curve.add_argument("--steps", type=_count_at_least(1), default=100)
    p_curve.add_argument("--p", type=_fraction, help="smoothed value (bound curve)")
    p_curve.add_argument("--grad", type=float, default=0.0,
                         help="gradient-norm bound (bound curve)")
    p_curve.add_argument("--rho-min", type=float, default=0.0)
    p_curve.add_argument("--rho-max", type=float, default=3.0)
    p_curve.add_argument("--p-min", type=_fraction, default=0.51)
    p_curve.add_argument("--p-max", type=_fraction, default=0.99)
    p_curve.add_argument("--grad-fracs", type=_float_list, default=(0.0, 0.5, 1.0),
                         help="gradient norms as fractions of the physical max")
    p_curve.add_argument("--output", default="-")
    p_curve.set_defaults(func=cmd_curve)

    p_roll = subs.add_parser("swissroll", help="two-spiral dataset experiment")
    p_roll.add_argument("--per-class", type=_count_at_least(1), default=400)
    p_roll.add_argument("--noise", type=float, default=0.1)
    p_roll.add_argument("--data-seed", type=int, default=1)
    p_roll.add_argument("--max-points", type=_count_at_least(0), default=32,
                        help="number of dataset points to certify (0: header only)")
    _add_sampling_flags(p_roll, n_default=1_000_000)
    # Gradient information only survives estimation when the deviation
    # allowance sits below the physical cap, a sigma-free criterion on
    # (p, n).  The spiral geometry therefore needs noise comparable to the
    # class gap for mid-arm points to land at moderate p.
    p_roll.set_defaults(sigma=1.4)
    p_roll.add_argument("--format", choices=("json", "csv"), default="csv")
    p_roll.add_argument("--output", default="-")
    p_roll.set_defaults(func=cmd_swissroll)

    p_cmp = subs.add_parser("compare", help="higher-order vs first-order distribution")
    _add_classifier_flags(p_cmp, kinds=("halfspace", "slab", "nn", "external"))
    p_cmp.add_argument("--method", choices=("second", "dipole"), required=True)
    p_cmp.add_argument("--points-file", help="CSV of input points, one per row")
    p_cmp.add_argument("--grid", help="lo:hi:count sweep along axis 0")
    _add_sampling_flags(p_cmp)
    p_cmp.add_argument("--format", choices=("json", "csv"), default="csv")
    p_cmp.add_argument("--output", default="-")
    p_cmp.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime failures: diagnostic + exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
