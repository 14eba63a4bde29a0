"""Command-line interface: ``chi2geo {characterize,cumulants,verify,generate}``.

Exit codes: 0 analysis completed, 1 a verification gate failed, 2 malformed
input or usage error, 3 the Gaussian input failed validation, 4 parameters out of range.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .characterize import characterize
from .errors import (
    DimensionMismatchError,
    NonSymmetricError,
    NotPositiveSemidefiniteError,
    OrderTooLargeError,
    TooFewSamplesError,
    UnknownGeneratorError,
)
from .gaussian import validate
from .generate import generate_spec
from .moments import MAX_ORDER, chisq_cumulants, quadratic_norm_cumulants
from .rng import resolve_generator_id
from .spectral import DEFAULT_TOL
from .verify import MIN_SAMPLES, Thresholds, verify

EXIT_OK = 0
EXIT_GATE_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_INVALID_SPEC = 3
EXIT_OUT_OF_RANGE = 4


class CLIError(Exception):
    def __init__(self, code, kind, message):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        if math.isfinite(obj):
            return obj
        return "NaN" if math.isnan(obj) else ("Infinity" if obj > 0 else "-Infinity")
    return obj


def dumps(doc):
    # repr-based float output is the shortest string that round-trips bit-exactly
    return json.dumps(_jsonable(doc), indent=2, allow_nan=False)


def load_spec_document(path):
    """Parse a ``{"mu": [...], "cov": [[...]], "label": ...}`` document."""
    try:
        if path == "-":
            doc = json.load(sys.stdin)
        else:
            with open(path) as fh:
                doc = json.load(fh)
    except OSError as exc:
        raise CLIError(EXIT_BAD_INPUT, "UnreadableInput", str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise CLIError(EXIT_BAD_INPUT, "MalformedInput", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "mu" not in doc or "cov" not in doc:
        raise CLIError(EXIT_BAD_INPUT, "MalformedInput", 'expected an object with "mu" and "cov"')
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise CLIError(EXIT_BAD_INPUT, "MalformedInput", '"label" must be a string')
    try:
        mu = np.asarray(doc["mu"], dtype=float)
        cov = np.asarray(doc["cov"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise CLIError(EXIT_BAD_INPUT, "MalformedInput", f"non-numeric mu or cov: {exc}") from exc
    if mu.ndim != 1 or mu.size == 0:
        raise CLIError(EXIT_BAD_INPUT, "MalformedInput", '"mu" must be a non-empty array of numbers')
    if cov.ndim != 2:
        raise CLIError(EXIT_BAD_INPUT, "MalformedInput", '"cov" must be an array of arrays')
    try:
        return validate(mu, cov, label=label)
    except (DimensionMismatchError, NonSymmetricError, NotPositiveSemidefiniteError) as exc:
        raise CLIError(EXIT_INVALID_SPEC, type(exc).__name__.removesuffix("Error"), str(exc)) from exc
    except ValueError as exc:
        raise CLIError(EXIT_INVALID_SPEC, "InvalidSpec", str(exc)) from exc


def _human_verdict(spec, v):
    d = v.diagnostics
    lines = [f"spec: {spec.label or '(unlabelled)'} in R^{spec.dim}"]
    lines.append(f"W = Image(C) has dimension {v.image_dim}")
    lines.append(f"mu in W: {'no' if d.mean_outside_image else 'yes'} "
                 f"(component outside W has norm {d.mean_outside_norm:.6g})")
    if v.is_chi_square:
        kind = "degenerate (point mass at 0)" if v.degenerate else "chi-square"
        lines.append(f"||X||^2 is {kind}: df = dim W = {v.df}, "
                     f"noncentrality nu = ||mu|| = {v.ncp:.10g} (lambda = nu^2 = {v.ncp_lambda:.10g})")
    else:
        lines.append("||X||^2 is NOT chi-square")
        if d.offending_eigenvalues:
            vals = ", ".join(f"{x:.10g}" for x in d.offending_eigenvalues)
            lines.append(f"  eigenvalues other than 0 or 1: {vals}")
        if d.mean_outside_image:
            lines.append("  mu has a component outside W")
    lines.append(f"||C^2 - C||_F = {d.idempotency_residual:.3e}, ||C mu - mu|| = {d.mean_residual:.3e}")
    lines.append(f"distance to nearest projection: {d.distance_to_projection:.3e}")
    return lines


def cmd_characterize(args):
    spec = load_spec_document(args.input)
    verdict = characterize(spec, args.tol)
    doc = {"command": "characterize", "label": spec.label, **verdict.to_dict(),
           "eigenvalues": spec.eigenvalues, "generator_id": resolve_generator_id()}
    human = _human_verdict(spec, verdict)
    return EXIT_OK, doc, human


def cmd_cumulants(args):
    if not 1 <= args.order <= MAX_ORDER:
        raise CLIError(EXIT_OUT_OF_RANGE, "OrderTooLarge", f"--order must be between 1 and {MAX_ORDER}")
    spec = load_spec_document(args.input)
    verdict = characterize(spec, args.tol)
    try:
        norm = quadratic_norm_cumulants(spec, args.order)
    except OrderTooLargeError as exc:
        raise CLIError(EXIT_OUT_OF_RANGE, "OrderTooLarge", str(exc)) from exc
    doc = {"command": "cumulants", "label": spec.label, "order": args.order,
           "is_chi_square": verdict.is_chi_square, "df": verdict.df, "ncp": verdict.ncp,
           "generator_id": resolve_generator_id()}
    human = [f"order {j}: {k:.17g}" for j, k in enumerate(norm, start=1)]
    if args.side in ("both", "norm"):
        doc["norm_cumulants"] = norm
    if args.side in ("both", "chisq"):
        if verdict.is_chi_square:
            chi = chisq_cumulants(verdict.df, verdict.ncp, args.order)
            doc["chisq_cumulants"] = chi
            denom = np.where(chi != 0, np.abs(chi), 1.0)
            doc["max_relative_gap"] = float(np.max(np.abs(norm - chi) / denom))
            human.append(f"chi-square({verdict.df}, nu={verdict.ncp:.10g}) agrees to "
                         f"{doc['max_relative_gap']:.3e} relative")
        else:
            doc["chisq_cumulants"] = None
            human.append("no chi-square comparison: ||X||^2 is not chi-square")
    return EXIT_OK, doc, human


def cmd_verify(args):
    if args.samples < MIN_SAMPLES:
        raise CLIError(EXIT_BAD_INPUT, "TooFewSamples", f"--samples must be at least {MIN_SAMPLES}")
    spec = load_spec_document(args.input)
    th = Thresholds(ks_alpha=args.ks_alpha, tol=args.tol)
    try:
        report = verify(spec, args.samples, args.seed, th, workers=args.workers)
    except TooFewSamplesError as exc:
        raise CLIError(EXIT_BAD_INPUT, "TooFewSamples", str(exc)) from exc
    doc = {"command": "verify", "label": spec.label, **report.to_dict()}
    human = _human_verdict(spec, report.verdict)
    human.append(f"{report.sample_count} draws, seed {report.seed}, generator {report.generator_id}")
    for j, (e, a, z) in enumerate(zip(report.sample_cumulants, report.analytic_cumulants,
                                      report.cumulant_z_scores), start=1):
        human.append(f"  kappa_{j}: sample {e:.6g} vs exact {a:.6g} (z = {z:+.2f})")
    if report.ks_p_value is not None:
        human.append(f"  KS: D = {report.ks_statistic:.3e}, p = {report.ks_p_value:.4f}")
    if report.cumulant_mismatch:
        m = report.cumulant_mismatch
        human.append(f"  first cumulant departing from chi-square shape: order {m['order']} "
                     f"(exact {m['analytic']:.6g} vs best fit {m['best_fit']:.6g})")
    human.append(f"  max residual outside mu + W: {report.subspace_max_residual:.3e}")
    human.append("PASSED" if report.passed else "FAILED: " + ", ".join(
        k for k, g in report.gates.items() if g is False))
    return (EXIT_OK if report.passed else EXIT_GATE_FAILED), doc, human


def cmd_generate(args):
    try:
        mu, cov = generate_spec(args.dim, args.rank, args.ncp, args.seed, args.perturb)
    except ValueError as exc:
        raise CLIError(EXIT_OUT_OF_RANGE, "InconsistentParameters", str(exc)) from exc
    label = args.label or f"dim={args.dim} rank={args.rank} ncp={args.ncp!r} seed={args.seed}" + (
        f" perturb={args.perturb!r}" if args.perturb else "")
    doc = {"mu": mu, "cov": cov, "label": label}
    return EXIT_OK, doc, [dumps(doc)]


def _seed(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="numerical tolerance (default 1e-8)")
    common.add_argument("--seed", type=_seed, default=0, help="random seed (default 0)")
    common.add_argument("--format", choices=("json", "human"), default="json")
    common.add_argument("--report", dest="format", action="store_const", const="human",
                        help="shorthand for --format human")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="chi2geo",
        description="Decide whether ||X||^2 is chi-square for X ~ N(mu, C) and verify it.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("characterize", parents=[common], help="chi-square verdict with diagnostics")
    p.add_argument("input", help='spec JSON file ("-" for stdin)')
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("cumulants", parents=[common], help="exact cumulants of ||X||^2")
    p.add_argument("input")
    p.add_argument("--order", type=int, default=4, help=f"number of cumulants, 1..{MAX_ORDER}")
    p.add_argument("--side", choices=("both", "norm", "chisq"), default="both")
    p.set_defaults(func=cmd_cumulants)

    p = sub.add_parser("verify", parents=[common], help="Monte Carlo verification")
    p.add_argument("input")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--ks-alpha", type=float, default=0.01)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", parents=[common], help="random spec with a known answer")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--ncp", type=float, default=0.0)
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--label")
    p.set_defaults(func=cmd_generate)
    return parser


def _fail(args, err):
    payload = {"error": err.kind, "message": str(err), "exit_code": err.code}
    print(dumps(payload) if args.format == "json" else f"error: {err}", file=sys.stderr)
    return err.code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        resolve_generator_id()
        code, doc, human = args.func(args)
    except UnknownGeneratorError as exc:
        return _fail(args, CLIError(EXIT_BAD_INPUT, "UnknownGenerator", str(exc)))
    except CLIError as exc:
        return _fail(args, exc)

    text = dumps(doc) if args.format == "json" or args.command == "generate" else "\n".join(human)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
