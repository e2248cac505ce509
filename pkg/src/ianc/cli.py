"""Command-line entry point: ``ianc mincut|analyze|design|simulate``.

Exit codes: 0 success, 1 invalid input (parse/validation/digest), 2 no
design possible (case rejected, min-cut violation, attempts exhausted),
64 bad command-line usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import warnings
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .align import DEFAULT_MAX_ATTEMPTS, CodeDesign, recommended_prime, search_design
from .errors import (
    CaseRejected,
    DigestMismatch,
    Exhausted,
    MincutViolation,
    ParseError,
    ValidationError,
)
from .netmodel import load_network, mincuts
from .sim import run_simulation
from .transfer import DEFAULT_BUDGET, DEFAULT_SAMPLES, MincutWarning, analyze

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NO_DESIGN = 2
EXIT_USAGE = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


# ------------------------------------------------------------------ rendering


def _fraction(pair) -> str:
    return f"{pair[0]}/{pair[1]}"


def _rate_cells(pair) -> tuple[str, str]:
    if pair is None:
        return "-", "-"
    return _fraction(pair), f"{float(Fraction(*pair)):.4f}"


def _verdict_line(label: str, verdict: Optional[dict]) -> str:
    if verdict is None:
        return f"{label}: n/a"
    kind = verdict["kind"]
    if kind == "Unverified":
        return f"{label}: unverified (advisory)"
    text = {
        "CertifiedAsymmetric": "certified asymmetric",
        "CertifiedDistinct": "certified distinct",
        "CertifiedNonconstant": "certified nonconstant",
        "CertifiedNonzero": "certified nonzero",
        "LikelyProportional": "likely proportional",
        "LikelyConstant": "likely constant",
        "LikelyZero": "likely zero",
    }.get(kind, kind)
    if "error_bound" in verdict:
        text += f" (error <= 2^{verdict['log2_error_bound']:.1f})"
    if verdict.get("value") is not None and kind == "LikelyConstant":
        text += f", value {verdict['value']}"
    return f"{label}: {text}"


def _case_text(case: dict) -> str:
    kind = case["kind"]
    if "c_tilde" in case:
        return f"{kind} (c~ = {case['c_tilde']})"
    if "trivial_pairs" in case:
        return f"{kind} (trivial: {', '.join(f'm{i}{j}' for i, j in case['trivial_pairs'])})"
    if "pair" in case:
        return f"{kind} (pair {tuple(case['pair'])})"
    return kind


def render_report(report: dict) -> str:
    """Stable, diff-friendly text for an analysis, design or simulation report."""
    lines: list[str] = []
    if "successes" in report:
        lines.append(f"blocks      {report['blocks']}")
        lines.append(f"seed        {report['seed']}")
        lines.append(f"n           {report['n']}")
        lines.append("session  successes  rate     decimal  target")
        rates = report["rates"] or [None, None, None]
        for i in range(3):
            frac, dec = _rate_cells(rates[i])
            lines.append(
                f"{i + 1:<8} {report['successes'][i]:<10} {frac:<8} {dec:<8} "
                f"{_fraction(report['target_rates'][i])}"
            )
        ff = report["first_failure"]
        lines.append(f"first failure  {'-' if ff is None else ff}")
    elif "V1" in report:
        lines.append(f"case        {_case_text(report['case'])}")
        lines.append(f"n           {report['n']}")
        lines.append(f"p           {report['p']}")
        lines.append(f"seed        {report['seed']}  (attempt {report['attempt']})")
        lines.append("session  rate     decimal")
        for i, pair in enumerate(report["rates"], start=1):
            frac, dec = _rate_cells(pair)
            lines.append(f"{i:<8} {frac:<8} {dec}")
        for name, ok in report.get("conditions", {}).items():
            lines.append(f"{name:<16} {'ok' if ok else 'FAILED'}")
    else:
        lines.append(f"case        {_case_text(report['case'])}")
        lines.append(f"mincuts     {' '.join(str(c) for c in report['mincuts'])}")
        lines.append(f"max rank    {report['max_rank']}")
        for i in range(3):
            for j in range(3):
                if report["a1"][i][j] is not None:
                    lines.append(_verdict_line(f"A1 ({i + 1},{j + 1})", report["a1"][i][j]))
        lines.append(_verdict_line("ratio a/b", report["ratio"]))
        for w in ("A2", "A3", "A4"):
            lines.append(_verdict_line(w, (report["asymmetry"] or {}).get(w)))
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------- commands


def _emit(doc: dict, output: Optional[str]) -> None:
    if output:
        write_atomic(output, _dumps(doc))
        sys.stdout.write(render_report(doc))
    else:
        sys.stdout.write(_dumps(doc))


def _cmd_mincut(args) -> int:
    net = load_network(args.network)
    print(" ".join(str(c) for c in mincuts(net)))
    return EXIT_OK


def _cmd_analyze(args) -> int:
    net = load_network(args.network)
    _emit(analyze(net, rng_seed=args.seed, samples=args.samples, budget=args.budget), args.output)
    return EXIT_OK


def _cmd_design(args) -> int:
    net = load_network(args.network)
    p = args.prime if args.prime is not None else recommended_prime(net, args.n)
    design = search_design(
        net, args.n, p=p, master_seed=args.seed, max_attempts=args.max_attempts, workers=args.workers
    )
    _emit(design.to_json(), args.output)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    net = load_network(args.network)
    try:
        text = Path(args.design).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {args.design}: {exc}") from None
    design = CodeDesign.loads(text)
    report = run_simulation(net, design, args.blocks, rng_seed=args.seed, workers=args.workers)
    _emit(report.to_json(), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ianc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ianc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mincut", help="print the three per-session min-cuts")
    p.add_argument("network")
    p.set_defaults(func=_cmd_mincut)

    p = sub.add_parser("analyze", help="classify the network and test the alignment assumptions")
    p.add_argument("network")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("design", help="search for an alignment code")
    p.add_argument("network")
    p.add_argument("-n", type=int, required=True, help="extension parameter (block length 2n+1)")
    p.add_argument("--prime", type=int, help="field size (default: recommended for n)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-attempts", type=int, default=DEFAULT_MAX_ATTEMPTS)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("simulate", help="run random message blocks through a design")
    p.add_argument("network")
    p.add_argument("design")
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "n", 1) is not None and getattr(args, "n", 1) < 1:
            raise _UsageError("ianc design: error: -n must be >= 1")
        for name in ("blocks", "max_attempts", "samples", "budget"):
            if getattr(args, name, 0) < 0:
                raise _UsageError(f"ianc: error: --{name.replace('_', '-')} must be >= 0")
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    with warnings.catch_warnings():
        warnings.simplefilter("always", MincutWarning)
        warnings.showwarning = _show_warning
        try:
            return args.func(args)
        except (ParseError, ValidationError, DigestMismatch) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        except (CaseRejected, MincutViolation, Exhausted) as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_NO_DESIGN


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
