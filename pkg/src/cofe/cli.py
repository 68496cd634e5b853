"""Command-line front end.

Subcommands: ``extract`` (model file to .mln), ``eval`` (run a named or
explicit experiment), ``query`` (exact conditional marginal), ``convert``
(model to canonical .mln, or .mln back to a single-parfactor model).

Exit codes: 0 success, 2 parse error, 3 validation or size error, 4 evidence
with probability zero.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

from . import __version__
from .errors import CofeError, ModelError, ParseError, TooLargeError, ZeroEvidenceError
from .evaluation import ExperimentConfig, PRESETS, run_experiment
from .inference import Query, query
from .metrics import distinct_count
from .mln import cofe, load_mln, mln_to_parfactor_model, serialize_mln
from .model import GroundAtom, load_model, serialize_model
from .reduction import ReductionParams

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_ZERO_EVIDENCE = 4

_QUERY_RE = re.compile(
    r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(([^)]*)\))?\s*=\s*([01])\s*\Z"
)


def _parse_event(text: str) -> tuple[GroundAtom, int]:
    m = _QUERY_RE.match(text)
    if not m:
        raise ParseError(f"malformed query event {text.strip()!r}")
    name, args_text, value = m.group(1), m.group(2) or "", m.group(3)
    args = tuple(a.strip() for a in args_text.split(",") if a.strip())
    return GroundAtom(name, args), int(value)


def parse_query(text: str) -> Query:
    """Parse ``prv(c1,c2)=1 [| ev1(...)=v, ...]`` into a Query."""
    target_text, _, evidence_text = text.partition("|")
    target, value = _parse_event(target_text)
    evidence = []
    if evidence_text.strip():
        # atom argument lists also contain commas; split only at depth 0
        parts, depth, start = [], 0, 0
        for i, ch in enumerate(evidence_text):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                parts.append(evidence_text[start:i])
                start = i + 1
        parts.append(evidence_text[start:])
        evidence = [_parse_event(p) for p in parts if p.strip()]
    return Query(target, value, tuple(evidence))


def _seed_default() -> int:
    env = os.environ.get("COFE_SEED")
    return int(env) if env else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cofe",
        description="Compress parfactor models into small weighted-formula sets.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="reduce a model and write a .mln file")
    p_extract.add_argument("model", type=Path, help="input model file")
    p_extract.add_argument("-o", "--output", type=Path, help="output .mln path")
    p_extract.add_argument("--epsilon", type=float, default=0.1, help="distance budget")
    p_extract.add_argument("--theta-d", type=float, default=0.1, help="DBSCAN radius")
    p_extract.add_argument("--theta-n", type=int, default=1, help="DBSCAN core threshold")
    p_extract.add_argument(
        "--strategy",
        choices=("auto", "quantile", "cluster", "none"),
        default="auto",
        help="reduction strategy (default auto)",
    )
    p_extract.add_argument(
        "--drop-zero-weight",
        action="store_true",
        help="omit formulas whose weight is exactly 0",
    )

    p_eval = sub.add_parser("eval", help="run an experiment and write a report")
    p_eval.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set")
    p_eval.add_argument("--dataset", choices=("smokers", "artificial"))
    p_eval.add_argument("--sigma", type=float, help="noise standard deviation")
    p_eval.add_argument("--epsilon", type=float, help="distance budget")
    p_eval.add_argument("--theta-d", type=float, help="DBSCAN radius")
    p_eval.add_argument("--theta-n", type=int, help="DBSCAN core threshold")
    p_eval.add_argument("--seed", type=int, default=None, help="base seed (or $COFE_SEED)")
    p_eval.add_argument("--reps", type=int, default=20, help="repetitions (default 20)")
    p_eval.add_argument("--domain-size", type=int, default=3, help="smokers persons")
    p_eval.add_argument("--format", choices=("json", "csv"), default="json")
    p_eval.add_argument(
        "--fig3",
        action="store_true",
        help="print the per-parfactor distance table instead of the full report",
    )
    p_eval.add_argument("-o", "--output", type=Path, help="report path (default stdout)")

    p_query = sub.add_parser("query", help="answer a conditional marginal query")
    p_query.add_argument("model", type=Path, help="input model file")
    p_query.add_argument("query", help='e.g. "smokes(alice)=1 | friends(alice,bob)=1"')

    p_convert = sub.add_parser(
        "convert", help="model -> canonical .mln, or .mln -> single-parfactor model"
    )
    p_convert.add_argument("input", type=Path, help="input .model or .mln file")
    p_convert.add_argument("-o", "--output", type=Path, help="output path")
    return parser


def _cmd_extract(args) -> int:
    model = load_model(args.model)
    params = ReductionParams(args.epsilon, args.theta_d, args.theta_n)
    mln, results = cofe(
        model, params, strategy=args.strategy, drop_zero_weight=args.drop_zero_weight
    )
    out = args.output or args.model.with_suffix(".mln")
    out.write_text(serialize_mln(mln), encoding="utf-8")
    for pf, result in zip(model.parfactors, results):
        print(
            f"{pf.name}: strategy={result.strategy} "
            f"distinct {distinct_count(pf.potentials)} -> {distinct_count(result.mapped)} "
            f"distance={result.distance:.6f}"
        )
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    seed = args.seed if args.seed is not None else _seed_default()
    if args.preset:
        base = PRESETS[args.preset]
        config = ExperimentConfig(
            dataset=args.dataset or base.dataset,
            sigma=args.sigma if args.sigma is not None else base.sigma,
            params=ReductionParams(
                args.epsilon if args.epsilon is not None else base.params.epsilon,
                args.theta_d if args.theta_d is not None else base.params.theta_d,
                args.theta_n if args.theta_n is not None else base.params.theta_n,
            ),
            seed=seed,
            repetitions=args.reps,
            smokers_domain_size=args.domain_size,
            preset=args.preset,
        )
    else:
        missing = [
            flag
            for flag, value in (
                ("--dataset", args.dataset),
                ("--sigma", args.sigma),
                ("--epsilon", args.epsilon),
                ("--theta-d", args.theta_d),
                ("--theta-n", args.theta_n),
            )
            if value is None
        ]
        if missing:
            raise ModelError(
                f"without --preset, these flags are required: {', '.join(missing)}"
            )
        config = ExperimentConfig(
            dataset=args.dataset,
            sigma=args.sigma,
            params=ReductionParams(args.epsilon, args.theta_d, args.theta_n),
            seed=seed,
            repetitions=args.reps,
            smokers_domain_size=args.domain_size,
        )
    report = run_experiment(config)
    if args.fig3:
        lines = ["parfactor,dist_orig_noised,dist_orig_mapped,dist_noised_mapped"]
        lines += [
            f"{name},{a!r},{b!r},{c!r}" for name, a, b, c in report.fig3_rows()
        ]
        text = "\n".join(lines) + "\n"
    else:
        text = report.to_json() + "\n" if args.format == "json" else report.to_csv()
    if args.output:
        args.output.write_text(text, encoding="utf-8")
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_query(args) -> int:
    model = load_model(args.model)
    q = parse_query(args.query)
    print(f"{query(model, q):.6f}")
    return EXIT_OK


def _cmd_convert(args) -> int:
    suffix = args.input.suffix.lower()
    if suffix == ".mln":
        mln = load_mln(args.input)
        model = mln_to_parfactor_model(mln, name=args.input.stem)
        out = args.output or args.input.with_suffix(".model")
        out.write_text(serialize_model(model), encoding="utf-8")
    else:
        model = load_model(args.input)
        # canonical (budget-free) transformation: one formula per distinct value
        mln, _ = cofe(model, ReductionParams(0.0, 1.0, 1), strategy="none")
        out = args.output or args.input.with_suffix(".mln")
        out.write_text(serialize_mln(mln), encoding="utf-8")
    print(f"wrote {out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    commands = {
        "extract": _cmd_extract,
        "eval": _cmd_eval,
        "query": _cmd_query,
        "convert": _cmd_convert,
    }
    try:
        return commands[args.command](args)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ZeroEvidenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ZERO_EVIDENCE
    except (ModelError, TooLargeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except CofeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
