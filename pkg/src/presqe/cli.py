"""Command-line entry point.

Every subcommand prints a report as ``key=value`` lines on stdout, in a fixed
key order, and can mirror it to a JSON file with ``--report-json``.  Exit
codes: 0 success, 1 negative result, 2 input error, 3 resource cap,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .bepa import DEFAULT_EXPAND_CAP, bepa_expand, bepa_size, to_bepa
from .core import DEFAULT_DNF_CAP, atoms, free_vars, is_quantifier_free
from .errors import (
    InvariantError,
    NoIntegralSolutionError,
    ParseError,
    PreconditionError,
    PresqeError,
    ResourceLimitError,
    ShapeError,
)
from .linalg import delta_bound, ratnorm_all
from .parser import (
    format_matrix_csv,
    formula_size,
    parse,
    parse_bepa,
    parse_matrix_csv,
    parse_vector_csv,
    print_bepa,
    print_formula,
)
from .polyhedra import DEFAULT_CANDIDATE_CAP, enumerate_witness_candidates, witness_for
from .qe import eliminate_block
from .reductions import Pi2Sentence, mondec_encode, wqo_encode
from .semantics import (
    check_equiv,
    primorial,
    smallest_period,
    smallest_period_epa,
    sn_member,
    sn_period_multiple,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_CAP, EXIT_INVARIANT = 0, 1, 2, 3, 4


class Report:
    """Ordered key/value report; values are rendered with ``str``."""

    def __init__(self, command: str):
        self.items: dict[str, object] = {"command": command, "version": __version__}

    def __setitem__(self, key: str, value: object) -> None:
        self.items[key] = value

    def digest(self, label: str, data: bytes) -> None:
        self.items[f"{label}_sha256"] = hashlib.sha256(data).hexdigest()

    def lines(self) -> str:
        return "".join(f"{k}={_render(v)}\n" for k, v in self.items.items())

    def to_json(self) -> str:
        return json.dumps({k: _jsonable(v) for k, v in self.items.items()}, indent=2) + "\n"


def _render(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _jsonable(v: object):
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    return str(v)


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _write(path: str | None, text: str, report: Report) -> None:
    if path is None:
        report["output"] = text.strip()
    else:
        Path(path).write_text(text)
        report["output_file"] = path


def _atom_stats(f, report: Report) -> None:
    report["output_atoms"] = sum(1 for _ in atoms(f))
    report["output_size"] = formula_size(f)


# ---------------------------------------------------------------------------
# subcommands


def cmd_eliminate(args, report: Report) -> int:
    data = _read(args.input)
    report.digest("input", data)
    report["mode"] = args.mode
    text = data.decode()
    if args.mode == "bepa-expand" and text.lstrip().startswith("(bexists"):
        g = parse_bepa(text)
    else:
        f = parse(text)
        if args.mode == "dnf":
            res = eliminate_block(f, dnf_cap=args.max_conjuncts, candidate_cap=args.max_candidates)
            for key in ("delta", "delta_mode", "conjuncts", "candidates", "kept"):
                report[key] = res.stats[key]
            _atom_stats(res.formula, report)
            _write(args.out, print_formula(res.formula) + "\n", report)
            return EXIT_OK
        bres = to_bepa(f)
        for key in ("delta", "delta_mode", "rows", "block", "bounded_vars"):
            report[key] = bres.stats[key]
        g = bres.formula
        if args.mode == "bepa":
            report["bepa_size"] = bepa_size(g)
            _write(args.out, print_bepa(g) + "\n", report)
            return EXIT_OK
    report["bepa_size"] = bepa_size(g)
    out = bepa_expand(g, cap=args.max_expansion)
    _atom_stats(out, report)
    _write(args.out, print_formula(out) + "\n", report)
    return EXIT_OK


def cmd_check_equiv(args, report: Report) -> int:
    da, db = _read(args.a), _read(args.b)
    report.digest("a", da)
    report.digest("b", db)
    f, g = parse(da), parse(db)
    if free_vars(f) != free_vars(g):
        report["warning"] = "free variables differ; comparing over their union"
    res = check_equiv(f, g, box=args.box, samples=args.samples, seed=args.seed)
    report["box"] = args.box
    report["seed"] = args.seed
    report["exhaustive"] = res.exhaustive
    report["points"] = res.points
    report["verdict"] = "equivalent" if res.passed else "differ"
    if not res.passed:
        report["counterexample"] = " ".join(f"{k}={v}" for k, v in sorted(res.counterexample.items()))
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_period(args, report: Report) -> int:
    if args.sn is not None:
        n = args.sn
        if n < 1:
            raise PreconditionError("--sn expects n >= 1")
        report["sn"] = n
        desc = smallest_period_epa(None, sn_period_multiple(n), n0=1, member=lambda a: sn_member(n, a))
        expected = primorial(2**n)
        report["threshold"] = desc.threshold
        report["period"] = desc.period
        report["primorial"] = expected
        report["verdict"] = "match" if desc.period == expected else "mismatch"
        return EXIT_OK if desc.period == expected else EXIT_NEGATIVE
    data = _read(args.input)
    report.digest("input", data)
    f = parse(data)
    if not is_quantifier_free(f):
        f = eliminate_block(f).formula
        report["eliminated"] = True
    desc = smallest_period(f)
    size = formula_size(f)
    report["threshold"] = desc.threshold
    report["period"] = desc.period
    report["size"] = size
    ok = desc.period <= 2**size
    report["period_le_2_pow_size"] = ok
    if not ok:
        raise InvariantError(f"period {desc.period} exceeds 2^{size}")
    return EXIT_OK


def cmd_witness(args, report: Report) -> int:
    data = _read(args.matrix)
    report.digest("matrix", data)
    A = parse_matrix_csv(data.decode())
    if not A:
        raise ShapeError("matrix file is empty")
    n = len(A[0])
    delta = delta_bound(A, "exact") if min(len(A), n) <= 6 else delta_bound(A, "hadamard")
    report["rows"] = len(A)
    report["cols"] = n
    report["delta"] = delta.value
    report["delta_mode"] = delta.mode
    if args.enumerate:
        cands = enumerate_witness_candidates(A, n, family=args.family, cap=args.max_candidates)
        report["family"] = args.family
        report["candidates"] = len(cands)
        report["faces"] = len({w.rows for w in cands})
        report["max_ratnorm_D"] = max(w.ratnorm_D() for w in cands)
        report["max_ratnorm_d"] = max(w.ratnorm_d() for w in cands)
        if args.out:
            chunks = []
            for i, w in enumerate(cands):
                chunks.append(f"# candidate {i} rows={list(w.rows)} cols={list(w.cols)}\n")
                chunks.append(format_matrix_csv(w.D.entries))
                chunks.append(format_matrix_csv([w.d]))
            Path(args.out).write_text("".join(chunks))
            report["output_file"] = args.out
        return EXIT_OK
    if args.rhs is None:
        raise ShapeError("--rhs is required unless --enumerate is given")
    rdata = _read(args.rhs)
    report.digest("rhs", rdata)
    b = parse_vector_csv(rdata.decode())
    if len(b) != len(A):
        raise ShapeError(f"rhs has {len(b)} entries, matrix has {len(A)} rows")
    try:
        w = witness_for(A, b, n)
    except NoIntegralSolutionError as exc:
        report["verdict"] = "no-integral-solution"
        report["reason"] = str(exc)
        return EXIT_NEGATIVE
    x = w.apply(b)
    report["verdict"] = "witness"
    report["D"] = format_matrix_csv(w.D.entries).strip().replace("\n", ";")
    report["d"] = ",".join(str(v) for v in w.d)
    report["x"] = ",".join(str(v) for v in x)
    report["validates"] = w.validates(A, b)
    rD, rd = w.ratnorm_D(), ratnorm_all(w.d)
    report["ratnorm_D"] = rD
    report["ratnorm_d"] = rd
    report["bound_D_holds"] = rD <= delta.value
    report["bound_d_holds"] = rd <= n * delta.value**2
    if not w.validates(A, b):
        raise InvariantError("constructed witness does not validate")
    return EXIT_OK


def cmd_encode(args, report: Report) -> int:
    path = args.wqo or args.mondec
    data = _read(path)
    report.digest("input", data)
    gamma = Pi2Sentence.from_formula(parse(data))
    report["universal"] = len(gamma.universal)
    report["existential"] = len(gamma.existential)
    if args.wqo:
        report["encoding"] = "wqo"
        out = wqo_encode(gamma)
    else:
        report["encoding"] = "mondec"
        out = mondec_encode(gamma)
    report["free_vars"] = ",".join(sorted(free_vars(out)))
    _atom_stats(out, report)
    _write(args.out, print_formula(out) + "\n", report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="presqe", description="Exact Presburger arithmetic toolkit.")
    p.add_argument("--version", action="version", version=f"presqe {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report-json", metavar="PATH", help="also write the report as JSON")
    common.add_argument("--timings", action="store_true", help="include wall-clock time in the report")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eliminate", parents=[common], help="eliminate an existential block")
    e.add_argument("--input", required=True)
    e.add_argument("--out")
    e.add_argument("--mode", choices=("dnf", "bepa", "bepa-expand"), default="dnf")
    e.add_argument("--max-conjuncts", type=int, default=DEFAULT_DNF_CAP)
    e.add_argument("--max-candidates", type=int, default=DEFAULT_CANDIDATE_CAP)
    e.add_argument("--max-expansion", type=int, default=DEFAULT_EXPAND_CAP)
    e.set_defaults(func=cmd_eliminate)

    c = sub.add_parser("check-equiv", parents=[common], help="compare two formulas on a box")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--box", type=int, default=8)
    c.add_argument("--samples", type=int, default=1000)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_check_equiv)

    r = sub.add_parser("period", parents=[common], help="smallest period of a one-variable set")
    g = r.add_mutually_exclusive_group(required=True)
    g.add_argument("--input")
    g.add_argument("--sn", type=int)
    r.set_defaults(func=cmd_period)

    w = sub.add_parser("witness", parents=[common], help="affine integral witness for A x <= b")
    w.add_argument("--matrix", required=True)
    w.add_argument("--rhs")
    w.add_argument("--enumerate", action="store_true")
    w.add_argument("--family", choices=("parallelepiped", "box"), default="parallelepiped")
    w.add_argument("--max-candidates", type=int, default=DEFAULT_CANDIDATE_CAP)
    w.add_argument("--out")
    w.set_defaults(func=cmd_witness)

    n = sub.add_parser("encode", parents=[common], help="encode a forall-exists sentence")
    g = n.add_mutually_exclusive_group(required=True)
    g.add_argument("--wqo", metavar="GAMMA")
    g.add_argument("--mondec", metavar="GAMMA")
    n.add_argument("--out")
    n.set_defaults(func=cmd_encode)
    return p


def _run(func: Callable, args, report: Report) -> int:
    try:
        return func(args, report)
    except (ParseError, ShapeError, PreconditionError, OSError, UnicodeDecodeError) as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        return EXIT_INPUT
    except ResourceLimitError as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        return EXIT_CAP
    except InvariantError as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        return EXIT_INVARIANT
    except PresqeError as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        return EXIT_INVARIANT


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    report = Report(args.command)
    start = time.perf_counter()
    code = _run(args.func, args, report)
    if args.timings:
        report["seconds"] = f"{time.perf_counter() - start:.3f}"
    report["exit_code"] = code
    sys.stdout.write(report.lines())
    if args.report_json:
        Path(args.report_json).write_text(report.to_json())
    return code


if __name__ == "__main__":
    sys.exit(main())
