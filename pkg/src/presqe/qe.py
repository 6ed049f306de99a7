"""Elimination of one existential block.

``eliminate_block`` follows the DNF route: every disjunct ``A x <= B y + c``
is replaced by the disjunction, over the witness candidates ``(D, d)`` of
``A``, of ``A (D (B y + c) + d) <= B y + c`` together with congruences
stating that ``D (B y + c) + d`` is integral.  The bounded-quantifier route
(:func:`to_bepa` and friends) lives in :mod:`presqe.bepa` and is re-exported
here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Mapping, Sequence

from .bepa import (
    BepaAtom,
    BepaFormula,
    BepaResult,
    Poly,
    bepa_expand,
    bepa_to_epa,
    eval_bepa,
    mu_gadget,
    to_bepa,
)
from .core import (
    DEFAULT_DNF_CAP,
    EQ,
    FALSE,
    LE,
    TRUE,
    And,
    Atom,
    Formula,
    LinTerm,
    Not,
    Or,
    atoms,
    atoms_to_param_system,
    eliminate_divisibilities,
    free_vars,
    is_quantifier_free,
    le,
    mod,
    normalize_nnf,
    pull_exists,
    substitute_unit_equalities,
    to_dnf,
)
from .errors import InvariantError, PreconditionError
from .linalg import DEFAULT_DELTA_CAP, delta_auto, fm_feasible
from .polyhedra import DEFAULT_CANDIDATE_CAP, AffineWitness, enumerate_witness_candidates

__all__ = [
    "QfResult",
    "eliminate_block",
    "BepaAtom",
    "BepaFormula",
    "BepaResult",
    "Poly",
    "bepa_expand",
    "bepa_to_epa",
    "eval_bepa",
    "mu_gadget",
    "to_bepa",
]


@dataclass(frozen=True)
class QfResult:
    formula: Formula
    stats: Mapping[str, object] = field(default_factory=dict)


def _lcm_den(values) -> int:
    out = 1
    for v in values:
        out = lcm(out, Fraction(v).denominator)
    return out


def _affine_rows(w: AffineWitness, B, c) -> list[tuple[list[Fraction], Fraction]]:
    """Rows of ``D (B y + c) + d`` as (coefficients over y, constant)."""
    m = len(B[0]) if B else 0
    out = []
    for Drow, dj in zip(w.D.entries, w.d):
        coeffs = [sum((Drow[i] * B[i][k] for i in range(len(B))), Fraction(0)) for k in range(m)]
        const = sum((Drow[i] * c[i] for i in range(len(c))), Fraction(0)) + dj
        out.append((coeffs, const))
    return out


def _integrality_atom(coeffs: Sequence[Fraction], const: Fraction, free: Sequence[str]) -> Formula:
    """``sum(coeffs * y) + const`` is an integer, as one congruence on ``y``."""
    q = _lcm_den(list(coeffs) + [const])
    if q == 1:
        return TRUE
    p = [int(x * q) % q for x in coeffs]
    r = int(const * q) % q
    g = q
    for x in p:
        g = gcd(g, x)
    if r % g:
        return FALSE
    if g == q:  # no variable left, r is divisible by q
        return TRUE
    return mod(LinTerm.of(zip(free, p), r), q)


def _guard_atom(coeffs: Sequence[Fraction], const: Fraction, free: Sequence[str]) -> Formula:
    """``sum(coeffs * y) + const <= 0`` with denominators cleared."""
    q = _lcm_den(list(coeffs) + [const])
    t = LinTerm.of(zip(free, (int(x * q) for x in coeffs)), int(const * q))
    a = le(t)
    truth = a.constant_truth()
    if truth is None:
        return a
    return TRUE if truth else FALSE


def _candidate_formula(A, B, c, w: AffineWitness, free: Sequence[str]) -> Formula:
    rows = _affine_rows(w, B, c)
    parts: list[Formula] = []
    for coeffs, const in rows:
        atom = _integrality_atom(coeffs, const, free)
        if atom == FALSE:
            return FALSE
        if atom != TRUE:
            parts.append(atom)
    m = len(free)
    for i, arow in enumerate(A):
        # a_i x - (B_i y + c_i) <= 0 at x = D (B y + c) + d
        coeffs = [sum((aij * rows[j][0][k] for j, aij in enumerate(arow)), Fraction(0)) - B[i][k] for k in range(m)]
        const = sum((aij * rows[j][1] for j, aij in enumerate(arow)), Fraction(0)) - c[i]
        atom = _guard_atom(coeffs, const, free)
        if atom == FALSE:
            return FALSE
        if atom != TRUE:
            parts.append(atom)
    parts = list(dict.fromkeys(parts))
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _le_rows(f: Formula) -> list[Atom]:
    return [a for a in (f.args if isinstance(f, And) else (f,)) if isinstance(a, Atom) and a.kind == LE]


def _rationally_feasible(rows: Sequence[Atom], free: Sequence[str]) -> bool:
    if not rows:
        return True
    A = [[a.term.coeff(v) for v in free] for a in rows]
    b = [-a.term.const for a in rows]
    return fm_feasible(A, b).feasible


def _normalize(f: Formula) -> tuple[tuple[str, ...], tuple[str, ...], Formula]:
    block, body = pull_exists(f)
    if not is_quantifier_free(body):
        raise PreconditionError("eliminate_block expects an existential block over a quantifier-free matrix")
    free = tuple(sorted(free_vars(f)))
    body = normalize_nnf(body)
    body, fresh = eliminate_divisibilities(body, block, only_block=True)
    return block + fresh, free, body


def eliminate_block(
    f: Formula,
    dnf_cap: int = DEFAULT_DNF_CAP,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
    delta_cap: int = DEFAULT_DELTA_CAP,
    family: str = "parallelepiped",
    prune: bool = True,
) -> QfResult:
    """Quantifier-free formula equivalent to the existential formula ``f``."""
    block, free, body = _normalize(f)
    block_set = set(block)
    conjuncts = to_dnf(body, dnf_cap)
    stats = {
        "conjuncts": len(conjuncts),
        "candidates": 0,
        "kept": 0,
        "delta": 1,
        "delta_mode": "exact",
    }
    out: dict[Formula, None] = {}
    for lits in conjuncts:
        res = substitute_unit_equalities(lits, block)
        if res is None:
            continue
        guards: list[Formula] = []
        rows: list[Atom] = []
        for lit in res[0]:
            if isinstance(lit, Not):
                guards.append(lit)
                continue
            if not block_set.intersection(lit.term.variables):
                if lit.kind == EQ:
                    guards += [le(lit.term), le(-lit.term)]
                else:
                    guards.append(lit)
            elif lit.kind == EQ:
                rows += [le(lit.term), le(-lit.term)]
            elif lit.kind == LE:
                rows.append(lit)
            else:
                raise InvariantError("divisibility on a block variable survived elimination")
        rows = list(dict.fromkeys(rows))
        guards = list(dict.fromkeys(guards))
        guard_rows = [g for g in guards if isinstance(g, Atom) and g.kind == LE]
        if prune and not _rationally_feasible(guard_rows, free):
            continue
        if not rows:
            out[guards[0] if len(guards) == 1 else And(tuple(guards))] = None
            continue
        used = tuple(v for v in block if any(a.term.coeff(v) for a in rows))
        ps = atoms_to_param_system(rows, used, free)
        delta = delta_auto(ps.A, delta_cap)
        if delta.value >= stats["delta"]:
            stats["delta"] = delta.value
            if not delta.exact:
                stats["delta_mode"] = "hadamard"
        cands = enumerate_witness_candidates(ps.A, len(used), family=family, cap=candidate_cap)
        stats["candidates"] += len(cands)
        options: dict[Formula, None] = {}
        for w in cands:
            g = _candidate_formula(ps.A, ps.B, ps.c, w, free)
            if g == FALSE:
                continue
            if prune and not _rationally_feasible(guard_rows + _le_rows(g), free):
                continue
            options[g] = None
        if not options:
            continue
        stats["kept"] += len(options)
        inner = TRUE if TRUE in options else (next(iter(options)) if len(options) == 1 else Or(tuple(options)))
        parts = guards + ([inner] if inner != TRUE else [])
        out[parts[0] if len(parts) == 1 else And(tuple(parts))] = None
    if TRUE in out:
        result: Formula = TRUE
    else:
        result = next(iter(out)) if len(out) == 1 else Or(tuple(out))
    all_atoms = list(atoms(result))
    stats["atoms"] = len(all_atoms)
    stats["max_constant"] = max(
        (max([abs(a.term.const), a.modulus] + [abs(c) for _, c in a.term.coeffs]) for a in all_atoms),
        default=0,
    )
    return QfResult(result, stats)
