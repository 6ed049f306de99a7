"""Encodings of Pi_2 sentences into existential formulas.

``wqo_encode`` builds a relation that is a well-quasi-ordering exactly when
the sentence is true, ``mondec_encode`` a formula that is monadically
decomposable exactly when the sentence is true.  Only the encodings are
provided; the deciders for the target problems are not.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import (
    Exists,
    Forall,
    Formula,
    LinTerm,
    all_names,
    conj,
    disj,
    eq,
    free_vars,
    fresh_names,
    is_quantifier_free,
    le,
    rename,
)
from .errors import ShapeError


@dataclass(frozen=True)
class Pi2Sentence:
    """``forall universal: exists existential: matrix``."""

    universal: tuple[str, ...]
    existential: tuple[str, ...]
    matrix: Formula

    def __post_init__(self):
        if not is_quantifier_free(self.matrix):
            raise ShapeError("matrix of a Pi_2 sentence must be quantifier-free")
        bound = set(self.universal) | set(self.existential)
        if len(bound) != len(self.universal) + len(self.existential):
            raise ShapeError("quantified variables must be distinct")
        extra = free_vars(self.matrix) - bound
        if extra:
            raise ShapeError(f"sentence is not closed: {sorted(extra)}")

    @classmethod
    def from_formula(cls, f: Formula) -> "Pi2Sentence":
        """Accept ``(forall (ys) (exists (xs) psi))``; either block may be absent."""
        universal: tuple[str, ...] = ()
        if isinstance(f, Forall):
            universal, f = f.vars, f.body
        existential: tuple[str, ...] = ()
        if isinstance(f, Exists):
            existential, f = f.vars, f.body
        return cls(universal, existential, f)

    def to_formula(self) -> Formula:
        f = self.matrix
        if self.existential:
            f = Exists(self.existential, f)
        if self.universal:
            f = Forall(self.universal, f)
        return f


def _lt0(v: str) -> Formula:
    return le(LinTerm.var(v).shift(1))


def _gt0(v: str) -> Formula:
    return le((-LinTerm.var(v)).shift(1))


def _eq0(v: str) -> Formula:
    return eq(LinTerm.var(v))


def _names(prefix: str, k: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i}" for i in range(k + 1))


def _gamma(gamma: Pi2Sentence, target: Sequence[str], avoid: set[str]) -> tuple[tuple[str, ...], Formula]:
    """``psi`` with the universal block renamed to ``target`` and fresh existentials."""
    used = avoid | set(target) | all_names(gamma.matrix)
    supply = fresh_names(used, "_x")
    ex = tuple(next(supply) for _ in gamma.existential)
    mapping = dict(zip(gamma.universal, target))
    mapping.update(zip(gamma.existential, ex))
    return ex, rename(gamma.matrix, mapping)


def wqo_encode(gamma: Pi2Sentence, left: str = "u", right: str = "v", hoist: bool = True) -> Formula:
    """Relation on ``Z^(1+m)`` whose free variables are ``left0..leftm`` and ``right0..rightm``.

    Component 0 carries the sign block, components ``1..m`` the copy of the
    universal variables.  With ``hoist`` the existential block of
    ``Gamma`` is moved to the front.
    """
    m = len(gamma.universal)
    us, vs = _names(left, m), _names(right, m)
    if set(us) & set(vs):
        raise ShapeError("left and right prefixes produce clashing names")
    x, y = us[0], vs[0]
    ex, psi = _gamma(gamma, vs[1:], set(us) | set(vs))
    inner = psi if hoist or not ex else Exists(ex, psi)
    body = disj(
        conj(_lt0(x), _lt0(y)),
        conj(_gt0(x), _gt0(y)),
        conj(_lt0(x), _eq0(y)),
        conj(_eq0(x), _gt0(y)),
        conj(_eq0(x), _eq0(y)),
        conj(_lt0(x), _gt0(y), inner),
    )
    return Exists(ex, body) if hoist and ex else body


def mondec_encode(gamma: Pi2Sentence, z1: str = "z1", z2: str = "z2") -> Formula:
    """``exists ys: psi(xs, ys) or z1 = z2`` with free variables ``xs, z1, z2``.

    Here the universal block of ``gamma`` plays the role of ``xs``.
    """
    if z1 == z2:
        raise ShapeError("z1 and z2 must differ")
    if {z1, z2} & set(gamma.universal):
        raise ShapeError("z1/z2 clash with a universal variable")
    matrix, ex = gamma.matrix, gamma.existential
    clash = {z1, z2} & set(ex)
    if clash:
        supply = fresh_names(all_names(matrix) | {z1, z2} | set(gamma.universal), "_y")
        mapping = {v: next(supply) for v in ex if v in clash}
        matrix = rename(matrix, mapping)
        ex = tuple(mapping.get(v, v) for v in ex)
    body = disj(matrix, eq(LinTerm.var(z1) - LinTerm.var(z2)))
    return Exists(ex, body) if ex else body
