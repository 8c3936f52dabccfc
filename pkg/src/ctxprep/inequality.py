"""Noncontextuality inequalities with dichotomic observables.

An inequality is a weighted sum of context correlators,
``sum_n x_n <prod_{k in E_n} A_k> <= 1``, stored with exact rational
coefficients so that the classical bound can be checked with zero tolerance.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Assignment",
    "ClassicalBoundReport",
    "Inequality",
    "InequalityError",
    "InequalityParseError",
    "NotNormalizedError",
    "chsh",
    "classical_value",
    "compatibility_neighbors",
    "kcbs",
    "parse_inequality",
    "serialize_inequality",
    "validate_normalization",
]

ENUMERATION_GUARD = 24


class InequalityError(ValueError):
    pass


class InequalityParseError(InequalityError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotNormalizedError(InequalityError):
    """Raised by constructions that need a classical maximum of exactly 1."""


Assignment = tuple[int, ...]


@dataclass(frozen=True)
class Inequality:
    n_observables: int
    terms: tuple[tuple[Fraction, tuple[int, ...]], ...]

    def __post_init__(self):
        if self.n_observables < 1:
            raise InequalityError("an inequality needs at least one observable")
        if not self.terms:
            raise InequalityError("an inequality needs at least one term")
        seen = set()
        for coeff, ctx in self.terms:
            if coeff == 0:
                raise InequalityError(f"zero coefficient on context {list(ctx)}")
            if not ctx:
                raise InequalityError("empty context")
            if len(set(ctx)) != len(ctx):
                raise InequalityError(f"duplicate index in context {list(ctx)}")
            if list(ctx) != sorted(ctx):
                raise InequalityError(f"context {list(ctx)} is not sorted")
            for k in ctx:
                if not 1 <= k <= self.n_observables:
                    raise InequalityError(
                        f"index {k} out of range 1..{self.n_observables}")
            if ctx in seen:
                raise InequalityError(f"duplicate context {list(ctx)}")
            seen.add(ctx)

    @classmethod
    def from_terms(cls, n_observables: int,
                   terms: Iterable[tuple[object, Iterable[int]]]) -> "Inequality":
        """Build from loose ``(coeff, indices)`` pairs; indices are sorted here."""
        norm = []
        for coeff, ctx in terms:
            ctx = tuple(int(k) for k in ctx)
            if len(set(ctx)) != len(ctx):
                raise InequalityError(f"duplicate index in context {list(ctx)}")
            norm.append((Fraction(coeff), tuple(sorted(ctx))))
        return cls(n_observables, tuple(norm))

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return tuple(c for c, _ in self.terms)

    @property
    def contexts(self) -> tuple[tuple[int, ...], ...]:
        return tuple(ctx for _, ctx in self.terms)

    @property
    def abs_coefficient_sum(self) -> Fraction:
        return sum((abs(c) for c in self.coefficients), Fraction(0))

    @property
    def key(self) -> str:
        """Content identifier, independent of term order."""
        canon = serialize_inequality(
            Inequality(self.n_observables, tuple(sorted(self.terms, key=lambda t: t[1]))))
        return "ineq-" + hashlib.sha1(canon.encode()).hexdigest()[:12]


def chsh() -> Inequality:
    half = Fraction(1, 2)
    return Inequality(4, ((half, (1, 3)), (half, (1, 4)), (half, (2, 3)), (-half, (2, 4))))


def kcbs() -> Inequality:
    third = Fraction(-1, 3)
    terms = [(third, tuple(sorted((i, i % 5 + 1)))) for i in range(1, 6)]
    return Inequality(5, tuple(terms))


def _parse_coeff(tok: str, line: int) -> Fraction:
    try:
        value = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise InequalityParseError(f"bad coefficient {tok!r}", line) from None
    return value


def parse_inequality(text: str) -> Inequality:
    header_seen = False
    n_obs = None
    terms = []
    contexts_seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if not header_seen:
            if words != ["ineq", "v1"]:
                raise InequalityParseError("expected header 'ineq v1'", lineno)
            header_seen = True
            continue
        if n_obs is None:
            if len(words) != 2 or words[0] != "observables":
                raise InequalityParseError("expected 'observables <N>'", lineno)
            try:
                n_obs = int(words[1])
            except ValueError:
                raise InequalityParseError(f"bad observable count {words[1]!r}", lineno) from None
            if n_obs < 1:
                raise InequalityParseError("observable count must be positive", lineno)
            continue
        if words[0] != "term":
            raise InequalityParseError(f"unexpected keyword {words[0]!r}", lineno)
        rest = line[len("term"):]
        if ":" not in rest:
            raise InequalityParseError("term needs '<coeff> : <indices>'", lineno)
        lhs, rhs = rest.split(":", 1)
        if len(lhs.split()) != 1:
            raise InequalityParseError("term needs exactly one coefficient", lineno)
        coeff = _parse_coeff(lhs.strip(), lineno)
        if coeff == 0:
            raise InequalityParseError("zero coefficient", lineno)
        try:
            idx = [int(w) for w in rhs.split()]
        except ValueError:
            raise InequalityParseError("indices must be integers", lineno) from None
        if not idx:
            raise InequalityParseError("empty context", lineno)
        if len(set(idx)) != len(idx):
            raise InequalityParseError(f"duplicate index in context {idx}", lineno)
        for k in idx:
            if not 1 <= k <= n_obs:
                raise InequalityParseError(f"index {k} out of range 1..{n_obs}", lineno)
        ctx = tuple(sorted(idx))
        if ctx in contexts_seen:
            raise InequalityParseError(f"duplicate context {list(ctx)}", lineno)
        contexts_seen.add(ctx)
        terms.append((coeff, ctx))
    if not header_seen:
        raise InequalityParseError("empty input")
    if n_obs is None:
        raise InequalityParseError("missing 'observables' line")
    if not terms:
        raise InequalityParseError("no terms")
    return Inequality(n_obs, tuple(terms))


def _format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def serialize_inequality(ineq: Inequality) -> str:
    lines = ["ineq v1", f"observables {ineq.n_observables}"]
    for coeff, ctx in ineq.terms:
        lines.append(f"term {_format_fraction(coeff)} : " + " ".join(map(str, ctx)))
    return "\n".join(lines) + "\n"


def _check_assignment(ineq: Inequality, a: Sequence[int]) -> None:
    if len(a) != ineq.n_observables:
        raise InequalityError(
            f"assignment has length {len(a)}, expected {ineq.n_observables}")
    if any(s not in (1, -1) for s in a):
        raise InequalityError("assignment entries must be +1 or -1")


def classical_value(ineq: Inequality, a: Sequence[int]) -> Fraction:
    _check_assignment(ineq, a)
    total = Fraction(0)
    for coeff, ctx in ineq.terms:
        sign = 1
        for k in ctx:
            sign *= a[k - 1]
        total += coeff * sign
    return total


@dataclass(frozen=True)
class ClassicalBoundReport:
    max_value: Fraction
    argmax: Assignment
    is_normalized: bool
    n_assignments_checked: int


def _bits_to_assignment(index: int, n: int) -> Assignment:
    # bit (n-1-j) of index set means a_{j+1} = -1, so index order is
    # lexicographic with +1 < -1
    return tuple(-1 if (index >> (n - 1 - j)) & 1 else 1 for j in range(n))


def validate_normalization(ineq: Inequality, guard: int = ENUMERATION_GUARD,
                           chunk: int = 1 << 18) -> ClassicalBoundReport:
    """Exhaustively maximize the classical value over all 2^N sign assignments.

    Coefficients are scaled to integers by their common denominator, so the
    vectorized enumeration is exact.
    """
    n = ineq.n_observables
    if n > guard:
        raise InequalityError(f"N={n} exceeds the enumeration guard {guard}")
    denom = reduce(math.lcm, (c.denominator for c in ineq.coefficients), 1)
    weights = np.array([int(c * denom) for c in ineq.coefficients], dtype=np.int64)
    masks = np.array([sum(1 << (n - k) for k in ctx) for ctx in ineq.contexts],
                     dtype=np.int64)
    total = 1 << n
    best_val = None
    best_idx = -1
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        parity = np.bitwise_count(idx[:, None] & masks[None, :]) & 1
        vals = (weights[None, :] * (1 - 2 * parity.astype(np.int64))).sum(axis=1)
        j = int(np.argmax(vals))
        if best_val is None or vals[j] > best_val:
            best_val = int(vals[j])
            best_idx = start + j
    max_value = Fraction(best_val, denom)
    argmax = _bits_to_assignment(best_idx, n)
    return ClassicalBoundReport(max_value, argmax, max_value == 1, total)


def require_normalized(ineq: Inequality) -> Assignment:
    rep = validate_normalization(ineq)
    if not rep.is_normalized:
        raise NotNormalizedError(
            f"classical maximum is {rep.max_value}, not 1")
    return rep.argmax


def compatibility_neighbors(ineq: Inequality, k: int) -> set[int]:
    if not 1 <= k <= ineq.n_observables:
        raise InequalityError(f"index {k} out of range 1..{ineq.n_observables}")
    out = set()
    for ctx in ineq.contexts:
        if k in ctx:
            out.update(ctx)
    out.discard(k)
    return out
