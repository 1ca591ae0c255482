"""Metric temporal logic over finite timed words, pointwise and strict.

A word is a sequence of (symbol, time) pairs with nondecreasing rational
times; a symbol is a set of labels.  ``Prop(p)`` holds at position i iff
p is a member of the i-th symbol; ``SymbolIs(Q)`` (the exact-match atom
used on power-set alphabets) holds iff the i-th symbol equals Q.

Until is strict: ``Until(f, g, I)`` at i needs a strictly later witness
position j with g, time difference inside I, and f at every position in
between.  F and G are sugar expanding into Until; on the empty word any
Until is false and hence any G is true.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError


@dataclass(frozen=True, repr=False)
class Interval:
    lower: Fraction = Fraction(0)
    upper: Fraction | None = None
    lower_closed: bool = True
    upper_closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lower", Fraction(self.lower))
        if self.upper is not None:
            object.__setattr__(self, "upper", Fraction(self.upper))
        if self.lower < 0:
            raise InputError("interval bounds must be nonnegative")
        if self.upper is not None:
            if self.upper < self.lower:
                raise InputError("empty interval")
            if self.upper == self.lower and not (self.lower_closed and self.upper_closed):
                raise InputError("empty interval")

    def contains(self, x: Fraction) -> bool:
        if x < self.lower or (x == self.lower and not self.lower_closed):
            return False
        if self.upper is not None:
            if x > self.upper or (x == self.upper and not self.upper_closed):
                return False
        return True

    def reachable_from(self, x: Fraction) -> bool:
        """Can some value >= x still lie inside the interval?"""
        if self.upper is None:
            return True
        return x < self.upper or (x == self.upper and self.upper_closed)

    def __repr__(self):
        left = "[" if self.lower_closed else "("
        if self.upper is None:
            return f"{left}{self.lower},inf)"
        right = "]" if self.upper_closed else ")"
        return f"{left}{self.lower},{self.upper}{right}"


UNBOUNDED = Interval()


def interval_lt(c) -> Interval:
    return Interval(0, Fraction(c), True, False)


def interval_le(c) -> Interval:
    return Interval(0, Fraction(c), True, True)


def interval_eq(c) -> Interval:
    return Interval(Fraction(c), Fraction(c), True, True)


def interval_ge(c) -> Interval:
    return Interval(Fraction(c), None, True, False)


def interval_gt(c) -> Interval:
    return Interval(Fraction(c), None, False, False)


class MtlFormula:
    __slots__ = ()


@dataclass(frozen=True, repr=False)
class MtlTrue(MtlFormula):
    def __repr__(self):
        return "true"


TRUE = MtlTrue()


@dataclass(frozen=True, repr=False)
class Prop(MtlFormula):
    """Label membership in the current symbol."""

    label: str

    def __repr__(self):
        return self.label


@dataclass(frozen=True, repr=False)
class SymbolIs(MtlFormula):
    """Exact equality of the current symbol with a fixed set."""

    symbol: frozenset[str]

    def __repr__(self):
        return "{" + ",".join(sorted(self.symbol)) + "}"


@dataclass(frozen=True, repr=False)
class Not(MtlFormula):
    body: MtlFormula

    def __repr__(self):
        return f"!{self.body!r}"


@dataclass(frozen=True, repr=False)
class And(MtlFormula):
    left: MtlFormula
    right: MtlFormula

    def __repr__(self):
        return f"({self.left!r} & {self.right!r})"


@dataclass(frozen=True, repr=False)
class Or(MtlFormula):
    left: MtlFormula
    right: MtlFormula

    def __repr__(self):
        return f"({self.left!r} | {self.right!r})"


@dataclass(frozen=True, repr=False)
class Until(MtlFormula):
    left: MtlFormula
    right: MtlFormula
    interval: Interval = UNBOUNDED

    def __repr__(self):
        tag = "" if self.interval == UNBOUNDED else repr(self.interval)
        return f"({self.left!r} U{tag} {self.right!r})"


FALSE = Not(TRUE)


def F(formula: MtlFormula, interval: Interval = UNBOUNDED) -> MtlFormula:
    return Until(TRUE, formula, interval)


def G(formula: MtlFormula, interval: Interval = UNBOUNDED) -> MtlFormula:
    return Not(Until(TRUE, Not(formula), interval))


def and_all(parts) -> MtlFormula:
    parts = [p for p in parts if p != TRUE]
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def or_all(parts) -> MtlFormula:
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def implies(premise: MtlFormula, conclusion: MtlFormula) -> MtlFormula:
    return Or(Not(premise), conclusion)


def eval(word, index: int, formula: MtlFormula) -> bool:
    """Truth at a position of a nonempty word."""
    if index < 0 or index >= len(word):
        raise InputError(f"position {index} outside word of length {len(word)}")
    if isinstance(formula, MtlTrue):
        return True
    if isinstance(formula, Prop):
        return formula.label in word[index][0]
    if isinstance(formula, SymbolIs):
        return word[index][0] == formula.symbol
    if isinstance(formula, Not):
        return not eval(word, index, formula.body)
    if isinstance(formula, And):
        return eval(word, index, formula.left) and eval(word, index, formula.right)
    if isinstance(formula, Or):
        return eval(word, index, formula.left) or eval(word, index, formula.right)
    if isinstance(formula, Until):
        anchor = word[index][1]
        for j in range(index + 1, len(word)):
            if formula.interval.contains(word[j][1] - anchor) and eval(word, j, formula.right):
                if all(eval(word, k, formula.left) for k in range(index + 1, j)):
                    return True
        return False
    raise InputError(f"not an MTL formula: {formula!r}")


def _eval_empty(formula: MtlFormula) -> bool:
    # There is no position to stand on: atoms are false, Until has no
    # strict future, and everything else follows propositionally.
    if isinstance(formula, MtlTrue):
        return True
    if isinstance(formula, (Prop, SymbolIs, Until)):
        return False
    if isinstance(formula, Not):
        return not _eval_empty(formula.body)
    if isinstance(formula, And):
        return _eval_empty(formula.left) and _eval_empty(formula.right)
    if isinstance(formula, Or):
        return _eval_empty(formula.left) or _eval_empty(formula.right)
    raise InputError(f"not an MTL formula: {formula!r}")


def eval_word(word, formula: MtlFormula) -> bool:
    """Truth of the whole word: position 0, or the empty-word reading."""
    if len(word) == 0:
        return _eval_empty(formula)
    return eval(word, 0, formula)


def _subsets(labels) -> list[frozenset[str]]:
    labels = sorted(labels)
    out = []
    for mask in range(1 << len(labels)):
        out.append(frozenset(l for i, l in enumerate(labels) if mask >> i & 1))
    return out


def star_map(formula: MtlFormula, alphabet) -> MtlFormula:
    """Rewrite membership atoms for the power-set alphabet: p becomes the
    disjunction of all exact symbols containing p."""
    subsets = _subsets(alphabet)

    def walk(f: MtlFormula) -> MtlFormula:
        if isinstance(f, MtlTrue):
            return f
        if isinstance(f, Prop):
            return or_all([SymbolIs(q) for q in subsets if f.label in q])
        if isinstance(f, Not):
            return Not(walk(f.body))
        if isinstance(f, And):
            return And(walk(f.left), walk(f.right))
        if isinstance(f, Or):
            return Or(walk(f.left), walk(f.right))
        if isinstance(f, Until):
            return Until(walk(f.left), walk(f.right), f.interval)
        raise InputError(f"cannot star-map {f!r}")

    return walk(formula)


def plus_map(formula: MtlFormula, alphabet) -> MtlFormula:
    """Conjoin the exactly-one-label discipline: the result holds on
    words whose symbols each carry one alphabet label."""
    labels = sorted(alphabet)
    if not labels:
        raise InputError("plus_map needs a nonempty alphabet")
    one = or_all([
        and_all([Prop(p)] + [Not(Prop(q)) for q in labels if q != p])
        for p in labels
    ])
    return And(formula, G(one))


def exact_form(formula: MtlFormula) -> MtlFormula:
    """Reinterpret membership atoms as exact single-label symbols, the
    reading used on words over a plain (non-power-set) alphabet."""
    if isinstance(formula, MtlTrue):
        return formula
    if isinstance(formula, Prop):
        return SymbolIs(frozenset([formula.label]))
    if isinstance(formula, Not):
        return Not(exact_form(formula.body))
    if isinstance(formula, And):
        return And(exact_form(formula.left), exact_form(formula.right))
    if isinstance(formula, Or):
        return Or(exact_form(formula.left), exact_form(formula.right))
    if isinstance(formula, Until):
        return Until(exact_form(formula.left), exact_form(formula.right), formula.interval)
    raise InputError(f"cannot reinterpret {formula!r}")
