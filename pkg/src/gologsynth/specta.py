"""Obligation tracking for metric constraints along a growing word.

The tracker follows the negation of the constraint conjunction in
negation normal form.  Its state is a set of alternative configurations;
each configuration is a set of obligations (an Until or Release
subformula paired with the time elapsed since it was activated).  After
reading a prefix, some configuration consisting only of Release
obligations exists iff the prefix already satisfies the negated
conjunction, i.e. violates a constraint.

Clock values are capped at the granularity bound; every interval
endpoint must be representable at that granularity, so the cap never
changes the outcome of an endpoint comparison.  On nonempty words,
`membership` agrees exactly with direct evaluation of the negated
formula.  The empty word is not handled here; callers feed at least one
symbol.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import GranularityError, InputError
from .mtl import (
    And,
    Interval,
    MtlFormula,
    MtlTrue,
    Not,
    Or,
    Prop,
    SymbolIs,
    TRUE,
    UNBOUNDED,
    Until,
    and_all,
)
from .ta import Granularity

FALSE = Not(TRUE)


@dataclass(frozen=True, repr=False)
class Release(MtlFormula):
    """Dual of Until: every position in the window satisfies the right
    side unless some strictly earlier position satisfied the left."""

    left: MtlFormula
    right: MtlFormula
    interval: Interval = UNBOUNDED

    def __repr__(self):
        tag = "" if self.interval == UNBOUNDED else repr(self.interval)
        return f"({self.left!r} R{tag} {self.right!r})"


def nnf(formula: MtlFormula) -> MtlFormula:
    """Push negations down to atoms, turning Until into Release and back."""
    if isinstance(formula, (MtlTrue, Prop, SymbolIs)):
        return formula
    if isinstance(formula, And):
        return And(nnf(formula.left), nnf(formula.right))
    if isinstance(formula, Or):
        return Or(nnf(formula.left), nnf(formula.right))
    if isinstance(formula, Until):
        return Until(nnf(formula.left), nnf(formula.right), formula.interval)
    if isinstance(formula, Release):
        return Release(nnf(formula.left), nnf(formula.right), formula.interval)
    if isinstance(formula, Not):
        inner = formula.body
        if isinstance(inner, (MtlTrue, Prop, SymbolIs)):
            return formula
        if isinstance(inner, Not):
            return nnf(inner.body)
        if isinstance(inner, And):
            return Or(nnf(Not(inner.left)), nnf(Not(inner.right)))
        if isinstance(inner, Or):
            return And(nnf(Not(inner.left)), nnf(Not(inner.right)))
        if isinstance(inner, Until):
            return Release(nnf(Not(inner.left)), nnf(Not(inner.right)), inner.interval)
        if isinstance(inner, Release):
            return Until(nnf(Not(inner.left)), nnf(Not(inner.right)), inner.interval)
    raise InputError(f"cannot normalise {formula!r}")


def _expand(formula: MtlFormula, symbol: frozenset[str]):
    """Disjunctive alternatives of fresh obligations for a formula read
    at the current position.  () means the formula is false here."""
    if isinstance(formula, MtlTrue):
        return (frozenset(),)
    if isinstance(formula, Prop):
        return (frozenset(),) if formula.label in symbol else ()
    if isinstance(formula, SymbolIs):
        return (frozenset(),) if symbol == formula.symbol else ()
    if isinstance(formula, Not):
        inner = formula.body
        if isinstance(inner, MtlTrue):
            return ()
        if isinstance(inner, Prop):
            return () if inner.label in symbol else (frozenset(),)
        if isinstance(inner, SymbolIs):
            return () if symbol == inner.symbol else (frozenset(),)
        raise InputError(f"not in negation normal form: {formula!r}")
    if isinstance(formula, And):
        lefts = _expand(formula.left, symbol)
        rights = _expand(formula.right, symbol)
        return tuple({a | b for a in lefts for b in rights})
    if isinstance(formula, Or):
        return tuple(set(_expand(formula.left, symbol)) | set(_expand(formula.right, symbol)))
    if isinstance(formula, (Until, Release)):
        return (frozenset({(formula, Fraction(0))}),)
    raise InputError(f"cannot track {formula!r}")


def _check_intervals(formula: MtlFormula, mu: Granularity) -> None:
    if isinstance(formula, (Until, Release)):
        ends = [formula.interval.lower]
        if formula.interval.upper is not None:
            ends.append(formula.interval.upper)
        for end in ends:
            if not mu.granular(end):
                raise GranularityError(
                    f"interval endpoint {end} not representable with "
                    f"step 1/{mu.m} up to {Fraction(mu.K, mu.m)}"
                )
        _check_intervals(formula.left, mu)
        _check_intervals(formula.right, mu)
    elif isinstance(formula, (And, Or)):
        _check_intervals(formula.left, mu)
        _check_intervals(formula.right, mu)
    elif isinstance(formula, Not):
        _check_intervals(formula.body, mu)


def _zero_until(node) -> bool:
    return (isinstance(node, Until)
            and node.interval.lower == 0 and node.interval.lower_closed)


def _tighten(config: frozenset) -> frozenset:
    """Within one configuration, same-node obligations of a zero-based
    Until nest: the oldest window is the binding one, the rest add
    nothing.  Keep only the largest elapsed value per such node."""
    best: dict = {}
    rest = []
    for node, value in config:
        if _zero_until(node):
            if value > best.get(node, Fraction(-1)):
                best[node] = value
        else:
            rest.append((node, value))
    return frozenset(rest) | frozenset(best.items())


def _dominates(a: frozenset, b: frozenset) -> bool:
    """Every continuation that completes `b` also completes `a`: each of
    a's obligations appears in b no younger (zero-based Until windows
    shrink as they age), other obligations must match exactly."""
    for node, value in a:
        if _zero_until(node):
            if not any(n == node and value <= v for n, v in b):
                return False
        elif (node, value) not in b:
            return False
    return True


def _minimize(configs: frozenset) -> frozenset:
    """Keep the minimal elements under domination.  On tightened
    configurations mutual domination implies equality, so this is a
    strict partial order and the result is order-independent."""
    return frozenset(
        config for config in configs
        if not any(other != config and _dominates(other, config)
                   for other in configs))


Config = frozenset
TrackerState = frozenset


@dataclass(frozen=True)
class SpecTracker:
    constraints: tuple[MtlFormula, ...]
    negated: MtlFormula
    granularity: Granularity

    def __post_init__(self):
        # step() is pure in (state, symbol, delay) and the synthesis game
        # replays the same triples constantly, so keep every answer; the
        # same goes for per-obligation alternatives
        object.__setattr__(self, "_step_cache", {})
        object.__setattr__(self, "_alt_cache", {})

    def initial(self) -> TrackerState:
        # A forced-fire obligation: the tracked formula is expanded at
        # the first position read, whatever its timestamp.
        seed = Until(FALSE, self.negated, UNBOUNDED)
        return frozenset({frozenset({(seed, Fraction(0))})})

    def _alternatives(self, node, value: Fraction, symbol: frozenset[str]):
        # nodes are subterms of the one fixed tracked formula, so their
        # ids are stable for this tracker's lifetime
        key = (id(node), value, symbol)
        cached = self._alt_cache.get(key)
        if cached is None:
            cached = tuple(self._fresh_alternatives(node, value, symbol))
            self._alt_cache[key] = cached
        return cached

    def _fresh_alternatives(self, node, value: Fraction, symbol: frozenset[str]):
        alts = []
        if isinstance(node, Until):
            if node.interval.contains(value):
                alts.extend(_expand(node.right, symbol))
            if node.interval.reachable_from(value):
                for extra in _expand(node.left, symbol):
                    alts.append(extra | {(node, value)})
            return alts
        if not node.interval.reachable_from(value):
            return [frozenset()]
        bases = _expand(node.right, symbol) if node.interval.contains(value) else (frozenset(),)
        for base in bases:
            for extra in _expand(node.left, symbol):
                alts.append(base | extra)
            alts.append(base | {(node, value)})
        return alts

    def step(self, state: TrackerState, symbol: frozenset[str], delay) -> TrackerState:
        if not isinstance(delay, Fraction):
            delay = Fraction(delay)
        if delay < 0:
            raise InputError("time cannot go backwards")
        per_state = self._step_cache.get(state)
        if per_state is None:
            per_state = self._step_cache[state] = {}
        key = (symbol, delay)
        cached = per_state.get(key)
        if cached is None:
            cached = per_state[key] = self._step(state, symbol, delay)
        return cached

    def _settle(self, node, value: Fraction) -> Fraction:
        """Past the lower bound of an unbounded interval, contains() and
        reachable_from() never change again, so all such values are
        interchangeable; collapse them to one representative."""
        if node.interval.upper is not None or value <= node.interval.lower:
            return value
        limit = node.interval.lower
        if not node.interval.lower_closed:
            limit += Fraction(1, 2 * self.granularity.m)
        return limit

    def _step(self, state: TrackerState, symbol: frozenset[str], delay: Fraction) -> TrackerState:
        out = set()
        for config in state:
            per_obligation = []
            dead = False
            for node, value in config:
                advanced = self._settle(node, self.granularity.cap(value + delay))
                alts = self._alternatives(node, advanced, symbol)
                if not alts:
                    dead = True
                    break
                per_obligation.append(alts)
            if dead:
                continue
            for combo in itertools.product(*per_obligation):
                merged = frozenset().union(*combo) if combo else frozenset()
                out.add(_tighten(merged))
        return _minimize(frozenset(out))

    def accepting(self, state: TrackerState) -> bool:
        """Does the prefix read so far violate some constraint?  True iff
        a configuration owes nothing beyond Release obligations."""
        return any(
            all(isinstance(node, Release) for node, _v in config)
            for config in state
        )

    def membership(self, word) -> bool:
        """Read a whole nonempty word; equivalent to evaluating the
        negated conjunction directly."""
        if not word:
            raise InputError("membership needs a nonempty word")
        state = self.initial()
        previous = word[0][1]
        for i, (symbol, time) in enumerate(word):
            state = self.step(state, symbol, time - previous if i else Fraction(0))
            previous = time
        return self.accepting(state)


def translate_spec(constraints, granularity: Granularity) -> SpecTracker:
    """Build the tracker for the negation of the constraint conjunction."""
    constraints = tuple(constraints)
    negated = nnf(Not(and_all(constraints)))
    _check_intervals(negated, granularity)
    return SpecTracker(constraints=constraints, negated=negated, granularity=granularity)
