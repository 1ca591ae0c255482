"""Timed automata over symbolic alphabets.

A symbol is a finite set of labels (ground atoms rendered as strings,
plus at most one action name); symbols compare as sets.  Guards are
conjunctions of comparisons of one clock against a rational constant.
Times are exact rationals throughout; floats never enter the semantics.

Two compositions are provided: `parallel_compose` synchronises two
automata over a shared alphabet (both must fire on every letter), and
`product` joins automata over disjoint alphabets, each letter splitting
uniquely into one part per component.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import GranularityError, InputError

OPS = ("<", "<=", "==", ">=", ">")


def _cmp(value: Fraction, op: str, const: Fraction) -> bool:
    if op == "<":
        return value < const
    if op == "<=":
        return value <= const
    if op == "==":
        return value == const
    if op == ">=":
        return value >= const
    if op == ">":
        return value > const
    raise InputError(f"unknown comparison {op!r}")


def render_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational {text!r}") from exc


@dataclass(frozen=True, repr=False)
class ClockConstraint:
    """Conjunction of ``clock op constant`` comparisons; empty means true."""

    terms: tuple[tuple[str, str, Fraction], ...] = ()

    def __post_init__(self):
        for clock, op, const in self.terms:
            if op not in OPS:
                raise InputError(f"unknown comparison {op!r}")
            if const < 0:
                raise InputError(f"negative clock constant {const}")
        object.__setattr__(self, "terms", tuple(sorted(set(self.terms),
                           key=lambda t: (t[0], OPS.index(t[1]), t[2]))))

    def satisfied(self, valuation) -> bool:
        for c, op, k in self.terms:
            v = valuation[c]
            if op == "<=":
                if v > k:
                    return False
            elif op == "==":
                if v != k:
                    return False
            elif op == ">=":
                if v < k:
                    return False
            elif op == "<":
                if v >= k:
                    return False
            elif v <= k:
                return False
        return True

    def conjoin(self, other: "ClockConstraint") -> "ClockConstraint":
        return ClockConstraint(self.terms + other.terms)

    def clocks(self) -> frozenset[str]:
        return frozenset(c for c, _, _ in self.terms)

    def bounds(self) -> dict[str, tuple[Fraction, bool, Fraction | None, bool]]:
        """Per clock: (low, low_strict, high, high_strict); high None = unbounded."""
        out: dict[str, tuple[Fraction, bool, Fraction | None, bool]] = {}
        for clock, op, const in self.terms:
            lo, lo_strict, hi, hi_strict = out.get(clock, (Fraction(0), False, None, False))
            if op in (">", ">=", "=="):
                strict = op == ">"
                if const > lo or (const == lo and strict and not lo_strict):
                    lo, lo_strict = const, strict
            if op in ("<", "<=", "=="):
                strict = op == "<"
                if hi is None or const < hi or (const == hi and strict and not hi_strict):
                    hi, hi_strict = const, strict
            out[clock] = (lo, lo_strict, hi, hi_strict)
        return out

    def satisfiable(self) -> bool:
        for lo, lo_strict, hi, hi_strict in self.bounds().values():
            if hi is None:
                continue
            if lo > hi or (lo == hi and (lo_strict or hi_strict)):
                return False
        return True

    def sample(self) -> dict[str, Fraction]:
        """Some nonnegative valuation satisfying the constraint."""
        if not self.satisfiable():
            raise InputError("cannot sample an unsatisfiable constraint")
        out = {}
        for clock, (lo, lo_strict, hi, hi_strict) in self.bounds().items():
            if hi is None:
                out[clock] = lo + 1 if lo_strict else lo
            elif lo == hi:
                out[clock] = lo
            else:
                out[clock] = lo + (hi - lo) / 2 if (lo_strict or hi_strict) else lo
        return out

    def render(self) -> str:
        return " && ".join(f"{c} {op} {render_rational(k)}" for c, op, k in self.terms)

    def __repr__(self):
        return self.render() or "true"


TRUE_GUARD = ClockConstraint()


def parse_guard(text: str) -> ClockConstraint:
    text = text.strip()
    if not text:
        return TRUE_GUARD
    terms = []
    for part in text.split("&&"):
        fields = part.split()
        if len(fields) != 3 or fields[1] not in OPS:
            raise InputError(f"bad guard atom {part.strip()!r}")
        terms.append((fields[0], fields[1], parse_rational(fields[2])))
    return ClockConstraint(tuple(terms))


@dataclass(frozen=True)
class Granularity:
    """Clock set with resolution 1/m and largest usable numerator K."""

    clocks: frozenset[str]
    m: int
    K: int

    def __post_init__(self):
        if self.m < 1 or self.K < 0:
            raise GranularityError("granularity needs m >= 1 and K >= 0")

    def granular(self, const: Fraction) -> bool:
        scaled = const * self.m
        return scaled.denominator == 1 and 0 <= scaled <= self.K

    def check_guard(self, guard: ClockConstraint) -> None:
        for clock, _, const in guard.terms:
            if clock not in self.clocks:
                raise GranularityError(f"clock {clock} outside granularity")
            if not self.granular(const):
                raise GranularityError(
                    f"constant {render_rational(const)} is not a multiple of "
                    f"1/{self.m} below {self.K}/{self.m}")

    def cap(self, value: Fraction) -> Fraction:
        """Collapse every value beyond K/m to one representative."""
        top = Fraction(self.K, self.m)
        return value if value <= top else top + Fraction(1, self.m)

    def lattice_delays(self) -> tuple[Fraction, ...]:
        """One delay per one-clock delay region: the half-step grid up to
        K/m plus a single representative above it."""
        step = Fraction(1, 2 * self.m)
        return tuple(Fraction(k, 2 * self.m) for k in range(2 * self.K + 1)) + (
            Fraction(self.K, self.m) + step,)


@dataclass(frozen=True)
class Transition:
    source: str
    symbol: frozenset[str]
    guard: ClockConstraint
    resets: frozenset[str]
    target: str

    def __post_init__(self):
        object.__setattr__(self, "symbol", frozenset(self.symbol))
        object.__setattr__(self, "resets", frozenset(self.resets))


def symbol_key(symbol: frozenset[str]) -> tuple[str, ...]:
    return tuple(sorted(symbol))


def transition_key(t: Transition):
    return (t.source, symbol_key(t.symbol), t.guard.render(), t.target)


@dataclass(frozen=True)
class TimedAutomaton:
    locations: frozenset[str]
    initial: str
    finals: frozenset[str]
    clocks: frozenset[str]
    transitions: tuple[Transition, ...]

    def __post_init__(self):
        object.__setattr__(self, "locations", frozenset(self.locations))
        object.__setattr__(self, "finals", frozenset(self.finals))
        object.__setattr__(self, "clocks", frozenset(self.clocks))
        if self.initial not in self.locations:
            raise InputError(f"initial location {self.initial} undeclared")
        if not self.finals <= self.locations:
            raise InputError("final locations must be declared")
        for t in self.transitions:
            if t.source not in self.locations or t.target not in self.locations:
                raise InputError(f"transition endpoint undeclared: {t.source}->{t.target}")
            if not t.resets <= self.clocks:
                raise InputError(f"reset of undeclared clock on {t.source}->{t.target}")
            if not t.guard.clocks() <= self.clocks:
                raise InputError(f"guard on undeclared clock on {t.source}->{t.target}")
        object.__setattr__(self, "transitions", tuple(sorted(self.transitions, key=transition_key)))

    def alphabet(self) -> frozenset[str]:
        out: set[str] = set()
        for t in self.transitions:
            out |= t.symbol
        return frozenset(out)

    def symbols(self) -> tuple[frozenset[str], ...]:
        return tuple(sorted({t.symbol for t in self.transitions}, key=symbol_key))

    def outgoing(self, location: str) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.source == location)


TimedWord = tuple[tuple[frozenset[str], Fraction], ...]


def check_word(word) -> TimedWord:
    prev = Fraction(0)
    out = []
    for i, (symbol, time) in enumerate(word):
        time = Fraction(time)
        if time < 0 or time < prev:
            raise InputError(f"timestamps must be nonnegative and nondecreasing (position {i})")
        out.append((frozenset(symbol), time))
        prev = time
    return tuple(out)


def accepts(ta: TimedAutomaton, word) -> bool:
    """Nondeterministic membership; clocks start at 0 at the word start."""
    word = check_word(word)
    zero = {c: Fraction(0) for c in sorted(ta.clocks)}
    states = {(ta.initial, tuple(sorted(zero.items())))}
    for symbol, time in word:
        next_states = set()
        for loc, reset_items in states:
            resets = dict(reset_items)
            valuation = {c: time - r for c, r in resets.items()}
            for t in ta.transitions:
                if t.source == loc and t.symbol == symbol and t.guard.satisfied(valuation):
                    updated = dict(resets)
                    for c in t.resets:
                        updated[c] = time
                    next_states.add((t.target, tuple(sorted(updated.items()))))
        states = next_states
        if not states:
            return False
    return any(loc in ta.finals for loc, _ in states)


def is_deterministic(ta: TimedAutomaton):
    """(True, None) or (False, (t1, t2)) for a same-source, same-symbol
    pair whose guards can hold simultaneously."""
    by_key: dict = {}
    for t in ta.transitions:
        by_key.setdefault((t.source, symbol_key(t.symbol)), []).append(t)
    for group in by_key.values():
        for i, first in enumerate(group):
            for second in group[i + 1:]:
                if first.guard.conjoin(second.guard).satisfiable():
                    return False, (first, second)
    return True, None


def pair_name(a: str, b: str) -> str:
    return f"({a},{b})"


def parallel_compose(t1: TimedAutomaton, t2: TimedAutomaton) -> TimedAutomaton:
    """Synchronous composition: a letter fires iff both components fire it.

    Clock sets must be disjoint so neither side can touch the other's
    timing state."""
    if t1.clocks & t2.clocks:
        raise InputError(f"shared clocks in composition: {sorted(t1.clocks & t2.clocks)}")
    return _compose(t1, t2, shared=True)


def product(t1: TimedAutomaton, t2: TimedAutomaton) -> TimedAutomaton:
    """Alphabet-disjoint join: every letter is the union of one symbol
    from each side and both sides move on it."""
    if t1.alphabet() & t2.alphabet():
        raise InputError(f"product needs disjoint alphabets, shared: "
                         f"{sorted(t1.alphabet() & t2.alphabet())[:4]}")
    if t1.clocks & t2.clocks:
        raise InputError(f"shared clocks in composition: {sorted(t1.clocks & t2.clocks)}")
    return _compose(t1, t2, shared=False)


def _compose(t1: TimedAutomaton, t2: TimedAutomaton, shared: bool) -> TimedAutomaton:
    out1: dict[str, list[Transition]] = {}
    out2: dict[str, list[Transition]] = {}
    for t in t1.transitions:
        out1.setdefault(t.source, []).append(t)
    for t in t2.transitions:
        out2.setdefault(t.source, []).append(t)

    start = (t1.initial, t2.initial)
    seen = {start}
    queue = [start]
    transitions = []
    while queue:
        l1, l2 = queue.pop(0)
        pairs = []
        for a in out1.get(l1, ()):
            for b in out2.get(l2, ()):
                if shared and a.symbol != b.symbol:
                    continue
                symbol = a.symbol if shared else a.symbol | b.symbol
                pairs.append((a, b, symbol))
        pairs.sort(key=lambda p: (symbol_key(p[2]), p[0].guard.render(), p[1].guard.render(),
                                  p[0].target, p[1].target))
        for a, b, symbol in pairs:
            target = (a.target, b.target)
            transitions.append(Transition(pair_name(l1, l2), symbol,
                                          a.guard.conjoin(b.guard),
                                          a.resets | b.resets, pair_name(*target)))
            if target not in seen:
                seen.add(target)
                queue.append(target)
    locations = frozenset(pair_name(*p) for p in seen)
    finals = frozenset(pair_name(a, b) for a, b in seen if a in t1.finals and b in t2.finals)
    return TimedAutomaton(locations, pair_name(*start), finals,
                          t1.clocks | t2.clocks, tuple(transitions))


def reachable_part(ta: TimedAutomaton) -> TimedAutomaton:
    """Restrict to locations reachable from the initial one."""
    by_source: dict[str, list[Transition]] = {}
    for t in ta.transitions:
        by_source.setdefault(t.source, []).append(t)
    seen = {ta.initial}
    queue = [ta.initial]
    while queue:
        loc = queue.pop(0)
        for t in by_source.get(loc, ()):
            if t.target not in seen:
                seen.add(t.target)
                queue.append(t.target)
    return TimedAutomaton(frozenset(seen), ta.initial, ta.finals & seen,
                          ta.clocks, tuple(t for t in ta.transitions if t.source in seen))


# --- regions -----------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """Equivalence class of valuations under a granularity.

    ``ints`` holds the scaled integer part of every clock still at or
    below K; ``order`` groups those with positive fractional part by
    increasing fraction; everything else has outgrown the constants.
    """

    m: int
    K: int
    ints: tuple[tuple[str, int], ...]
    order: tuple[frozenset[str], ...]
    unbounded: frozenset[str]

    def zeros(self) -> frozenset[str]:
        positive = frozenset().union(*self.order) if self.order else frozenset()
        return frozenset(c for c, _ in self.ints) - positive

    def all_unbounded(self) -> bool:
        return not self.ints


def region_of(valuation: dict[str, Fraction], mu: Granularity) -> Region:
    ints = []
    fracs: dict[Fraction, set[str]] = {}
    unbounded = set()
    for clock in sorted(mu.clocks):
        value = valuation[clock]
        if value < 0:
            raise InputError(f"negative clock value for {clock}")
        scaled = value * mu.m
        if scaled > mu.K:
            unbounded.add(clock)
            continue
        whole = scaled.numerator // scaled.denominator
        frac = scaled - whole
        ints.append((clock, whole))
        if frac:
            fracs.setdefault(frac, set()).add(clock)
    order = tuple(frozenset(fracs[f]) for f in sorted(fracs))
    return Region(mu.m, mu.K, tuple(ints), order, frozenset(unbounded))


def region_successor(region: Region) -> Region | None:
    """The next region reached by letting time pass; None at the top."""
    if region.all_unbounded():
        return None
    zeros = region.zeros()
    if zeros:
        graduating = frozenset(c for c in zeros
                               if dict(region.ints)[c] == region.K)
        staying = zeros - graduating
        ints = tuple((c, i) for c, i in region.ints if c not in graduating)
        order = ((staying,) if staying else ()) + region.order
        return Region(region.m, region.K, ints, order,
                      region.unbounded | graduating)
    if region.order:
        landing = region.order[-1]
        ints = tuple((c, i + 1 if c in landing else i) for c, i in region.ints)
        return Region(region.m, region.K, ints, region.order[:-1], region.unbounded)
    return None


def region_successors(region: Region) -> tuple[Region, ...]:
    """Strictly ordered elapse chain from (not including) the region up
    to the all-unbounded fixpoint."""
    chain = []
    current = region_successor(region)
    while current is not None:
        chain.append(current)
        current = region_successor(current)
    return tuple(chain)


def region_sample(region: Region) -> dict[str, Fraction]:
    """A representative valuation of the region."""
    out = {}
    ints = dict(region.ints)
    for clock in region.zeros():
        out[clock] = Fraction(ints[clock], region.m)
    n = len(region.order) + 1
    for rank, cls in enumerate(region.order, start=1):
        for clock in cls:
            out[clock] = Fraction(ints[clock] * n + rank, region.m * n)
    for clock in region.unbounded:
        out[clock] = Fraction(region.K + 1, region.m)
    return out


# --- serialization ------------------------------------------------------------


def ta_to_dict(ta: TimedAutomaton) -> dict:
    return {
        "locations": sorted(ta.locations),
        "initial": ta.initial,
        "finals": sorted(ta.finals),
        "clocks": sorted(ta.clocks),
        "transitions": [
            {
                "from": t.source,
                "symbols": sorted(t.symbol),
                "guard": t.guard.render(),
                "resets": sorted(t.resets),
                "to": t.target,
            }
            for t in ta.transitions
        ],
    }


def ta_to_json(ta: TimedAutomaton) -> str:
    return json.dumps(ta_to_dict(ta), indent=2, sort_keys=True) + "\n"


def ta_from_dict(data: dict) -> TimedAutomaton:
    try:
        transitions = tuple(
            Transition(t["from"], frozenset(t["symbols"]), parse_guard(t.get("guard", "")),
                       frozenset(t.get("resets", ())), t["to"])
            for t in data["transitions"])
        return TimedAutomaton(frozenset(data["locations"]), data["initial"],
                              frozenset(data["finals"]), frozenset(data.get("clocks", ())),
                              transitions)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed automaton description: {exc}") from exc


def ta_from_json(text: str) -> TimedAutomaton:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"bad JSON: {exc}") from exc
    return ta_from_dict(data)


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def ta_to_dot(ta: TimedAutomaton, name: str = "ta") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  __start [shape=point label=""];']
    for loc in sorted(ta.locations):
        shape = "doublecircle" if loc in ta.finals else "circle"
        lines.append(f"  {_dot_quote(loc)} [shape={shape}];")
    lines.append(f"  __start -> {_dot_quote(ta.initial)};")
    for t in ta.transitions:
        label = "{" + ",".join(sorted(t.symbol)) + "}"
        if t.guard.terms:
            label += "\\n" + t.guard.render()
        if t.resets:
            label += "\\n" + ",".join(f"{c}:=0" for c in sorted(t.resets))
        lines.append(f"  {_dot_quote(t.source)} -> {_dot_quote(t.target)} "
                     f"[label={_dot_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
