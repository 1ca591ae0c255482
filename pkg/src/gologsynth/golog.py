"""Programs over a basic action theory and their transition semantics.

A program is one of

    Act(t)            a (possibly open) action term
    Test(phi)         succeeds silently when phi holds
    Seq(d1, d2)       d1 then d2
    Choice(d1, d2)    either branch
    Pick(x, tag, d)   nondeterministic binding of x over a name pool
    Star(d)           zero or more repetitions
    Interleave(d1,d2) concurrent interleaving

`steps` yields the one-action successors of a configuration, `is_final`
says whether it may stop, and `enumerate_traces` collects the action
sequences reaching a final configuration.  Timestamps play no role at
this level: trace membership is invariant under retiming, so time is
the automaton layer's business.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bat import BasicActionTheory, WorldState, initial_state, poss, progress, replay
from .errors import InputError
from .logic import (
    TRUE,
    CompoundTerm,
    Formula,
    StandardName,
    Term,
    Top,
    eval_static,
    ground_formula,
    substitute,
    substitute_term,
)


class Program:
    __slots__ = ()


@dataclass(frozen=True, repr=False)
class Act(Program):
    term: Term

    def __repr__(self):
        return repr(self.term)


@dataclass(frozen=True, repr=False)
class Test(Program):
    formula: Formula

    def __repr__(self):
        return f"?({self.formula!r})"


@dataclass(frozen=True, repr=False)
class Seq(Program):
    first: Program
    second: Program

    def __repr__(self):
        return f"({self.first!r}; {self.second!r})"


@dataclass(frozen=True, repr=False)
class Choice(Program):
    left: Program
    right: Program

    def __repr__(self):
        return f"({self.left!r} | {self.right!r})"


@dataclass(frozen=True, repr=False)
class Pick(Program):
    var: str
    tag: str
    body: Program

    def __repr__(self):
        return f"pi {self.var}:{self.tag}. {self.body!r}"


@dataclass(frozen=True, repr=False)
class Star(Program):
    body: Program

    def __repr__(self):
        return f"({self.body!r})*"


@dataclass(frozen=True, repr=False)
class Interleave(Program):
    left: Program
    right: Program

    def __repr__(self):
        return f"({self.left!r} || {self.right!r})"


NIL = Test(TRUE)


def seq_all(parts) -> Program:
    parts = list(parts)
    if not parts:
        return NIL
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Seq(p, out)
    return out


def substitute_program(prog: Program, binding: dict[str, StandardName]) -> Program:
    if isinstance(prog, Act):
        return Act(substitute_term(prog.term, binding))
    if isinstance(prog, Test):
        return Test(substitute(prog.formula, binding))
    if isinstance(prog, Seq):
        return Seq(substitute_program(prog.first, binding), substitute_program(prog.second, binding))
    if isinstance(prog, Choice):
        return Choice(substitute_program(prog.left, binding), substitute_program(prog.right, binding))
    if isinstance(prog, Interleave):
        return Interleave(substitute_program(prog.left, binding), substitute_program(prog.right, binding))
    if isinstance(prog, Star):
        return Star(substitute_program(prog.body, binding))
    if isinstance(prog, Pick):
        inner = {k: v for k, v in binding.items() if k != prog.var}
        return Pick(prog.var, prog.tag, substitute_program(prog.body, inner))
    raise InputError(f"not a program: {prog!r}")


def canonical(prog: Program) -> Program:
    """Normal form used to quotient configurations.

    Sequences are flattened to the right with vacuous tests dropped, and
    an interleave with an exhausted side collapses to the other side.
    Successor sets and finality are preserved.
    """
    if isinstance(prog, Seq):
        parts = []
        stack = [prog]
        while stack:
            p = stack.pop()
            if isinstance(p, Seq):
                stack.append(p.second)
                stack.append(p.first)
            else:
                parts.append(p)
        parts = [canonical(p) for p in parts]
        return seq_all([p for p in parts if p != NIL])
    if isinstance(prog, Choice):
        return Choice(canonical(prog.left), canonical(prog.right))
    if isinstance(prog, Interleave):
        left, right = canonical(prog.left), canonical(prog.right)
        if left == NIL:
            return right
        if right == NIL:
            return left
        return Interleave(left, right)
    if isinstance(prog, Star):
        return Star(canonical(prog.body))
    if isinstance(prog, Pick):
        return Pick(prog.var, prog.tag, canonical(prog.body))
    return prog


@dataclass(frozen=True)
class Configuration:
    state: WorldState
    trace: tuple[StandardName, ...]
    remaining: Program


def initial_configuration(bat: BasicActionTheory, prog: Program) -> Configuration:
    return Configuration(initial_state(bat), (), prog)


def is_final(config: Configuration, bat: BasicActionTheory) -> bool:
    return _final(config.remaining, config.state, bat)


def _final(prog: Program, state: WorldState, bat: BasicActionTheory) -> bool:
    if isinstance(prog, Act):
        return False
    if isinstance(prog, Test):
        return eval_static(ground_formula(prog.formula, bat.domain), state)
    if isinstance(prog, Seq):
        return _final(prog.first, state, bat) and _final(prog.second, state, bat)
    if isinstance(prog, Choice):
        return _final(prog.left, state, bat) or _final(prog.right, state, bat)
    if isinstance(prog, Interleave):
        return _final(prog.left, state, bat) and _final(prog.right, state, bat)
    if isinstance(prog, Star):
        return True
    if isinstance(prog, Pick):
        return any(
            _final(substitute_program(prog.body, {prog.var: n}), state, bat)
            for n in bat.domain.extension(prog.tag))
    raise InputError(f"not a program: {prog!r}")


def _program_steps(prog: Program, state: WorldState, bat: BasicActionTheory):
    """One-step successors as (action, remaining-program) pairs."""
    if isinstance(prog, Act):
        term = prog.term
        if not isinstance(term, StandardName):
            raise InputError(f"unbound action term {term!r}")
        if poss(term, state, bat):
            return {(term, NIL)}
        return set()
    if isinstance(prog, Test):
        return set()
    if isinstance(prog, Seq):
        out = {(a, Seq(rest, prog.second)) for a, rest in _program_steps(prog.first, state, bat)}
        if _final(prog.first, state, bat):
            out |= _program_steps(prog.second, state, bat)
        return out
    if isinstance(prog, Choice):
        return _program_steps(prog.left, state, bat) | _program_steps(prog.right, state, bat)
    if isinstance(prog, Interleave):
        out = {(a, Interleave(rest, prog.right)) for a, rest in _program_steps(prog.left, state, bat)}
        out |= {(a, Interleave(prog.left, rest)) for a, rest in _program_steps(prog.right, state, bat)}
        return out
    if isinstance(prog, Star):
        return {(a, Seq(rest, prog)) for a, rest in _program_steps(prog.body, state, bat)}
    if isinstance(prog, Pick):
        out = set()
        for n in bat.domain.extension(prog.tag):
            out |= _program_steps(substitute_program(prog.body, {prog.var: n}), state, bat)
        return out
    raise InputError(f"not a program: {prog!r}")


def steps(config: Configuration, bat: BasicActionTheory) -> tuple[Configuration, ...]:
    """Successor configurations, canonically ordered."""
    succ = _program_steps(config.remaining, config.state, bat)
    out = [
        Configuration(progress(config.state, action, bat), config.trace + (action,), rest)
        for action, rest in succ
    ]
    out.sort(key=lambda c: (repr(c.trace[-1]), repr(c.remaining)))
    return tuple(out)


@dataclass(frozen=True)
class TraceEnumeration:
    traces: frozenset[tuple[StandardName, ...]]
    exhausted: bool


def enumerate_traces(bat: BasicActionTheory, prog: Program, max_len: int) -> TraceEnumeration:
    """All program traces of length <= max_len.

    ``exhausted`` is False when configurations at the bound still had
    successors, i.e. longer traces may exist.
    """
    traces: set[tuple[StandardName, ...]] = set()
    frontier = {((), canonical(prog)): initial_configuration(bat, canonical(prog))}
    exhausted = True
    for depth in range(max_len + 1):
        next_frontier: dict = {}
        for config in frontier.values():
            if is_final(config, bat):
                traces.add(config.trace)
            successors = steps(config, bat)
            if depth == max_len:
                if successors:
                    exhausted = False
                continue
            for succ in successors:
                key = (succ.trace, canonical(succ.remaining))
                next_frontier.setdefault(key, Configuration(succ.state, succ.trace, key[1]))
        frontier = next_frontier
    return TraceEnumeration(frozenset(traces), exhausted)


def trace_word(bat: BasicActionTheory, actions, times=None):
    """The timed word a trace induces: initial atoms first, then one
    symbol per action carrying the atoms true after it."""
    from fractions import Fraction

    if times is None:
        times = [Fraction(0)] * (len(actions) + 1)
    if len(times) != len(actions) + 1:
        raise InputError("need one timestamp per symbol including the initial one")
    state = initial_state(bat)
    word = [(frozenset(state.labels()), times[0])]
    for action, t in zip(actions, times[1:]):
        state = progress(state, action, bat)
        word.append((frozenset(state.labels()) | {repr(action)}, t))
    return tuple(word)


@dataclass(frozen=True)
class VerificationResult:
    holds: bool
    counterexample: tuple[StandardName, ...] | None
    exhaustive: bool


def verify_program(bat: BasicActionTheory, prog: Program, kind: str, formula,
                   max_len: int) -> VerificationResult:
    """Bounded check of a property over every program trace.

    kind "after": ``formula`` is a situation formula evaluated in the
    final world of each trace.  kind "during": ``formula`` is an MTL
    formula evaluated on the trace's induced word with all timestamps 0.
    A non-exhausted enumeration turns the answer into a bounded verdict.
    """
    from . import mtl

    enum = enumerate_traces(bat, prog, max_len)
    for trace in sorted(enum.traces, key=repr):
        if kind == "after":
            state = replay(bat, trace)
            ok = eval_static(ground_formula(formula, bat.domain), state)
        elif kind == "during":
            ok = mtl.eval_word(trace_word(bat, trace), formula)
        else:
            raise InputError(f"unknown verification kind {kind!r}")
        if not ok:
            return VerificationResult(False, trace, enum.exhausted)
    return VerificationResult(True, None, enum.exhausted)
