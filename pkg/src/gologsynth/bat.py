"""Basic action theories over finite name pools.

A theory bundles an initial-situation description, one precondition
sentence per action symbol and one successor state axiom (SSA) per
changing predicate.  Predicates without an SSA are rigid: `progress`
copies their atoms through unchanged, so immutability needs no frame
axioms.

The initial description is a list of closed sentences.  Atoms never
mentioned by any (grounded) sentence are closed-world false; mentioned
atoms must be decided by the sentences themselves, which is what
`check_determinate` verifies by enumerating models of the mentioned
fragment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DeclarationError, InputError
from .logic import (
    SORT_ACTION,
    Atom,
    Domain,
    Formula,
    GroundAtom,
    StandardName,
    eval_static,
    ground_formula,
    substitute,
)


@dataclass(frozen=True)
class WorldState:
    """An extensional situation: exactly the atoms that hold."""

    atoms: frozenset[GroundAtom]

    def __contains__(self, atom: GroundAtom) -> bool:
        return atom in self.atoms

    def labels(self) -> tuple[str, ...]:
        return tuple(sorted(repr(a) for a in self.atoms))

    def __repr__(self):
        return "{" + ", ".join(self.labels()) + "}"


@dataclass(frozen=True)
class Precondition:
    """Right-hand side of one action symbol's possibility sentence."""

    params: tuple[str, ...]
    body: Formula


@dataclass(frozen=True)
class SuccessorStateAxiom:
    """gamma_F: free in the predicate parameters and the action variable."""

    params: tuple[str, ...]
    action_var: str
    body: Formula


@dataclass
class BasicActionTheory:
    domain: Domain
    init_axioms: tuple[Formula, ...] = ()
    preconditions: dict[str, Precondition] = field(default_factory=dict)
    ssas: dict[str, SuccessorStateAxiom] = field(default_factory=dict)

    def __post_init__(self):
        for pred in self.ssas:
            if pred in self.domain.rigids:
                raise DeclarationError(f"rigid predicate {pred} cannot have an SSA")
            if pred not in self.domain.fluents:
                raise DeclarationError(f"SSA for undeclared predicate {pred}")
        for pred in self.domain.fluents:
            if pred not in self.ssas:
                raise DeclarationError(f"fluent {pred} lacks a successor state axiom")
        self._action_pool = frozenset(self.domain.actions)
        self._ground_cache: dict = {}
        self._init_state: WorldState | None = None

    # -- derived alphabets ----------------------------------------------

    def action_labels(self) -> dict[str, StandardName]:
        return {repr(a): a for a in self.domain.actions}

    def atom_labels(self) -> dict[str, GroundAtom]:
        return {repr(a): a for a in self.domain.all_atoms()}


@dataclass(frozen=True)
class DeterminacyReport:
    determinate: bool
    consistent: bool
    witnesses: tuple[GroundAtom, ...]
    model: frozenset[GroundAtom] | None


def _mentioned_atoms(formula: Formula) -> set[GroundAtom]:
    out = set()
    stack = [formula]
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            out.add(GroundAtom(f.predicate, f.args))
        for name in ("body", "left", "right"):
            child = getattr(f, name, None)
            if isinstance(child, Formula):
                stack.append(child)
    return out


def check_determinate(bat: BasicActionTheory) -> DeterminacyReport:
    """Decide whether the initial sentences fix every ground atom.

    Models are enumerated over the mentioned atoms only (everything else
    is closed-world false), pruning assignments as soon as a fully
    assigned sentence fails.
    """
    ground_init = [ground_formula(f, bat.domain) for f in bat.init_axioms]
    mentioned = sorted({a for f in ground_init for a in _mentioned_atoms(f)}, key=repr)
    for atom in mentioned:
        bat.domain.validate_atom(atom)
    index = {a: i for i, a in enumerate(mentioned)}
    buckets: list[list[Formula]] = [[] for _ in range(len(mentioned) + 1)]
    for f in ground_init:
        atoms = _mentioned_atoms(f)
        depth = max((index[a] + 1 for a in atoms), default=0)
        buckets[depth].append(f)

    models: list[frozenset[GroundAtom]] = []
    true_atoms: set[GroundAtom] = set()

    def descend(depth: int) -> None:
        if not all(eval_static(f, true_atoms) for f in buckets[depth]):
            return
        if depth == len(mentioned):
            models.append(frozenset(true_atoms))
            return
        descend(depth + 1)
        true_atoms.add(mentioned[depth])
        descend(depth + 1)
        true_atoms.discard(mentioned[depth])

    descend(0)

    if not models:
        return DeterminacyReport(False, False, (), None)
    undecided = {a for m in models[1:] for a in models[0] ^ m}
    if undecided:
        return DeterminacyReport(False, True, tuple(sorted(undecided, key=repr)), None)
    return DeterminacyReport(True, True, (), models[0])


def initial_state(bat: BasicActionTheory) -> WorldState:
    """The unique world the initial sentences describe."""
    if bat._init_state is None:
        report = check_determinate(bat)
        if not report.determinate:
            raise InputError(
                "initial description is not determinate; undecided: "
                + ", ".join(map(repr, report.witnesses)))
        bat._init_state = WorldState(report.model)
    return bat._init_state


def _grounded(bat: BasicActionTheory, kind: str, symbol: str,
              args: tuple[StandardName, ...], action: StandardName | None) -> Formula:
    key = (kind, symbol, args, action)
    cached = bat._ground_cache.get(key)
    if cached is None:
        if kind == "poss":
            axiom = bat.preconditions[symbol]
            binding = dict(zip(axiom.params, args))
        else:
            axiom = bat.ssas[symbol]
            binding = dict(zip(axiom.params, args))
            binding[axiom.action_var] = action
        cached = ground_formula(substitute(axiom.body, binding), bat.domain)
        bat._ground_cache[key] = cached
    return cached


def _check_action(bat: BasicActionTheory, action: StandardName) -> None:
    if action not in bat._action_pool:
        raise InputError(f"action {action!r} is not declared")


def poss(action: StandardName, state: WorldState, bat: BasicActionTheory) -> bool:
    """Truth of the action's precondition in the given world."""
    _check_action(bat, action)
    pre = bat.preconditions.get(action.symbol)
    if pre is None:
        raise InputError(f"no precondition for action symbol {action.symbol}")
    if len(pre.params) != len(action.args):
        raise DeclarationError(f"precondition arity mismatch for {action.symbol}")
    return eval_static(_grounded(bat, "poss", action.symbol, action.args, None), state)


def progress(state: WorldState, action: StandardName, bat: BasicActionTheory) -> WorldState:
    """Apply every SSA simultaneously against the old world.

    Atoms of predicates without an SSA (rigid ones) carry over as they
    are; everything else is recomputed from scratch.
    """
    _check_action(bat, action)
    new_atoms = {a for a in state.atoms if a.predicate not in bat.ssas}
    for pred in bat.ssas:
        for atom in bat.domain.atoms_of(pred):
            if eval_static(_grounded(bat, "ssa", pred, atom.args, action), state):
                new_atoms.add(atom)
    return WorldState(frozenset(new_atoms))


def replay(bat: BasicActionTheory, actions, start: WorldState | None = None) -> WorldState:
    """Fold `progress` over an action sequence from the initial world."""
    state = initial_state(bat) if start is None else start
    for a in actions:
        state = progress(state, a, bat)
    return state


def action_term(bat: BasicActionTheory, symbol: str, *args: StandardName) -> StandardName:
    """Convenience constructor that validates against the declared pool."""
    name = StandardName(SORT_ACTION, symbol, tuple(args))
    _check_action(bat, name)
    return name
