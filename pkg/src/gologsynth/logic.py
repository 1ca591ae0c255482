"""Ground first-order machinery over finite name domains.

Everything downstream (action theories, programs, automata) works with
three pools of standard names:

* object names         -- plain constants like ``m1``,
* executable actions   -- e.g. ``s_goto(m1,m2)``, the things a program steps on,
* performance tokens   -- e.g. ``goto(m1,m2)``, the things a ``Perf``-style
                          fluent can hold of while an action is running.

Quantifiers carry a sort tag: ``o`` ranges over the object pool, ``a`` over
the performance tokens.  Because the pools are finite, quantification is
substitutional: `ground_formula` expands it away and `eval_static` then
decides the formula against an explicit set of true ground atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DeclarationError, InputError

SORT_OBJECT = "object"
SORT_ACTION = "action"
SORT_PERF = "perf"

# quantifier / declaration tags
TAG_OBJECT = "o"
TAG_PERF = "a"


@dataclass(frozen=True, repr=False)
class StandardName:
    """A ground name.  Non-object names may take object names as arguments."""

    sort: str
    symbol: str
    args: tuple[StandardName, ...] = ()

    def __post_init__(self):
        if self.sort == SORT_OBJECT and self.args:
            raise DeclarationError(f"object name {self.symbol} cannot take arguments")
        for a in self.args:
            if not isinstance(a, StandardName) or a.sort != SORT_OBJECT:
                raise DeclarationError(f"arguments of {self.symbol} must be object names")

    def __repr__(self):
        if not self.args:
            return self.symbol
        return f"{self.symbol}({','.join(a.symbol for a in self.args)})"


def obj(symbol: str) -> StandardName:
    return StandardName(SORT_OBJECT, symbol)


def act(symbol: str, *args: StandardName) -> StandardName:
    return StandardName(SORT_ACTION, symbol, tuple(args))


def perf(symbol: str, *args: StandardName) -> StandardName:
    return StandardName(SORT_PERF, symbol, tuple(args))


@dataclass(frozen=True, repr=False)
class Var:
    """A sorted variable; ``tag`` names the pool it ranges over."""

    name: str
    tag: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True, repr=False)
class CompoundTerm:
    """A name-shaped term with at least one variable argument."""

    sort: str
    symbol: str
    args: tuple[object, ...]

    def __repr__(self):
        return f"{self.symbol}({','.join(map(repr, self.args))})"


Term = StandardName | Var | CompoundTerm


def make_term(sort: str, symbol: str, args) -> Term:
    """Build a compound term, collapsing to a StandardName when ground."""
    args = tuple(args)
    if all(isinstance(a, StandardName) for a in args):
        return StandardName(sort, symbol, args)
    return CompoundTerm(sort, symbol, args)


@dataclass(frozen=True, repr=False)
class GroundAtom:
    predicate: str
    args: tuple[StandardName, ...] = ()

    def __repr__(self):
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(map(repr, self.args))})"


# --- formulas ---------------------------------------------------------------


class Formula:
    """Base class; subclasses are immutable AST nodes."""

    __slots__ = ()


@dataclass(frozen=True, repr=False)
class Top(Formula):
    def __repr__(self):
        return "true"


TRUE = Top()


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    predicate: str
    args: tuple[Term, ...] = ()

    def __repr__(self):
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(map(repr, self.args))})"


@dataclass(frozen=True, repr=False)
class Eq(Formula):
    left: Term
    right: Term

    def __repr__(self):
        return f"({self.left!r} = {self.right!r})"


@dataclass(frozen=True, repr=False)
class Not(Formula):
    body: Formula

    def __repr__(self):
        return f"!{self.body!r}"


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"({self.left!r} & {self.right!r})"


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"({self.left!r} | {self.right!r})"


@dataclass(frozen=True, repr=False)
class Exists(Formula):
    var: str
    tag: str
    body: Formula

    def __repr__(self):
        return f"exists {self.var}:{self.tag}. {self.body!r}"


@dataclass(frozen=True, repr=False)
class Forall(Formula):
    var: str
    tag: str
    body: Formula

    def __repr__(self):
        return f"forall {self.var}:{self.tag}. {self.body!r}"


FALSE = Not(TRUE)


def and_all(parts) -> Formula:
    """Left-folded conjunction; trivial conjuncts collapse away."""
    parts = [p for p in parts if p != TRUE]
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def or_all(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def implies(premise: Formula, conclusion: Formula) -> Formula:
    return Or(Not(premise), conclusion)


# --- domains ----------------------------------------------------------------


@dataclass
class Domain:
    """Finite name pools plus predicate declarations.

    ``fluents`` and ``rigids`` map predicate symbols to tuples of argument
    tags.  Rigid predicates never change truth value; fluent ones are
    subject to successor state axioms.
    """

    objects: tuple[StandardName, ...] = ()
    actions: tuple[StandardName, ...] = ()
    perf_tokens: tuple[StandardName, ...] = ()
    fluents: dict[str, tuple[str, ...]] = field(default_factory=dict)
    rigids: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def extension(self, tag: str) -> tuple[StandardName, ...]:
        if tag == TAG_OBJECT:
            return self.objects
        if tag == TAG_PERF:
            return self.perf_tokens
        raise InputError(f"no extension for sort tag {tag!r}")

    def predicate_tags(self, predicate: str) -> tuple[str, ...]:
        if predicate in self.fluents:
            return self.fluents[predicate]
        if predicate in self.rigids:
            return self.rigids[predicate]
        raise DeclarationError(f"undeclared predicate {predicate}")

    def is_rigid(self, predicate: str) -> bool:
        return predicate in self.rigids

    def atoms_of(self, predicate: str) -> list[GroundAtom]:
        """All ground atoms of one predicate, in declaration-pool order."""
        tags = self.predicate_tags(predicate)
        out = [GroundAtom(predicate, ())]
        for tag in tags:
            pool = self.extension(tag)
            out = [GroundAtom(predicate, atom.args + (n,)) for atom in out for n in pool]
        return out

    def all_atoms(self) -> list[GroundAtom]:
        out = []
        for pred in list(self.fluents) + list(self.rigids):
            out.extend(self.atoms_of(pred))
        return out

    def validate_atom(self, atom: GroundAtom) -> None:
        tags = self.predicate_tags(atom.predicate)
        if len(tags) != len(atom.args):
            raise DeclarationError(
                f"{atom.predicate} expects {len(tags)} arguments, got {len(atom.args)}")
        for tag, arg in zip(tags, atom.args):
            if arg not in self.extension(tag):
                raise DeclarationError(f"{arg!r} is not a declared {tag}-name")


# --- substitution and grounding ----------------------------------------------


def substitute_term(term: Term, binding: dict[str, StandardName]) -> Term:
    if isinstance(term, Var):
        return binding.get(term.name, term)
    if isinstance(term, CompoundTerm):
        return make_term(term.sort, term.symbol, [substitute_term(a, binding) for a in term.args])
    return term


def substitute(formula: Formula, binding: dict[str, StandardName]) -> Formula:
    """Capture-avoiding substitution of names for free variables."""
    if isinstance(formula, (Top,)):
        return formula
    if isinstance(formula, Atom):
        return Atom(formula.predicate, tuple(substitute_term(a, binding) for a in formula.args))
    if isinstance(formula, Eq):
        return Eq(substitute_term(formula.left, binding), substitute_term(formula.right, binding))
    if isinstance(formula, Not):
        return Not(substitute(formula.body, binding))
    if isinstance(formula, And):
        return And(substitute(formula.left, binding), substitute(formula.right, binding))
    if isinstance(formula, Or):
        return Or(substitute(formula.left, binding), substitute(formula.right, binding))
    if isinstance(formula, (Exists, Forall)):
        inner = {k: v for k, v in binding.items() if k != formula.var}
        body = substitute(formula.body, inner)
        return type(formula)(formula.var, formula.tag, body)
    raise InputError(f"cannot substitute into {formula!r}")


def _check_atom(atom: Atom, domain: Domain) -> None:
    tags = domain.predicate_tags(atom.predicate)
    if len(tags) != len(atom.args):
        raise DeclarationError(
            f"{atom.predicate} expects {len(tags)} arguments, got {len(atom.args)}")


def ground_formula(formula: Formula, domain: Domain) -> Formula:
    """Expand quantifiers over the finite pools; result is variable-free.

    Idempotent on already-ground formulas.  Unknown predicates and arity
    mismatches raise DeclarationError; a free variable raises InputError.
    """
    if isinstance(formula, Top):
        return formula
    if isinstance(formula, Atom):
        _check_atom(formula, domain)
        for a in formula.args:
            if not isinstance(a, StandardName):
                raise InputError(f"free variable in {formula!r}")
        return formula
    if isinstance(formula, Eq):
        for side in (formula.left, formula.right):
            if not isinstance(side, StandardName):
                raise InputError(f"free variable in {formula!r}")
        return formula
    if isinstance(formula, Not):
        return Not(ground_formula(formula.body, domain))
    if isinstance(formula, And):
        return And(ground_formula(formula.left, domain), ground_formula(formula.right, domain))
    if isinstance(formula, Or):
        return Or(ground_formula(formula.left, domain), ground_formula(formula.right, domain))
    if isinstance(formula, (Exists, Forall)):
        combine = or_all if isinstance(formula, Exists) else and_all
        expanded = [
            ground_formula(substitute(formula.body, {formula.var: n}), domain)
            for n in domain.extension(formula.tag)
        ]
        return combine(expanded)
    raise InputError(f"not a formula: {formula!r}")


def eval_static(formula: Formula, atoms) -> bool:
    """Decide a ground formula against a set of true ground atoms.

    ``atoms`` is anything supporting ``in`` over GroundAtom.  Quantifiers
    must have been compiled away by `ground_formula` first.
    """
    if isinstance(formula, Top):
        return True
    if isinstance(formula, Atom):
        args = []
        for a in formula.args:
            if not isinstance(a, StandardName):
                raise InputError(f"non-ground atom {formula!r}")
            args.append(a)
        return GroundAtom(formula.predicate, tuple(args)) in atoms
    if isinstance(formula, Eq):
        if not isinstance(formula.left, StandardName) or not isinstance(formula.right, StandardName):
            raise InputError(f"non-ground equality {formula!r}")
        return formula.left == formula.right
    if isinstance(formula, Not):
        return not eval_static(formula.body, atoms)
    if isinstance(formula, And):
        return eval_static(formula.left, atoms) and eval_static(formula.right, atoms)
    if isinstance(formula, Or):
        return eval_static(formula.left, atoms) or eval_static(formula.right, atoms)
    if isinstance(formula, (Exists, Forall)):
        raise InputError(f"quantifier reached eval_static: {formula!r}")
    raise InputError(f"not a formula: {formula!r}")
