"""Parsers for the three text formats the command line reads.

Action theory files (``.bat``) declare the finite name pools and axioms::

    types { m1 m2 o1 }
    perf-tokens { goto(o, o) pick(o) }
    actions { s_goto(o, o) e_goto(o, o) s_pick(o) e_pick(o) }
    fluents { RAt(o) At(o, o) Perf(a) }
    rigid   { Spacious(o) }
    init {
        RAt(m1);
        At(o1, m2);
    }
    poss s_goto(x, y) <- !exists t:a. Perf(t);
    ssa RAt(y) after act <-
        (exists x:o. act == e_goto(x, y))
        || (RAt(y) && !(exists x:o. exists z:o. act == s_goto(x, z)));

Declarations must precede any clause that refers to them.  Every fluent
needs exactly one ``ssa`` clause and every action symbol a ``poss``
clause.  Quantifier tags are ``o`` (objects) and ``a`` (perf tokens),
and a quantifier's body extends as far right as possible, so
parenthesize when it sits inside a conjunction.

Program files use ``;`` for sequence (loosest), ``|`` for branching,
``||`` for interleaving, postfix ``*`` for iteration, ``? phi`` for
tests (parentheses around phi optional), ``pi x:o { ... }`` for
argument choice, ``nil`` for the empty program, and ``do name(args)``
as shorthand for the start/finish pair ``s_name(args); e_name(args)``.

Constraint files are ``;``-separated temporal formulas over symbol
labels.  Connectives: ``!``, ``&``, ``|``, ``->``, ``<->``, ``F``,
``G`` and infix ``U`` (``&&``/``||`` are accepted too), each temporal
operator taking an optional interval such as ``[2,5)``, ``(0,inf)``,
``[<=3]``, ``[>1]`` or ``[=2]``.  When an action theory is in scope,
labels may be written as typed atoms with quantifiers, for example
``exists p:o. Perf(pick(p))``; quantification expands over the
declared pools.  Labels outside the theory (platform observations such
as ``Calibrated``) stay plain.  ``F``, ``G``, ``U``, ``exists``,
``forall``, ``true``, ``false`` and ``inf`` are reserved words there.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import mtl
from .bat import BasicActionTheory, Precondition, SuccessorStateAxiom
from .errors import InputError
from .golog import Act, Choice, Interleave, Pick, Program, Seq, Star, Test, NIL
from .logic import (
    SORT_ACTION,
    SORT_OBJECT,
    SORT_PERF,
    TAG_OBJECT,
    TAG_PERF,
    TRUE,
    And,
    Atom,
    Domain,
    Eq,
    Exists,
    Forall,
    Formula,
    GroundAtom,
    Not,
    Or,
    StandardName,
    Term,
    Var,
    implies,
    make_term,
    obj,
)

# the action variable of an SSA never gets quantified, so its tag only
# serves the parser's own sort bookkeeping
ACTION_TAG = "action"

_TAG_SORTS = {TAG_OBJECT: SORT_OBJECT, TAG_PERF: SORT_PERF, ACTION_TAG: SORT_ACTION}

# idents may contain interior hyphens so section keywords like
# ``perf-tokens`` lex as one token; nothing in any grammar subtracts
_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+|\#[^\n]*)
      | (?P<number>\d+/\d+|\d+\.\d+|\d+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z0-9_]+)*)
      | (?P<op><->|->|<-|==|!=|&&|\|\||<=|>=|[(){}\[\];,.:!|&*?<>=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, source: str = "<input>") -> list[Token]:
    out: list[Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise InputError(f"{source}:{line}:{col}: unexpected character {text[pos]!r}")
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, m.group(), line, col))
        chunk = m.group()
        if "\n" in chunk:
            line += chunk.count("\n")
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


def term_sort(term: Term) -> str:
    if isinstance(term, Var):
        sort = _TAG_SORTS.get(term.tag)
        if sort is None:
            raise InputError(f"variable {term.name} has unknown tag {term.tag!r}")
        return sort
    return term.sort


class _Names:
    """Symbol tables the resolvers consult while parsing."""

    def __init__(self):
        self.objects: dict[str, StandardName] = {}
        self.token_arity: dict[str, int] = {}
        self.action_arity: dict[str, int] = {}
        self.predicates: dict[str, tuple[str, ...]] = {}

    @classmethod
    def from_theory(cls, bat: BasicActionTheory) -> "_Names":
        names = cls()
        for n in bat.domain.objects:
            names.objects[n.symbol] = n
        for n in bat.domain.perf_tokens:
            names.token_arity.setdefault(n.symbol, len(n.args))
        for n in bat.domain.actions:
            names.action_arity.setdefault(n.symbol, len(n.args))
        names.predicates.update(bat.domain.fluents)
        names.predicates.update(bat.domain.rigids)
        return names

    def taken(self, symbol: str) -> bool:
        return (symbol in self.objects or symbol in self.token_arity
                or symbol in self.action_arity or symbol in self.predicates)


class _Parser:
    def __init__(self, text: str, source: str, names: _Names | None = None):
        self.tokens = tokenize(text, source)
        self.pos = 0
        self.source = source
        self.names = names if names is not None else _Names()

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text: str) -> bool:
        tok = self.tokens[self.pos]
        return tok.kind != "eof" and tok.text == text

    def at_eof(self) -> bool:
        return self.tokens[self.pos].kind == "eof"

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self._shown()}")
        return self.take()

    def expect_ident(self, what: str = "a name") -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            self.fail(f"expected {what}, found {self._shown()}")
        return self.take()

    def expect_eof(self) -> None:
        if not self.at_eof():
            self.fail(f"trailing input starting at {self._shown()}")

    def fail(self, message: str):
        tok = self.peek()
        raise InputError(f"{self.source}:{tok.line}:{tok.col}: {message}")

    def _shown(self) -> str:
        tok = self.peek()
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    # -- terms ---------------------------------------------------------------

    def parse_term(self, scope: dict[str, Var]) -> Term:
        tok = self.expect_ident("a term")
        name = tok.text
        if self.at("("):
            args = self._term_args(scope, name)
            if name in self.names.token_arity:
                sort, arity = SORT_PERF, self.names.token_arity[name]
            elif name in self.names.action_arity:
                sort, arity = SORT_ACTION, self.names.action_arity[name]
            else:
                self.fail(f"{name!r} is not a declared action or token symbol")
            if len(args) != arity:
                self.fail(f"{name} takes {arity} arguments, got {len(args)}")
            return make_term(sort, name, args)
        if name in scope:
            return scope[name]
        if name in self.names.objects:
            return self.names.objects[name]
        if self.names.token_arity.get(name) == 0:
            return make_term(SORT_PERF, name, ())
        if self.names.action_arity.get(name) == 0:
            return make_term(SORT_ACTION, name, ())
        self.fail(f"unknown name {name!r}")

    def _term_args(self, scope: dict[str, Var], owner: str) -> list[Term]:
        self.expect("(")
        args: list[Term] = []
        while True:
            arg = self.parse_term(scope)
            if term_sort(arg) != SORT_OBJECT:
                self.fail(f"argument {arg!r} of {owner} must be an object")
            args.append(arg)
            if not self.accept(","):
                break
        self.expect(")")
        return args

    # -- formulas -----------------------------------------------------------

    def parse_formula(self, scope: dict[str, Var]) -> Formula:
        left = self._impl(scope)
        while self.accept("<->"):
            right = self._impl(scope)
            left = And(implies(left, right), implies(right, left))
        return left

    def _impl(self, scope) -> Formula:
        left = self._disj(scope)
        if self.accept("->"):
            return implies(left, self._impl(scope))
        return left

    def _disj(self, scope) -> Formula:
        left = self._conj(scope)
        while self.accept("||"):
            left = Or(left, self._conj(scope))
        return left

    def _conj(self, scope) -> Formula:
        left = self._funit(scope)
        while self.accept("&&"):
            left = And(left, self._funit(scope))
        return left

    def _funit(self, scope) -> Formula:
        if self.accept("!"):
            return Not(self._funit(scope))
        if self.at("exists") or self.at("forall"):
            kind = self.take().text
            var = self.expect_ident("a variable").text
            self.expect(":")
            tag = self.expect_ident("a sort tag").text
            if tag not in (TAG_OBJECT, TAG_PERF):
                self.fail(f"quantifier tag must be {TAG_OBJECT!r} or {TAG_PERF!r}")
            self.expect(".")
            inner = dict(scope)
            inner[var] = Var(var, tag)
            body = self.parse_formula(inner)
            return (Exists if kind == "exists" else Forall)(var, tag, body)
        if self.accept("("):
            body = self.parse_formula(scope)
            self.expect(")")
            return body
        if self.accept("true"):
            return TRUE
        if self.accept("false"):
            return Not(TRUE)
        tok = self.peek()
        if tok.kind != "ident":
            self.fail(f"expected a formula, found {self._shown()}")
        if tok.text in self.names.predicates:
            return self._atom(scope)
        return self._equality(scope)

    def _atom(self, scope) -> Formula:
        name = self.take().text
        tags = self.names.predicates[name]
        args: list[Term] = []
        if self.at("("):
            self.take()
            while True:
                args.append(self.parse_term(scope))
                if not self.accept(","):
                    break
            self.expect(")")
        if len(args) != len(tags):
            self.fail(f"{name} takes {len(tags)} arguments, got {len(args)}")
        for tag, arg in zip(tags, args):
            if term_sort(arg) != _TAG_SORTS[tag]:
                self.fail(f"argument {arg!r} of {name} has the wrong sort")
        return Atom(name, tuple(args))

    def _equality(self, scope) -> Formula:
        left = self.parse_term(scope)
        if self.accept("=="):
            negated = False
        elif self.accept("!="):
            negated = True
        else:
            self.fail(f"expected '==' or '!=', found {self._shown()}")
        right = self.parse_term(scope)
        if term_sort(left) != term_sort(right):
            self.fail(f"cannot compare {left!r} with {right!r}: different sorts")
        eq = Eq(left, right)
        return Not(eq) if negated else eq


# --- action theory files -----------------------------------------------------


class _DomainParser(_Parser):
    def parse(self) -> BasicActionTheory:
        object_order: list[str] = []
        token_decls: list[tuple[str, tuple[str, ...]]] = []
        action_decls: list[tuple[str, tuple[str, ...]]] = []
        fluents: dict[str, tuple[str, ...]] = {}
        rigids: dict[str, tuple[str, ...]] = {}
        init: list[Formula] = []
        poss: dict[str, Precondition] = {}
        ssas: dict[str, SuccessorStateAxiom] = {}

        while not self.at_eof():
            kw = self.expect_ident("a section keyword").text
            if kw == "types":
                for sym, tags in self._decl_block(args_allowed=False):
                    self._claim(sym)
                    object_order.append(sym)
                    self.names.objects[sym] = obj(sym)
            elif kw == "perf-tokens":
                for sym, tags in self._decl_block():
                    self._claim(sym)
                    self._object_tags_only(sym, tags)
                    token_decls.append((sym, tags))
                    self.names.token_arity[sym] = len(tags)
            elif kw == "actions":
                for sym, tags in self._decl_block():
                    self._claim(sym)
                    self._object_tags_only(sym, tags)
                    action_decls.append((sym, tags))
                    self.names.action_arity[sym] = len(tags)
            elif kw in ("fluents", "rigid"):
                target = fluents if kw == "fluents" else rigids
                for sym, tags in self._decl_block():
                    self._claim(sym)
                    target[sym] = tags
                    self.names.predicates[sym] = tags
            elif kw == "init":
                self.expect("{")
                while not self.accept("}"):
                    init.append(self.parse_formula({}))
                    self.expect(";")
            elif kw == "poss":
                symbol, pre = self._poss_clause()
                if symbol in poss:
                    self.fail(f"duplicate poss clause for {symbol}")
                poss[symbol] = pre
            elif kw == "ssa":
                pred, ssa = self._ssa_clause(fluents)
                if pred in ssas:
                    self.fail(f"duplicate ssa clause for {pred}")
                ssas[pred] = ssa
            else:
                self.fail(f"unknown section {kw!r}")

        for sym, _tags in action_decls:
            if sym not in poss:
                self.fail(f"action {sym} has no poss clause")
        domain = Domain(
            objects=tuple(self.names.objects[s] for s in object_order),
            actions=self._expand_pool(SORT_ACTION, action_decls),
            perf_tokens=self._expand_pool(SORT_PERF, token_decls),
            fluents=fluents,
            rigids=rigids,
        )
        return BasicActionTheory(domain, tuple(init), poss, ssas)

    def _claim(self, symbol: str) -> None:
        if self.names.taken(symbol):
            self.fail(f"symbol {symbol!r} declared twice")

    def _object_tags_only(self, sym: str, tags: tuple[str, ...]) -> None:
        if any(t != TAG_OBJECT for t in tags):
            self.fail(f"arguments of {sym} must all have tag {TAG_OBJECT!r}")

    def _decl_block(self, args_allowed: bool = True):
        self.expect("{")
        items: list[tuple[str, tuple[str, ...]]] = []
        while not self.accept("}"):
            sym = self.expect_ident("a declaration").text
            tags: list[str] = []
            if args_allowed and self.accept("("):
                while True:
                    tag = self.expect_ident("a sort tag").text
                    if tag not in (TAG_OBJECT, TAG_PERF):
                        self.fail(f"unknown sort tag {tag!r}")
                    tags.append(tag)
                    if not self.accept(","):
                        break
                self.expect(")")
            items.append((sym, tuple(tags)))
            self.accept(",")
        return items

    def _params(self, count: int, tags: tuple[str, ...]) -> tuple[tuple[str, ...], dict[str, Var]]:
        params: list[str] = []
        scope: dict[str, Var] = {}
        if self.accept("("):
            while True:
                name = self.expect_ident("a parameter").text
                if name in scope:
                    self.fail(f"duplicate parameter {name!r}")
                params.append(name)
                if not self.accept(","):
                    break
            self.expect(")")
        if len(params) != count:
            self.fail(f"expected {count} parameters, got {len(params)}")
        for name, tag in zip(params, tags):
            scope[name] = Var(name, tag)
        return tuple(params), scope

    def _poss_clause(self) -> tuple[str, Precondition]:
        symbol = self.expect_ident("an action symbol").text
        if symbol not in self.names.action_arity:
            self.fail(f"{symbol!r} is not a declared action symbol")
        arity = self.names.action_arity[symbol]
        params, scope = self._params(arity, (TAG_OBJECT,) * arity)
        self.expect("<-")
        body = self.parse_formula(scope)
        self.expect(";")
        return symbol, Precondition(params, body)

    def _ssa_clause(self, fluents) -> tuple[str, SuccessorStateAxiom]:
        pred = self.expect_ident("a fluent").text
        if pred not in fluents:
            self.fail(f"{pred!r} is not a declared fluent")
        tags = fluents[pred]
        params, scope = self._params(len(tags), tags)
        self.expect("after")
        action_var = self.expect_ident("an action variable").text
        if action_var in scope:
            self.fail(f"action variable {action_var!r} shadows a parameter")
        scope[action_var] = Var(action_var, ACTION_TAG)
        self.expect("<-")
        body = self.parse_formula(scope)
        self.expect(";")
        return pred, SuccessorStateAxiom(params, action_var, body)

    def _expand_pool(self, sort: str, decls) -> tuple[StandardName, ...]:
        pool: list[StandardName] = []
        objects = [self.names.objects[s] for s in self.names.objects]
        for sym, tags in decls:
            rows: list[tuple[StandardName, ...]] = [()]
            for _tag in tags:
                rows = [row + (o,) for row in rows for o in objects]
            pool.extend(StandardName(sort, sym, row) for row in rows)
        return tuple(pool)


def parse_domain(text: str, source: str = "<domain>") -> BasicActionTheory:
    return _DomainParser(text, source).parse()


# --- program files -----------------------------------------------------------


class _ProgramParser(_Parser):
    def parse(self) -> Program:
        prog = self._seq({})
        self.expect_eof()
        return prog

    def _end_of_program(self) -> bool:
        tok = self.peek()
        return tok.kind == "eof" or tok.text in (")", "}")

    def _seq(self, scope) -> Program:
        parts = [self._choice(scope)]
        while self.accept(";"):
            if self._end_of_program():
                break
            parts.append(self._choice(scope))
        if len(parts) == 1:
            return parts[0]
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = Seq(p, out)
        return out

    def _choice(self, scope) -> Program:
        left = self._ileave(scope)
        while self.accept("|"):
            left = Choice(left, self._ileave(scope))
        return left

    def _ileave(self, scope) -> Program:
        left = self._postfix(scope)
        while self.accept("||"):
            left = Interleave(left, self._postfix(scope))
        return left

    def _postfix(self, scope) -> Program:
        prog = self._primary(scope)
        while self.accept("*"):
            prog = Star(prog)
        return prog

    def _primary(self, scope) -> Program:
        if self.accept("("):
            prog = self._seq(scope)
            self.expect(")")
            return prog
        if self.accept("nil"):
            return NIL
        if self.accept("?"):
            # a leading "(" just groups the formula, so ?(phi) and ? phi
            # both land here
            return Test(self.parse_formula(scope))
        if self.accept("pi"):
            var = self.expect_ident("a variable").text
            self.expect(":")
            tag = self.expect_ident("a sort tag").text
            if tag not in (TAG_OBJECT, TAG_PERF):
                self.fail(f"quantifier tag must be {TAG_OBJECT!r} or {TAG_PERF!r}")
            self.expect("{")
            inner = dict(scope)
            inner[var] = Var(var, tag)
            body = self._seq(inner)
            self.expect("}")
            return Pick(var, tag, body)
        if self.accept("do"):
            return self._do_pair(scope)
        term = self.parse_term(scope)
        if term_sort(term) != SORT_ACTION:
            self.fail(f"{term!r} is not an action")
        return Act(term)

    def _do_pair(self, scope) -> Program:
        tok = self.expect_ident("a token symbol")
        name = tok.text
        start, finish = "s_" + name, "e_" + name
        for required in (start, finish):
            if required not in self.names.action_arity:
                self.fail(f"'do {name}' needs a declared action {required}")
        arity = self.names.action_arity[start]
        if self.names.action_arity[finish] != arity:
            self.fail(f"{start} and {finish} disagree on arity")
        args: list[Term] = []
        if self.at("("):
            args = self._term_args(scope, name)
        if len(args) != arity:
            self.fail(f"{name} takes {arity} arguments, got {len(args)}")
        return Seq(Act(make_term(SORT_ACTION, start, args)),
                   Act(make_term(SORT_ACTION, finish, args)))


def parse_program(text: str, bat: BasicActionTheory, source: str = "<program>") -> Program:
    return _ProgramParser(text, source, _Names.from_theory(bat)).parse()


# --- constraint files ---------------------------------------------------------

_RESERVED_LABELS = {"F", "G", "U", "exists", "forall", "true", "false", "inf"}


class _ConstraintParser(_Parser):
    def __init__(self, text: str, source: str, labels, bat: BasicActionTheory | None = None):
        names = _Names.from_theory(bat) if bat is not None else None
        super().__init__(text, source, names)
        self.typed = names is not None
        self.labels = None if labels is None else set(labels)
        self.pools = {} if bat is None else {
            TAG_OBJECT: bat.domain.objects,
            TAG_PERF: bat.domain.perf_tokens,
        }
        # quantified variables, bound to one pool name per expansion pass
        self.binding: dict[str, StandardName] = {}

    def parse(self) -> list[mtl.MtlFormula]:
        out: list[mtl.MtlFormula] = []
        while not self.at_eof():
            out.append(self._impl())
            self.expect(";")
        return out

    def _impl(self) -> mtl.MtlFormula:
        left = self._or()
        if self.accept("->"):
            return mtl.implies(left, self._impl())
        if self.accept("<->"):
            right = self._impl()
            return mtl.And(mtl.implies(left, right), mtl.implies(right, left))
        return left

    def _or(self) -> mtl.MtlFormula:
        left = self._and()
        while self.accept("||") or self.accept("|"):
            left = mtl.Or(left, self._and())
        return left

    def _and(self) -> mtl.MtlFormula:
        left = self._until()
        while self.accept("&&") or self.accept("&"):
            left = mtl.And(left, self._until())
        return left

    def _until(self) -> mtl.MtlFormula:
        left = self._unary()
        if self.accept("U"):
            interval = self._interval()
            return mtl.Until(left, self._until(), interval)
        return left

    def _unary(self) -> mtl.MtlFormula:
        if self.accept("!"):
            return mtl.Not(self._unary())
        if self.accept("F"):
            interval = self._interval()
            return mtl.F(self._unary(), interval)
        if self.accept("G"):
            interval = self._interval()
            return mtl.G(self._unary(), interval)
        if self.at("exists") or self.at("forall"):
            return self._quantifier()
        if self.accept("("):
            body = self._impl()
            self.expect(")")
            return body
        if self.accept("true"):
            return mtl.TRUE
        if self.accept("false"):
            return mtl.FALSE
        return self._label()

    def _quantifier(self) -> mtl.MtlFormula:
        kind = self.take().text
        if not self.typed:
            self.fail(f"{kind!r} needs an action theory in scope")
        var = self.expect_ident("a variable").text
        if var in self.binding:
            self.fail(f"variable {var!r} is already bound")
        self.expect(":")
        tag = self.expect_ident("a sort tag").text
        if tag not in self.pools:
            self.fail(f"quantifier tag must be {TAG_OBJECT!r} or {TAG_PERF!r}")
        self.expect(".")
        pool = self.pools[tag]
        if not pool:
            self.fail(f"the {tag!r} pool is empty; nothing to quantify over")
        # the pools are finite, so expand substitutionally: re-parse the
        # body (longest scope) once per pool name and join the results
        start = self.pos
        parts = []
        for name in pool:
            self.pos = start
            self.binding[var] = name
            parts.append(self._impl())
        del self.binding[var]
        return (mtl.or_all if kind == "exists" else mtl.and_all)(parts)

    def _label(self) -> mtl.MtlFormula:
        tok = self.expect_ident("a symbol label")
        name = tok.text
        if name in _RESERVED_LABELS:
            self.fail(f"{name!r} is reserved; parenthesize or rename the label")
        if self.typed:
            if name in self.binding:
                self.fail(f"{name!r} is a bound variable, not a label")
            if name in self.names.predicates:
                return self._atom_label(name)
            if name in self.names.action_arity:
                return self._action_label(name)
        label = name
        if self.accept("("):
            args = [self.expect_ident("an argument").text]
            while self.accept(","):
                args.append(self.expect_ident("an argument").text)
            self.expect(")")
            label = f"{label}({','.join(args)})"
        return self._known(label)

    def _known(self, label: str) -> mtl.MtlFormula:
        if self.labels is not None and label not in self.labels:
            self.fail(f"unknown label {label!r}")
        return mtl.Prop(label)

    # -- theory-backed labels: atoms and action names over ground terms ----

    def _ground_term(self) -> StandardName:
        tok = self.expect_ident("a term")
        name = tok.text
        if self.at("("):
            if name in self.names.token_arity:
                sort, arity = SORT_PERF, self.names.token_arity[name]
            elif name in self.names.action_arity:
                sort, arity = SORT_ACTION, self.names.action_arity[name]
            else:
                self.fail(f"{name!r} is not a declared action or token symbol")
            args = self._ground_args(name)
            if len(args) != arity:
                self.fail(f"{name} takes {arity} arguments, got {len(args)}")
            return StandardName(sort, name, tuple(args))
        if name in self.binding:
            return self.binding[name]
        if name in self.names.objects:
            return self.names.objects[name]
        if self.names.token_arity.get(name) == 0:
            return StandardName(SORT_PERF, name)
        if self.names.action_arity.get(name) == 0:
            return StandardName(SORT_ACTION, name)
        self.fail(f"unknown name {name!r}")

    def _ground_args(self, owner: str) -> list[StandardName]:
        self.expect("(")
        args: list[StandardName] = []
        while True:
            arg = self._ground_term()
            if arg.sort != SORT_OBJECT:
                self.fail(f"argument {arg!r} of {owner} must be an object")
            args.append(arg)
            if not self.accept(","):
                break
        self.expect(")")
        return args

    def _atom_label(self, name: str) -> mtl.MtlFormula:
        tags = self.names.predicates[name]
        args: list[StandardName] = []
        if self.at("("):
            self.expect("(")
            while True:
                args.append(self._ground_term())
                if not self.accept(","):
                    break
            self.expect(")")
        if len(args) != len(tags):
            self.fail(f"{name} takes {len(tags)} arguments, got {len(args)}")
        for tag, arg in zip(tags, args):
            if arg.sort != _TAG_SORTS[tag]:
                self.fail(f"argument {arg!r} of {name} has the wrong sort")
        return self._known(repr(GroundAtom(name, tuple(args))))

    def _action_label(self, name: str) -> mtl.MtlFormula:
        arity = self.names.action_arity[name]
        args = self._ground_args(name) if self.at("(") else []
        if len(args) != arity:
            self.fail(f"{name} takes {arity} arguments, got {len(args)}")
        return self._known(repr(StandardName(SORT_ACTION, name, tuple(args))))

    def _interval(self) -> mtl.Interval:
        # "(" also opens a grouped argument; only a number or comparison
        # right after it can start an interval
        if self.at("("):
            nxt = self.tokens[self.pos + 1]
            if nxt.kind != "number":
                return mtl.UNBOUNDED
        elif not self.at("["):
            return mtl.UNBOUNDED
        opener = self.take().text
        lower_closed = opener == "["
        shorthand = {"<": mtl.interval_lt, "<=": mtl.interval_le, "=": mtl.interval_eq,
                     ">": mtl.interval_gt, ">=": mtl.interval_ge}
        for op, build in shorthand.items():
            if self.at(op):
                if not lower_closed:
                    self.fail("comparison shorthands use square brackets")
                self.take()
                bound = self._number()
                self.expect("]")
                return build(bound)
        lower = self._number()
        self.expect(",")
        if self.accept("inf"):
            upper = None
        else:
            upper = self._number()
        closer = self.take()
        if closer.text not in ("]", ")"):
            self.fail(f"expected ']' or ')', found {self._shown()}")
        upper_closed = closer.text == "]"
        if upper is None and upper_closed:
            self.fail("an unbounded interval must be right-open")
        try:
            return mtl.Interval(lower, upper, lower_closed, upper_closed)
        except InputError as exc:
            self.fail(str(exc))

    def _number(self) -> Fraction:
        tok = self.peek()
        if tok.kind != "number":
            self.fail(f"expected a number, found {self._shown()}")
        self.take()
        return Fraction(tok.text)


def parse_constraints(text: str, labels=None, source: str = "<constraints>",
                      bat: BasicActionTheory | None = None) -> list[mtl.MtlFormula]:
    """Parse a ``;``-terminated list of timing constraints.

    ``labels`` optionally restricts the symbol labels that may appear;
    anything outside it is rejected with a location-tagged error.  With a
    ``bat``, labels may also be typed atoms over its pools (quantifiers,
    variables, term arguments); they are expanded and rendered to the
    same canonical strings the compiled automaton uses.
    """
    return _ConstraintParser(text, source, labels, bat).parse()
