"""TPTP THF0 subset: lexer, parser, printer, and problem representation.

The grammar covers exactly the constructs the built-in encodings use:
thf annotated formulas, connectives ~ & | => <=> = !=, quantifiers ! ? ^,
explicit @ application, [X:type] binder lists, $i/$o/$tType, % comments.
Anything else fails with a positioned error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .terms import (
    IOTA, OMICRON, Ty, arrow, Term, BVar, FVar, Const, App, Lam,
    NOT_C, AND_C, OR_C, IMP_C, IFF_C, TRUE_C, FALSE_C,
    eq_const, forall_const, exists_const, mk_app, strip_app, strip_lam,
    type_of, IllTypedError, TermError, Signature, LOGICAL_NAMES,
    EQ_NAME, FORALL_NAME, EXISTS_NAME, NOT_NAME, AND_NAME, OR_NAME,
    IMP_NAME, IFF_NAME, TRUE_NAME, FALSE_NAME, unfold_type,
)


class ThfError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class Role(Enum):
    TYPE_DECL = "type"
    AXIOM = "axiom"
    DEFINITION = "definition"
    CONJECTURE = "conjecture"
    NEGATED_CONJECTURE = "negated_conjecture"
    PLAIN = "plain"


_ROLE_BY_WORD = {r.value: r for r in Role}


@dataclass
class AnnotatedFormula:
    name: str
    role: Role
    body: Term  # for TYPE_DECL: the declared Const
    source: str = ""

    def __repr__(self):
        return f"thf({self.name}, {self.role.value}, {self.body!r})"


@dataclass
class Problem:
    signature: Signature = field(default_factory=Signature)
    formulas: list[AnnotatedFormula] = field(default_factory=list)

    def by_name(self, name: str) -> AnnotatedFormula:
        for fm in self.formulas:
            if fm.name == name:
                return fm
        raise KeyError(name)

    def conjecture(self) -> AnnotatedFormula | None:
        for fm in self.formulas:
            if fm.role is Role.CONJECTURE:
                return fm
        return None

    def axioms(self) -> list[AnnotatedFormula]:
        return [fm for fm in self.formulas
                if fm.role in (Role.AXIOM, Role.DEFINITION)]

    def add(self, fm: AnnotatedFormula) -> None:
        if any(g.name == fm.name for g in self.formulas):
            raise TermError(f"duplicate formula name {fm.name}")
        if fm.role is Role.CONJECTURE and self.conjecture() is not None:
            raise TermError("more than one conjecture")
        self.formulas.append(fm)

    def copy(self) -> "Problem":
        q = Problem(self.signature.copy())
        q.formulas = list(self.formulas)
        return q


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tok:
    kind: str  # LOWER UPPER DOLLAR PUNCT EOF
    text: str
    line: int
    col: int


_PUNCT2 = ("<=>", "=>", "!=")
_PUNCT1 = "()[],.:@~&|=!?^>"


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise ThfError("unterminated block comment", line, col)
            skipped = text[i:j + 2]
            line += skipped.count("\n")
            col = (len(skipped) - skipped.rfind("\n")) if "\n" in skipped else col + len(skipped)
            i = j + 2
            continue
        matched = None
        for p in _PUNCT2:
            if text.startswith(p, i):
                matched = p
                break
        if matched:
            toks.append(Tok("PUNCT", matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        if c in _PUNCT1:
            toks.append(Tok("PUNCT", c, line, col))
            i += 1
            col += 1
            continue
        if c == "$":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Tok("DOLLAR", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            kind = "UPPER" if (c.isupper() or c == "_") else "LOWER"
            toks.append(Tok(kind, text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ThfError(f"unexpected character {c!r}", line, col)
    toks.append(Tok("EOF", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0
        self.problem = Problem()
        self.base_types: dict[str, Ty] = {}

    # -- token plumbing ------------------------------------------------------

    def peek(self) -> Tok:
        return self.toks[self.pos]

    def next(self) -> Tok:
        t = self.toks[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def expect(self, text: str) -> Tok:
        t = self.peek()
        if t.text != text:
            raise ThfError(f"expected {text!r}, found {t.text or 'end of input'!r}",
                           t.line, t.col)
        return self.next()

    def err(self, msg: str, tok: Tok | None = None):
        t = tok or self.peek()
        raise ThfError(msg, t.line, t.col)

    # -- top level ------------------------------------------------------------

    def parse_problem(self) -> Problem:
        while self.peek().kind != "EOF":
            self.parse_annotated()
        return self.problem

    def parse_annotated(self) -> None:
        kw = self.peek()
        if kw.text != "thf":
            self.err(f"expected 'thf', found {kw.text!r}")
        self.next()
        self.expect("(")
        name_tok = self.next()
        if name_tok.kind not in ("LOWER", "UPPER"):
            self.err("expected formula name", name_tok)
        name = name_tok.text
        self.expect(",")
        role_tok = self.next()
        role = _ROLE_BY_WORD.get(role_tok.text)
        if role is None:
            self.err(f"unknown role {role_tok.text!r}", role_tok)
        self.expect(",")
        if role is Role.TYPE_DECL:
            fm = self.parse_type_decl(name)
        else:
            body_tok = self.peek()
            body = self.parse_formula(())
            try:
                ty = type_of(body)
            except TermError as ex:
                raise ThfError(f"ill-typed formula: {ex}", body_tok.line, body_tok.col)
            if ty != OMICRON:
                raise ThfError(f"formula has type {ty!r}, expected $o",
                               body_tok.line, body_tok.col)
            fm = AnnotatedFormula(name, role, body)
        source = ""
        if self.peek().text == ",":
            self.next()
            source = self.parse_source()
        self.expect(")")
        self.expect(".")
        fm.source = source
        try:
            self.problem.add(fm)
        except TermError as ex:
            raise ThfError(str(ex), name_tok.line, name_tok.col)

    def parse_type_decl(self, name: str) -> AnnotatedFormula:
        parens = 0
        while self.peek().text == "(":
            self.next()
            parens += 1
        ctok = self.next()
        if ctok.kind != "LOWER":
            self.err("expected constant name in type declaration", ctok)
        self.expect(":")
        if self.peek().text == "$tType":
            self.next()
            base = self.base_types.get(ctok.text)
            if base is None:
                base = Ty(ctok.text, None, None)
                self.base_types[ctok.text] = base
            const = Const(ctok.text, base)
        else:
            ty = self.parse_type()
            try:
                self.problem.signature.declare(ctok.text, ty)
            except TermError as ex:
                raise ThfError(str(ex), ctok.line, ctok.col)
            const = Const(ctok.text, ty)
        for _ in range(parens):
            self.expect(")")
        return AnnotatedFormula(name, Role.TYPE_DECL, const)

    def parse_source(self) -> str:
        # free-text annotation: consume balanced tokens up to the closing ')'
        parts = []
        depth = 0
        while True:
            t = self.peek()
            if t.kind == "EOF":
                self.err("unterminated annotation")
            if t.text == "(" or t.text == "[":
                depth += 1
            elif t.text == ")" or t.text == "]":
                if depth == 0 and t.text == ")":
                    break
                depth -= 1
            parts.append(self.next().text)
        return " ".join(parts)

    # -- types ----------------------------------------------------------------

    def parse_type(self) -> Ty:
        left = self.parse_type_atom()
        if self.peek().text == ">":
            self.next()
            return arrow(left, self.parse_type())
        return left

    def parse_type_atom(self) -> Ty:
        t = self.peek()
        if t.text == "(":
            self.next()
            ty = self.parse_type()
            self.expect(")")
            return ty
        if t.text == "$i":
            self.next()
            return IOTA
        if t.text == "$o":
            self.next()
            return OMICRON
        if t.kind == "LOWER" and t.text in self.base_types:
            self.next()
            return self.base_types[t.text]
        self.err(f"expected a type, found {t.text!r}")

    # -- formulas ---------------------------------------------------------------
    # precedence: @ (tightest) > = != > & / | chains > => / <=>

    def parse_formula(self, bound: tuple) -> Term:
        left = self.parse_equality(bound)
        t = self.peek()
        if t.text in ("&", "|"):
            op = t.text
            conn = AND_C if op == "&" else OR_C
            while self.peek().text == op:
                self.next()
                right = self.parse_equality(bound)
                left = App(App(conn, left), right)
            nxt = self.peek()
            if nxt.text in ("&", "|", "=>", "<=>"):
                self.err(f"mixed binary connectives need parentheses ({op} then {nxt.text})")
            return left
        if t.text == "=>":
            self.next()
            right = self.parse_formula_imp_rhs(bound)
            return App(App(IMP_C, left), right)
        if t.text == "<=>":
            self.next()
            right = self.parse_equality(bound)
            nxt = self.peek()
            if nxt.text in ("&", "|", "=>", "<=>"):
                self.err("mixed binary connectives need parentheses")
            return App(App(IFF_C, left), right)
        return left

    def parse_formula_imp_rhs(self, bound: tuple) -> Term:
        # => is right-associative
        left = self.parse_equality(bound)
        if self.peek().text == "=>":
            self.next()
            return App(App(IMP_C, left), self.parse_formula_imp_rhs(bound))
        if self.peek().text in ("&", "|", "<=>"):
            self.err("mixed binary connectives need parentheses")
        return left

    def parse_equality(self, bound: tuple) -> Term:
        tok = self.peek()
        left = self.parse_applied(bound)
        t = self.peek()
        if t.text in ("=", "!="):
            self.next()
            right = self.parse_applied(bound)
            try:
                lty = type_of(left, tuple(ty for _, ty in bound))
                rty = type_of(right, tuple(ty for _, ty in bound))
            except TermError as ex:
                raise ThfError(f"ill-typed equality: {ex}", t.line, t.col)
            if lty != rty:
                raise ThfError(f"equality between {lty!r} and {rty!r}", t.line, t.col)
            eq = App(App(eq_const(lty), left), right)
            if self.peek().text in ("=", "!="):
                self.err("chained equalities need parentheses")
            return App(NOT_C, eq) if t.text == "!=" else eq
        return left

    def parse_applied(self, bound: tuple) -> Term:
        left = self.parse_unit(bound)
        while self.peek().text == "@":
            self.next()
            right = self.parse_unit(bound)
            left = App(left, right)
        return left

    def parse_unit(self, bound: tuple) -> Term:
        t = self.peek()
        if t.text == "~":
            self.next()
            return App(NOT_C, self.parse_unit(bound))
        if t.text in ("!", "?", "^"):
            return self.parse_quantified(bound)
        if t.text == "(":
            self.next()
            body = self.parse_formula(bound)
            self.expect(")")
            return body
        if t.text == "$true":
            self.next()
            return TRUE_C
        if t.text == "$false":
            self.next()
            return FALSE_C
        if t.kind == "UPPER":
            self.next()
            for i, (name, ty) in enumerate(bound):
                if name == t.text:
                    return BVar(i)
            self.err(f"unbound variable {t.text}", t)
        if t.kind == "LOWER":
            self.next()
            if t.text not in self.problem.signature:
                self.err(f"undeclared constant {t.text}", t)
            return Const(t.text, self.problem.signature[t.text])
        self.err(f"expected a term, found {t.text or 'end of input'!r}")

    def parse_quantified(self, bound: tuple) -> Term:
        q = self.next().text
        self.expect("[")
        binders: list[tuple[str, Ty]] = []
        while True:
            v = self.next()
            if v.kind != "UPPER":
                self.err("expected a variable in binder list", v)
            self.expect(":")
            ty = self.parse_type()
            binders.append((v.text, ty))
            if self.peek().text == ",":
                self.next()
                continue
            break
        self.expect("]")
        self.expect(":")
        inner_bound = bound
        for name, ty in binders:
            inner_bound = ((name, ty),) + inner_bound
        body = self.parse_applied(inner_bound)
        bad = self.peek()
        if bad.text in ("&", "|", "=>", "<=>", "=", "!="):
            self.err("binary connective after unparenthesized quantified body")
        for name, ty in reversed(binders):
            if q == "^":
                body = Lam(ty, body)
            else:
                qc = forall_const(ty) if q == "!" else exists_const(ty)
                body = App(qc, Lam(ty, body))
        return body


def parse_thf(text: str) -> Problem:
    """Parse a THF0 problem; raises ThfError with line/column on any defect."""
    return _Parser(text).parse_problem()


def parse_formula(text: str, sig: Signature) -> Term:
    """Parse a single bare formula against an existing signature."""
    p = _Parser("")
    p.problem.signature = sig
    p.toks = tokenize(text)
    p.pos = 0
    body = p.parse_formula(())
    if p.peek().kind != "EOF":
        p.err("trailing input after formula")
    return body


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

def type_to_thf(ty: Ty) -> str:
    if not ty.is_arrow():
        return ty.base
    left = type_to_thf(ty.left)
    if ty.left.is_arrow():
        left = f"({left})"
    return f"{left} > {type_to_thf(ty.right)}"


_INFIX = {AND_NAME: "&", OR_NAME: "|", IMP_NAME: "=>", IFF_NAME: "<=>"}


def term_to_thf(t: Term, bound: tuple = (), used: frozenset = frozenset()) -> str:
    """Deterministic THF text for a term; output re-parses to an alpha-equal term."""
    head, args = strip_app(t)
    if type(head) is Const and head.name in (FORALL_NAME, EXISTS_NAME) \
            and len(args) == 1 and type(args[0]) is Lam:
        q = "!" if head.name == FORALL_NAME else "?"
        return _quantified_to_thf(q, args[0], bound, used)
    if type(head) is Const and head.name == NOT_NAME and len(args) == 1:
        return f"~ {_atomic_to_thf(args[0], bound, used)}"
    if type(head) is Const and head.name in _INFIX and len(args) == 2:
        op = _INFIX[head.name]
        lhs = _atomic_to_thf(args[0], bound, used)
        rhs = _atomic_to_thf(args[1], bound, used)
        return f"({lhs} {op} {rhs})"
    if type(head) is Const and head.name == EQ_NAME and len(args) == 2:
        lhs = _atomic_to_thf(args[0], bound, used)
        rhs = _atomic_to_thf(args[1], bound, used)
        return f"({lhs} = {rhs})"
    if type(t) is Lam:
        return _quantified_to_thf("^", t, bound, used)
    if args:
        parts = [_atomic_to_thf(head, bound, used)]
        parts += [_atomic_to_thf(a, bound, used) for a in args]
        return "(" + " @ ".join(parts) + ")"
    if type(t) is BVar:
        return bound[t.idx]
    return t.name  # Const / FVar


def _atomic_to_thf(t: Term, bound: tuple, used: frozenset) -> str:
    s = term_to_thf(t, bound, used)
    if s.startswith("(") or type(t) in (BVar, FVar, Const):
        return s
    return f"({s})"


def _quantified_to_thf(q: str, lam: Lam, bound: tuple, used: frozenset) -> str:
    binders = []
    body: Term = lam
    qname = FORALL_NAME if q == "!" else EXISTS_NAME
    while type(body) is Lam:
        name = _fresh_var_name(len(bound) + len(binders), used)
        binders.append((name, body.ty))
        body = body.body
        if q == "^":
            continue  # merge all directly nested lambdas
        head, args = strip_app(body)
        if type(head) is Const and head.name == qname \
                and len(args) == 1 and type(args[0]) is Lam:
            body = args[0]  # merge same-quantifier runs
            continue
        break
    inner_bound = bound
    for name, _ in binders:
        inner_bound = (name,) + inner_bound
    binder_txt = ",".join(f"{name}: {type_to_thf(ty)}" for name, ty in binders)
    body_txt = _atomic_to_thf(body, inner_bound, used)
    return f"({q} [{binder_txt}]: {body_txt})"


def _fresh_var_name(depth: int, used: frozenset) -> str:
    name = f"X{depth + 1}"
    while name in used:
        name = name + "_"
    return name


def formula_to_thf(fm: AnnotatedFormula) -> str:
    if fm.role is Role.TYPE_DECL:
        c = fm.body
        return f"thf({fm.name}, type, {c.name}: {type_to_thf(c.ty)})."
    body = term_to_thf(fm.body, (), frozenset())
    if not body.startswith("("):
        body = f"({body})"
    if fm.source:
        return f"thf({fm.name}, {fm.role.value}, {body}, {fm.source})."
    return f"thf({fm.name}, {fm.role.value}, {body})."


def print_thf(problem: Problem) -> str:
    """Valid THF0 text that re-parses to an alpha-equal problem."""
    lines = ["% generated by boolosatp"]
    for fm in problem.formulas:
        lines.append(formula_to_thf(fm))
    return "\n".join(lines) + "\n"
