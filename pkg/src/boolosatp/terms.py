"""Simply typed lambda-calculus kernel.

Terms use de Bruijn indices for bound variables and named, typed free
variables/constants, so alpha-equivalence is plain structural equality and
substitution is capture-free by construction.  Logical connectives and
quantifiers are ordinary typed constants; quantifiers take an abstraction as
their single argument.  The prover-facing normal form is beta-normal eta-long.
"""

from __future__ import annotations

from dataclasses import dataclass


class TermError(Exception):
    """Base class for kernel errors."""


class IllTypedError(TermError):
    pass


class UnboundIndexError(TermError):
    pass


class TermSizeError(TermError):
    """Raised when normalization would exceed the configured node budget."""


MAX_TERM_SIZE = 10 ** 6


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Ty:
    """Simple type: a base type ($i or $o) or an arrow.

    Types are interned (built only through IOTA/OMICRON/arrow or the parser's
    base-type table), so equality is identity."""

    __slots__ = ("base", "left", "right")
    base: str | None
    left: "Ty | None"
    right: "Ty | None"

    def is_arrow(self) -> bool:
        return self.base is None

    def __repr__(self) -> str:
        if self.base is not None:
            return self.base
        lhs = repr(self.left)
        if self.left.is_arrow():
            lhs = f"({lhs})"
        return f"{lhs}>{self.right!r}"


IOTA = Ty("$i", None, None)
OMICRON = Ty("$o", None, None)

_ARROWS: dict[tuple[Ty, Ty], Ty] = {}


def arrow(left: Ty, right: Ty) -> Ty:
    key = (left, right)
    ty = _ARROWS.get(key)
    if ty is None:
        ty = Ty(None, left, right)
        _ARROWS[key] = ty
    return ty


def fn_type(*tys: Ty) -> Ty:
    """fn_type(a, b, c) == a > (b > c)."""
    result = tys[-1]
    for t in reversed(tys[:-1]):
        result = arrow(t, result)
    return result


def unfold_type(ty: Ty) -> tuple[list[Ty], Ty]:
    """Split a type into its argument types and final base type."""
    args = []
    while ty.is_arrow():
        args.append(ty.left)
        ty = ty.right
    return args, ty


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

class Term:
    __slots__ = ("hash", "size", "loose", "fvn", "srepr")

    hash: int
    size: int
    loose: int  # 1 + max loose de Bruijn index; 0 when closed under binders
    fvn: frozenset  # lazily cached free-variable names

    def __hash__(self) -> int:
        return self.hash

    def __repr__(self) -> str:
        return term_to_str(self)


class BVar(Term):
    __slots__ = ("idx",)

    def __init__(self, idx: int):
        self.idx = idx
        self.hash = hash((0, idx))
        self.size = 1
        self.loose = idx + 1

    def __eq__(self, other):
        return self is other or (
            type(other) is BVar and self.idx == other.idx)

    __hash__ = Term.__hash__


class FVar(Term):
    __slots__ = ("name", "ty")

    def __init__(self, name: str, ty: Ty):
        self.name = name
        self.ty = ty
        self.hash = hash((1, name, ty))
        self.size = 1
        self.loose = 0

    def __eq__(self, other):
        return self is other or (
            type(other) is FVar and self.hash == other.hash
            and self.name == other.name and self.ty == other.ty)

    __hash__ = Term.__hash__


class Const(Term):
    __slots__ = ("name", "ty")

    def __init__(self, name: str, ty: Ty):
        self.name = name
        self.ty = ty
        self.hash = hash((2, name, ty))
        self.size = 1
        self.loose = 0

    def __eq__(self, other):
        return self is other or (
            type(other) is Const and self.hash == other.hash
            and self.name == other.name and self.ty == other.ty)

    __hash__ = Term.__hash__


class App(Term):
    __slots__ = ("fn", "arg")

    def __init__(self, fn: Term, arg: Term):
        self.fn = fn
        self.arg = arg
        self.hash = hash((3, fn.hash, arg.hash))
        self.size = fn.size + arg.size + 1
        self.loose = fn.loose if fn.loose > arg.loose else arg.loose

    def __eq__(self, other):
        return self is other or (
            type(other) is App and self.hash == other.hash
            and self.fn == other.fn and self.arg == other.arg)

    __hash__ = Term.__hash__


class Lam(Term):
    __slots__ = ("ty", "body")

    def __init__(self, ty: Ty, body: Term):
        self.ty = ty
        self.body = body
        self.hash = hash((4, ty, body.hash))
        self.size = body.size + 1
        self.loose = body.loose - 1 if body.loose > 0 else 0

    def __eq__(self, other):
        return self is other or (
            type(other) is Lam and self.hash == other.hash
            and self.ty == other.ty and self.body == other.body)

    __hash__ = Term.__hash__


def alpha_eq(a: Term, b: Term) -> bool:
    """Alpha-equivalence; structural equality under de Bruijn representation."""
    return a == b


# ---------------------------------------------------------------------------
# Logical constants
# ---------------------------------------------------------------------------

NOT_NAME, AND_NAME, OR_NAME, IMP_NAME, IFF_NAME = "~", "&", "|", "=>", "<=>"
EQ_NAME, FORALL_NAME, EXISTS_NAME = "=", "!", "?"
TRUE_NAME, FALSE_NAME = "$true", "$false"

LOGICAL_NAMES = frozenset({
    NOT_NAME, AND_NAME, OR_NAME, IMP_NAME, IFF_NAME,
    EQ_NAME, FORALL_NAME, EXISTS_NAME, TRUE_NAME, FALSE_NAME,
})

NOT_C = Const(NOT_NAME, fn_type(OMICRON, OMICRON))
AND_C = Const(AND_NAME, fn_type(OMICRON, OMICRON, OMICRON))
OR_C = Const(OR_NAME, fn_type(OMICRON, OMICRON, OMICRON))
IMP_C = Const(IMP_NAME, fn_type(OMICRON, OMICRON, OMICRON))
IFF_C = Const(IFF_NAME, fn_type(OMICRON, OMICRON, OMICRON))
TRUE_C = Const(TRUE_NAME, OMICRON)
FALSE_C = Const(FALSE_NAME, OMICRON)


def eq_const(ty: Ty) -> Const:
    return Const(EQ_NAME, fn_type(ty, ty, OMICRON))


def forall_const(ty: Ty) -> Const:
    return Const(FORALL_NAME, fn_type(arrow(ty, OMICRON), OMICRON))


def exists_const(ty: Ty) -> Const:
    return Const(EXISTS_NAME, fn_type(arrow(ty, OMICRON), OMICRON))


def is_logical(t: Term) -> bool:
    return type(t) is Const and t.name in LOGICAL_NAMES


def neg(a: Term) -> Term:
    return App(NOT_C, a)


def conj(a: Term, b: Term) -> Term:
    return App(App(AND_C, a), b)


def disj(a: Term, b: Term) -> Term:
    return App(App(OR_C, a), b)


def impl(a: Term, b: Term) -> Term:
    return App(App(IMP_C, a), b)


def iff(a: Term, b: Term) -> Term:
    return App(App(IFF_C, a), b)


def equation(a: Term, b: Term, ty: Ty) -> Term:
    return App(App(eq_const(ty), a), b)


def forall(ty: Ty, body: Term) -> Term:
    """body uses BVar(0) for the quantified variable."""
    return App(forall_const(ty), Lam(ty, body))


def exists(ty: Ty, body: Term) -> Term:
    return App(exists_const(ty), Lam(ty, body))


# ---------------------------------------------------------------------------
# Spine helpers
# ---------------------------------------------------------------------------

def strip_app(t: Term) -> tuple[Term, list[Term]]:
    args: list[Term] = []
    while type(t) is App:
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def head_of(t: Term) -> Term:
    while type(t) is App:
        t = t.fn
    return t


def mk_app(head: Term, args) -> Term:
    for a in args:
        head = App(head, a)
    return head


def strip_lam(t: Term) -> tuple[list[Ty], Term]:
    tys = []
    while type(t) is Lam:
        tys.append(t.ty)
        t = t.body
    return tys, t


def mk_lam(tys, body: Term) -> Term:
    for ty in reversed(tys):
        body = Lam(ty, body)
    return body


# ---------------------------------------------------------------------------
# de Bruijn machinery
# ---------------------------------------------------------------------------

def shift(t: Term, d: int, cutoff: int = 0) -> Term:
    """Add d to every loose index >= cutoff."""
    if t.loose <= cutoff or d == 0:
        return t
    tt = type(t)
    if tt is BVar:
        return BVar(t.idx + d) if t.idx >= cutoff else t
    if tt is App:
        return App(shift(t.fn, d, cutoff), shift(t.arg, d, cutoff))
    if tt is Lam:
        return Lam(t.ty, shift(t.body, d, cutoff + 1))
    return t


def _subst_bvar(t: Term, j: int, s: Term) -> Term:
    """Replace BVar(j) by s (which gets shifted under binders)."""
    if t.loose <= j:
        return t
    tt = type(t)
    if tt is BVar:
        if t.idx == j:
            return shift(s, j)
        if t.idx > j:
            return BVar(t.idx - 1)
        return t
    if tt is App:
        return App(_subst_bvar(t.fn, j, s), _subst_bvar(t.arg, j, s))
    if tt is Lam:
        return Lam(t.ty, _subst_bvar(t.body, j + 1, s))
    return t


# ---------------------------------------------------------------------------
# Typing
# ---------------------------------------------------------------------------

def type_of(t: Term, ctx: tuple = ()) -> Ty:
    """Type of t; ctx[i] is the type of BVar(i).

    Raises IllTypedError / UnboundIndexError on ill-formed input.
    """
    tt = type(t)
    if tt is BVar:
        if t.idx >= len(ctx):
            raise UnboundIndexError(f"unbound de Bruijn index {t.idx}")
        return ctx[t.idx]
    if tt is FVar or tt is Const:
        return t.ty
    if tt is App:
        fty = type_of(t.fn, ctx)
        if not fty.is_arrow():
            raise IllTypedError(f"ill-typed application: {t.fn!r} is not a function")
        aty = type_of(t.arg, ctx)
        if aty != fty.left:
            raise IllTypedError(
                f"ill-typed application: expected {fty.left!r}, got {aty!r} in {t!r}")
        return fty.right
    # Lam
    return arrow(t.ty, type_of(t.body, (t.ty,) + ctx))


def check_type(t: Term, expected: Ty, ctx: tuple = ()) -> None:
    actual = type_of(t, ctx)
    if actual != expected:
        raise IllTypedError(f"expected type {expected!r}, got {actual!r}")


# ---------------------------------------------------------------------------
# Beta normalization
# ---------------------------------------------------------------------------

_BNF_CACHE: dict[Term, Term] = {}


def clear_caches() -> None:
    _BNF_CACHE.clear()
    _ELF_CACHE.clear()


def _whnf(t: Term, limit: int) -> Term:
    args: list[Term] = []
    while True:
        while type(t) is App:
            args.append(t.arg)
            t = t.fn
        if type(t) is Lam and args:
            t = _subst_bvar(t.body, 0, args.pop())
            if t.size > limit:
                raise TermSizeError(f"term exceeded {limit} nodes during reduction")
            continue
        break
    while args:
        t = App(t, args.pop())
    return t


def beta_normalize(t: Term, limit: int = MAX_TERM_SIZE) -> Term:
    """Full beta-normal form (normal-order); strongly normalizing on
    well-typed input, guarded by a node budget for pathological blowups."""
    cached = _BNF_CACHE.get(t)
    if cached is not None:
        return cached
    r = _whnf(t, limit)
    tt = type(r)
    if tt is Lam:
        r = Lam(r.ty, beta_normalize(r.body, limit))
    elif tt is App:
        head, args = strip_app(r)
        nargs = [beta_normalize(a, limit) for a in args]
        r = mk_app(head, nargs)
        # an argument may itself normalize to something creating no new redex
        # at the head (head is atomic after whnf), so this is normal form
    if r.size > limit:
        raise TermSizeError(f"term exceeded {limit} nodes during reduction")
    _BNF_CACHE[t] = r
    if t is not r:
        _BNF_CACHE[r] = r
    return r


def apply_args(t: Term, args) -> Term:
    """Apply t to args and beta-normalize."""
    return beta_normalize(mk_app(t, list(args)))


# ---------------------------------------------------------------------------
# Eta expansion (long form)
# ---------------------------------------------------------------------------

_ELF_CACHE: dict[Term, Term] = {}


def eta_long_form(t: Term, ctx: tuple = ()) -> Term:
    """Fully eta-expanded form of a beta-normal term: every subterm of arrow
    type is expanded until it is a lambda; idempotent."""
    if not ctx:
        cached = _ELF_CACHE.get(t)
        if cached is not None:
            return cached
        r = _eta_long(t, ())
        _ELF_CACHE[t] = r
        _ELF_CACHE[r] = r
        return r
    return _eta_long(t, ctx)


def _eta_long(t: Term, ctx: tuple) -> Term:
    tt = type(t)
    if tt is Lam:
        return Lam(t.ty, _eta_long(t.body, (t.ty,) + ctx))
    return _eta_long_typed(t, _head_spine_type(t, ctx), ctx)


def _head_spine_type(t: Term, ctx: tuple) -> Ty:
    """Type of a beta-normal non-lambda term, derived in one pass from the
    head's type (cheaper than a full type_of recursion)."""
    head, args = strip_app(t)
    th = type(head)
    if th is BVar:
        if head.idx >= len(ctx):
            raise UnboundIndexError(f"unbound de Bruijn index {head.idx}")
        ty = ctx[head.idx]
    else:
        ty = head.ty
    for _ in args:
        ty = ty.right
    return ty


def _eta_long_typed(t: Term, ty: Ty, ctx: tuple) -> Term:
    if type(t) is Lam:
        return Lam(t.ty, _eta_long_typed(t.body, ty.right, (t.ty,) + ctx))
    doms, _ = unfold_type(ty)
    n = len(doms)
    head, args = strip_app(t)
    th = type(head)
    if th is BVar:
        hty = ctx[head.idx]
    else:
        hty = head.ty
    if n == 0:
        parts = []
        for a in args:
            parts.append(_eta_long_typed(a, hty.left, ctx))
            hty = hty.right
        return mk_app(head, parts)
    inner_ctx = tuple(reversed(doms)) + ctx
    body = shift(t, n)
    for i in range(n):
        body = App(body, BVar(n - 1 - i))
    # t is beta-normal and not a lambda, so the saturated spine has no redex
    head2, args2 = strip_app(body)
    th2 = type(head2)
    hty2 = inner_ctx[head2.idx] if th2 is BVar else head2.ty
    parts = []
    for a in args2:
        parts.append(_eta_long_typed(a, hty2.left, inner_ctx))
        hty2 = hty2.right
    return mk_lam(doms, mk_app(head2, parts))


def nf(t: Term, ctx: tuple = (), limit: int = MAX_TERM_SIZE) -> Term:
    """Beta-normal eta-long form: the prover's canonical representation."""
    return eta_long_form(beta_normalize(t, limit), ctx)


def _uses_bvar0(t: Term) -> bool:
    return _uses_bvar_at(t, 0)


def _uses_bvar_at(t: Term, j: int) -> bool:
    if t.loose <= j:
        return False
    tt = type(t)
    if tt is BVar:
        return t.idx == j
    if tt is App:
        return _uses_bvar_at(t.fn, j) or _uses_bvar_at(t.arg, j)
    return _uses_bvar_at(t.body, j + 1)


def eta_contract(t: Term) -> Term:
    """Maximal eta-contraction; used only for readable printing."""
    tt = type(t)
    if tt is App:
        return App(eta_contract(t.fn), eta_contract(t.arg))
    if tt is Lam:
        body = eta_contract(t.body)
        if type(body) is App and type(body.arg) is BVar and body.arg.idx == 0 \
                and not _uses_bvar0(body.fn):
            return shift(body.fn, -1) if body.fn.loose else body.fn
        return Lam(t.ty, body)
    return t


# ---------------------------------------------------------------------------
# Free-variable substitution
# ---------------------------------------------------------------------------

def free_vars(t: Term) -> frozenset[FVar]:
    tt = type(t)
    if tt is FVar:
        return frozenset((t,))
    if tt is App:
        return free_vars(t.fn) | free_vars(t.arg)
    if tt is Lam:
        return free_vars(t.body)
    return frozenset()


_EMPTY_FVN: frozenset = frozenset()


def free_var_names(t: Term) -> frozenset[str]:
    try:
        return t.fvn
    except AttributeError:
        pass
    tt = type(t)
    if tt is FVar:
        r = frozenset((t.name,))
    elif tt is App:
        r = free_var_names(t.fn) | free_var_names(t.arg)
    elif tt is Lam:
        r = free_var_names(t.body)
    else:
        r = _EMPTY_FVN
    t.fvn = r
    return r


def replace_free(t: Term, mapping: dict[str, Term]) -> Term:
    """Simultaneous replacement of free variables by closed-under-binder
    terms; capture-free because replacements carry no loose indices."""
    if not mapping or free_var_names(t).isdisjoint(mapping):
        return t
    tt = type(t)
    if tt is FVar:
        r = mapping.get(t.name)
        if r is None:
            return t
        if r.loose:
            raise TermError("substitution range has loose bound indices")
        if type_of(r) != t.ty:
            raise IllTypedError(
                f"substitution for {t.name} has type {type_of(r)!r}, expected {t.ty!r}")
        return r
    if tt is App:
        return App(replace_free(t.fn, mapping), replace_free(t.arg, mapping))
    if tt is Lam:
        return Lam(t.ty, replace_free(t.body, mapping))
    return t


def substitute(t: Term, mapping: dict[str, Term], limit: int = MAX_TERM_SIZE) -> Term:
    """Capture-avoiding replacement followed by beta-normalization."""
    return beta_normalize(replace_free(t, mapping), limit)


def rename_free(t: Term, mapping: dict[str, str]) -> Term:
    if free_var_names(t).isdisjoint(mapping):
        return t
    tt = type(t)
    if tt is FVar:
        new = mapping.get(t.name)
        return FVar(new, t.ty) if new is not None else t
    if tt is App:
        return App(rename_free(t.fn, mapping), rename_free(t.arg, mapping))
    if tt is Lam:
        return Lam(t.ty, rename_free(t.body, mapping))
    return t


def constants_of(t: Term) -> set[str]:
    tt = type(t)
    if tt is Const:
        return set() if t.name in LOGICAL_NAMES else {t.name}
    if tt is App:
        return constants_of(t.fn) | constants_of(t.arg)
    if tt is Lam:
        return constants_of(t.body)
    return set()


def contains_const(t: Term, name: str) -> bool:
    tt = type(t)
    if tt is Const:
        return t.name == name
    if tt is App:
        return contains_const(t.fn, name) or contains_const(t.arg, name)
    if tt is Lam:
        return contains_const(t.body, name)
    return False


# ---------------------------------------------------------------------------
# Signature
# ---------------------------------------------------------------------------

class Signature:
    """Constant typing map. Logical constants are implicit."""

    def __init__(self, decls: dict[str, Ty] | None = None):
        self.decls: dict[str, Ty] = dict(decls) if decls else {}

    def declare(self, name: str, ty: Ty) -> None:
        old = self.decls.get(name)
        if old is not None and old != ty:
            raise TermError(f"constant {name} declared with two types")
        self.decls[name] = ty

    def __contains__(self, name: str) -> bool:
        return name in self.decls or name in LOGICAL_NAMES

    def __getitem__(self, name: str) -> Ty:
        return self.decls[name]

    def copy(self) -> "Signature":
        return Signature(self.decls)

    def fresh_name(self, base: str) -> str:
        if base not in self.decls:
            return base
        n = 1
        while f"{base}_{n}" in self.decls:
            n += 1
        return f"{base}_{n}"


def bcp_signature() -> Signature:
    return Signature({
        "e": IOTA,
        "s": arrow(IOTA, IOTA),
        "f": fn_type(IOTA, IOTA, IOTA),
        "d": arrow(IOTA, OMICRON),
    })


# ---------------------------------------------------------------------------
# Printing (debug form; THF printing lives in thf_io)
# ---------------------------------------------------------------------------

def cached_str(t: Term) -> str:
    """Deterministic structural string, cached per node; used as a sort key."""
    try:
        return t.srepr
    except AttributeError:
        pass
    s = term_to_str(t)
    t.srepr = s
    return s


def term_to_str(t: Term, bound: tuple = ()) -> str:
    tt = type(t)
    if tt is BVar:
        if t.idx < len(bound):
            return bound[t.idx]
        return f"#{t.idx}"
    if tt is FVar or tt is Const:
        return t.name
    if tt is Lam:
        name = f"x{len(bound)}"
        return f"(^{name}. {term_to_str(t.body, (name,) + bound)})"
    head, args = strip_app(t)
    parts = [term_to_str(head, bound)] + [term_to_str(a, bound) for a in args]
    return "(" + " ".join(parts) + ")"
