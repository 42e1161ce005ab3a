"""Higher-order unification.

Three layers:

* pattern_unify — decision procedure for Miller's pattern fragment
  (flex heads applied to distinct bound variables), with pruning;
* preunify — bounded Huet pre-unification: deterministic pattern/rigid
  steps where applicable, imitation/projection branching elsewhere,
  flex-flex pairs postponed as residual constraints;
* prim_subst_bindings — general bindings that guess a logical connective
  or quantifier at the head of a set-typed variable.

Inside the engine, binders are opened with reserved rigid "local" constants
(names starting with an apostrophe, unreachable from the THF lexer), which
makes capture discipline a matter of name-set checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .terms import (
    Term, Ty, BVar, FVar, Const, App, Lam, IOTA, OMICRON,
    arrow, fn_type, unfold_type, mk_app, mk_lam, strip_app, strip_lam,
    beta_normalize, eta_long_form, nf, replace_free, free_vars, type_of,
    NOT_C, AND_C, OR_C, IMP_C, forall_const, exists_const, eq_const,
    LOGICAL_NAMES,
)

_LOCAL_PREFIX = "'"


def is_local(t: Term) -> bool:
    return type(t) is Const and t.name.startswith(_LOCAL_PREFIX)


class FreshSupply:
    """Monotone fresh-name supply; next() on the underlying count is atomic,
    so concurrent readers never collide."""

    def __init__(self, prefix: str = "H", start: int = 0):
        self.prefix = prefix
        self._counter = itertools.count(start)

    def var(self, ty: Ty) -> FVar:
        return FVar(f"{self.prefix}{next(self._counter)}", ty)

    def local(self, ty: Ty) -> Const:
        return Const(f"{_LOCAL_PREFIX}l{next(self._counter)}", ty)

    def name(self, base: str) -> str:
        return f"{base}{next(self._counter)}"


_DEFAULT_SUPPLY = FreshSupply()


# ---------------------------------------------------------------------------
# Substitutions
# ---------------------------------------------------------------------------

class Substitution:
    """Idempotent, type-respecting map from free-variable names to terms."""

    __slots__ = ("mapping",)

    def __init__(self, mapping: dict[str, Term] | None = None):
        self.mapping = mapping or {}

    def is_empty(self) -> bool:
        return not self.mapping

    def __len__(self) -> int:
        return len(self.mapping)

    def __contains__(self, name: str) -> bool:
        return name in self.mapping

    def __getitem__(self, name: str) -> Term:
        return self.mapping[name]

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self.mapping == other.mapping

    def __hash__(self):
        return hash(frozenset(self.mapping.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k} := {v!r}" for k, v in sorted(self.mapping.items()))
        return "{" + inner + "}"

    def apply(self, t: Term) -> Term:
        if not self.mapping:
            return t
        repl = replace_free(t, self.mapping)
        return t if repl is t else beta_normalize(repl)

    def apply_nf(self, t: Term) -> Term:
        """Apply and return the beta-normal eta-long form."""
        return eta_long_form(self.apply(t))

    def compose(self, other: "Substitution") -> "Substitution":
        """self then other: (self.compose(other)).apply == other.apply o self.apply."""
        if not other.mapping:
            return self
        new = {k: other.apply(v) for k, v in self.mapping.items()}
        for k, v in other.mapping.items():
            if k not in new:
                new[k] = v
        return Substitution(new)

    def restricted(self, names) -> "Substitution":
        return Substitution({k: v for k, v in self.mapping.items() if k in names})


def mgu_from_bindings(bindings: dict[str, Term]) -> Substitution:
    """Close a raw binding map into an idempotent substitution."""
    sub = Substitution()
    for name, term in bindings.items():
        sub = sub.compose(Substitution({name: term}))
    # one more pass makes earlier ranges see later bindings
    changed = True
    while changed:
        changed = False
        new = {}
        for k, v in sub.mapping.items():
            v2 = sub.apply(v)
            if v2 != v:
                changed = True
            new[k] = v2
        sub = Substitution(new)
    return sub


# ---------------------------------------------------------------------------
# Structural helpers
# ---------------------------------------------------------------------------

def locals_of(t: Term) -> frozenset[str]:
    tt = type(t)
    if tt is Const:
        return frozenset((t.name,)) if t.name.startswith(_LOCAL_PREFIX) else frozenset()
    if tt is App:
        return locals_of(t.fn) | locals_of(t.arg)
    if tt is Lam:
        return locals_of(t.body)
    return frozenset()


def _open_binders(s: Term, t: Term, supply: FreshSupply):
    """Strip the common lambda prefix, replacing bound vars by fresh locals."""
    while type(s) is Lam and type(t) is Lam:
        c = supply.local(s.ty)
        s = beta_normalize(App(s, c))
        t = beta_normalize(App(t, c))
    return s, t


def _as_local_arg(a: Term) -> str | None:
    """Recognize an eta-long argument that is (the expansion of) a local."""
    tys, body = strip_lam(a)
    head, args = strip_app(body)
    if not is_local(head):
        return None
    n = len(tys)
    if len(args) != n:
        return None
    for i, arg in enumerate(args):
        tys2, b2 = strip_lam(arg)
        if tys2:
            h2, a2 = strip_app(b2)
            if not (type(h2) is BVar and h2.idx == len(tys2) + n - 1 - i):
                return None
            ok = all(type(x) is BVar and x.idx == len(tys2) - 1 - j
                     for j, x in enumerate(a2))
            if not ok or len(a2) != len(tys2):
                return None
        elif not (type(arg) is BVar and arg.idx == n - 1 - i):
            return None
    return head.name


def _pattern_args(args: list[Term]) -> list[str] | None:
    """Names of the argument locals when they are distinct locals."""
    names = []
    for a in args:
        name = _as_local_arg(a)
        if name is None or name in names:
            return None
        names.append(name)
    return names


def _abstract_locals(t: Term, names: list[str], tys: list[Ty]) -> Term:
    """lambda-abstract the given locals (in order) out of t."""
    n = len(names)
    index = {name: n - 1 - i for i, name in enumerate(names)}

    def walk(u: Term, depth: int) -> Term:
        tu = type(u)
        if tu is Const:
            j = index.get(u.name)
            if j is not None:
                return BVar(j + depth)
            return u
        if tu is App:
            return App(walk(u.fn, depth), walk(u.arg, depth))
        if tu is Lam:
            return Lam(u.ty, walk(u.body, depth + 1))
        return u

    return mk_lam(tys, walk(t, 0))


def imitation_binding(flex: FVar, rigid_head: Term, supply: FreshSupply) -> Term:
    """General binding F := \\ys. c (H1 ys) ... (Hm ys)."""
    arg_tys, _ = unfold_type(flex.ty)
    n = len(arg_tys)
    head_arg_tys, _ = unfold_type(type_of(rigid_head))
    ys = [BVar(n - 1 - i) for i in range(n)]
    parts = []
    for sigma in head_arg_tys:
        h = supply.var(fn_type(*arg_tys, sigma) if arg_tys else sigma)
        parts.append(mk_app(h, ys))
    return nf(mk_lam(arg_tys, mk_app(rigid_head, parts)))


def projection_bindings(flex: FVar, result_ty: Ty, supply: FreshSupply) -> list[Term]:
    """General bindings F := \\ys. y_i (H1 ys) ... (Hk ys), lower index first."""
    arg_tys, _ = unfold_type(flex.ty)
    n = len(arg_tys)
    ys = [BVar(n - 1 - i) for i in range(n)]
    out = []
    for i, tau in enumerate(arg_tys):
        taus, base = unfold_type(tau)
        if base != result_ty:
            continue
        parts = []
        for sigma in taus:
            h = supply.var(fn_type(*arg_tys, sigma) if arg_tys else sigma)
            parts.append(mk_app(h, ys))
        out.append(nf(mk_lam(arg_tys, mk_app(BVar(n - 1 - i), parts))))
    return out


# ---------------------------------------------------------------------------
# Unification problems and results
# ---------------------------------------------------------------------------

@dataclass
class UnifProblem:
    constraints: list[tuple[Term, Term]]
    depth_budget: int = 8
    branch_budget: int = 64
    pre_normalized: bool = False  # inputs already beta-normal eta-long

    def normalized(self) -> list[tuple[Term, Term]]:
        if self.pre_normalized:
            return list(self.constraints)
        return [(nf(a), nf(b)) for a, b in self.constraints]


class NotAPattern(Exception):
    pass


class UnifFail(Exception):
    pass


@dataclass
class PreunifyResult:
    solutions: list[tuple[Substitution, list[tuple[Term, Term]]]]
    exhausted: bool = False  # a budget cut pruned unexplored branches

    def __iter__(self):
        return iter(self.solutions)


# ---------------------------------------------------------------------------
# Core engine
# ---------------------------------------------------------------------------

_RIGID, _FLEX = 0, 1


def _classify(t: Term):
    head, args = strip_app(t)
    if type(head) is FVar:
        return _FLEX, head, args
    return _RIGID, head, args


def _is_ho_predicate(c: Term) -> bool:
    """Boolean-valued constant with a functional argument (e.g. an
    inductiveness predicate): imitating such heads spirals the search."""
    if type(c) is not Const:
        return False
    args, base = unfold_type(c.ty)
    return base == OMICRON and any(a.is_arrow() for a in args)


class _Engine:
    def __init__(self, supply: FreshSupply, depth_budget: int, branch_budget: int,
                 max_solutions: int, patterns_only: bool,
                 restrict_imitation: bool = False):
        self.supply = supply
        self.depth_budget = depth_budget
        self.nodes_left = branch_budget
        self.max_solutions = max_solutions
        self.patterns_only = patterns_only
        self.restrict_imitation = restrict_imitation
        self.solutions: list[tuple[Substitution, list[tuple[Term, Term]]]] = []
        self.exhausted = False

    # -- pattern steps ------------------------------------------------------

    def _prune_for(self, t: Term, allowed: frozenset[str],
                   bindings: dict[str, Term]) -> None:
        """Ensure every local in t is in the allowed set, pruning pattern-flex
        arguments where possible.  Raises UnifFail when a disallowed local
        sits rigidly, NotAPattern when it hides under a non-pattern flex."""
        if type(t) is Lam:
            self._prune_for(t.body, allowed, bindings)
            return
        kind, head, args = _classify(t)
        if kind is _FLEX:
            names = _pattern_args(args)
            if names is None:
                for a in args:
                    if locals_of(a) - allowed:
                        raise NotAPattern("disallowed local under non-pattern flex")
                return
            bad = [nm for nm in names if nm not in allowed]
            if not bad:
                return
            arg_tys, base = unfold_type(head.ty)
            n = len(names)
            keep_idx = [i for i, nm in enumerate(names) if nm in allowed]
            kept_tys = [arg_tys[i] for i in keep_idx]
            fresh = self.supply.var(fn_type(*kept_tys, base) if kept_tys else base)
            ys = [BVar(n - 1 - i) for i in keep_idx]
            bindings[head.name] = nf(mk_lam(list(arg_tys), mk_app(fresh, ys)))
            return
        # rigid head
        if is_local(head) and head.name not in allowed:
            raise UnifFail("bound variable would escape its scope")
        for a in args:
            self._prune_for(a, allowed, bindings)

    def _try_pattern_bind(self, head: FVar, arg_names: list[str], other: Term):
        """Miller flex-rigid bind with pruning; returns a binding map, raises
        UnifFail on definite failure, NotAPattern when out of fragment."""
        if _occurs_rigidly(other, head.name):
            raise UnifFail("occurs check")
        if head.name in {v.name for v in free_vars(other)}:
            raise NotAPattern("occurs under a flex head")
        allowed = frozenset(arg_names)
        extra: dict[str, Term] = {}
        fixpoint = other
        for _ in range(16):
            step: dict[str, Term] = {}
            self._prune_for(fixpoint, allowed, step)
            if not step:
                break
            extra.update(step)
            fixpoint = eta_long_form(beta_normalize(replace_free(fixpoint, step)))
        else:
            raise NotAPattern("pruning did not converge")
        arg_tys, _ = unfold_type(head.ty)
        binding = _abstract_locals(fixpoint, arg_names, list(arg_tys))
        out = dict(extra)
        out[head.name] = nf(binding)
        return out

    def _flex_flex_pattern(self, h1: FVar, names1: list[str],
                           h2: FVar, names2: list[str]):
        tys1, base = unfold_type(h1.ty)
        tys2, _ = unfold_type(h2.ty)
        if h1.name == h2.name:
            kept = [(nm, ty) for nm, ty, nm2 in zip(names1, tys1, names2) if nm == nm2]
            fresh = self.supply.var(fn_type(*[ty for _, ty in kept], base)
                                    if kept else base)
            n = len(names1)
            ys = [BVar(n - 1 - i) for i, (nm, nm2) in enumerate(zip(names1, names2))
                  if nm == nm2]
            return {h1.name: nf(mk_lam(list(tys1), mk_app(fresh, ys)))}
        common = [(nm, ty) for nm, ty in zip(names1, tys1) if nm in names2]
        fresh = self.supply.var(fn_type(*[ty for _, ty in common], base)
                                if common else base)
        core = mk_app(fresh, [Const(nm, ty) for nm, ty in common])
        b1 = _abstract_locals(core, names1, list(tys1))
        b2 = _abstract_locals(core, names2, list(tys2))
        return {h1.name: nf(b1), h2.name: nf(b2)}

    # -- search -------------------------------------------------------------

    def solve(self, pairs: list[tuple[Term, Term]], sub: dict[str, Term],
              depth: int, residual: list[tuple[Term, Term]]):
        if len(self.solutions) >= self.max_solutions:
            self.exhausted = True
            return
        pairs = list(pairs)
        residual = list(residual)
        while pairs:
            if self.nodes_left <= 0:
                self.exhausted = True
                return
            s, t = pairs.pop(0)
            if sub:
                s2 = replace_free(s, sub)
                if s2 is not s:
                    s = eta_long_form(beta_normalize(s2))
                t2 = replace_free(t, sub)
                if t2 is not t:
                    t = eta_long_form(beta_normalize(t2))
            if s == t:
                continue
            s, t = _open_binders(s, t, self.supply)
            if s == t:
                continue
            k1, h1, a1 = _classify(s)
            k2, h2, a2 = _classify(t)
            if k1 is _RIGID and k2 is _RIGID:
                if h1 != h2 or len(a1) != len(a2):
                    return  # clash: this branch definitely fails
                pairs = list(zip(a1, a2)) + pairs
                continue
            if k1 is _RIGID:
                s, t, k1, h1, a1, k2, h2, a2 = t, s, k2, h2, a2, k1, h1, a1
            # now s is flex
            names1 = _pattern_args(a1)
            if k2 is _FLEX:
                names2 = _pattern_args(a2)
                if h1 == h2 and names1 is not None and names2 is not None:
                    bind = self._flex_flex_pattern(h1, names1, h2, names2)
                    sub = _compose_raw(sub, bind)
                    continue
                if h1 != h2 and names1 is not None and names2 is not None:
                    bind = self._flex_flex_pattern(h1, names1, h2, names2)
                    sub = _compose_raw(sub, bind)
                    continue
                if self.patterns_only:
                    raise NotAPattern("flex-flex outside the pattern fragment")
                residual.append(_close_residual(s, t))
                continue
            # flex-rigid
            if names1 is not None:
                try:
                    bind = self._try_pattern_bind(h1, names1, t)
                    sub = _compose_raw(sub, bind)
                    continue
                except UnifFail:
                    return
                except NotAPattern:
                    if self.patterns_only:
                        raise
            elif self.patterns_only:
                raise NotAPattern("flex head applied to non-variable arguments")
            # Huet branch point
            if depth >= self.depth_budget:
                self.exhausted = True
                return
            self.nodes_left -= 1
            branches: list[Term] = []
            imitable = not is_local(h2)
            if imitable and self.restrict_imitation:
                imitable = not (type(h2) is Const and h2.name in LOGICAL_NAMES) \
                    and not _is_ho_predicate(h2)
            if imitable:
                branches.append(imitation_binding(h1, h2, self.supply))
            _, base = unfold_type(h1.ty)
            branches.extend(projection_bindings(h1, base, self.supply))
            for binding in branches:
                new_sub = _compose_raw(dict(sub), {h1.name: binding})
                self.solve([(s, t)] + pairs, new_sub, depth + 1, residual)
                if len(self.solutions) >= self.max_solutions:
                    self.exhausted = True
                    return
            return
        # all pairs solved
        final_residual = []
        for a, b in residual:
            if sub:
                a2 = replace_free(a, sub)
                if a2 is not a:
                    a = eta_long_form(beta_normalize(a2))
                b2 = replace_free(b, sub)
                if b2 is not b:
                    b = eta_long_form(beta_normalize(b2))
            if a != b:
                final_residual.append((a, b))
        self.solutions.append((mgu_from_bindings(sub), final_residual))


def _compose_raw(sub: dict[str, Term], bind: dict[str, Term]) -> dict[str, Term]:
    new = dict(sub)
    for k, v in bind.items():
        single = {k: v}
        for k2, old in new.items():
            repl = replace_free(old, single)
            if repl is not old:
                new[k2] = beta_normalize(repl)
        if k not in new:
            new[k] = v
    return new


def _occurs_rigidly(t: Term, name: str) -> bool:
    """True when the variable occurs along a path of rigid heads only; such
    an occurrence makes a flex-rigid pair definitely non-unifiable."""
    if type(t) is Lam:
        return _occurs_rigidly(t.body, name)
    head, args = strip_app(t)
    if type(head) is FVar:
        return head.name == name  # do not descend under a flex head
    return any(_occurs_rigidly(a, name) for a in args)


def _close_residual(s: Term, t: Term) -> tuple[Term, Term]:
    """Residual sides may contain locals from opened binders; re-abstract them
    jointly so both sides stay closed terms of the same type."""
    names = sorted(locals_of(s) | locals_of(t))
    if not names:
        return s, t
    tys = [_local_ty(s, nm) or _local_ty(t, nm) for nm in names]
    return (_abstract_locals(s, names, tys), _abstract_locals(t, names, tys))


def _local_ty(t: Term, name: str):
    tt = type(t)
    if tt is Const and t.name == name:
        return t.ty
    if tt is App:
        return _local_ty(t.fn, name) or _local_ty(t.arg, name)
    if tt is Lam:
        return _local_ty(t.body, name)
    return None


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

PATTERN_FAIL = "failure"
PATTERN_NOT = "not-a-pattern"


def pattern_unify(problem: UnifProblem, supply: FreshSupply | None = None):
    """Most general unifier in the pattern fragment.

    Returns a Substitution, or PATTERN_FAIL on definite failure, or
    PATTERN_NOT when some constraint leaves the fragment.
    """
    supply = supply or _DEFAULT_SUPPLY
    eng = _Engine(supply, depth_budget=0, branch_budget=10 ** 9,
                  max_solutions=1, patterns_only=True)
    try:
        eng.solve(problem.normalized(), {}, 0, [])
    except NotAPattern:
        return PATTERN_NOT
    if not eng.solutions:
        return PATTERN_FAIL
    sub, residual = eng.solutions[0]
    if residual:
        return PATTERN_NOT
    return sub


def preunify(problem: UnifProblem, supply: FreshSupply | None = None,
             max_solutions: int = 8,
             restrict_imitation: bool = False) -> PreunifyResult:
    """Bounded Huet pre-unification.

    Every returned substitution unifies all constraints up to the returned
    flex-flex residual pairs.  Enumeration order is deterministic: pattern
    and decomposition steps are applied eagerly; at branch points imitation
    comes before projections, lower projection index first.
    """
    supply = supply or _DEFAULT_SUPPLY
    eng = _Engine(supply, problem.depth_budget,
                  problem.branch_budget * max(1, len(problem.constraints)),
                  max_solutions, patterns_only=False,
                  restrict_imitation=restrict_imitation)
    eng.solve(problem.normalized(), {}, 0, [])
    return PreunifyResult(eng.solutions, eng.exhausted)


def unify_one(a: Term, b: Term, supply: FreshSupply | None = None,
              depth_budget: int = 8, branch_budget: int = 64,
              max_solutions: int = 8) -> PreunifyResult:
    return preunify(UnifProblem([(a, b)], depth_budget, branch_budget),
                    supply, max_solutions)


# ---------------------------------------------------------------------------
# Primitive substitution
# ---------------------------------------------------------------------------

DEFAULT_PRIM_SUBST_MENU = ("not", "and", "or", "implies", "forall", "eq")


def prim_subst_bindings(v: FVar, menu=DEFAULT_PRIM_SUBST_MENU,
                        supply: FreshSupply | None = None,
                        quant_ty: Ty = IOTA) -> list[Substitution]:
    """General bindings imitating each enabled connective/quantifier at the
    head of a set-typed variable; finite and deterministically ordered."""
    supply = supply or _DEFAULT_SUPPLY
    arg_tys, base = unfold_type(v.ty)
    if base != OMICRON:
        raise ValueError("primitive substitution needs a predicate-typed variable")
    n = len(arg_tys)
    ys = [BVar(n - 1 - i) for i in range(n)]

    def hvar(extra: list[Ty] | None = None) -> Term:
        tys = list(arg_tys) + (extra or [])
        h = supply.var(fn_type(*tys, OMICRON) if tys else OMICRON)
        return h

    out: list[Substitution] = []
    for item in menu:
        if item == "not":
            h = hvar()
            body = App(NOT_C, mk_app(h, ys))
            out.append(Substitution({v.name: nf(mk_lam(list(arg_tys), body))}))
        elif item in ("and", "or", "implies"):
            conn = {"and": AND_C, "or": OR_C, "implies": IMP_C}[item]
            h1, h2 = hvar(), hvar()
            body = App(App(conn, mk_app(h1, ys)), mk_app(h2, ys))
            out.append(Substitution({v.name: nf(mk_lam(list(arg_tys), body))}))
        elif item in ("forall", "exists"):
            h = hvar([quant_ty])
            qc = forall_const(quant_ty) if item == "forall" else exists_const(quant_ty)
            body = App(qc, Lam(quant_ty, mk_app(h, [_shifted(y, 1) for y in ys] + [BVar(0)])))
            out.append(Substitution({v.name: nf(mk_lam(list(arg_tys), body))}))
        elif item == "eq":
            for i, tau in enumerate(arg_tys):
                h = supply.var(fn_type(*arg_tys, tau) if arg_tys else tau)
                body = App(App(eq_const(tau), BVar(n - 1 - i)), mk_app(h, ys))
                out.append(Substitution({v.name: nf(mk_lam(list(arg_tys), body))}))
        else:
            raise ValueError(f"unknown primitive-substitution menu item {item!r}")
    return out


def _shifted(t: Term, d: int) -> Term:
    from .terms import shift
    return shift(t, d)
