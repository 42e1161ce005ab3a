"""Given-clause saturation with resolution, factoring, equality handling,
and primitive substitution.

The passive set is served by two priority queues (age and weight, picked at
the configured ratio); ties always break toward the lower clause id, so a
run is a pure function of problem + configuration.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

from .terms import (
    Term, Ty, FVar, Const, App, Lam, OMICRON, IOTA, arrow, fn_type,
    strip_app, mk_app, nf, beta_normalize, eta_long_form, replace_free,
    free_vars, rename_free, eq_const, unfold_type, EQ_NAME, LOGICAL_NAMES,
    clear_caches,
)
from .thf import Problem, Role
from .clauses import (
    Literal, Clause, Derivation, Status, ProverConfig,
    canonical_clause_parts,
)
from .cnf import (
    clausify, NameSupply, mk_literal, finalize_literals, expand_clause,
)
from .unify import (
    Substitution, UnifProblem, preunify, pattern_unify, prim_subst_bindings,
    FreshSupply, PATTERN_FAIL, PATTERN_NOT, mgu_from_bindings,
)


# ---------------------------------------------------------------------------
# Term ordering (weight-KBO with variable-count condition)
# ---------------------------------------------------------------------------

def _var_counts(t: Term, acc: dict):
    tt = type(t)
    if tt is FVar:
        acc[t.name] = acc.get(t.name, 0) + 1
    elif tt is App:
        _var_counts(t.fn, acc)
        _var_counts(t.arg, acc)
    elif tt is Lam:
        _var_counts(t.body, acc)


def kbo_greater(l: Term, r: Term) -> bool:
    """l > r in the weight ordering: strictly heavier and no variable occurs
    more often in r than in l."""
    if l.size <= r.size:
        return False
    lv: dict = {}
    rv: dict = {}
    _var_counts(l, lv)
    _var_counts(r, rv)
    return all(lv.get(name, 0) >= k for name, k in rv.items())


def orient(l: Term, r: Term) -> str | None:
    if kbo_greater(l, r):
        return "lr"
    if kbo_greater(r, l):
        return "rl"
    return None


# ---------------------------------------------------------------------------
# Rewriting (demodulation) -- pure helpers shared with the checker
# ---------------------------------------------------------------------------

def match_term(pattern: Term, target: Term, sub: dict[str, Term]) -> bool:
    """One-sided first-order-style matching: pattern variables bind to closed
    subterms of target.  Enough for demodulation with equation literals."""
    tp = type(pattern)
    if tp is FVar:
        bound = sub.get(pattern.name)
        if bound is not None:
            return bound == target
        if target.loose:
            return False
        try:
            ok = pattern.ty == _target_ty(target)
        except Exception:
            return False
        if not ok:
            return False
        sub[pattern.name] = target
        return True
    if pattern == target:
        return True
    tt = type(target)
    if tp is App and tt is App:
        return match_term(pattern.fn, target.fn, sub) and \
            match_term(pattern.arg, target.arg, sub)
    if tp is Lam and tt is Lam:
        return pattern.ty == target.ty and match_term(pattern.body, target.body, sub)
    return False


_TY_CACHE: dict[Term, Ty] = {}


def _target_ty(t: Term) -> Ty:
    from .terms import type_of
    ty = _TY_CACHE.get(t)
    if ty is None:
        ty = type_of(t)
        _TY_CACHE[t] = ty
    return ty


def rewrite_once(t: Term, l: Term, r: Term) -> Term | None:
    """Rewrite the leftmost-innermost closed subterm matching l; None when no
    position matches."""
    tt = type(t)
    if tt is App:
        nf_ = rewrite_once(t.fn, l, r)
        if nf_ is not None:
            return App(nf_, t.arg)
        na = rewrite_once(t.arg, l, r)
        if na is not None:
            return App(t.fn, na)
    elif tt is Lam:
        nb = rewrite_once(t.body, l, r)
        if nb is not None:
            return Lam(t.ty, nb)
    if t.loose == 0 and type(t) is not FVar:
        sub: dict[str, Term] = {}
        if match_term(l, t, sub):
            return beta_normalize(replace_free(r, sub))
    return None


class RuleIndex:
    """Demodulation rules indexed by the head symbol of their left side."""

    def __init__(self):
        self.by_head: dict = {}
        self.count = 0

    def add(self, eq_id: int, l: Term, r: Term):
        head, _ = strip_app(l)
        key = (head.name, head.ty) if type(head) is Const else None
        self.by_head.setdefault(key, []).append((eq_id, l, r))
        self.count += 1

    def candidates(self, t: Term):
        head, _ = strip_app(t)
        key = (head.name, head.ty) if type(head) is Const else None
        out = self.by_head.get(key, ())
        flex = self.by_head.get(None, ())
        if flex:
            return list(out) + list(flex)
        return out


def _normalize_with(t: Term, rules: RuleIndex, used: list, depth: int = 0):
    """Innermost rewriting to normal form with the indexed rules."""
    tt = type(t)
    if tt is App:
        fn = _normalize_with(t.fn, rules, used)
        arg = _normalize_with(t.arg, rules, used)
        t2 = t if (fn is t.fn and arg is t.arg) else App(fn, arg)
    elif tt is Lam:
        body = _normalize_with(t.body, rules, used)
        t2 = t if body is t.body else Lam(t.ty, body)
    else:
        t2 = t
    if t2.loose == 0 and type(t2) is not FVar:
        for eq_id, l, r in rules.candidates(t2):
            sub: dict[str, Term] = {}
            if match_term(l, t2, sub):
                if eq_id not in used:
                    used.append(eq_id)
                res = beta_normalize(replace_free(r, sub))
                if depth > 100:
                    return res
                return _normalize_with(res, rules, used, depth + 1)
    return t2


def demodulate_literals(literals, rules: RuleIndex):
    """Normalize literals with the indexed oriented equations (innermost,
    to a fixpoint).  Returns (new_literals, used_equation_ids)."""
    used: list[int] = []
    out = []
    for lit in literals:
        atom = _normalize_with(lit.atom, rules, used)
        if atom is not lit.atom:
            atom = eta_long_form(beta_normalize(atom))
            out.append(Literal(lit.pos, atom))
        else:
            out.append(lit)
    return out, used


def subterm_positions(t: Term, under: int = 0):
    """(path, subterm) pairs for closed, rigid-headed, non-logical subterms;
    path elements: 0 = fn, 1 = arg, 2 = lambda body."""
    head, _ = strip_app(t)
    if t.loose == 0 and type(t) is not FVar and type(head) is not FVar \
            and not (type(head) is Const and head.name in LOGICAL_NAMES):
        yield (), t
    tt = type(t)
    if tt is App:
        for path, sub in subterm_positions(t.fn, under):
            yield (0,) + path, sub
        for path, sub in subterm_positions(t.arg, under):
            yield (1,) + path, sub
    elif tt is Lam:
        for path, sub in subterm_positions(t.body, under + 1):
            yield (2,) + path, sub


def subterm_at(t: Term, path) -> Term:
    for step in path:
        if step == 0:
            t = t.fn
        elif step == 1:
            t = t.arg
        else:
            t = t.body
    return t


def replace_at(t: Term, path, new: Term) -> Term:
    if not path:
        return new
    step, rest = path[0], path[1:]
    if step == 0:
        return App(replace_at(t.fn, rest, new), t.arg)
    if step == 1:
        return App(t.fn, replace_at(t.arg, rest, new))
    return Lam(t.ty, replace_at(t.body, rest, new))


# ---------------------------------------------------------------------------
# Saturation state
# ---------------------------------------------------------------------------

@dataclass
class _Passive:
    age_heap: list = field(default_factory=list)
    weight_heap: list = field(default_factory=list)
    members: set = field(default_factory=set)

    def push(self, clause_id: int, weight: int):
        if clause_id in self.members:
            return
        self.members.add(clause_id)
        heapq.heappush(self.age_heap, clause_id)
        heapq.heappush(self.weight_heap, (weight, clause_id))

    def pop(self, by_age: bool):
        heap = self.age_heap if by_age else self.weight_heap
        while heap:
            item = heapq.heappop(heap)
            cid = item if by_age else item[1]
            if cid in self.members:
                self.members.discard(cid)
                return cid
        other = self.weight_heap if by_age else self.age_heap
        while other:
            item = heapq.heappop(other)
            cid = item[1] if by_age else item
            if cid in self.members:
                self.members.discard(cid)
                return cid
        return None

    def discard(self, clause_id: int):
        self.members.discard(clause_id)

    def __len__(self):
        return len(self.members)


class ProofState:
    def __init__(self, problem: Problem, cfg: ProverConfig, name: str = ""):
        cfg.validate()
        self.problem = problem
        self.cfg = cfg
        self.name = name
        self.clauses: dict[int, Clause] = {}
        self.next_id = 1
        self.active: list[int] = []
        self.passive = _Passive()
        self.seen: dict = {}
        self.deleted: set[int] = set()
        self.demod_eqs = RuleIndex()
        self.unit_eqs: list[int] = []
        self.generated = 0
        self.kept = 0
        self.empty_id: int | None = None
        self.supply = NameSupply()
        self.fresh = FreshSupply(prefix="H")
        self.rename_counter = 0
        self.pick_count = 0

    # -- clause intake -------------------------------------------------------

    def fresh_rename(self, clause: Clause) -> tuple[tuple[Literal, ...], tuple, Substitution]:
        """Rename a clause's variables apart with reserved R-names."""
        mapping = {}
        for v in clause.variables():
            self.rename_counter += 1
            mapping[v.name] = f"R{self.rename_counter}"
        lits = tuple(Literal(l.pos, rename_free(l.atom, mapping))
                     for l in clause.literals)
        ff = tuple((rename_free(a, mapping), rename_free(b, mapping))
                   for a, b in clause.flexflex)
        back = Substitution({old: FVar(new, _var_ty(clause, old))
                             for old, new in mapping.items()})
        return lits, ff, back

    def record(self, literals, flexflex, rule, parents, psubsts, extra=None,
               source="", ps_depth=0, goal=False) -> Clause:
        lits, ff, _ = canonical_clause_parts(literals, flexflex)
        c = Clause(id=self.next_id, literals=lits, flexflex=ff, rule=rule,
                   parents=tuple(parents), psubsts=tuple(psubsts),
                   extra=extra or {}, source=source, ps_depth=ps_depth,
                   goal=goal)
        self.next_id += 1
        self.clauses[c.id] = c
        return c

    def integrate(self, literals, flexflex, rule, parents, psubsts,
                  extra=None, source="", ps_depth=0, goal=False) -> Clause | None:
        """Normalize, expand, simplify, dedupe and enqueue a candidate clause.
        Returns the clause that reached the passive set (or the empty clause),
        None when the candidate was discarded."""
        self.generated += 1
        # fold fresh negations/biconditionals introduced by substitution
        canon = [mk_literal(l.pos, l.atom) for l in literals]
        fin = finalize_literals(canon)
        if fin is None:
            return None
        flexflex = self.simplify_residuals(fin, flexflex)
        if flexflex is None:
            return None
        if len(flexflex) > self.cfg.max_residual_pairs:
            return None
        # dynamic clausification when literals carry logical structure
        if any(_needs_expand(l) for l in fin):
            raw = self.record(fin, flexflex, rule, parents, psubsts, extra,
                              source, ps_depth, goal)
            result = None
            for group in expand_clause(list(raw.literals), self.supply,
                                       self.cfg.naming_threshold):
                child = self.integrate(group, raw.flexflex, "cnf", (raw.id,),
                                       (Substitution(),), None, source,
                                       ps_depth, goal)
                result = result or child
                if self.empty_id is not None:
                    return child
            return result
        # demodulation
        if self.demod_eqs.count and fin:
            new_lits, used = demodulate_literals(fin, self.demod_eqs)
            if used:
                raw = self.record(fin, flexflex, rule, parents, psubsts, extra,
                                  source, ps_depth, goal)
                return self.integrate(new_lits, flexflex, "demod",
                                      (raw.id,) + tuple(used),
                                      (Substitution(),) * (1 + len(used)),
                                      None, source, ps_depth, goal)
        fin2 = finalize_literals(fin)
        if fin2 is None:
            return None
        fin = fin2
        # empty clause?
        if not fin:
            if flexflex:
                sigma = discharge_flexflex(flexflex, self.fresh)
                if sigma is None:
                    return None
                raw = self.record((), flexflex, rule, parents, psubsts, extra,
                                  source, ps_depth, goal)
                c = self.record((), (), "flex_flex_discharge", (raw.id,),
                                (sigma,), None, source, ps_depth, goal)
            else:
                c = self.record((), (), rule, parents, psubsts, extra,
                                source, ps_depth, goal)
            self.empty_id = c.id
            return c
        # size limits
        nlits = len(fin)
        weight = sum(l.weight() for l in fin) + \
            sum(a.size + b.size for a, b in flexflex)
        if nlits > self.cfg.max_clause_literals or weight > self.cfg.max_clause_weight:
            return None
        if self.cfg.drop_all_flex and nlits >= 3 \
                and all(l.is_flex() for l in fin):
            return None
        c = self.record(fin, flexflex, rule, parents, psubsts, extra,
                        source, ps_depth, goal)
        key = c.key()
        if key in self.seen:
            del self.clauses[c.id]
            self.next_id = c.id
            return None
        # forward subsumption
        if not c.flexflex and self.is_subsumed(c):
            del self.clauses[c.id]
            self.next_id = c.id
            return None
        self.seen[key] = c.id
        self.kept += 1
        self.passive.push(c.id, self.adjusted_weight(c))
        self.index_equation(c)
        return c

    def simplify_residuals(self, literals, flexflex):
        """Normalize residual pairs; drop solved and variable-local ones,
        detect dead clauses (unsatisfiable residual).  Returns None when the
        clause is vacuous."""
        pairs = []
        for a, b in flexflex:
            a = eta_long_form(beta_normalize(a))
            b = eta_long_form(beta_normalize(b))
            if a != b:
                pairs.append((a, b))
        if not pairs:
            return ()
        lits_vars = set()
        for l in literals:
            lits_vars |= {v.name for v in free_vars(l.atom)}
        out = []
        for i, (a, b) in enumerate(pairs):
            own = {v.name for v in free_vars(a) | free_vars(b)}
            others = set(lits_vars)
            for j, (c, d) in enumerate(pairs):
                if j != i:
                    others |= {v.name for v in free_vars(c) | free_vars(d)}
            result = preunify(UnifProblem([(a, b)], 4, 16), self.fresh, 1)
            if not result.solutions and not result.exhausted:
                return None  # constraint definitely unsolvable: vacuous clause
            if result.solutions and not own & others:
                continue     # satisfiable and local to this pair: redundant
            out.append((a, b))
        return tuple(out)

    def adjusted_weight(self, c: Clause) -> int:
        w = c.weight * 4
        if c.goal:
            w = w * self.cfg.goal_weight_num // self.cfg.goal_weight_den
        if c.flexflex:
            w += 40
        if c.ps_depth:
            w *= 1 + c.ps_depth
        return w

    def index_equation(self, c: Clause):
        if len(c.literals) == 1 and not c.flexflex and c.literals[0].pos \
                and c.literals[0].is_eq():
            a, b = c.literals[0].eq_sides()
            d = orient(a, b)
            self.unit_eqs.append(c.id)
            if d == "lr":
                self.demod_eqs.add(c.id, a, b)
            elif d == "rl":
                self.demod_eqs.add(c.id, b, a)

    # -- subsumption ---------------------------------------------------------

    def is_subsumed(self, c: Clause) -> bool:
        c_keys = _clause_head_keys(c)
        for cid in self.active:
            if cid in self.deleted:
                continue
            d = self.clauses[cid]
            if d.flexflex or len(d.literals) > len(c.literals):
                continue
            if not _clause_head_keys(d) <= c_keys:
                continue
            if subsumes(d, c):
                return True
        return False

    def backward_subsume(self, c: Clause):
        if c.flexflex or len(c.literals) > 2:
            return
        for cid in list(self.active):
            if cid == c.id or cid in self.deleted:
                continue
            d = self.clauses[cid]
            if len(d.literals) >= len(c.literals) and not d.flexflex \
                    and subsumes(c, d):
                self.deleted.add(cid)
        # passive clauses are filtered lazily at pick time


def _needs_expand(lit: Literal) -> bool:
    if lit.is_formula():
        return True
    if lit.is_eq() and lit.head.ty.left == OMICRON:
        if lit.pos:
            return True
        a, b = lit.eq_sides()
        flex = type(strip_app(a)[0]) is FVar or type(strip_app(b)[0]) is FVar
        return not flex
    return False


def _var_ty(clause: Clause, name: str) -> Ty:
    for v in clause.variables():
        if v.name == name:
            return v.ty
    raise KeyError(name)


def discharge_flexflex(flexflex, fresh: FreshSupply) -> Substitution | None:
    """Huet's trivial uniform solution: bind every flex head to the constant
    function returning a fresh variable of its result type."""
    bindings: dict[str, Term] = {}
    witnesses: dict[Ty, FVar] = {}
    for a, b in flexflex:
        for side in (a, b):
            _, inner = _strip_lams(side)
            head, _ = strip_app(inner)
            if type(head) is not FVar:
                return None
            arg_tys, base = unfold_type(head.ty)
            w = witnesses.get(base)
            if w is None:
                w = fresh.var(base)
                witnesses[base] = w
            if head.name not in bindings:
                body = w
                for ty in reversed(arg_tys):
                    body = Lam(ty, body)
                bindings[head.name] = body
    sigma = mgu_from_bindings(bindings)
    for a, b in flexflex:
        if sigma.apply_nf(a) != sigma.apply_nf(b):
            return None
    return sigma


def _strip_lams(t: Term):
    tys = []
    while type(t) is Lam:
        tys.append(t.ty)
        t = t.body
    return tys, t


# ---------------------------------------------------------------------------
# Subsumption
# ---------------------------------------------------------------------------

def _clause_head_keys(c: Clause) -> frozenset:
    """Rigid (polarity, head) keys of a clause; a subsumer's rigid literals
    can only match target literals with the same key, so a subset test is a
    sound prefilter.  Flex literals contribute nothing."""
    cached = getattr(c, "_hkeys", None)
    if cached is not None:
        return cached
    keys = set()
    for lit in c.literals:
        h = lit.head
        if type(h) is Const:
            keys.add((lit.pos, h.name, h.ty))
    c._hkeys = frozenset(keys)
    return c._hkeys


def subsumes(c: Clause, d: Clause) -> bool:
    """c subsumes d: some substitution maps c's literals injectively into d's."""
    if len(c.literals) > len(d.literals):
        return False
    lits_c = list(c.literals)
    lits_d = list(d.literals)
    keys_c = [_head_key(l) for l in lits_c]
    keys_d = [_head_key(l) for l in lits_d]

    def try_match(i: int, used: set, sub: dict) -> bool:
        if i == len(lits_c):
            return True
        lc = lits_c[i]
        kc = keys_c[i]
        for j, ld in enumerate(lits_d):
            if j in used or lc.pos != ld.pos:
                continue
            if kc is not None and kc != keys_d[j]:
                continue
            sub2 = dict(sub)
            if match_term(lc.atom, ld.atom, sub2):
                if try_match(i + 1, used | {j}, sub2):
                    return True
        return False

    return try_match(0, set(), {})


# ---------------------------------------------------------------------------
# Inference rules
# ---------------------------------------------------------------------------

class _Timeout(Exception):
    pass


def selected_index(c: Clause, mode: str = "smallest") -> int | None:
    """Index of the selected literal among rigid-headed negatives:
    "smallest" picks the cheapest subgoal, "first" the first in canonical
    order, "none" disables selection.  Unrestricted when no such literal."""
    if mode == "none":
        return None
    best = None
    best_size = None
    for i, lit in enumerate(c.literals):
        if not lit.pos and not lit.is_flex():
            if mode == "first":
                return i
            if best is None or lit.atom.size < best_size:
                best = i
                best_size = lit.atom.size
    return best


def _head_key(lit: Literal):
    h = lit.head
    if type(h) is Const:
        return (h.name, h.ty)
    return None  # flex


class Saturation:
    def __init__(self, problem: Problem, cfg: ProverConfig, name: str = ""):
        self.st = ProofState(problem, cfg, name)
        self.cfg = cfg

    # -- rule: binary resolution ---------------------------------------------

    def resolve(self, g: Clause, a: Clause):
        st = self.st
        cfg = self.cfg
        sel_g = selected_index(g, cfg.selection)
        sel_a = selected_index(a, cfg.selection)
        renamed = None
        for i, li in enumerate(g.literals):
            if sel_g is not None and i != sel_g:
                continue
            for j, lj_orig in enumerate(a.literals):
                if sel_a is not None and j != sel_a:
                    continue
                if li.pos == lj_orig.pos:
                    continue
                ki, kj = _head_key(li), _head_key(lj_orig)
                if ki is not None and kj is not None and ki != kj:
                    continue
                if ki is None and kj is None and not cfg.flex_flex_resolution:
                    continue
                if renamed is None:
                    renamed = st.fresh_rename(a)
                lits_a, ff_a, back_a = renamed
                lj = lits_a[j]
                problem = UnifProblem([(li.atom, lj.atom)],
                                      cfg.unif_depth, cfg.unif_branch,
                                      pre_normalized=True)
                result = preunify(problem, st.fresh, cfg.unif_solutions,
                                  restrict_imitation=cfg.restrict_imitation)
                for sigma, residual in result.solutions:
                    new_lits = [Literal(l.pos, sigma.apply_nf(l.atom))
                                for k, l in enumerate(g.literals) if k != i]
                    new_lits += [Literal(l.pos, sigma.apply_nf(l.atom))
                                 for k, l in enumerate(lits_a) if k != j]
                    ff = [(sigma.apply_nf(x), sigma.apply_nf(y))
                          for x, y in (tuple(g.flexflex) + tuple(ff_a))]
                    ff += residual
                    sub_g = sigma
                    sub_a = back_a.compose(sigma)
                    st.integrate(new_lits, tuple(ff), "resolution",
                                 (g.id, a.id), (sub_g, sub_a),
                                 {"lits": (i, j)},
                                 ps_depth=max(g.ps_depth, a.ps_depth),
                                 goal=g.goal or a.goal)
                    if st.empty_id is not None:
                        return

    # -- rule: factoring -------------------------------------------------------

    def factor(self, g: Clause):
        st = self.st
        cfg = self.cfg
        for i in range(len(g.literals)):
            for j in range(i + 1, len(g.literals)):
                li, lj = g.literals[i], g.literals[j]
                if li.pos != lj.pos:
                    continue
                ki, kj = _head_key(li), _head_key(lj)
                if ki is not None and kj is not None and ki != kj:
                    continue
                problem = UnifProblem([(li.atom, lj.atom)],
                                      cfg.unif_depth, cfg.unif_branch,
                                      pre_normalized=True)
                result = preunify(problem, st.fresh, cfg.unif_solutions,
                                  restrict_imitation=cfg.restrict_imitation)
                for sigma, residual in result.solutions:
                    new_lits = [Literal(l.pos, sigma.apply_nf(l.atom))
                                for k, l in enumerate(g.literals) if k != j]
                    ff = [(sigma.apply_nf(x), sigma.apply_nf(y))
                          for x, y in g.flexflex] + residual
                    st.integrate(new_lits, tuple(ff), "factoring", (g.id,),
                                 (sigma,), {"lits": (i, j)},
                                 ps_depth=g.ps_depth, goal=g.goal)
                    if st.empty_id is not None:
                        return

    # -- rule: equality resolution ---------------------------------------------

    def eq_resolve(self, g: Clause):
        st = self.st
        cfg = self.cfg
        sel_g = selected_index(g, cfg.selection)
        for i, li in enumerate(g.literals):
            if li.pos or not li.is_eq():
                continue
            if sel_g is not None and i != sel_g:
                continue
            a, b = li.eq_sides()
            problem = UnifProblem([(a, b)], cfg.unif_depth, cfg.unif_branch,
                                  pre_normalized=True)
            result = preunify(problem, st.fresh, cfg.unif_solutions,
                              restrict_imitation=cfg.restrict_imitation)
            for sigma, residual in result.solutions:
                new_lits = [Literal(l.pos, sigma.apply_nf(l.atom))
                            for k, l in enumerate(g.literals) if k != i]
                ff = [(sigma.apply_nf(x), sigma.apply_nf(y))
                      for x, y in g.flexflex] + residual
                st.integrate(new_lits, tuple(ff), "eq_resolution", (g.id,),
                             (sigma,), {"lit": i},
                             ps_depth=g.ps_depth, goal=g.goal)
                if st.empty_id is not None:
                    return

    # -- rule: paramodulation ---------------------------------------------------

    def _equation_of(self, c: Clause):
        if len(c.literals) == 1 and c.literals[0].pos and c.literals[0].is_eq() \
                and not c.flexflex:
            return c.literals[0].eq_sides()
        return None

    def paramodulate(self, eq_clause: Clause, target: Clause):
        st = self.st
        cfg = self.cfg
        eq = self._equation_of(eq_clause)
        if eq is None:
            return
        lits_t, ff_t, back_t = st.fresh_rename(target)
        l0, r0 = eq
        d = orient(l0, r0)
        directions = []
        if d == "lr":
            directions = [(l0, r0)]
        elif d == "rl":
            directions = [(r0, l0)]
        else:
            directions = [(l0, r0), (r0, l0)]
        for l, r in directions:
            l_head, _ = strip_app(l)
            l_ty = _target_ty(l)
            for k, lit in enumerate(lits_t):
                for path, sub_t in subterm_positions(lit.atom):
                    s_head, _ = strip_app(sub_t)
                    if type(l_head) is Const and type(s_head) is Const \
                            and l_head != s_head:
                        continue
                    if _target_ty(sub_t) != l_ty:
                        continue
                    problem = UnifProblem([(l, sub_t)], cfg.unif_depth,
                                          cfg.unif_branch)
                    result = preunify(problem, st.fresh, 1,
                                      restrict_imitation=True)
                    for sigma, residual in result.solutions:
                        if residual:
                            continue
                        new_atom = replace_at(lit.atom, path, r)
                        new_atom = sigma.apply_nf(new_atom)
                        new_lits = [Literal(x.pos, sigma.apply_nf(x.atom))
                                    if kk != k else Literal(lit.pos, new_atom)
                                    for kk, x in enumerate(lits_t)]
                        ff = [(sigma.apply_nf(x), sigma.apply_nf(y))
                              for x, y in ff_t]
                        st.integrate(new_lits, tuple(ff), "paramod",
                                     (eq_clause.id, target.id),
                                     (sigma, back_t.compose(sigma)),
                                     {"lit": k, "path": tuple(path),
                                      "from": (repr(l), repr(r))},
                                     ps_depth=max(eq_clause.ps_depth,
                                                  target.ps_depth),
                                     goal=eq_clause.goal or target.goal)
                        if st.empty_id is not None:
                            return

    # -- rule: argument congruence ----------------------------------------------

    def arg_cong(self, g: Clause):
        st = self.st
        for i, lit in enumerate(g.literals):
            if not lit.pos or not lit.is_eq():
                continue
            head = lit.head
            if not head.ty.left.is_arrow():
                continue
            a, b = lit.eq_sides()
            v = st.supply.fresh_var(head.ty.left.left)
            new_lit = mk_literal(True, App(App(
                eq_const(head.ty.left.right), App(a, v)), App(b, v)))
            new_lits = [new_lit if k == i else l for k, l in enumerate(g.literals)]
            st.integrate(new_lits, g.flexflex, "arg_cong", (g.id,),
                         (Substitution(),), {"lit": i, "var": v.name},
                         ps_depth=g.ps_depth, goal=g.goal)

    # -- rule: primitive substitution ---------------------------------------------

    def prim_subst(self, g: Clause):
        st = self.st
        cfg = self.cfg
        if g.ps_depth >= cfg.prim_subst_depth or len(g.literals) > 2 \
                or not g.goal:
            return
        done: set[str] = set()
        for lit in g.literals:
            head = lit.head
            if type(head) is not FVar or head.name in done:
                continue
            done.add(head.name)
            _, base = unfold_type(head.ty)
            if base != OMICRON:
                continue
            for sigma in prim_subst_bindings(head, cfg.prim_subst_menu, st.fresh):
                new_lits = [Literal(l.pos, sigma.apply_nf(l.atom))
                            for l in g.literals]
                ff = [(sigma.apply_nf(x), sigma.apply_nf(y))
                      for x, y in g.flexflex]
                st.integrate(new_lits, tuple(ff), "prim_subst", (g.id,),
                             (sigma,), {"var": head.name},
                             ps_depth=g.ps_depth + 1, goal=g.goal)
                if st.empty_id is not None:
                    return

    # -- main loop -----------------------------------------------------------------

    def run(self) -> Derivation:
        st = self.st
        cfg = self.cfg
        clear_caches()
        t0 = time.monotonic()
        self.deadline = t0 + cfg.time_limit
        status = Status.RESOURCE_OUT
        input_clauses, _ = clausify(st.problem, cfg, st.supply)
        for ic in input_clauses:
            # re-route through integrate to get dedup/limits while keeping ids
            st.generated += 1
            lits, ff, _ = canonical_clause_parts(ic.literals, ic.flexflex)
            c = Clause(id=st.next_id, literals=lits, flexflex=ff,
                       rule="input", source=ic.source, goal=ic.goal)
            st.next_id += 1
            st.clauses[c.id] = c
            key = c.key()
            if key in st.seen:
                continue
            st.seen[key] = c.id
            if c.is_empty():
                st.empty_id = c.id
            st.passive.push(c.id, st.adjusted_weight(c))
            st.index_equation(c)
        while st.empty_id is None:
            if time.monotonic() - t0 > cfg.time_limit:
                status = Status.RESOURCE_OUT
                break
            if st.next_id > cfg.clause_limit:
                status = Status.RESOURCE_OUT
                break
            st.pick_count += 1
            by_age = (st.pick_count % (cfg.pick_ratio + 1)) == 1
            gid = st.passive.pop(by_age)
            if gid is None:
                status = Status.SATURATED
                break
            if gid in st.deleted:
                continue
            g = st.clauses[gid]
            if not g.flexflex and st.is_subsumed(g):
                st.deleted.add(gid)
                continue
            st.active.append(gid)
            try:
                self.step(g)
            except _Timeout:
                status = Status.RESOURCE_OUT
                break
            if st.empty_id is not None:
                status = Status.REFUTATION
                break
            st.backward_subsume(g)
        if st.empty_id is not None:
            status = Status.REFUTATION
        deriv = Derivation(
            steps=[st.clauses[k] for k in sorted(st.clauses)],
            status=status,
            empty_clause_id=st.empty_id,
            wall_time=time.monotonic() - t0,
            problem_name=st.name,
            generated=st.generated,
        )
        return deriv

    def step(self, g: Clause):
        st = self.st
        self.factor(g)
        if st.empty_id is not None:
            return
        self.eq_resolve(g)
        if st.empty_id is not None:
            return
        self.arg_cong(g)
        if st.empty_id is not None:
            return
        self.prim_subst(g)
        if st.empty_id is not None:
            return
        for aid in list(st.active):
            if aid in st.deleted:
                continue
            if time.monotonic() > self.deadline:
                raise _Timeout()
            a = st.clauses[aid]
            # resolve() scans every opposite-polarity literal pair, so one
            # call covers both orientations of the clause pair
            self.resolve(g, a)
            if st.empty_id is not None:
                return
            self.paramodulate(g, a)
            if st.empty_id is not None:
                return
            if aid != g.id:
                self.paramodulate(a, g)
                if st.empty_id is not None:
                    return


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def saturate(problem: Problem, cfg: ProverConfig | None = None,
             name: str = "") -> Derivation:
    """Run the given-clause loop on a problem until refutation, saturation,
    or resource exhaustion."""
    cfg = cfg or ProverConfig()
    return Saturation(problem, cfg, name or "problem").run()


class UnknownSelectorError(KeyError):
    pass


def prove_lemma(problem: Problem, axiom_names, goal: Term,
                cfg: ProverConfig | None = None, name: str = "") -> Derivation:
    """Saturate (selected axioms |- goal); selector names must exist in the
    problem."""
    from .thf import AnnotatedFormula
    sub = Problem(problem.signature.copy())
    for fm in problem.formulas:
        if fm.role is Role.TYPE_DECL:
            sub.add(fm)
    for sel in axiom_names:
        try:
            fm = problem.by_name(sel)
        except KeyError:
            raise UnknownSelectorError(f"unknown formula selector {sel!r}")
        sub.add(AnnotatedFormula(fm.name, fm.role, fm.body))
    sub.add(AnnotatedFormula("goal", Role.CONJECTURE, goal))
    return saturate(sub, cfg, name or "lemma")
