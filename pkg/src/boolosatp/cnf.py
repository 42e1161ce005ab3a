"""Clausification: negation, NNF, Skolemization, definitional naming.

The transformation is a single deterministic clause-expansion engine: a
formula enters as a one-literal clause and expandable literals are rewritten
step by step until only proper literals remain.  The saturation loop reuses
the same engine to re-clausify literals that acquire logical structure after
a substitution (dynamic clausification), and the checker replays it.

Equality literals get the extensionality treatment at clause level:
positive functional equations are applied to a fresh variable (argument
congruence), negative ones to a fresh Skolem constant — except that a
negative equation with a flex-headed side is kept unexpanded so that an
existential witness can later discharge it by equality resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    Term, Ty, FVar, Const, App, Lam, IOTA, OMICRON, arrow, fn_type,
    strip_app, mk_app, nf, beta_normalize, free_vars, type_of,
    NOT_NAME, AND_NAME, OR_NAME, IMP_NAME, IFF_NAME, EQ_NAME,
    FORALL_NAME, EXISTS_NAME, TRUE_NAME, FALSE_NAME, eq_const,
    Signature, unfold_type,
)
from .thf import Problem, Role, AnnotatedFormula
from .clauses import Literal, Clause, ProverConfig


class ClausifyError(Exception):
    pass


@dataclass
class NameSupply:
    """Deterministic counters for Skolems, universals and naming predicates."""
    skolem: int = 0
    var: int = 0
    defn: int = 0
    declared: dict[str, Ty] = field(default_factory=dict)

    def fresh_var(self, ty: Ty) -> FVar:
        self.var += 1
        return FVar(f"V{self.var}", ty)

    def fresh_skolem(self, ty: Ty) -> Const:
        self.skolem += 1
        name = f"sk{self.skolem}"
        self.declared[name] = ty
        return Const(name, ty)

    def fresh_defn(self, ty: Ty) -> Const:
        self.defn += 1
        name = f"dp{self.defn}"
        self.declared[name] = ty
        return Const(name, ty)


def mk_literal(pos: bool, atom: Term) -> Literal:
    """Normalize an atom into a literal: beta-normal eta-long with top-level
    negations folded into the polarity and <=> canonicalized to o-equality."""
    atom = nf(atom)
    while True:
        head, args = strip_app(atom)
        if type(head) is Const and head.name == NOT_NAME and len(args) == 1:
            pos = not pos
            atom = args[0]
            continue
        if type(head) is Const and head.name == IFF_NAME and len(args) == 2:
            atom = mk_app(eq_const(OMICRON), args)
            continue
        break
    return Literal(pos, atom)


def _ordered_free_vars(t: Term) -> list[FVar]:
    out: list[FVar] = []
    seen: set[str] = set()

    def walk(u: Term):
        tu = type(u)
        if tu is FVar:
            if u.name not in seen:
                seen.add(u.name)
                out.append(u)
        elif tu is App:
            walk(u.fn)
            walk(u.arg)
        elif tu is Lam:
            walk(u.body)

    walk(t)
    return out


def _eq_parts(lit: Literal):
    head, args = strip_app(lit.atom)
    if type(head) is Const and head.name == EQ_NAME and len(args) == 2:
        return head.ty.left, args[0], args[1]
    return None


def _is_flex_headed(t: Term) -> bool:
    head, _ = strip_app(t)
    return type(head) is FVar


DROP = "drop"  # tautology marker


def expand_literal(lit: Literal, supply: NameSupply, frozen: bool):
    """One expansion step for a single literal.

    Returns None when the literal is already proper, DROP when it makes the
    clause a tautology, or a list of literal-lists replacing it.
    """
    head, args = strip_app(lit.atom)
    hname = head.name if type(head) is Const else None
    if hname == TRUE_NAME:
        return DROP if lit.pos else []
    if hname == FALSE_NAME:
        return [] if lit.pos else DROP
    if hname == AND_NAME and len(args) == 2:
        a, b = args
        if lit.pos:
            return [[mk_literal(True, a)], [mk_literal(True, b)]]
        return [[mk_literal(False, a), mk_literal(False, b)]]
    if hname == OR_NAME and len(args) == 2:
        a, b = args
        if lit.pos:
            return [[mk_literal(True, a), mk_literal(True, b)]]
        return [[mk_literal(False, a)], [mk_literal(False, b)]]
    if hname == IMP_NAME and len(args) == 2:
        a, b = args
        if lit.pos:
            return [[mk_literal(False, a), mk_literal(True, b)]]
        return [[mk_literal(True, a)], [mk_literal(False, b)]]
    if hname in (FORALL_NAME, EXISTS_NAME) and len(args) == 1:
        lam = args[0]
        if type(lam) is not Lam:
            raise ClausifyError("quantifier argument is not an abstraction")
        positive_universal = (hname == FORALL_NAME) == lit.pos
        if positive_universal:
            v = supply.fresh_var(lam.ty)
            return [[mk_literal(lit.pos, App(lam, v))]]
        deps = _ordered_free_vars(lam)
        sk_ty = fn_type(*[v.ty for v in deps], lam.ty) if deps else lam.ty
        sk = mk_app(supply.fresh_skolem(sk_ty), deps)
        return [[mk_literal(lit.pos, App(lam, sk))]]
    eq = _eq_parts(lit)
    if eq is not None:
        ty, a, b = eq
        if ty == OMICRON:
            if lit.pos:
                return [[mk_literal(False, a), mk_literal(True, b)],
                        [mk_literal(True, a), mk_literal(False, b)]]
            if _is_flex_headed(a) or _is_flex_headed(b):
                return None  # delayed: discharged by equality resolution
            return [[mk_literal(True, a), mk_literal(True, b)],
                    [mk_literal(False, a), mk_literal(False, b)]]
        if ty.is_arrow():
            if frozen:
                return None  # lazy mode keeps the definition as an equation
            if lit.pos:
                v = supply.fresh_var(ty.left)
                return [[mk_literal(True, App(App(eq_const(ty.right),
                                                  App(a, v)), App(b, v)))]]
            if _is_flex_headed(a) or _is_flex_headed(b):
                return None
            deps = _ordered_free_vars(lit.atom)
            sk_ty = fn_type(*[v.ty for v in deps], ty.left) if deps else ty.left
            sk = mk_app(supply.fresh_skolem(sk_ty), deps)
            return [[mk_literal(False, App(App(eq_const(ty.right),
                                               App(a, sk)), App(b, sk)))]]
    return None


def estimate_cnf_size(pos: bool, t: Term) -> int:
    """Number of clauses plain distribution would produce for this literal."""
    head, args = strip_app(t)
    hname = head.name if type(head) is Const else None
    if hname == NOT_NAME and len(args) == 1:
        return estimate_cnf_size(not pos, args[0])
    if hname in (AND_NAME, OR_NAME) and len(args) == 2:
        a, b = (estimate_cnf_size(pos, args[0]), estimate_cnf_size(pos, args[1]))
        conj = (hname == AND_NAME) == pos
        return a + b if conj else a * b
    if hname == IMP_NAME and len(args) == 2:
        a, b = (estimate_cnf_size(not pos, args[0]), estimate_cnf_size(pos, args[1]))
        return a + b if not pos else a * b
    if hname in (IFF_NAME,) and len(args) == 2:
        inner = (estimate_cnf_size(pos, args[0]) + estimate_cnf_size(pos, args[1])
                 + estimate_cnf_size(not pos, args[0])
                 + estimate_cnf_size(not pos, args[1]))
        return inner
    if hname in (FORALL_NAME, EXISTS_NAME) and len(args) == 1 \
            and type(args[0]) is Lam:
        return estimate_cnf_size(pos, args[0].body)
    if hname == EQ_NAME and len(args) == 2 and head.ty.left == OMICRON:
        return (estimate_cnf_size(pos, args[0]) + estimate_cnf_size(pos, args[1])
                + estimate_cnf_size(not pos, args[0])
                + estimate_cnf_size(not pos, args[1]))
    return 1


def finalize_literals(lits) -> list[Literal] | None:
    """Dedupe literals, drop trivially false ones, detect tautologies.
    Returns None for tautological clauses."""
    out: list[Literal] = []
    seen = set()
    for lit in lits:
        eq = _eq_parts(lit)
        if eq is not None and eq[1] == eq[2]:
            if lit.pos:
                return None  # t = t: clause is valid
            continue         # ~(t = t) is false: drop the literal
        k = (lit.pos, lit.atom)
        if k in seen:
            continue
        if (not lit.pos, lit.atom) in seen:
            return None      # complementary pair
        seen.add(k)
        out.append(lit)
    return out


def expand_clause(literals, supply: NameSupply, threshold: int = 0,
                  frozen: bool = False):
    """Exhaustively clausify a literal list.  Returns a list of proper-literal
    lists (possibly empty for tautologies-only input).

    threshold > 0 enables definitional naming: an expandable literal whose
    plain CNF estimate exceeds the threshold is replaced by a fresh predicate
    applied to its free variables, defined in the needed polarity.
    """
    work = [list(literals)]
    done: list[list[Literal]] = []
    while work:
        lits = work.pop(0)
        expanded = False
        for i, lit in enumerate(lits):
            if threshold and lit.is_formula() and len(lits) > 1 \
                    and estimate_cnf_size(lit.pos, lit.atom) > threshold:
                deps = _ordered_free_vars(lit.atom)
                dp_ty = fn_type(*[v.ty for v in deps], OMICRON) \
                    if deps else OMICRON
                dp = mk_app(supply.fresh_defn(dp_ty), deps)
                rest = lits[:i] + lits[i + 1:]
                work.append(rest + [mk_literal(lit.pos, dp)])
                # definition in the polarity the occurrence needs, with the
                # named formula expanded one step so naming cannot recurse
                defn_lit = mk_literal(not lit.pos, dp)
                repl = expand_literal(lit, supply, frozen)
                if repl is None:
                    work.append([defn_lit, lit])
                elif repl is not DROP:
                    for group in repl:
                        work.append([defn_lit] + group)
                expanded = True
                break
            repl = expand_literal(lit, supply, frozen)
            if repl is DROP:
                expanded = True
                lits = None
                break
            if repl is not None:
                rest = lits[:i] + lits[i + 1:]
                for group in repl:
                    work.append(rest + group)
                expanded = True
                break
        if lits is None:
            continue
        if not expanded:
            fin = finalize_literals(lits)
            if fin is not None:
                done.append(fin)
    return done


def clausify(problem: Problem, cfg: ProverConfig | None = None,
             supply: NameSupply | None = None) -> tuple[list[Clause], NameSupply]:
    """Clausify a problem: negate the conjecture, expand definitions per the
    configured mode, Skolemize, and distribute, with definitional naming
    above the configured threshold.  Deterministic for fixed inputs."""
    cfg = cfg or ProverConfig()
    supply = supply or NameSupply()
    clauses: list[Clause] = []
    cid = 0
    for fm in problem.formulas:
        if fm.role is Role.TYPE_DECL:
            continue
        body = fm.body
        try:
            if type_of(body) != OMICRON:
                raise ClausifyError(f"formula {fm.name} is not boolean")
        except ClausifyError:
            raise
        except Exception as ex:
            raise ClausifyError(f"formula {fm.name}: {ex}")
        if fm.role is Role.CONJECTURE:
            start = [mk_literal(False, body)]
        else:
            start = [mk_literal(True, body)]
        frozen = (fm.role is Role.DEFINITION and cfg.definition_unfold == "lazy")
        goal = fm.role in (Role.CONJECTURE, Role.NEGATED_CONJECTURE)
        for lits in expand_clause(start, supply, cfg.naming_threshold, frozen):
            cid += 1
            clauses.append(Clause(
                id=cid, literals=tuple(lits), rule="input",
                source=fm.name, goal=goal))
    return clauses, supply
