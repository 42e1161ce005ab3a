"""Clause-level data model shared by the prover and the proof checker.

Holds literals, clauses, derivations, prover configuration, and derivation
statistics.  No search code lives here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .terms import (
    Term, FVar, Const, App, Lam, strip_app, free_vars, rename_free, cached_str,
    NOT_NAME, EQ_NAME, TRUE_NAME, FALSE_NAME, AND_NAME, OR_NAME,
    IMP_NAME, IFF_NAME, FORALL_NAME, EXISTS_NAME,
)
from .unify import Substitution

_CONNECTIVES = frozenset({AND_NAME, OR_NAME, IMP_NAME, IFF_NAME,
                          FORALL_NAME, EXISTS_NAME, NOT_NAME,
                          TRUE_NAME, FALSE_NAME})


@dataclass(frozen=True)
class Literal:
    pos: bool
    atom: Term  # beta-normal eta-long, type $o

    def negate(self) -> "Literal":
        return Literal(not self.pos, self.atom)

    @property
    def head(self) -> Term:
        h, _ = strip_app(self.atom)
        return h

    def head_name(self) -> str | None:
        h = self.head
        return h.name if type(h) in (Const, FVar) else None

    def is_flex(self) -> bool:
        return type(self.head) is FVar

    def is_eq(self) -> bool:
        h = self.head
        return type(h) is Const and h.name == EQ_NAME

    def eq_sides(self) -> tuple[Term, Term]:
        _, args = strip_app(self.atom)
        return args[0], args[1]

    def is_formula(self) -> bool:
        """True when the atom still carries logical structure to clausify."""
        h = self.head
        return type(h) is Const and h.name in _CONNECTIVES

    def weight(self) -> int:
        return self.atom.size

    def key(self):
        return (self.pos, cached_str(self.atom))

    def __repr__(self) -> str:
        sign = "" if self.pos else "~"
        return f"{sign}{self.atom!r}"


class Status(Enum):
    REFUTATION = "Refutation"
    SATURATED = "Saturated"
    RESOURCE_OUT = "ResourceOut"


@dataclass
class Clause:
    id: int
    literals: tuple[Literal, ...]
    flexflex: tuple[tuple[Term, Term], ...] = ()
    rule: str = "input"
    parents: tuple[int, ...] = ()
    psubsts: tuple[Substitution, ...] = ()  # one substitution per parent
    extra: dict = field(default_factory=dict)  # rule-specific replay data
    source: str = ""            # input formula name for leaves
    ps_depth: int = 0           # primitive-substitution applications so far
    goal: bool = False          # descends from the negated conjecture

    def __post_init__(self):
        self.weight = sum(l.weight() for l in self.literals) \
            + sum(a.size + b.size for a, b in self.flexflex)
        self._vars = None

    def is_empty(self) -> bool:
        return not self.literals and not self.flexflex

    def has_formula_literal(self) -> bool:
        return any(l.is_formula() for l in self.literals)

    def variables(self) -> list[FVar]:
        if self._vars is not None:
            return self._vars
        seen: dict[str, FVar] = {}
        for lit in self.literals:
            for v in sorted(free_vars(lit.atom), key=lambda v: v.name):
                seen.setdefault(v.name, v)
        for a, b in self.flexflex:
            for v in sorted(free_vars(a) | free_vars(b), key=lambda v: v.name):
                seen.setdefault(v.name, v)
        self._vars = list(seen.values())
        return self._vars

    def key(self):
        lits = tuple(sorted(l.key() for l in self.literals))
        ff = tuple(sorted((cached_str(a), cached_str(b)) for a, b in self.flexflex))
        return (lits, ff)

    def __repr__(self) -> str:
        if self.is_empty():
            body = "$false"
        else:
            body = " | ".join(repr(l) for l in self.literals)
            if self.flexflex:
                body += " <> " + ", ".join(f"{a!r}=?={b!r}" for a, b in self.flexflex)
        return f"[{self.id}] {body}"


def canonical_clause_parts(literals, flexflex, var_prefix: str = "V"):
    """Rename free variables in first-occurrence order and sort literals,
    giving a syntactic normal form for duplicate detection."""
    order: list[str] = []
    seen: set[str] = set()

    def visit(t: Term):
        for v in _fvars_in_order(t):
            if v not in seen:
                seen.add(v)
                order.append(v)

    for lit in literals:
        visit(lit.atom)
    for a, b in flexflex:
        visit(a)
        visit(b)
    mapping = {name: f"{var_prefix}{i}" for i, name in enumerate(order)}
    lits = tuple(Literal(l.pos, rename_free(l.atom, mapping)) for l in literals)
    ff = tuple((rename_free(a, mapping), rename_free(b, mapping))
               for a, b in flexflex)
    lits = tuple(sorted(lits, key=lambda l: (not l.pos, cached_str(l.atom))))
    ff = tuple(sorted(ff, key=lambda p: (cached_str(p[0]), cached_str(p[1]))))
    return lits, ff, mapping


def _fvars_in_order(t: Term):
    tt = type(t)
    if tt is FVar:
        yield t.name
    elif tt is App:
        yield from _fvars_in_order(t.fn)
        yield from _fvars_in_order(t.arg)
    elif tt is Lam:
        yield from _fvars_in_order(t.body)


@dataclass
class ProverConfig:
    time_limit: float = 60.0          # seconds of wall clock
    clause_limit: int = 1_000_000     # total clauses ever created
    prim_subst_depth: int = 2
    unif_depth: int = 8
    unif_branch: int = 64
    unif_solutions: int = 4
    pick_ratio: int = 4               # age:weight 1:4
    naming_threshold: int = 24
    definition_unfold: str = "eager"  # {eager, lazy}
    max_clause_literals: int = 6
    max_clause_weight: int = 220
    max_residual_pairs: int = 1
    flex_flex_resolution: bool = False
    restrict_imitation: bool = True   # skip imitation of logical/HO-predicate heads
    selection: str = "smallest"       # {smallest, first, none}: negative-literal selection
    drop_all_flex: bool = True        # discard 3+-literal clauses with only flex heads
    prim_subst_menu: tuple = ("not", "and", "or", "implies", "forall", "eq")
    goal_weight_num: int = 2          # weight scaling for goal descendants
    goal_weight_den: int = 3
    check: bool = False

    def validate(self) -> None:
        if self.time_limit <= 0 or self.clause_limit <= 0:
            raise ValueError("limits must be positive")
        if self.definition_unfold not in ("eager", "lazy"):
            raise ValueError("definition_unfold must be eager or lazy")


@dataclass
class Step:
    clause: Clause

    @property
    def rule(self) -> str:
        return self.clause.rule

    @property
    def parents(self) -> tuple[int, ...]:
        return self.clause.parents


@dataclass
class Derivation:
    steps: list[Clause] = field(default_factory=list)
    status: Status = Status.RESOURCE_OUT
    empty_clause_id: int | None = None
    wall_time: float = 0.0
    problem_name: str = ""
    generated: int = 0

    def by_id(self) -> dict[int, Clause]:
        return {c.id: c for c in self.steps}

    def empty_clause(self) -> Clause | None:
        if self.empty_clause_id is None:
            return None
        return self.by_id()[self.empty_clause_id]

    def refutation_ids(self) -> list[int]:
        """Ids of all steps reachable backward from the empty clause,
        topologically ordered (parents before children)."""
        if self.empty_clause_id is None:
            return []
        index = self.by_id()
        seen: set[int] = set()
        order: list[int] = []

        def walk(cid: int):
            if cid in seen:
                return
            seen.add(cid)
            for pid in index[cid].parents:
                walk(pid)
            order.append(cid)

        walk(self.empty_clause_id)
        return order


class StatsError(Exception):
    pass


@dataclass
class ProofStats:
    inferences: int
    depth: int
    wall_time: float
    generated: int = 0
    refutation_size: int = 0


def proof_stats(d: Derivation) -> ProofStats:
    """Inference count and depth of the refutation DAG.

    Inference count = non-leaf steps reachable backward from the empty
    clause; depth = longest parent path to the empty clause.
    """
    if d.status is not Status.REFUTATION:
        raise StatsError(f"no refutation: status is {d.status.value}")
    index = d.by_id()
    ids = d.refutation_ids()
    depth: dict[int, int] = {}
    inferences = 0
    for cid in ids:
        c = index[cid]
        if c.parents:
            inferences += 1
            depth[cid] = 1 + max(depth[p] for p in c.parents)
        else:
            depth[cid] = 0
    return ProofStats(
        inferences=inferences,
        depth=depth[d.empty_clause_id] if ids else 0,
        wall_time=d.wall_time,
        generated=d.generated,
        refutation_size=len(ids),
    )
