"""Built-in problem library.

Canonical THF copies of the BCP encodings: the plain axiom set, the
two-shorthand variant (ind/p as equational definitions), the comprehension
variant, the single-definition variant, and the surjective Cantor theorem
used to exercise primitive substitution.
"""

from __future__ import annotations

from .thf import Problem, parse_thf

_BCP_CORE = """\
thf(e_decl, type, e: $i).
thf(s_decl, type, s: $i > $i).
thf(f_decl, type, f: $i > $i > $i).
thf(d_decl, type, d: $i > $o).
thf(a1, axiom, ![N: $i]: ((f @ N @ e) = (s @ e))).
thf(a2, axiom, ![Y: $i]: ((f @ e @ (s @ Y)) = (s @ (s @ (f @ e @ Y))))).
thf(a3, axiom, ![X: $i, Y: $i]: ((f @ (s @ X) @ (s @ Y)) = (f @ X @ (f @ (s @ X) @ Y)))).
thf(a4, axiom, (d @ e)).
thf(a5, axiom, ![X: $i]: ((d @ X) => (d @ (s @ X)))).
"""

_BCP_CONJECTURE = """\
thf(c, conjecture, (d @ (f @ (s @ (s @ (s @ (s @ e)))) @ (s @ (s @ (s @ (s @ e))))))).
"""

BOOLOS_PLAIN = _BCP_CORE + _BCP_CONJECTURE

BOOLOS1 = _BCP_CORE + """\
thf(ind_decl, type, ind: ($i > $o) > $o).
thf(p_decl, type, p: $i > $i > $o).
thf(def_ind, definition, (ind = (^ [X: $i > $o]: ((X @ e) & (! [Y: $i]: ((X @ Y) => (X @ (s @ Y)))))))).
thf(def_p, definition, (p = (^ [X: $i, Y: $i]: ((^ [Z: $i]: (! [Q: $i > $o]: ((ind @ Q) => (Q @ Z)))) @ (f @ X @ Y))))).
""" + _BCP_CONJECTURE

_IND_BODY = "(^ [Q: $i > $o]: ((Q @ e) & (! [W: $i]: ((Q @ W) => (Q @ (s @ W))))))"

_PP_BODY = ("(^ [X: $i, Y: $i]: ((^ [Z: $i]: (! [R: $i > $o]: "
            f"(({_IND_BODY} @ R) => (R @ Z)))) @ (f @ X @ Y)))")

BOOLOS1_ALT = _BCP_CORE + f"""\
thf(com_ind_p, axiom, ?[I: ($i > $o) > $o, P: $i > $i > $o]: ((! [X: $i > $o]: ((I @ X) <=> ((X @ e) & (! [Y: $i]: ((X @ Y) => (X @ (s @ Y))))))) & (! [X: $i, Y: $i]: ((P @ X @ Y) <=> (! [Q: $i > $o]: ((I @ Q) => (Q @ (f @ X @ Y)))))))).
""" + _BCP_CONJECTURE

BOOLOS_COMP = _BCP_CORE + f"""\
thf(lem_l, axiom, ?[P: $i > $i > $o]: (P = {_PP_BODY})).
""" + _BCP_CONJECTURE

BOOLOS_P_PRIME = _BCP_CORE + f"""\
thf(pp_decl, type, pp: $i > $i > $o).
thf(def_pp, definition, (pp = {_PP_BODY})).
""" + _BCP_CONJECTURE

CANTOR = """\
thf(surjective_cantor, conjecture, ~ (? [G: $i > $i > $o]: (! [Y: $i > $o]: (? [X: $i]: ((G @ X) = Y))))).
"""

_TEXTS = {
    "boolos_plain": BOOLOS_PLAIN,
    "boolos1": BOOLOS1,
    "boolos1_alt": BOOLOS1_ALT,
    "boolos_comp": BOOLOS_COMP,
    "boolos_p_prime": BOOLOS_P_PRIME,
    "cantor": CANTOR,
}

BUILTIN_IDS = tuple(_TEXTS)


class UnknownProblemError(KeyError):
    pass


def builtin_text(problem_id: str) -> str:
    try:
        return _TEXTS[problem_id]
    except KeyError:
        raise UnknownProblemError(
            f"unknown builtin problem {problem_id!r}; known: {', '.join(BUILTIN_IDS)}")


def builtin(problem_id: str) -> Problem:
    """Fresh parse of a built-in problem (problems are mutable containers)."""
    return parse_thf(builtin_text(problem_id))
