import pytest

from conftest import over_one, points, span_category, two_colour_category
from symop.fincat import FinCategory, FinFunctor, discrete, find_isomorphism, is_equiv_discrete, terminal
from symop.operad import ass, category_as_operad, com, enumerate_poly_morphisms_over_s, free2, operad_polynomial, to_polynomial
from symop.poly import (
    NotSigmaFree,
    PolyMorphism,
    Polynomial,
    apply_polynomial,
    bounded_composite,
    classify_over_S,
    compose_polynomials,
    identity_morphism,
    identity_polynomial,
    monad_from_dict,
    monad_to_dict,
    pi0_polynomial,
    truncated_s,
    validate_poly_morphism,
)
from symop.tmonad import ObjOverI, apply_T, apply_T2


def poly_of(T):
    return operad_polynomial(T).poly


def toy(sizes: dict[str, int]) -> Polynomial:
    """One colour, discrete ``B`` with the given fibre sizes."""
    one = terminal()
    B = discrete(list(sizes))
    es = [f"{b}.{k}" for b, n in sizes.items() for k in range(1, n + 1)]
    E = discrete(es)
    return Polynomial(
        one,
        E,
        B,
        FinFunctor.constant(E, one, "*"),
        FinFunctor(E, B, {e: e.split(".")[0] for e in es}),
        FinFunctor.constant(B, one, "*"),
    )


# morphisms


def test_identity_morphism_is_valid():
    for P in (poly_of(com(2)), poly_of(ass(2)), toy({"u": 2})):
        assert validate_poly_morphism(identity_morphism(P)) == []


def test_morphisms_from_ass_to_com_are_monad_morphisms():
    (MS, _), (MT, _) = to_polynomial(ass(3)), to_polynomial(com(3))
    found = enumerate_poly_morphisms_over_s(operad_polynomial(ass(3)), operad_polynomial(com(3)))
    assert len(found) == 1
    m = PolyMorphism(MS.carrier, MT.carrier, found[0].f0, found[0].f1, found[0].f2)
    assert validate_poly_morphism(m, monads=(MS, MT)) == []


def test_collapsed_top_map_is_not_a_pullback():
    P = toy({"u": 2})
    E = P.E
    f2 = FinFunctor(E, E, {"u.1": "u.1", "u.2": "u.1"})
    m = PolyMorphism(P, P, FinFunctor.identity(P.I), FinFunctor.identity(P.B), f2)
    assert [v.kind for v in validate_poly_morphism(m)] == ["NotPullback"]


def test_permuted_top_map_across_fibres_does_not_commute():
    P = toy({"u": 1, "v": 1})
    f2 = FinFunctor(P.E, P.E, {"u.1": "v.1", "v.1": "u.1"})
    m = PolyMorphism(P, P, FinFunctor.identity(P.I), FinFunctor.identity(P.B), f2)
    assert [v.kind for v in validate_poly_morphism(m)] == ["NotCommuting"]


# classification


@pytest.mark.parametrize(
    "T,expected",
    [
        (com(3), {"operad": True, "sigma_free": False, "club": True}),
        (ass(3), {"operad": True, "sigma_free": True, "club": True}),
        (category_as_operad(two_colour_category()), {"operad": True, "sigma_free": True, "club": False}),
    ],
)
def test_classify(T, expected):
    M, over_s = to_polynomial(T)
    assert classify_over_S(M.carrier, over_s) == expected


# components


def test_pi0_of_discrete_shapes_is_identity():
    P = poly_of(category_as_operad(discrete(["u", "v"])))
    res = pi0_polynomial(P)
    assert res.q_B.is_bijective() and res.q_E.is_bijective()


def test_pi0_of_ass_is_truncated_free_monoid():
    res = pi0_polynomial(poly_of(ass(3)))
    P0 = res.poly
    assert len(P0.B.objects) == 4
    assert sorted(len(P0.fibre(b)) for b in P0.B.objects) == [0, 1, 2, 3]


def test_pi0_of_com_is_refused():
    with pytest.raises(NotSigmaFree):
        pi0_polynomial(poly_of(com(3)))


# composites


SIGMA_FREE = {
    "ass2": lambda: compose_polynomials(poly_of(ass(2)), poly_of(ass(2))),
    "ass3_bounded": lambda: bounded_composite(poly_of(ass(3)), 3),
    "span": lambda: compose_polynomials(poly_of(category_as_operad(span_category())), poly_of(category_as_operad(span_category()))),
    "iso": lambda: compose_polynomials(poly_of(category_as_operad(two_colour_category())), poly_of(category_as_operad(two_colour_category()))),
    "free2_bounded": lambda: bounded_composite(poly_of(free2()), 3),
}


@pytest.mark.parametrize("name", sorted(SIGMA_FREE))
def test_composites_of_sigma_free_stay_essentially_discrete(name):
    C = SIGMA_FREE[name]()
    assert is_equiv_discrete(C.B)


def test_composite_of_com_is_not_essentially_discrete():
    C = compose_polynomials(poly_of(com(2)), poly_of(com(2)))
    assert not is_equiv_discrete(C.B)


def test_composite_with_identity():
    P = poly_of(ass(2))
    for C in (compose_polynomials(P, identity_polynomial(P.I)), compose_polynomials(identity_polynomial(P.I), P)):
        assert find_isomorphism(C.B, P.B) is not None
        assert find_isomorphism(C.E, P.E) is not None


@pytest.mark.parametrize(
    "P",
    [toy({"0": 0, "1": 1, "2": 2}), poly_of(category_as_operad(span_category())), poly_of(com(1))],
    ids=["words<=2", "span", "com1"],
)
def test_composition_is_associative_up_to_iso(P):
    left = compose_polynomials(compose_polynomials(P, P), P)
    right = compose_polynomials(P, compose_polynomials(P, P))
    assert find_isomorphism(left.B, right.B) is not None
    assert find_isomorphism(left.E, right.E) is not None


def base_for(T) -> ObjOverI:
    if T.colours == ("*",):
        return over_one(points(2) if T.name.startswith("Ass") else points(1))
    if T.name == "free2":
        X = discrete(["p", "q"])
        return ObjOverI.over(X, {"p": "a", "q": "b"}, T.colours)
    X = FinCategory(["p", "q", "r"], {"h": ("q", "r")}, {})
    return ObjOverI.over(X, {"p": "a", "q": "c", "r": "c"}, T.colours)


@pytest.mark.parametrize(
    "T", [com(2), ass(2), category_as_operad(span_category()), free2()], ids=["com2", "ass2", "span", "free2"]
)
def test_composite_polynomial_computes_T_twice(T):
    base = base_for(T)
    via_poly = apply_polynomial(bounded_composite(poly_of(T), T.bound), base.anchor).X
    via_T = apply_T2(apply_T(T, base)).cat
    assert len(via_poly.objects) == len(via_T.objects)
    assert find_isomorphism(via_poly, via_T) is not None


def test_truncated_symmetric_polynomial():
    S = truncated_s(3)
    assert [len(S.poly.fibre(b)) for b in S.P.objects] == [0, 1, 2, 3]
    assert len(S.P.arrows) == 1 + 1 + 2 + 6
    assert validate_poly_morphism(S.monad.unit) == []
    assert validate_poly_morphism(S.monad.mult) == []


def test_polynomial_json_roundtrip():
    M, over_s = to_polynomial(ass(2))
    raw = monad_to_dict(M, over_s)
    M2, over_s2 = monad_from_dict(raw)
    assert monad_to_dict(M2, over_s2) == raw
    P = Polynomial.from_dict(M.carrier.to_dict())
    assert P.B.signature() == M.carrier.B.signature()
