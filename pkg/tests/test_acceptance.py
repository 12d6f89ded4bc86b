"""The ten acceptance criteria, one test each, each printing a PASS/FAIL line."""

import time

from conftest import (
    algebra_fixtures,
    arrow_base,
    cyclic_monoid,
    free2_base,
    operad_fixtures,
    orbit_count,
    over_one,
    points,
    record_criterion,
    span_base,
    span_category,
    two_colour_category,
)
from symop.algebra import (
    commutativize,
    commutativize_up,
    data_to_action,
    free_algebra,
    sign_category,
    strict_algebra,
    v_bullet,
    validate_lax_action,
    validate_lax_morphism,
)
from symop.fincat import discrete, find_isomorphism, is_equiv_discrete, terminal
from symop.operad import ass, category_as_operad, com, free2, from_polynomial, operad_polynomial, sigma_free, to_polynomial
from symop.poly import apply_polynomial, bounded_composite, compose_polynomials, pi0_polynomial
from symop.tmonad import ObjOverI, apply_T, apply_T2, check_monad_laws, coidentifier_up, mult, quotient, quotient_oracle, unit


def iso_base() -> ObjOverI:
    return ObjOverI.over(discrete(["p", "q"]), {"p": "u", "q": "v"}, ("u", "v"))


def fixture_bases() -> dict:
    """Operad fixture and a base with at most three objects per fibre."""
    return {
        "com3/3 points": (com(3), over_one(points(3))),
        "com3/arrow": (com(3), arrow_base()),
        "ass3/2 points": (ass(3), over_one(points(2))),
        "ass3/arrow": (ass(3), arrow_base()),
        "span": (category_as_operad(span_category()), span_base()),
        "iso": (category_as_operad(two_colour_category()), iso_base()),
        "free2": (free2(), free2_base(2)),
    }


SIGMA_FREE_CASES = ["ass3/2 points", "ass3/arrow", "span", "iso", "free2"]
DISCRETE_CASES = ["com3/3 points", "ass3/2 points", "span", "iso", "free2"]


def without_name(T) -> dict:
    raw = T.to_dict()
    raw.pop("name", None)
    return raw


def test_criterion_01_roundtrip():
    slow, wrong = [], []
    for name, T in operad_fixtures().items():
        start = time.perf_counter()
        back = from_polynomial(*to_polynomial(T))
        elapsed = time.perf_counter() - start
        if without_name(back) != without_name(T):
            wrong.append(name)
        if elapsed >= 1.0:
            slow.append(f"{name} {elapsed:.2f}s")
    ok = not slow and not wrong
    record_criterion(1, ok, f"{len(operad_fixtures())} operads; mismatched {wrong}; over 1 s {slow}")
    assert ok


def composites_with_budget(T, TX) -> set:
    """``(a, (op_j, labels_j)_j)`` with ``a(op_j)_j`` defined, by direct enumeration."""
    by_colour: dict[str, list[str]] = {}
    for t, (op, _) in TX.obj_data.items():
        by_colour.setdefault(T.target(op), []).append(t)
    found = set()
    for a in T.arrows:

        def fill(prefix: tuple, rest: tuple, room: int):
            if not rest:
                if T.compose(a, tuple(TX.op(t) for t in prefix)) is not None:
                    found.add((a, tuple(TX.obj_data[t] for t in prefix)))
                return
            for t in by_colour.get(rest[0], []):
                k = TX.arity(t)
                if k <= room:
                    fill(prefix + (t,), rest[1:], room - k)

        fill((), T.source(a), T.bound)
    return found


def test_criterion_02_unit_and_multiplication_formulas():
    checked, bad = 0, []
    for name, (T, base) in fixture_bases().items():
        TX = apply_T(T, base)
        eta = unit(TX)
        for x in base.X.objects:
            checked += 1
            if TX.obj_data[eta.obj[x]] != (T.units[base.colour(x)], (x,)):
                bad.append((name, "eta", x))
        TTX = apply_T2(TX)
        mu = mult(TX, TTX)
        present = set()
        for w, (a, ls) in TTX.obj_data.items():
            present.add((a, tuple(TX.obj_data[l] for l in ls)))
            composite = T.compose(a, tuple(TX.op(l) for l in ls))
            expected = (composite, tuple(x for l in ls for x in TX.labels(l)))
            checked += 1
            if TX.obj_data[mu.obj[w]] != expected:
                bad.append((name, "mu", w))
        if present != composites_with_budget(T, TX):
            bad.append((name, "domain of mu", len(present)))
    ok = not bad
    record_criterion(2, ok, f"{checked} objects of TX and TTX over {len(fixture_bases())} fixtures; mismatches {bad[:3]}")
    assert ok


def test_criterion_03_monad_laws():
    notes, ok = [], True
    cases = {
        "com4/point": (com(4), over_one(terminal())),
        "com3/arrow": (com(3), arrow_base()),
        "ass3/point": (ass(3), over_one(points(1))),
        "span": (category_as_operad(span_category()), span_base()),
        "free2": (free2(), free2_base(1)),
    }
    for name, (T, base) in cases.items():
        start = time.perf_counter()
        rep = check_monad_laws(T, base)
        elapsed = time.perf_counter() - start
        units = rep.coverage["unit"]
        assoc = rep.coverage["associativity_objects"]
        case_ok = rep.ok and units["checked"] == units["total"] and assoc["checked"] > 0
        if name == "com4/point":
            case_ok = case_ok and elapsed < 10.0
            notes.append(f"com4 in {elapsed:.1f}s")
        ok = ok and case_ok
        notes.append(f"{name}: assoc {assoc['checked']}/{assoc['total']}")
    record_criterion(3, ok, "; ".join(notes))
    assert ok


def test_criterion_04_sigma_free_routes():
    results = {name: sigma_free(T) for name, T in operad_fixtures().items()}
    results["com4"] = sigma_free(com(4))
    agree = all(len(set(r.values())) == 1 for r in results.values())
    negative = not results["com3"]["direct"] and not results["com4"]["direct"]
    positive = all(results[n]["direct"] for n in ("ass3", "cat_span", "cat_iso", "free2"))
    ok = agree and negative and positive
    record_criterion(4, ok, ", ".join(f"{n}={r['direct']}" for n, r in sorted(results.items())))
    assert ok


def test_criterion_05_quotient_agreements():
    bad = []
    for name, (T, base) in fixture_bases().items():
        TX = apply_T(T, base)
        res = quotient(TX)
        Q2, q2 = quotient_oracle(TX)
        if Q2.signature() != res.Q.signature() or not q2.same_as(res.q):
            bad.append((name, "oracle"))
        if name in SIGMA_FREE_CASES:
            P0 = pi0_polynomial(operad_polynomial(T).poly).poly
            if find_isomorphism(apply_polynomial(P0, base.anchor).X, res.Q) is None:
                bad.append((name, "pi0"))
        if name in DISCRETE_CASES and len(res.Q.objects) != orbit_count(T, base):
            bad.append((name, "orbit count"))
    ok = not bad
    record_criterion(5, ok, f"{len(fixture_bases())} fixtures; failures {bad}")
    assert ok


def test_criterion_06_ass_modulo_symmetries_is_the_free_monoid():
    res = quotient(apply_T(ass(4), over_one(points(2))))
    n = len(res.Q.objects)
    ok = n == sum(2**k for k in range(5)) == 31 and res.Q.is_discrete()
    record_criterion(6, ok, f"{n} objects, discrete={res.Q.is_discrete()}")
    assert ok


def test_criterion_07_algebra_routes_agree():
    fixtures = algebra_fixtures()
    valid = [n for n, (_, good) in fixtures.items() if good]
    broken = [n for n, (_, good) in fixtures.items() if not good]
    bad = []
    for name, (D, good) in fixtures.items():
        by_data = validate_lax_morphism(D)
        by_action = validate_lax_action(data_to_action(D))
        if not (by_data.ok == by_action.ok == good) or by_data.locations() != by_action.locations():
            bad.append(name)
    ok = len(valid) >= 3 and len(broken) >= 3 and not bad
    record_criterion(7, ok, f"{len(valid)} valid, {len(broken)} broken; disagreements {bad}")
    assert ok


def test_criterion_08_commutativization():
    bad, notes = [], []
    for T in (com(3), ass(3), free2()):
        Z = over_one(points(2)) if T.colours == ("*",) else free2_base(1)
        res = commutativize(free_algebra(T, Z))
        q = quotient(apply_T(T, Z))
        if not res.r.same_as(q.q) or res.algebra.base.X.signature() != q.Q.signature():
            bad.append((T.name, "r != q"))
        twice = commutativize(res.algebra)
        if not twice.r.is_bijective():
            bad.append((T.name, "not idempotent"))
    non_free = {
        "sign over Com3": strict_algebra(v_bullet(com(3), sign_category())),
        "sign over Ass3": strict_algebra(v_bullet(ass(3), sign_category())),
        "Z/3 over Com3": strict_algebra(cyclic_monoid(com(3))),
    }
    for name, A in non_free.items():
        res = commutativize(A)
        up = commutativize_up(res, max_size=6)
        again = commutativize(res.algebra)
        if not up.ok:
            bad.append((name, "universal property"))
        if not again.r.is_bijective() or find_isomorphism(again.algebra.base.X, res.algebra.base.X) is None:
            bad.append((name, "not idempotent"))
        notes.append(f"{name}: {up.functors} functors on {up.probes} probes")
    ok = not bad
    record_criterion(8, ok, f"r = q on 3 free algebras; {'; '.join(notes)}; failures {bad}")
    assert ok


def test_criterion_09_composites_stay_essentially_discrete():
    span, iso = category_as_operad(span_category()), category_as_operad(two_colour_category())
    cases = {
        "ass3 . ass3 (bounded)": bounded_composite(operad_polynomial(ass(3)).poly, 3),
        "ass2 . ass2": compose_polynomials(operad_polynomial(ass(2)).poly, operad_polynomial(ass(2)).poly),
        "span . span": compose_polynomials(operad_polynomial(span).poly, operad_polynomial(span).poly),
        "iso . iso": compose_polynomials(operad_polynomial(iso).poly, operad_polynomial(iso).poly),
        "free2 . free2 (bounded)": bounded_composite(operad_polynomial(free2()).poly, 3),
    }
    bad = [name for name, C in cases.items() if not is_equiv_discrete(C.B)]
    ok = not bad
    record_criterion(9, ok, f"{len(cases)} composites; not essentially discrete {bad}")
    assert ok


def test_criterion_10_bounded_coidentifier_property():
    pool = {}
    for name, T in operad_fixtures().items():
        bases = {"cat_iso": [iso_base()], "free2": [free2_base(0), free2_base(1)], "cat_span": [span_base()]}.get(
            name, [over_one(terminal()), over_one(points(2)), arrow_base()]
        )
        for k, base in enumerate(bases):
            pool[f"{name}/{k}"] = (T, base)
    checked, bad, notes = [], [], []
    for name, (T, base) in pool.items():
        TX = apply_T(T, base)
        if len(TX.cat.objects) > 12:
            continue
        start = time.perf_counter()
        res = quotient(TX)
        gens = [p for p in TX.permutative() if not TX.cat.is_identity(p)]
        rep = coidentifier_up(TX.cat, gens, res.Q, res.q, max_size=6)
        elapsed = time.perf_counter() - start
        checked.append(name)
        if not rep.ok or elapsed >= 60.0:
            bad.append(name)
        notes.append(f"{name} |TX|={len(TX.cat.objects)} {elapsed:.1f}s")
    ok = len(checked) >= 4 and not bad
    record_criterion(10, ok, f"{'; '.join(notes)}; failures {bad}")
    assert ok


def test_pool_sizes_are_small():
    # guards the |X| <= 3 per fibre condition of criterion 2
    for T, base in fixture_bases().values():
        assert all(len(base.fibre(i)) <= 3 for i in T.colours)
