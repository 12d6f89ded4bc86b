"""Polynomials I <- E -> B -> J in finite categories.

The middle map is always a discrete fibration and a discrete opfibration, so
pushing forward along it is computed by ``dpb_along_dopfib``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Callable, Mapping

from .fincat import (
    DpbResult,
    FinCategory,
    FinFunctor,
    Pullback,
    Violation,
    discrete,
    dpb_along_dopfib,
    fibres,
    is_discrete_fibration,
    is_discrete_opfibration,
    is_equiv_discrete,
    is_pullback_square,
    pi0,
    pullback,
    terminal,
    validate_category,
)
from .perm import Permutation, all_perms, block_perm_src


class NotPolynomial(ValueError):
    pass


class IncompatibleCarriers(ValueError):
    pass


class NotSigmaFree(ValueError):
    pass


@dataclass
class CompositeData:
    """Intermediate stages of a composite: pullback, push-forward, pullback."""

    inner: Polynomial
    outer: Polynomial
    D: Pullback
    dpb: DpbResult
    E: Pullback


@dataclass
class Polynomial:
    I: FinCategory
    E: FinCategory
    B: FinCategory
    s: FinFunctor
    p: FinFunctor
    t: FinFunctor
    J: FinCategory | None = None
    build: CompositeData | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.J is None:
            self.J = self.t.cod
        if not (is_discrete_fibration(self.p) and is_discrete_opfibration(self.p)):
            raise NotPolynomial("middle map must be a discrete fibration and a discrete opfibration")

    def fibre(self, b: str) -> list[str]:
        return [e for e in self.E.objects if self.p.obj[e] == b]

    def to_dict(self) -> dict:
        out = {
            "I": self.I.to_dict(),
            "E": self.E.to_dict(),
            "B": self.B.to_dict(),
            "s": self.s.to_dict(),
            "p": self.p.to_dict(),
            "t": self.t.to_dict(),
        }
        if self.J is not self.I:
            out["J"] = self.J.to_dict()
        return out

    @staticmethod
    def from_dict(raw: Mapping) -> Polynomial:
        I = validate_category(raw["I"], name="I")
        J = validate_category(raw["J"], name="J") if "J" in raw else I
        E = validate_category(raw["E"], name="E")
        B = validate_category(raw["B"], name="B")
        return Polynomial(
            I,
            E,
            B,
            FinFunctor.from_dict(E, I, raw["s"]),
            FinFunctor.from_dict(E, B, raw["p"]),
            FinFunctor.from_dict(B, J, raw["t"]),
            J=J,
        )


def identity_polynomial(I: FinCategory) -> Polynomial:
    one = FinFunctor.identity(I)
    return Polynomial(I, I, I, one, one, one, J=I)


def compose_polynomials(
    P2: Polynomial,
    P1: Polynomial,
    admit: Callable[[str, tuple[str, ...]], bool] | None = None,
) -> Polynomial:
    """The composite ``P2 . P1`` (first ``P1 : I -> J``, then ``P2 : J -> K``).

    ``admit`` optionally keeps only some objects of the composite's middle
    category, given as ``(b2, section)`` with the section listing objects of
    the first pullback ``E2 x_J B1``.
    """
    if P1.J is not P2.I and P1.J.signature() != P2.I.signature():
        raise IncompatibleCarriers("codomain carrier of the first polynomial differs from the domain of the second")
    D = pullback(P2.s, P1.t, name="D")
    dpb = dpb_along_dopfib(P2.p, D.left, admit=admit, name="B")
    to_b1 = dpb.p.then(D.right)
    E3 = pullback(P1.p, to_b1, name="E")
    p3 = E3.right.then(dpb.q)
    s3 = E3.left.then(P1.s)
    t3 = dpb.r.then(P2.t)
    out = Polynomial(P1.I, E3.P, dpb.Q, s3, p3, t3, J=P2.J)
    out.build = CompositeData(P1, P2, D, dpb, E3)
    return out


def composite_object_count(P2: Polynomial, P1: Polynomial) -> int:
    """Number of objects of the full composite, without building it."""
    per_colour: dict[str, int] = {}
    for b in P1.B.objects:
        c = P1.t.obj[b]
        per_colour[c] = per_colour.get(c, 0) + 1
    fib = fibres(P2.p)
    return sum(prod(per_colour.get(P2.s.obj[e], 0) for e in fib[b]) for b in P2.B.objects)


@dataclass
class PolyMorphism:
    """Cartesian morphism between endo-polynomials: ``f0`` on carriers, ``f1`` on B, ``f2`` on E."""

    dom: Polynomial
    cod: Polynomial
    f0: FinFunctor
    f1: FinFunctor
    f2: FinFunctor


@dataclass
class PolyMonadData:
    carrier: Polynomial
    unit: PolyMorphism
    mult: PolyMorphism
    coverage: tuple[int, int]

    @property
    def composite(self) -> Polynomial:
        return self.mult.dom


def identity_morphism(P: Polynomial) -> PolyMorphism:
    return PolyMorphism(P, P, FinFunctor.identity(P.I), FinFunctor.identity(P.B), FinFunctor.identity(P.E))


def _square(found: list, name: str, left: FinFunctor, right: FinFunctor) -> None:
    if not left.same_as(right):
        bad = [x for x in left.obj if left.obj[x] != right.obj.get(x)]
        bad += [f for f in left.arr if left.arr[f] != right.arr.get(f)]
        found.append(Violation("NotCommuting", (name, bad[0] if bad else "")))


def horizontal_image(m: PolyMorphism, composite: Polynomial, target: Polynomial) -> tuple[FinFunctor, FinFunctor]:
    """Map induced by ``m`` from the composite ``dom . dom`` to ``cod . cod``.

    Only objects whose images exist in ``target`` (a possibly restricted
    composite of ``m.cod`` with itself) are mapped.
    """
    src, tgt = composite.build, target.build
    f1, f2 = m.f1, m.f2
    d_obj = {}
    for x, (e2, b1) in src.D.obj_pairs.items():
        d_obj[x] = tgt.D.obj_index.get((f2.obj[e2], f1.obj[b1]))
    d_arr = {}
    for a, (u2, v1) in src.D.arr_pairs.items():
        d_arr[a] = tgt.D.arr_index.get((f2.arr[u2], f1.arr[v1]))
    q_obj, q_arr = {}, {}
    for qid, (y, h) in src.dpb.sections.items():
        y2 = f1.obj[y]
        xs = src.dpb.fibre[y]
        img = {f2.obj[x]: d_obj[w] for x, w in zip(xs, h)}
        h2 = tuple(img.get(x2) for x2 in tgt.dpb.fibre.get(y2, ()))
        found = tgt.dpb.section_index.get((y2, h2))
        if found is not None:
            q_obj[qid] = found
    for aid, (alpha, gammas, tq) in src.dpb.families.items():
        if tq not in q_obj:
            continue
        y1 = src.dpb.sections[composite.B.src(aid)][0]
        img = {f2.obj[x]: d_arr[g] for x, g in zip(src.dpb.fibre[y1], gammas)}
        g2 = tuple(img.get(x2) for x2 in tgt.dpb.fibre.get(f1.obj[y1], ()))
        found = tgt.dpb.fam_index.get((f1.arr[alpha], g2, q_obj[tq]))
        if found is not None:
            q_arr[aid] = found
    F1 = FinFunctor(composite.B, target.B, q_obj, q_arr)
    e_obj, e_arr = {}, {}
    p_obj = {}
    for pid, (x, qid) in src.dpb.pb.obj_pairs.items():
        if qid in q_obj:
            p_obj[pid] = tgt.dpb.pb.obj_index.get((f2.obj[x], q_obj[qid]))
    p_arr = {}
    for pid, (u, aid) in src.dpb.pb.arr_pairs.items():
        if aid in q_arr:
            p_arr[pid] = tgt.dpb.pb.arr_index.get((f2.arr[u], q_arr[aid]))
    for eid, (e1, pid) in src.E.obj_pairs.items():
        if p_obj.get(pid) is not None:
            e_obj[eid] = tgt.E.obj_index.get((f2.obj[e1], p_obj[pid]))
    for eid, (u1, pid) in src.E.arr_pairs.items():
        if p_arr.get(pid) is not None:
            e_arr[eid] = tgt.E.arr_index.get((f2.arr[u1], p_arr[pid]))
    return F1, FinFunctor(composite.E, target.E, e_obj, e_arr)


def validate_poly_morphism(
    m: PolyMorphism,
    monads: tuple[PolyMonadData, PolyMonadData] | None = None,
) -> list[Violation]:
    """Commutativity, the pullback middle square, and optionally monad compatibility."""
    found: list[Violation] = []
    for name, F in (("f0", m.f0), ("f1", m.f1), ("f2", m.f2)):
        for v in F.violations():
            found.append(Violation("NotFunctor", (name,) + v.witness, v.kind))
    if found:
        return found
    P, Q = m.dom, m.cod
    _square(found, "s", m.f2.then(Q.s), P.s.then(m.f0))
    _square(found, "p", m.f2.then(Q.p), P.p.then(m.f1))
    _square(found, "t", m.f1.then(Q.t), P.t.then(m.f0))
    if found:
        return found
    if not is_pullback_square(P.p, m.f2, m.f1, Q.p):
        found.append(Violation("NotPullback", ("middle square",)))
        return found
    if monads is not None:
        found += _monad_compatibility(m, *monads)
    return found


def _monad_compatibility(m: PolyMorphism, src: PolyMonadData, tgt: PolyMonadData) -> list[Violation]:
    found: list[Violation] = []
    for part, um, ut, f in (("B", src.unit.f1, tgt.unit.f1, m.f1), ("E", src.unit.f2, tgt.unit.f2, m.f2)):
        left, right = um.then(f), m.f0.then(ut)
        for x in left.dom.objects:
            if left.obj[x] != right.obj[x]:
                found.append(Violation("MonadLawFail", ("unit", part, x)))
    hb, he = horizontal_image(m, src.composite, tgt.composite)
    for part, mm, mt, f, h in (
        ("B", src.mult.f1, tgt.mult.f1, m.f1, hb),
        ("E", src.mult.f2, tgt.mult.f2, m.f2, he),
    ):
        for x in mm.dom.objects:
            if x not in h.obj or h.obj[x] is None:
                found.append(Violation("MonadLawFail", ("mult-domain", part, x)))
                continue
            if f.obj[mm.obj[x]] != mt.obj[h.obj[x]]:
                found.append(Violation("MonadLawFail", ("mult", part, x)))
        for a in mm.dom.arrows:
            if h.arr.get(a) is None:
                found.append(Violation("MonadLawFail", ("mult-domain", part, a)))
                continue
            if f.arr[mm.arr[a]] != mt.arr[h.arr[a]]:
                found.append(Violation("MonadLawFail", ("mult", part, a)))
    return found


# the truncated symmetric polynomial


@dataclass
class TruncatedS:
    bound: int
    poly: Polynomial
    monad: PolyMonadData
    nj: dict[str, tuple[int, int]]

    @property
    def P(self) -> FinCategory:
        return self.poly.B

    @property
    def Pstar(self) -> FinCategory:
        return self.poly.E


def _perm_groupoid(bound: int) -> tuple[FinCategory, dict[str, Permutation]]:
    objs = [str(n) for n in range(bound + 1)]
    ids = {str(n): str(Permutation.identity(n)) for n in range(bound + 1)}
    perms: dict[str, Permutation] = {}
    arrows = {}
    for n in range(bound + 1):
        for r in all_perms(n):
            perms[str(r)] = r
            if not r.is_identity():
                arrows[str(r)] = (str(n), str(n))
    P = FinCategory(objs, arrows, lambda f, g: str(perms[g] * perms[f]), identities=ids, name="P")
    return P, perms


def truncated_s(bound: int) -> TruncatedS:
    P, perms = _perm_groupoid(bound)
    nj: dict[str, tuple[int, int]] = {}
    objs = []
    for n in range(bound + 1):
        for j in range(1, n + 1):
            x = f"({n},{j})"
            objs.append(x)
            nj[x] = (n, j)
    index = {v: k for k, v in nj.items()}
    ids, arrows, data = {}, {}, {}
    for x, (n, j) in nj.items():
        for r in all_perms(n):
            a = f"{r}@{j}"
            data[a] = (r, j)
            if r.is_identity():
                ids[x] = a
            else:
                arrows[a] = (x, index[(n, r(j))])

    def comp(a: str, b: str) -> str:
        r, j = data[a]
        s, _ = data[b]
        return f"{s * r}@{j}"

    Pstar = FinCategory(objs, arrows, comp, identities=ids, name="P*")
    u = FinFunctor(Pstar, P, {x: str(nj[x][0]) for x in objs}, {a: str(data[a][0]) for a in Pstar.arrows})
    one = terminal()
    poly = Polynomial(
        one, Pstar, P, FinFunctor.constant(Pstar, one, "*"), u, FinFunctor.constant(P, one, "*"), J=one
    )
    unit = PolyMorphism(
        identity_polynomial(one),
        poly,
        FinFunctor.identity(one),
        FinFunctor(one, P, {"*": "1"}),
        FinFunctor(one, Pstar, {"*": "(1,1)"}),
    )
    total = composite_object_count(poly, poly)
    D = pullback(poly.s, poly.t)

    def admit(y: str, h: tuple[str, ...]) -> bool:
        return sum(int(D.obj_pairs[w][1]) for w in h) <= bound

    composite = compose_polynomials(poly, poly, admit=admit)
    mult = _s_mult(poly, composite, perms, nj, index)
    monad = PolyMonadData(poly, unit, mult, (len(composite.B.objects), total))
    return TruncatedS(bound, poly, monad, nj)


def _s_mult(poly, composite, perms, nj, index) -> PolyMorphism:
    build = composite.build
    dpb, D = build.dpb, build.D
    b_obj, b_arr, sizes = {}, {}, {}
    for qid, (y, h) in dpb.sections.items():
        ms = [int(D.obj_pairs[w][1]) for w in h]
        sizes[qid] = ms
        b_obj[qid] = str(sum(ms))
    for aid, (rho_id, gammas, _) in dpb.families.items():
        taus = [perms[D.arr_pairs[g][1]] for g in gammas]
        b_arr[aid] = str(block_perm_src(perms[rho_id], taus))
    f1 = FinFunctor(composite.B, poly.B, b_obj, b_arr)
    e_obj, e_arr = {}, {}
    for eid, (e1, pid) in build.E.obj_pairs.items():
        x, qid = dpb.pb.obj_pairs[pid]
        _, j = nj[x]
        _, k = nj[e1]
        e_obj[eid] = index[(sum(sizes[qid]), sum(sizes[qid][: j - 1]) + k)]
    for eid in composite.E.arrows:
        src = e_obj[composite.E.src(eid)]
        _, j = nj[src]
        e_arr[eid] = f"{perms[b_arr[composite.p.arr[eid]]]}@{j}"
    f2 = FinFunctor(composite.E, poly.E, e_obj, e_arr)
    return PolyMorphism(composite, poly, FinFunctor.identity(poly.I), f1, f2)


# classification


def classify_over_S(P: Polynomial, m: PolyMorphism) -> dict[str, bool]:
    is_operad = P.I.is_discrete() and is_discrete_fibration(m.f1)
    return {
        "operad": is_operad,
        "sigma_free": is_operad and is_equiv_discrete(P.B),
        "club": P.I.is_discrete() and len(P.I.objects) == 1,
    }


@dataclass
class Pi0Polynomial:
    poly: Polynomial
    q_B: FinFunctor
    q_E: FinFunctor


def pi0_polynomial(P: Polynomial) -> Pi0Polynomial:
    """Componentwise connected components, valid when the quotient square is a pullback."""
    if not P.I.is_discrete():
        raise NotSigmaFree("carrier is not discrete")
    B0, qB = pi0(P.B)
    E0, qE = pi0(P.E)
    p0 = _induced(qE, qB, P.p, E0, B0)
    if not is_equiv_discrete(P.B) or not is_pullback_square(P.p, qE, qB, p0):
        raise NotSigmaFree("components do not form a pullback square")
    s0 = _induced(qE, FinFunctor.identity(P.I), P.s, E0, P.I)
    t0 = _induced(qB, FinFunctor.identity(P.J), P.t, B0, P.J)
    return Pi0Polynomial(Polynomial(P.I, E0, B0, s0, p0, t0, J=P.J), qB, qE)


def pullback_square_holds(P: Polynomial) -> bool:
    B0, qB = pi0(P.B)
    E0, qE = pi0(P.E)
    p0 = _induced(qE, qB, P.p, E0, B0)
    return is_pullback_square(P.p, qE, qB, p0)


def _induced(qa: FinFunctor, qb: FinFunctor, F: FinFunctor, A0: FinCategory, B0: FinCategory) -> FinFunctor:
    obj = {}
    for x in F.dom.objects:
        obj[qa.obj[x]] = qb.obj[F.obj[x]]
    return FinFunctor(A0, B0, obj)


# polynomial functors


@dataclass
class Applied:
    """``P(X)`` for ``X`` over the carrier, with its map to the target carrier."""

    X: FinCategory
    anchor: FinFunctor
    D: Pullback
    dpb: DpbResult


def apply_polynomial(P: Polynomial, anchor: FinFunctor) -> Applied:
    """Pull back along ``s``, push forward along ``p``, compose with ``t``."""
    D = pullback(P.s, anchor)
    dpb = dpb_along_dopfib(P.p, D.left)
    return Applied(dpb.Q, dpb.r.then(P.t), D, dpb)


def over_discrete(X: FinCategory, colour: Mapping[str, str], colours: list[str]) -> FinFunctor:
    I = discrete(colours)
    return FinFunctor(X, I, dict(colour), {f: I.identity(colour[X.src(f)]) for f in X.arrows})


def bounded_composite(P: Polynomial, bound: int) -> Polynomial:
    """``P . P`` restricted to total arity at most ``bound``."""
    D = pullback(P.s, P.t)
    size = {b: len(P.fibre(b)) for b in P.B.objects}

    def admit(y: str, h: tuple[str, ...]) -> bool:
        return sum(size[D.obj_pairs[w][1]] for w in h) <= bound

    return compose_polynomials(P, P, admit=admit)


def _maps(m: PolyMorphism) -> dict:
    return {"B": m.f1.to_dict(), "E": m.f2.to_dict()}


def monad_to_dict(M: PolyMonadData, over_s: PolyMorphism) -> dict:
    bound = max(int(n) for n in over_s.cod.B.objects)
    return {
        "arity_bound": bound,
        "polynomial": M.carrier.to_dict(),
        "unit": _maps(M.unit),
        "mult": _maps(M.mult),
        "over_s": _maps(over_s),
    }


def monad_from_dict(raw: Mapping) -> tuple[PolyMonadData, PolyMorphism]:
    """Inverse of ``monad_to_dict``; the composite is rebuilt from the polynomial."""
    bound = int(raw["arity_bound"])
    P = Polynomial.from_dict(raw["polynomial"])
    I = P.I
    Id = identity_polynomial(I)
    unit = PolyMorphism(
        Id,
        P,
        FinFunctor.identity(I),
        FinFunctor.from_dict(I, P.B, raw["unit"]["B"]),
        FinFunctor.from_dict(I, P.E, raw["unit"]["E"]),
    )
    C = bounded_composite(P, bound)
    mult = PolyMorphism(
        C,
        P,
        FinFunctor.identity(I),
        FinFunctor.from_dict(C.B, P.B, raw["mult"]["B"]),
        FinFunctor.from_dict(C.E, P.E, raw["mult"]["E"]),
    )
    S = truncated_s(bound)
    one = S.poly.I
    over_s = PolyMorphism(
        P,
        S.poly,
        FinFunctor.constant(I, one, one.objects[0]),
        FinFunctor.from_dict(P.B, S.poly.B, raw["over_s"]["B"]),
        FinFunctor.from_dict(P.E, S.poly.E, raw["over_s"]["E"]),
    )
    return PolyMonadData(P, unit, mult, (len(C.B.objects), composite_object_count(P, P))), over_s
