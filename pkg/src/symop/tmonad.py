"""The monad of an operad on categories over its colours, and its quotient by symmetries.

Objects of ``TX`` are labelled operations ``(a, (x_1..x_n))`` with ``x_j`` over
the ``j``-th source colour of ``a``.  An arrow ``(rho, (g_j))`` goes from
``(a rho, x)`` to ``(a, y)`` with ``g_j : x_j -> y_{rho j}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as cartesian
from math import prod
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from networkx.utils import UnionFind

from .fincat import (
    ArrowCatBundle,
    FinCategory,
    FinFunctor,
    FinNatTrans,
    Violation,
    arrow_category,
    coidentify,
    discrete,
    iter_functors,
    lst,
    probe_categories,
    quotient_category,
)
from .operad import TruncatedOperad
from .perm import Permutation, all_perms, block_perm_src


class ColourMismatch(ValueError):
    pass


class DescentFail(RuntimeError):
    pass


class LawViolation(AssertionError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__(f"{self.violations[0].kind} at {self.violations[0].witness}")


@dataclass
class ObjOverI:
    """A finite category with a colour for every object."""

    X: FinCategory
    anchor: FinFunctor

    @property
    def colours(self) -> tuple[str, ...]:
        return self.anchor.cod.objects

    def colour(self, x: str) -> str:
        return self.anchor.obj[x]

    def fibre(self, colour: str) -> list[str]:
        return [x for x in self.X.objects if self.anchor.obj[x] == colour]

    @staticmethod
    def over(X: FinCategory, colour: Mapping[str, str], colours: Sequence[str]) -> ObjOverI:
        I = discrete(colours, name="I")
        for f in X.arrows:
            if colour[X.src(f)] != colour[X.tgt(f)]:
                raise ColourMismatch(f"arrow {f!r} joins objects of different colours")
        anchor = FinFunctor(X, I, dict(colour), {f: I.identity(colour[X.src(f)]) for f in X.arrows})
        return ObjOverI(X, anchor)


Admit = Callable[[str, tuple[str, ...]], bool]


@dataclass(frozen=True)
class Budget:
    """Keeps labels whose summed weights stay within ``limit`` componentwise.

    Weights are non-negative, so enumeration can prune partial label tuples.
    """

    weight: Callable[[str], tuple[int, ...]]
    limit: tuple[int, ...]


def _labels_within(pools: Sequence[Sequence[str]], budget: Budget | None):
    if budget is None:
        yield from cartesian(*pools)
        return
    # group each pool by weight so whole groups are pruned at once
    groups: list[dict[tuple[int, ...], list[str]]] = []
    for pool in pools:
        g: dict[tuple[int, ...], list[str]] = {}
        for x in pool:
            g.setdefault(tuple(budget.weight(x)), []).append(x)
        groups.append(g)

    def rec(k: int, used: tuple[int, ...]):
        if k == len(pools):
            yield ()
            return
        for w, xs in groups[k].items():
            nxt = tuple(u + v for u, v in zip(used, w))
            if all(u <= m for u, m in zip(nxt, budget.limit)):
                tails = list(rec(k + 1, nxt))
                for x in xs:
                    for t in tails:
                        yield (x,) + t

    yield from rec(0, tuple(0 for _ in budget.limit))


@dataclass
class LabelledOpCategory:
    T: TruncatedOperad
    base: ObjOverI
    cat: FinCategory
    anchor: FinFunctor
    obj_data: dict[str, tuple[str, tuple[str, ...]]]
    obj_index: dict[tuple[str, tuple[str, ...]], str]
    arr_data: dict[str, tuple[str, Permutation, tuple[str, ...]]]
    arr_index: dict[tuple[str, Permutation, tuple[str, ...]], str]
    coverage: tuple[int, int] = (0, 0)

    def as_base(self) -> ObjOverI:
        return ObjOverI(self.cat, self.anchor)

    def op(self, x: str) -> str:
        return self.obj_data[x][0]

    def labels(self, x: str) -> tuple[str, ...]:
        return self.obj_data[x][1]

    def arity(self, x: str) -> int:
        return len(self.obj_data[x][1])

    def is_permutative(self, f: str) -> bool:
        return all(self.base.X.is_identity(g) for g in self.arr_data[f][2])

    def is_levelwise(self, f: str) -> bool:
        return self.arr_data[f][1].is_identity()

    def permutative(self) -> list[str]:
        return [f for f in self.cat.arrows if self.is_permutative(f)]

    def factor(self, f: str) -> tuple[str, str]:
        """``f = perm . lev`` with ``lev`` levelwise and ``perm`` permutative."""
        a, r, gs = self.arr_data[f]
        X = self.base.X
        mid_labels = tuple(X.tgt(g) for g in gs)
        mid = self.T.act(a, r)
        lev = self.arr_index[(mid, Permutation.identity(r.n), gs)]
        perm = self.arr_index[(a, r, tuple(X.identity(y) for y in mid_labels))]
        return lev, perm


def _obj_id(a: str, labels: Sequence[str]) -> str:
    return f"op({a};{lst(labels)})"


def _arr_id(a: str, r: Permutation, gs: Sequence[str]) -> str:
    return f"mor({a};{r};{lst(gs)})"


def apply_T(
    T: TruncatedOperad,
    base: ObjOverI,
    admit: Admit | None = None,
    budget: Budget | None = None,
    with_arrows: bool = True,
) -> LabelledOpCategory:
    """All labelled operations and their arrows.

    ``admit(a, labels)`` and ``budget`` optionally keep a full subcategory;
    both must be invariant under the arrows (callers use arity conditions).
    """
    X = base.X
    if not set(base.colours) <= set(T.colours):
        raise ColourMismatch("base category is coloured outside the operad's colours")
    fibre = {i: base.fibre(i) for i in T.colours}
    obj_data: dict[str, tuple[str, tuple[str, ...]]] = {}
    obj_index: dict[tuple[str, tuple[str, ...]], str] = {}
    objs = []
    total = 0
    for a in T.arrows:
        total += prod(len(fibre[c]) for c in T.source(a))
        for labels in _labels_within([fibre[c] for c in T.source(a)], budget):
            if admit is not None and not admit(a, labels):
                continue
            x = _obj_id(a, labels)
            objs.append(x)
            obj_data[x] = (a, labels)
            obj_index[(a, labels)] = x
    arr_data: dict[str, tuple[str, Permutation, tuple[str, ...]]] = {}
    arr_index: dict[tuple[str, Permutation, tuple[str, ...]], str] = {}
    arrows, ids = {}, {}
    for y in objs:
        a, ys = obj_data[y]
        n = len(ys)
        if not with_arrows:
            f = _arr_id(a, Permutation.identity(n), tuple(X.identity(l) for l in ys))
            arr_data[f] = (a, Permutation.identity(n), tuple(X.identity(l) for l in ys))
            arr_index[arr_data[f]] = f
            ids[y] = f
            continue
        for r in all_perms(n):
            ar = T.act(a, r)
            for gs in cartesian(*(X.into(ys[r(j) - 1]) for j in range(1, n + 1))):
                src = obj_index.get((ar, tuple(X.src(g) for g in gs)))
                if src is None:
                    continue
                f = _arr_id(a, r, gs)
                arr_data[f] = (a, r, gs)
                arr_index[(a, r, gs)] = f
                if r.is_identity() and all(X.is_identity(g) for g in gs):
                    ids[y] = f
                else:
                    arrows[f] = (src, y)

    def comp(f: str, g: str) -> str:
        _, r, gs = arr_data[f]
        b, s, ds = arr_data[g]
        eps = tuple(X.then(gs[j - 1], ds[r(j) - 1]) for j in range(1, r.n + 1))
        return arr_index[(b, s * r, eps)]

    cat = FinCategory(objs, arrows, comp, identities=ids, name="TX")
    I = base.anchor.cod
    anchor = FinFunctor(
        cat,
        I,
        {x: T.target(obj_data[x][0]) for x in objs},
        {f: I.identity(T.target(arr_data[f][0])) for f in arr_data},
    )
    return LabelledOpCategory(T, base, cat, anchor, obj_data, obj_index, arr_data, arr_index, (len(objs), total))


def object_count(T: TruncatedOperad, sizes: Mapping[str, int], depth: int = 1) -> int:
    """Objects of ``T^depth X`` without truncation, from fibre sizes of ``X``."""
    c = dict(sizes)
    for _ in range(depth):
        c = {i: sum(prod(c.get(s, 0) for s in T.source(a)) for a in T.into(i)) for i in T.colours}
    return sum(c.values())


def apply_T_arrow(TX: LabelledOpCategory, TY: LabelledOpCategory, f: FinFunctor) -> FinFunctor:
    """``Tf (a, x) = (a, f x)`` on objects and ``(rho, f g)`` on arrows."""
    for x in TX.base.X.objects:
        if TX.base.colour(x) != TY.base.colour(f.obj[x]):
            raise ColourMismatch(f"{x!r} changes colour under the map")
    obj = {x: TY.obj_index[(a, tuple(f.obj[l] for l in ls))] for x, (a, ls) in TX.obj_data.items()}
    arr = {u: TY.arr_index[(a, r, tuple(f.arr[g] for g in gs))] for u, (a, r, gs) in TX.arr_data.items()}
    return FinFunctor(TX.cat, TY.cat, obj, arr)


def apply_T_2cell(TX: LabelledOpCategory, TY: LabelledOpCategory, phi: FinNatTrans) -> FinNatTrans:
    """Component at ``(a, x)`` is the levelwise arrow ``(1, (phi_{x_j}))``."""
    F, G = apply_T_arrow(TX, TY, phi.dom), apply_T_arrow(TX, TY, phi.cod)
    comp = {}
    for x, (a, ls) in TX.obj_data.items():
        comp[x] = TY.arr_index[(a, Permutation.identity(len(ls)), tuple(phi.comp[l] for l in ls))]
    return FinNatTrans(F, G, comp)


def unit(TX: LabelledOpCategory) -> FinFunctor:
    """``x`` goes to ``(1_i, (x))``."""
    T, X = TX.T, TX.base.X
    one = Permutation.identity(1)
    obj = {x: TX.obj_index[(T.units[TX.base.colour(x)], (x,))] for x in X.objects}
    arr = {g: TX.arr_index[(T.units[TX.base.colour(X.src(g))], one, (g,))] for g in X.arrows}
    return FinFunctor(X, TX.cat, obj, arr)


def arity_budget(inner: LabelledOpCategory, bound: int) -> Budget:
    """Keep outer operations whose labels have total arity at most ``bound``."""
    return Budget(lambda l: (inner.arity(l),), (bound,))


def apply_T2(TX: LabelledOpCategory) -> LabelledOpCategory:
    return apply_T(TX.T, TX.as_base(), budget=arity_budget(TX, TX.T.bound))


def mult_object(TX: LabelledOpCategory, a: str, labels: Sequence[str]) -> str:
    """``(a, ((a_j, x_j))_j)`` goes to ``(a (a_j)_j, (x_jk)_jk)``."""
    inner = [TX.obj_data[l] for l in labels]
    c = TX.T.compose(a, tuple(b for b, _ in inner))
    return TX.obj_index[(c, tuple(x for _, xs in inner for x in xs))]


def mult_arrow(TX: LabelledOpCategory, a: str, r: Permutation, gs: Sequence[str]) -> str:
    """``(r, ((r_j, g_j))_j)`` goes to ``(r (r_j)_j, (g_jk)_jk)`` at the composite target."""
    parts = [TX.arr_data[g] for g in gs]
    rinv = r.inverse()
    tgt_ops = tuple(TX.op(TX.cat.tgt(gs[rinv(k) - 1])) for k in range(1, r.n + 1))
    c = TX.T.compose(a, tgt_ops)
    pi = block_perm_src(r, [p[1] for p in parts])
    return TX.arr_index[(c, pi, tuple(d for p in parts for d in p[2]))]


def mult(TX: LabelledOpCategory, TTX: LabelledOpCategory) -> FinFunctor:
    """Multiplication on ``TTX``, which must only hold objects whose composite is within the bound."""
    obj = {w: mult_object(TX, a, ls) for w, (a, ls) in TTX.obj_data.items()}
    arr = {u: mult_arrow(TX, a, r, gs) for u, (a, r, gs) in TTX.arr_data.items()}
    return FinFunctor(TTX.cat, TX.cat, obj, arr)


def generating_arrows(TY: LabelledOpCategory) -> Iterator[tuple[str, Permutation, tuple[str, ...]]]:
    """Permutative arrows and levelwise arrows that move a single label.

    Every arrow is a composite of these, so two functors out of ``TY`` agree
    as soon as they agree here.
    """
    X = TY.base.X
    for y, (a, ys) in TY.obj_data.items():
        n = len(ys)
        for r in all_perms(n):
            if not r.is_identity():
                yield (a, r, tuple(X.identity(ys[r(j) - 1]) for j in range(1, n + 1)))
        ids = [X.identity(l) for l in ys]
        for k in range(n):
            for g in X.into(ys[k]):
                if not X.is_identity(g):
                    yield (a, Permutation.identity(n), tuple(ids[:k] + [g] + ids[k + 1 :]))


@dataclass
class MonadLawReport:
    ok: bool
    violations: list[Violation]
    coverage: dict

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [v.as_dict() for v in self.violations],
            "coverage": self.coverage,
        }


def check_monad_laws(
    T: TruncatedOperad,
    base: ObjOverI,
    max_report: int = 20,
    all_arrows: bool = False,
) -> MonadLawReport:
    """Unit laws on all of ``TX`` and associativity where every composite is defined.

    Associativity is compared on every object of the truncated ``T^3 X`` and on
    a generating set of its arrows, or on every arrow with ``all_arrows``.
    """
    N = T.bound
    TX = apply_T(T, base)
    TTX = apply_T2(TX)
    mu = mult(TX, TTX)
    found: list[Violation] = []
    # unit laws: mu . eta_TX = id and mu . T eta = id
    one = Permutation.identity(1)
    for x, (a, ls) in TX.obj_data.items():
        left = TTX.obj_index[(T.units[T.target(a)], (x,))]
        if mu.obj[left] != x:
            found.append(Violation("LawViolation", ("unit_left", x)))
        right = TTX.obj_index[(a, tuple(TX.obj_index[(T.units[TX.base.colour(l)], (l,))] for l in ls))]
        if mu.obj[right] != x:
            found.append(Violation("LawViolation", ("unit_right", x)))
    for f, (a, r, gs) in TX.arr_data.items():
        i = T.target(a)
        left = TTX.arr_index[(T.units[i], one, (f,))]
        if mu.arr[left] != f:
            found.append(Violation("LawViolation", ("unit_left", f)))
        X = TX.base.X
        wrapped = tuple(TX.arr_index[(T.units[TX.base.colour(X.src(g))], one, (g,))] for g in gs)
        right = TTX.arr_index.get((a, r, wrapped))
        if right is None or mu.arr[right] != f:
            found.append(Violation("LawViolation", ("unit_right", f)))
    # associativity on T^3 X restricted to fully defined objects
    def weight3(l: str) -> tuple[int, int]:
        return TTX.arity(l), sum(TX.arity(m) for m in TTX.labels(l))

    TTTX = apply_T(T, TTX.as_base(), budget=Budget(weight3, (N, N)), with_arrows=all_arrows)
    checked_o = checked_a = 0
    for w, (a, ls) in TTTX.obj_data.items():
        checked_o += 1
        left = mu.obj[TTX.obj_index[(a, tuple(mu.obj[l] for l in ls))]]
        if left != mu.obj[mult_object(TTX, a, ls)]:
            found.append(Violation("LawViolation", ("associativity", w)))
    data = TTTX.arr_data.values() if all_arrows else generating_arrows(TTTX)
    for a, r, gs in data:
        checked_a += 1
        left = mu.arr[TTX.arr_index[(a, r, tuple(mu.arr[g] for g in gs))]]
        if left != mu.arr[mult_arrow(TTX, a, r, gs)]:
            found.append(Violation("LawViolation", ("associativity", _arr_id(a, r, gs))))
    sizes = {i: len(base.fibre(i)) for i in T.colours}
    coverage = {
        "unit": {"checked": len(TX.cat.objects) + len(TX.cat.arrows), "total": len(TX.cat.objects) + len(TX.cat.arrows)},
        "associativity_objects": {"checked": checked_o, "total": object_count(T, sizes, 3)},
        "associativity_arrows": {"checked": checked_a, "mode": "all" if all_arrows else "generators"},
        "multiplication_objects": {"defined": len(TTX.cat.objects), "total": object_count(T, sizes, 2)},
    }
    return MonadLawReport(not found, found[:max_report] if max_report else found, coverage)


# the permutative part


@dataclass
class T1Sigma:
    bundle: ArrowCatBundle
    section: FinFunctor

    @property
    def alpha(self) -> FinNatTrans:
        return self.bundle.alpha


def t1_sigma(TX: LabelledOpCategory) -> T1Sigma:
    """Full subcategory of the arrow category of ``TX`` on permutative arrows."""
    bundle = arrow_category(TX.cat, objects=TX.permutative(), name="T1X")
    A = bundle.arrowCat
    sq = {}
    for s in A.arrows:
        f, u, v, f2 = _square_parts(s)
        sq[(f, u, v, f2)] = s
    obj = {x: TX.cat.identity(x) for x in TX.cat.objects}
    arr = {u: sq[(TX.cat.identity(TX.cat.src(u)), u, u, TX.cat.identity(TX.cat.tgt(u)))] for u in TX.cat.arrows}
    return T1Sigma(bundle, FinFunctor(TX.cat, A, obj, arr))


def _square_parts(s: str) -> tuple[str, str, str, str]:
    body = s[len("sq(") : -1]
    f, rest = _split_top(body, ";", 1)
    uv, f2 = _split_top(rest, ";", 1)
    u, v = _split_top(uv, ",", 1)
    return f, u, v, f2


def _split_top(text: str, sep: str, count: int) -> tuple[str, str]:
    depth = 0
    for k, ch in enumerate(text):
        if ch in "([<":
            depth += 1
        elif ch in ")]>":
            depth -= 1
        elif ch == sep and depth == 0:
            return text[:k], text[k + 1 :]
    raise ValueError(f"cannot split {text!r}")


def factorization_violations(TX: LabelledOpCategory) -> list[Violation]:
    """Every arrow is ``perm . lev`` in exactly one way, found by brute force."""
    C = TX.cat
    found = []
    for f in C.arrows:
        a, b = C.src(f), C.tgt(f)
        ways = []
        for m in C.objects:
            for l in C.hom(a, m):
                if not TX.is_levelwise(l):
                    continue
                for p in C.hom(m, b):
                    if TX.is_permutative(p) and C.then(l, p) == f:
                        ways.append((l, p))
        if len(ways) != 1 or ways[0] != TX.factor(f):
            found.append(Violation("FactorizationFail", (f,), f"{len(ways)} factorizations"))
    return found


# quotient by the symmetries


@dataclass
class QuotientResult:
    TX: LabelledOpCategory
    Q: FinCategory
    q: FinFunctor
    orbit: dict[str, str] = field(default_factory=dict)
    refined: bool = False


def quotient(TX: LabelledOpCategory) -> QuotientResult:
    """Objects are orbits under permutative arrows; arrows start as double cosets.

    Composition is ``[g][f] = [g . pi . f]`` for a permutative ``pi`` joining
    the ends.  When an orbit has non-trivial stabilisers and ``X`` has
    non-identity arrows, the double cosets need not be closed under this
    composition; the classes are then merged until every choice of ``pi``
    gives the same class (``refined`` is set).
    """
    C = TX.cat
    perm = TX.permutative()
    ouf = UnionFind(C.objects)
    for p in perm:
        ouf.union(C.src(p), C.tgt(p))
    perm_out: dict[str, list[str]] = {}
    perm_in: dict[str, list[str]] = {}
    perm_hom: dict[tuple[str, str], list[str]] = {}
    for p in perm:
        perm_out.setdefault(C.src(p), []).append(p)
        perm_in.setdefault(C.tgt(p), []).append(p)
        perm_hom.setdefault((C.src(p), C.tgt(p)), []).append(p)
    auf = UnionFind(C.arrows)
    for f in C.arrows:
        for p in perm_in.get(C.src(f), []):
            auf.union(f, C.then(p, f))
        for p in perm_out.get(C.tgt(f), []):
            auf.union(f, C.then(f, p))
    # on double cosets it is enough to compose one member of each class;
    # after a merge every member is tried
    refined = False
    while True:
        classes = list(auf.to_sets())
        by_orbit: dict[str, list[set[str]]] = {}
        for cls in classes:
            f = next(iter(cls))
            by_orbit.setdefault(ouf[C.src(f)], []).append(cls)
        merged = False
        for A in classes:
            f0 = next(iter(A))
            for B in by_orbit.get(ouf[C.tgt(f0)], []):
                seen = None
                for f in A if refined else (f0,):
                    for g in B if refined else (next(iter(B)),):
                        for p in perm_hom[(C.tgt(f), C.src(g))]:
                            h = C.then(C.then(f, p), g)
                            if seen is None:
                                seen = h
                            elif auf[h] != auf[seen]:
                                auf.union(h, seen)
                                merged = True
        if not merged:
            break
        refined = True
    oorder = {x: k for k, x in enumerate(C.objects)}
    aorder = {f: k for k, f in enumerate(C.arrows)}
    obj_rep = {}
    for cls in ouf.to_sets():
        r = min(cls, key=oorder.__getitem__)
        for x in cls:
            obj_rep[x] = r
    arr_rep = {}
    for cls in auf.to_sets():
        r = min(cls, key=aorder.__getitem__)
        for f in cls:
            arr_rep[f] = r

    def connect(b: str, b2: str) -> str:
        return perm_hom[(b, b2)][0]

    Q, q = quotient_category(C, obj_rep, arr_rep, connect, name="T/S X")
    return QuotientResult(TX, Q, q, dict(q.obj), refined)


def quotient_oracle(TX: LabelledOpCategory) -> tuple[FinCategory, FinFunctor]:
    """The same quotient by generic congruence closure."""
    return coidentify(TX.cat, [p for p in TX.permutative() if not TX.cat.is_identity(p)], name="T/S X")


def induced_map(src: QuotientResult, tgt: QuotientResult, F: FinFunctor) -> FinFunctor:
    """Descend ``q_tgt . F`` along ``q_src``; raises if it is not constant on classes."""
    obj, arr = {}, {}
    for x in src.TX.cat.objects:
        v = tgt.q.obj[F.obj[x]]
        if obj.setdefault(src.q.obj[x], v) != v:
            raise DescentFail(f"object class of {x!r} is not sent to one class")
    for f in src.TX.cat.arrows:
        v = tgt.q.arr[F.arr[f]]
        if arr.setdefault(src.q.arr[f], v) != v:
            raise DescentFail(f"arrow class of {f!r} is not sent to one class")
    return FinFunctor(src.Q, tgt.Q, obj, arr)


def quotient_over(result: QuotientResult) -> ObjOverI:
    TX = result.TX
    I = TX.anchor.cod
    obj = {result.q.obj[x]: TX.anchor.obj[x] for x in TX.cat.objects}
    return ObjOverI(result.Q, FinFunctor(result.Q, I, obj, {f: I.identity(obj[result.Q.src(f)]) for f in result.Q.arrows}))


@dataclass
class QuotientMonadReport:
    ok: bool
    violations: list[Violation]
    unit: FinFunctor
    mult: FinFunctor
    outer: QuotientResult


def tmodsigma_monad(T: TruncatedOperad, base: ObjOverI) -> QuotientMonadReport:
    """Unit and multiplication of the quotient monad at ``base``, by descent along ``q``.

    Checks that the multiplication descends, that ``q`` commutes with both
    structures, and the unit laws of the quotient.
    """
    TX = apply_T(T, base)
    qX = quotient(TX)
    TTX = apply_T2(TX)
    mu = mult(TX, TTX)
    eta = unit(TX)
    # (T/S)(T/S X) with the same truncation by arity of the labels
    QX = quotient_over(qX)
    orbit_arity = {qX.q.obj[x]: TX.arity(x) for x in TX.cat.objects}
    TQ = apply_T(T, QX, budget=Budget(lambda l: (orbit_arity[l],), (T.bound,)))
    qQ = quotient(TQ)
    Tq = apply_T_arrow(TTX, TQ, qX.q)
    found: list[Violation] = []
    obj, arr = {}, {}
    for w in TTX.cat.objects:
        key, v = qQ.q.obj[Tq.obj[w]], qX.q.obj[mu.obj[w]]
        if obj.setdefault(key, v) != v:
            found.append(Violation("DescentFail", ("object", w)))
    for u in TTX.cat.arrows:
        key, v = qQ.q.arr[Tq.arr[u]], qX.q.arr[mu.arr[u]]
        if arr.setdefault(key, v) != v:
            found.append(Violation("DescentFail", ("arrow", u)))
    missing = [z for z in qQ.Q.objects if z not in obj]
    for z in missing:
        found.append(Violation("DescentFail", ("not covered", z)))
    mu_q = FinFunctor(qQ.Q, qX.Q, obj, arr)
    eta_q = eta.then(qX.q)
    if not found:
        found += [Violation("DescentFail", ("multiplication",) + v.witness, v.kind) for v in mu_q.violations()]
    if not found:
        for z in qX.Q.objects:
            x = next(x for x in TX.cat.objects if qX.q.obj[x] == z)
            a, ls = TX.obj_data[x]
            left = qQ.q.obj[TQ.obj_index[(T.units[T.target(a)], (z,))]]
            if mu_q.obj[left] != z:
                found.append(Violation("LawViolation", ("unit_left", z)))
            right = qQ.q.obj[TQ.obj_index[(a, tuple(eta_q.obj[l] for l in ls))]]
            if mu_q.obj[right] != z:
                found.append(Violation("LawViolation", ("unit_right", z)))
    return QuotientMonadReport(not found, found, eta_q, mu_q, qQ)


# universal property of the quotient, checked at bounded size


@dataclass
class UPReport:
    ok: bool
    probes: int
    functors: int
    failures: list[str]


def coidentifier_up(
    C: FinCategory,
    gens: Iterable[str],
    Q: FinCategory,
    q: FinFunctor,
    max_size: int = 6,
    probes: Sequence[FinCategory] | None = None,
) -> UPReport:
    """Every functor killing ``gens`` factors through ``q`` in exactly one way.

    For each probe category ``K`` the set of functors ``C -> K`` sending
    ``gens`` to identities is compared with ``{h' . q}`` over all functors
    ``h' : Q -> K``, and ``h' -> h' . q`` must be injective.
    """
    gens = list(gens)
    killed = set(gens)
    glue = [(C.src(g), C.tgt(g)) for g in gens]
    probes = list(probes) if probes is not None else probe_categories(max_size)
    failures = []
    count = 0
    for K in probes:
        hs = {
            _key(h)
            for h in iter_functors(
                C, K, glue=glue, arrow_ok=lambda a, v: a not in killed or K.is_identity(v)
            )
        }
        count += len(hs)
        through = [_key(q.then(hp)) for hp in iter_functors(Q, K)]
        if len(set(through)) != len(through):
            failures.append(f"{K.name or K!r}: factorization not unique")
        if set(through) != hs:
            failures.append(f"{K.name or K!r}: factorizations do not match killing functors")
    return UPReport(not failures, len(probes), count, failures)


def _key(F: FinFunctor) -> tuple:
    return (tuple(sorted(F.obj.items())), tuple(sorted(F.arr.items())))
