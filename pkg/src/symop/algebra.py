"""Lax morphisms from an operad to Cat, lax T-algebras, and their maps.

A lax morphism ``H`` assigns a category ``H_i`` to every colour and a functor
``H_a : prod_j H_{i_j} -> H_i`` to every operation, with coherence cells

* ``xi[a, r]`` at ``y``:   ``H_{a r}(y_{r 1}, ..., y_{r n}) -> H_a(y)``
* ``nu[i]`` at ``x``:      ``x -> H_{1_i}(x)``
* ``sigma[a, bs]`` at ``z``: ``H_a(H_{b_1}(z_1), ..., H_{b_n}(z_n)) -> H_{a(b)}(z)``

Cells that are not listed are identities.  Axiom failures are reported under
location keys shared by the data-side and action-side checks, so the two
routes can be compared key by key.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Callable, Mapping, Sequence

from .fincat import (
    FinCategory,
    FinFunctor,
    Violation,
    coidentify,
    product,
    discrete,
    tup,
    validate_category,
)
from .operad import TruncatedOperad
from .perm import Permutation, all_perms, block_perm, shuffle_perm
from .tmonad import (
    Budget,
    DescentFail,
    LabelledOpCategory,
    ObjOverI,
    apply_T,
    apply_T2,
    apply_T_arrow,
    arity_budget,
    coidentifier_up,
    mult,
    mult_object,
    unit,
)

Key = tuple


class ShapeMismatch(ValueError):
    pass


class AxiomFail(AssertionError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__(f"axiom fails at {self.violations[0].witness}")


def _permuted(r: Permutation, xs: Sequence[str]) -> tuple[str, ...]:
    """``(x_{r 1}, ..., x_{r n})``."""
    return tuple(xs[r(j) - 1] for j in range(1, r.n + 1))


def _split(xs: Sequence[str], sizes: Sequence[int]) -> list[tuple[str, ...]]:
    out, k = [], 0
    for m in sizes:
        out.append(tuple(xs[k : k + m]))
        k += m
    return out


def _regroup(pairs: Sequence[tuple]) -> tuple[list, list]:
    """Split ``[(f_1, g_1), ..., (f_n, g_n)]`` into ``[f_j]`` and ``[g_j]``.

    The interleaved list ``f_1, g_1, f_2, ...`` is reordered by the shuffle.
    """
    n = len(pairs)
    inter = [x for p in pairs for x in p]
    sh = shuffle_perm(n)
    out = [None] * (2 * n)
    for j, x in enumerate(inter, start=1):
        out[sh(j) - 1] = x
    return out[:n], out[n:]


@dataclass
class AxiomReport:
    ok: bool
    violations: list[Violation]
    flags: dict[str, bool] = field(default_factory=dict)
    coverage: dict[str, int] = field(default_factory=dict)

    def locations(self) -> set[Key]:
        return {v.witness for v in self.violations}

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "flags": dict(self.flags),
            "violations": [v.as_dict() for v in self.violations],
            "coverage": dict(self.coverage),
        }


class _Recorder:
    def __init__(self):
        self.fails: dict[Key, str] = {}
        self.counts: Counter = Counter()

    def check(self, key: Key, ok: bool, detail: str = "") -> None:
        self.counts[key[0]] += 1
        if not ok and key not in self.fails:
            self.fails[key] = detail

    def report(self, flags: dict[str, bool] | None = None) -> AxiomReport:
        found = [Violation("AxiomFail", k, d) for k, d in self.fails.items()]
        return AxiomReport(not found, found, flags or {}, dict(sorted(self.counts.items())))


# lax morphisms given by their data


@dataclass
class LaxMorphismData:
    T: TruncatedOperad
    fibres: dict[str, FinCategory]
    products: dict[str, FinFunctor]
    symmetries: dict[tuple[str, Permutation], dict[str, str]] = field(default_factory=dict)
    units: dict[str, dict[str, str]] = field(default_factory=dict)
    substitutions: dict[tuple[str, tuple[str, ...]], dict[str, str]] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        self._domains: dict[tuple[str, ...], FinCategory] = {}
        missing = [a for a in self.T.arrows if a not in self.products]
        if missing:
            raise ShapeMismatch(f"no functor given for {missing[0]!r}")
        if set(self.fibres) != set(self.T.colours):
            raise ShapeMismatch("one fibre per colour is required")

    def domain(self, colours: Sequence[str]) -> FinCategory:
        key = tuple(colours)
        if key not in self._domains:
            self._domains[key] = product([self.fibres[c] for c in key])
        return self._domains[key]

    def points(self, colours: Sequence[str]) -> list[tuple[str, ...]]:
        return list(self.domain(colours).obj_parts.values())  # type: ignore[attr-defined]

    def moves(self, colours: Sequence[str]) -> list[tuple[str, ...]]:
        """Non-identity arrows of the product, as tuples."""
        P = self.domain(colours)
        return [P.parts[f] for f in P.nonidentity]  # type: ignore[attr-defined]

    def fibre_of(self, a: str) -> FinCategory:
        return self.fibres[self.T.target(a)]

    def H(self, a: str, ys: Sequence[str]) -> str:
        return self.products[a].obj[tup(ys)]

    def Ha(self, a: str, gs: Sequence[str]) -> str:
        return self.products[a].arr[tup(gs)]

    def xi(self, a: str, r: Permutation, ys: Sequence[str]) -> str:
        found = self.symmetries.get((a, r), {}).get(tup(ys))
        if found is not None:
            return found
        return self.fibre_of(a).identity(self.H(a, ys))

    def nu(self, i: str, x: str) -> str:
        found = self.units.get(i, {}).get(x)
        return found if found is not None else self.fibres[i].identity(x)

    def sigma(self, a: str, bs: Sequence[str], zs: Sequence[str]) -> str:
        found = self.substitutions.get((a, tuple(bs)), {}).get(tup(zs))
        if found is not None:
            return found
        blocks = _split(zs, [self.T.arity(b) for b in bs])
        return self.fibre_of(a).identity(self.H(a, [self.H(b, z) for b, z in zip(bs, blocks)]))

    def opposite(self) -> LaxMorphismData:
        """The same cells on opposite fibres, with ``xi`` inverted.

        Colax data becomes lax data this way.
        """
        fibres = {i: C.opposite() for i, C in self.fibres.items()}
        out = LaxMorphismData(
            self.T,
            fibres,
            {a: self.products[a] for a in self.T.arrows},
            {},
            {i: dict(c) for i, c in self.units.items()},
            {k: dict(c) for k, c in self.substitutions.items()},
            name=f"{self.name}^op" if self.name else "",
        )
        out.products = {
            a: FinFunctor(out.domain(self.T.source(a)), fibres[self.T.target(a)], F.obj, F.arr)
            for a, F in self.products.items()
        }
        for (a, r), comp in self.symmetries.items():
            V = self.fibre_of(a)
            inv = {}
            for y, f in comp.items():
                g = V.inverse(f)
                if g is None:
                    raise ShapeMismatch(f"symmetry cell of {a!r} at {y} is not invertible")
                inv[y] = g
            out.symmetries[(a, r)] = inv
        return out

    def to_dict(self) -> dict:
        out: dict = {}
        if self.name:
            out["name"] = self.name
        out["operad"] = self.T.to_dict()
        out["fibres"] = {i: C.to_dict() for i, C in self.fibres.items()}
        out["products"] = {a: F.to_dict() for a, F in self.products.items()}
        out["symmetries"] = [
            {"arrow": a, "perm": list(r.images), "components": dict(c)} for (a, r), c in self.symmetries.items()
        ]
        out["units"] = {i: dict(c) for i, c in self.units.items()}
        out["substitutions"] = [
            {"outer": a, "inners": list(bs), "components": dict(c)} for (a, bs), c in self.substitutions.items()
        ]
        return out

    @staticmethod
    def from_dict(raw: Mapping, T: TruncatedOperad | None = None) -> LaxMorphismData:
        if T is None:
            T = TruncatedOperad.from_dict(raw["operad"])
        fibres = {i: validate_category(c, name=i) for i, c in raw["fibres"].items()}
        shell = LaxMorphismData.__new__(LaxMorphismData)
        shell.fibres = fibres
        shell._domains = {}
        products = {}
        for a, F in raw["products"].items():
            if a not in T.arrows:
                raise ShapeMismatch(f"unknown operation {a!r}")
            products[a] = FinFunctor.from_dict(
                LaxMorphismData.domain(shell, T.source(a)), fibres[T.target(a)], F
            )
        D = LaxMorphismData(
            T,
            fibres,
            products,
            {(e["arrow"], Permutation.parse(e["perm"])): dict(e["components"]) for e in raw.get("symmetries", [])},
            {i: dict(c) for i, c in raw.get("units", {}).items()},
            {(e["outer"], tuple(e["inners"])): dict(e["components"]) for e in raw.get("substitutions", [])},
            name=raw.get("name", ""),
        )
        D._domains = shell._domains
        return D


def _check_cell(V: FinCategory, f: str, a: str, b: str, what: str) -> None:
    if not V.has_arrow(f) or V.src(f) != a or V.tgt(f) != b:
        raise ShapeMismatch(f"{what}: {f!r} is not an arrow {a!r} -> {b!r}")


def check_shapes(D: LaxMorphismData) -> None:
    """Raise ``ShapeMismatch`` unless every functor and cell has the right type."""
    T = D.T
    for a, F in D.products.items():
        if F.cod is not D.fibre_of(a) and F.cod.objects != D.fibre_of(a).objects:
            raise ShapeMismatch(f"functor of {a!r} lands in the wrong fibre")
        P = D.domain(T.source(a))
        for x in P.objects:
            if x not in F.obj or not F.cod.has_object(F.obj[x]):
                raise ShapeMismatch(f"functor of {a!r} misses object {x}")
        for f in P.arrows:
            g = F.arr.get(f)
            if g is None or not F.cod.has_arrow(g):
                raise ShapeMismatch(f"functor of {a!r} misses arrow {f}")
            if F.cod.src(g) != F.obj[P.src(f)] or F.cod.tgt(g) != F.obj[P.tgt(f)]:
                raise ShapeMismatch(f"functor of {a!r} sends {f} to an arrow with wrong ends")
    for a in T.arrows:
        V, src = D.fibre_of(a), T.source(a)
        for r in all_perms(len(src)):
            ar = T.act(a, r)
            for y in D.points(src):
                _check_cell(V, D.xi(a, r, y), D.H(ar, _permuted(r, y)), D.H(a, y), f"symmetry {a} {r} at {y}")
    for i in T.colours:
        for x in D.fibres[i].objects:
            _check_cell(D.fibres[i], D.nu(i, x), x, D.H(T.units[i], (x,)), f"unit at {x}")
    for a, bs, z in _substitution_points(D):
        V = D.fibre_of(a)
        blocks = _split(z, [T.arity(b) for b in bs])
        lhs = D.H(a, [D.H(b, zb) for b, zb in zip(bs, blocks)])
        _check_cell(V, D.sigma(a, bs, z), lhs, D.H(T.compose(a, bs), z), f"substitution {a} {bs} at {z}")


def _flat_sources(T: TruncatedOperad, bs: Sequence[str]) -> tuple[str, ...]:
    return tuple(c for b in bs for c in T.source(b))


def _substitutions(T: TruncatedOperad):
    for a in T.arrows:
        for bs in T.inner_tuples(T.source(a), T.bound):
            if T.compose(a, bs) is not None:
                yield a, bs


def _substitution_points(D: LaxMorphismData):
    for a, bs in _substitutions(D.T):
        for z in D.points(_flat_sources(D.T, bs)):
            yield a, bs, z


def validate_lax_morphism(D: LaxMorphismData) -> AxiomReport:
    """Check the axioms of a lax morphism directly on its data.

    Flags: ``lax`` when all axioms hold, ``pseudo`` when additionally the unit
    and substitution cells are invertible, ``strict`` when they are
    identities, ``commutative`` when the symmetry cells are identities.
    """
    check_shapes(D)
    T = D.T
    rec = _Recorder()
    for a, F in D.products.items():
        bad = F.violations()
        rec.check(("products", a), not bad, bad[0].kind if bad else "")
    commutative = True
    for a in T.arrows:
        V, src = D.fibre_of(a), T.source(a)
        perms = all_perms(len(src))
        pts = D.points(src)
        one = Permutation.identity(len(src))
        for y in pts:
            rec.check(("symmetry_identity", a), V.is_identity(D.xi(a, one, y)), f"at {tup(y)}")
        for r1 in perms:
            a1 = T.act(a, r1)
            for r2 in perms:
                for y in pts:
                    lhs = D.xi(a, r1 * r2, y)
                    rhs = V.then(D.xi(a1, r2, _permuted(r1, y)), D.xi(a, r1, y))
                    rec.check(("symmetry_composition", a, str(r1), str(r2)), lhs == rhs, f"at {tup(y)}")
        moves = D.moves(src)
        for r in perms:
            ar = T.act(a, r)
            for y in pts:
                commutative = commutative and V.is_identity(D.xi(a, r, y))
            for gs in moves:
                ys, ys2 = _ends_src(D, src, gs), _ends_tgt(D, src, gs)
                lhs = V.then(D.xi(a, r, ys), D.Ha(a, gs))
                rhs = V.then(D.Ha(ar, _permuted(r, gs)), D.xi(a, r, ys2))
                rec.check(("symmetry_naturality", a, str(r)), lhs == rhs, f"along {tup(gs)}")
    pseudo = strict = True
    for i in T.colours:
        C, u = D.fibres[i], T.units[i]
        for x in C.objects:
            c = D.nu(i, x)
            strict = strict and C.is_identity(c)
            pseudo = pseudo and C.inverse(c) is not None
        for g in C.nonidentity:
            lhs = C.then(g, D.nu(i, C.tgt(g)))
            rhs = C.then(D.nu(i, C.src(g)), D.Ha(u, (g,)))
            rec.check(("unit_naturality", i), lhs == rhs, f"along {g}")
    for a, bs in _substitutions(T):
        V = D.fibre_of(a)
        c = T.compose(a, bs)
        flat = _flat_sources(T, bs)
        sizes = [T.arity(b) for b in bs]
        for z in D.points(flat):
            s = D.sigma(a, bs, z)
            strict = strict and V.is_identity(s)
            pseudo = pseudo and V.inverse(s) is not None
        for gs in D.moves(flat):
            z, z2 = _ends_src(D, flat, gs), _ends_tgt(D, flat, gs)
            lhs = V.then(D.sigma(a, bs, z), D.Ha(c, gs))
            inner = [D.Ha(b, gb) for b, gb in zip(bs, _split(gs, sizes))]
            rhs = V.then(D.Ha(a, inner), D.sigma(a, bs, z2))
            rec.check(("substitution_naturality", a, bs), lhs == rhs, f"along {tup(gs)}")
    for a in T.arrows:
        V, src = D.fibre_of(a), T.source(a)
        i = T.target(a)
        ones = tuple(T.units[c] for c in src)
        for y in D.points(src):
            hy = D.H(a, y)
            left = V.then(D.nu(i, hy), D.sigma(T.units[i], (a,), y))
            rec.check(("unit_left", a), V.is_identity(left), f"at {tup(y)}")
            right = V.then(D.Ha(a, [D.nu(c, x) for c, x in zip(src, y)]), D.sigma(a, ones, y))
            rec.check(("unit_right", a), V.is_identity(right), f"at {tup(y)}")
    for a, bs in _substitutions(T):
        _symmetry_substitution(D, a, bs, rec)
        _associativity(D, a, bs, rec)
    ok = not rec.fails
    flags = {
        "lax": ok,
        "pseudo": ok and pseudo,
        "strict": ok and strict,
        "commutative": ok and commutative,
    }
    return rec.report(flags)


def _ends_src(D: LaxMorphismData, colours: Sequence[str], gs: Sequence[str]) -> tuple[str, ...]:
    return tuple(D.fibres[c].src(g) for c, g in zip(colours, gs))


def _ends_tgt(D: LaxMorphismData, colours: Sequence[str], gs: Sequence[str]) -> tuple[str, ...]:
    return tuple(D.fibres[c].tgt(g) for c, g in zip(colours, gs))


def _symmetry_substitution(D: LaxMorphismData, a: str, bs: tuple[str, ...], rec: _Recorder) -> None:
    T = D.T
    V = D.fibre_of(a)
    c = T.compose(a, bs)
    sizes = [T.arity(b) for b in bs]
    flat = _flat_sources(T, bs)
    pts = D.points(flat)
    for r in all_perms(len(bs)):
        ar = T.act(a, r)
        for rs in cartesian(*(all_perms(m) for m in sizes)):
            pi = block_perm(r, rs)
            moved = tuple(T.act(bs[r(j) - 1], rs[r(j) - 1]) for j in range(1, r.n + 1))
            key = ("symmetry_substitution", a, bs, str(r), tuple(str(s) for s in rs))
            for z in pts:
                w = _permuted(pi, z)
                route_a = V.then(D.sigma(ar, moved, w), D.xi(c, pi, z))
                zb = _split(z, sizes)
                u = [D.H(b, zk) for b, zk in zip(bs, zb)]
                inner = [D.xi(bs[r(j) - 1], rs[r(j) - 1], zb[r(j) - 1]) for j in range(1, r.n + 1)]
                route_b = V.then(V.then(D.Ha(ar, inner), D.xi(a, r, u)), D.sigma(a, bs, z))
                rec.check(key, route_a == route_b, f"at {tup(z)}")


def _associativity(D: LaxMorphismData, a: str, bs: tuple[str, ...], rec: _Recorder) -> None:
    T = D.T
    V = D.fibre_of(a)
    c = T.compose(a, bs)
    flat_b = _flat_sources(T, bs)
    for gs in T.inner_tuples(flat_b, T.bound):
        cg = T.compose(c, gs)
        if cg is None:
            continue
        gblocks = _split(gs, [T.arity(b) for b in bs])
        key = ("associativity", a, bs, gs)
        for z in D.points(_flat_sources(T, gs)):
            zg = _split(z, [T.arity(g) for g in gs])
            hz = [D.H(g, x) for g, x in zip(gs, zg)]
            bottom = V.then(D.sigma(a, bs, hz), D.sigma(c, gs, z))
            zb = _split(z, [sum(T.arity(g) for g in blk) for blk in gblocks])
            outer, inner = _regroup(list(zip(bs, zip(gblocks, zb))))
            cells = [D.sigma(b, g, zz) for b, (g, zz) in zip(outer, inner)]
            composed = tuple(T.compose(b, g) for b, (g, _) in zip(outer, inner))
            top = V.then(D.Ha(a, cells), D.sigma(a, composed, z))
            rec.check(key, top == bottom, f"at {tup(z)}")


def validate_colax_morphism(D: LaxMorphismData) -> AxiomReport:
    """Colax data (unit and substitution cells pointing the other way), checked on opposite fibres."""
    return validate_lax_morphism(D.opposite())


def same_data(D1: LaxMorphismData, D2: LaxMorphismData) -> bool:
    """Equal functors and equal cells at every point, listed or not."""
    T = D1.T
    if set(D1.fibres) != set(D2.fibres):
        return False
    for i in T.colours:
        if D1.fibres[i].signature() != D2.fibres[i].signature():
            return False
    for a in T.arrows:
        if not D1.products[a].same_as(D2.products[a]):
            return False
        n = T.arity(a)
        for r in all_perms(n):
            for y in D1.points(T.source(a)):
                if D1.xi(a, r, y) != D2.xi(a, r, y):
                    return False
    for i in T.colours:
        for x in D1.fibres[i].objects:
            if D1.nu(i, x) != D2.nu(i, x):
                return False
    return all(D1.sigma(a, bs, z) == D2.sigma(a, bs, z) for a, bs, z in _substitution_points(D1))


# lax T-algebras


def fibre_sum(fibres: Mapping[str, FinCategory], colours: Sequence[str]) -> ObjOverI:
    """Disjoint union of the fibres as a category over the colours; ids must not clash."""
    owner: dict[str, FinCategory] = {}
    colour: dict[str, str] = {}
    objects, arrows, ids = [], {}, {}
    for i in colours:
        C = fibres[i]
        for x in C.objects:
            if x in colour:
                raise ShapeMismatch(f"object {x!r} occurs in two fibres")
            colour[x] = i
            objects.append(x)
            ids[x] = C.identity(x)
        for f in C.arrows:
            if f in owner:
                raise ShapeMismatch(f"arrow {f!r} occurs in two fibres")
            owner[f] = C
        for f in C.nonidentity:
            arrows[f] = (C.src(f), C.tgt(f))
    X = FinCategory(objects, arrows, lambda f, g: owner[f].then(f, g), identities=ids, name="H")
    return ObjOverI.over(X, colour, colours)


@dataclass
class LaxAction:
    """An action ``a : TH -> H`` with cells ``x -> a(eta x)`` and ``a(Ta w) -> a(mu w)``."""

    T: TruncatedOperad
    H: ObjOverI
    TH: LabelledOpCategory
    action: FinFunctor
    unit_cell: dict[str, str]
    TTH: LabelledOpCategory
    mult_cell: dict[str, str]


def data_to_action(D: LaxMorphismData) -> LaxAction:
    T = D.T
    H = fibre_sum(D.fibres, T.colours)
    TH = apply_T(T, H)
    X = H.X
    obj = {x: D.H(a, ys) for x, (a, ys) in TH.obj_data.items()}
    arr = {}
    for f, (a, r, gs) in TH.arr_data.items():
        ys = TH.labels(TH.cat.tgt(f))
        arr[f] = X.then(D.Ha(T.act(a, r), gs), D.xi(a, r, ys))
    act = FinFunctor(TH.cat, X, obj, arr)
    unit_cell = {x: D.nu(H.colour(x), x) for x in X.objects}
    TTH = apply_T2(TH)
    mult_cell = {}
    for w, (a, ls) in TTH.obj_data.items():
        bs = tuple(TH.op(l) for l in ls)
        z = tuple(x for l in ls for x in TH.labels(l))
        mult_cell[w] = D.sigma(a, bs, z)
    return LaxAction(T, H, TH, act, unit_cell, TTH, mult_cell)


def action_to_data(A: LaxAction) -> LaxMorphismData:
    T, TH, X = A.T, A.TH, A.H.X
    fibres = {i: X.full_subcategory(A.H.fibre(i), name=i) for i in T.colours}
    shell = LaxMorphismData(T, fibres, {a: None for a in T.arrows})  # type: ignore[misc]
    products = {}
    for a in T.arrows:
        src = T.source(a)
        P = shell.domain(src)
        one = Permutation.identity(len(src))
        obj = {tup(ys): A.action.obj[TH.obj_index[(a, ys)]] for ys in shell.points(src)}
        arr = {f: A.action.arr[TH.arr_index[(a, one, gs)]] for f, gs in P.parts.items()}  # type: ignore[attr-defined]
        products[a] = FinFunctor(P, fibres[T.target(a)], obj, arr)
    shell.products = products
    for a in T.arrows:
        src = T.source(a)
        for r in all_perms(len(src)):
            comp = {}
            for ys in shell.points(src):
                ids = tuple(X.identity(y) for y in _permuted(r, ys))
                comp[tup(ys)] = A.action.arr[TH.arr_index[(a, r, ids)]]
            shell.symmetries[(a, r)] = comp
    for i in T.colours:
        shell.units[i] = {x: A.unit_cell[x] for x in fibres[i].objects}
    for a, bs, z in _substitution_points(shell):
        blocks = _split(z, [T.arity(b) for b in bs])
        labels = tuple(TH.obj_index[(b, zb)] for b, zb in zip(bs, blocks))
        shell.substitutions.setdefault((a, bs), {})[tup(z)] = A.mult_cell[A.TTH.obj_index[(a, labels)]]
    return shell


def validate_lax_action(A: LaxAction) -> AxiomReport:
    """Check a lax action using only ``a``, its two cells, and the monad structure.

    Failures are classified by the kind of arrow along which they occur:
    pairs of levelwise arrows, pairs of permutative arrows, a permutative
    arrow followed by a levelwise one, and naturality of the cells along
    levelwise or permutative arrows of ``TTH``.
    """
    T, TH, TTH, X = A.T, A.TH, A.TTH, A.H.X
    a = A.action
    rec = _Recorder()
    one = {n: Permutation.identity(n) for n in range(T.bound + 1)}
    for y, (op, ys) in TH.obj_data.items():
        rec.check(("symmetry_identity", op), X.is_identity(a.arr[TH.cat.identity(y)]), f"at {tup(ys)}")
    lev = [f for f in TH.cat.nonidentity if TH.is_levelwise(f)]
    lev_out: dict[str, list[str]] = {}
    for f in lev:
        lev_out.setdefault(TH.cat.src(f), []).append(f)
    for f in lev:
        for g in lev_out.get(TH.cat.tgt(f), []):
            ok = a.arr[TH.cat.then(f, g)] == X.then(a.arr[f], a.arr[g])
            rec.check(("products", TH.arr_data[f][0]), ok, f"{f} then {g}")
    for y, (op, ys) in TH.obj_data.items():
        n = len(ys)
        for r1 in all_perms(n):
            mid = _permuted(r1, ys)
            g = TH.arr_index[(op, r1, tuple(X.identity(x) for x in mid))]
            op1 = T.act(op, r1)
            for r2 in all_perms(n):
                f = TH.arr_index[(op1, r2, tuple(X.identity(x) for x in _permuted(r2, mid)))]
                ok = a.arr[TH.cat.then(f, g)] == X.then(a.arr[f], a.arr[g])
                rec.check(("symmetry_composition", op, str(r1), str(r2)), ok, f"at {tup(ys)}")
        for r in all_perms(n):
            f = TH.arr_index[(op, r, tuple(X.identity(x) for x in _permuted(r, ys)))]
            for g in lev_out.get(y, []):
                ok = a.arr[TH.cat.then(f, g)] == X.then(a.arr[f], a.arr[g])
                rec.check(("symmetry_naturality", op, str(r)), ok, f"along {g}")
    eta = unit(TH)
    for g in X.nonidentity:
        lhs = X.then(g, A.unit_cell[X.tgt(g)])
        rhs = X.then(A.unit_cell[X.src(g)], a.arr[eta.arr[g]])
        rec.check(("unit_naturality", A.H.colour(X.src(g))), lhs == rhs, f"along {g}")
    mu = mult(TH, TTH)
    Ta = apply_T_arrow(TTH, TH, a)
    for u, (op, r, gs) in TTH.arr_data.items():
        w, w2 = TTH.cat.src(u), TTH.cat.tgt(u)
        targets = TTH.labels(w2)
        bs = tuple(TH.op(l) for l in targets)
        if all(TH.is_permutative(g) for g in gs):
            rs = [None] * r.n
            for j, g in enumerate(gs, start=1):
                rs[r(j) - 1] = str(TH.arr_data[g][1])
            key: Key = ("symmetry_substitution", op, bs, str(r), tuple(rs))
        elif r.is_identity() and all(TH.is_levelwise(g) for g in gs):
            key = ("substitution_naturality", op, bs)
        else:
            continue
        lhs = X.then(A.mult_cell[w], a.arr[mu.arr[u]])
        rhs = X.then(a.arr[Ta.arr[u]], A.mult_cell[w2])
        rec.check(key, lhs == rhs, f"along {u}")
    for t, (op, ys) in TH.obj_data.items():
        i = T.target(op)
        at = a.obj[t]
        left = X.then(A.unit_cell[at], A.mult_cell[TTH.obj_index[(T.units[i], (t,))]])
        rec.check(("unit_left", op), X.is_identity(left), f"at {tup(ys)}")
        lifted = TH.arr_index[(op, one[len(ys)], tuple(A.unit_cell[x] for x in ys))]
        etas = tuple(eta.obj[x] for x in ys)
        right = X.then(a.arr[lifted], A.mult_cell[TTH.obj_index[(op, etas)]])
        rec.check(("unit_right", op), X.is_identity(right), f"at {tup(ys)}")
    N = T.bound

    def weight3(l: str) -> tuple[int, int]:
        return TTH.arity(l), sum(TH.arity(m) for m in TTH.labels(l))

    TTTH = apply_T(T, TTH.as_base(), budget=Budget(weight3, (N, N)), with_arrows=False)
    for W, (op, ws) in TTTH.obj_data.items():
        bs = tuple(TTH.op(w) for w in ws)
        gs = tuple(TH.op(l) for w in ws for l in TTH.labels(w))
        squashed = TTH.obj_index[(op, tuple(Ta.obj[w] for w in ws))]
        bottom = X.then(A.mult_cell[squashed], A.mult_cell[mult_object(TTH, op, ws)])
        n = len(ws)
        cells = TH.arr_index[(op, one[n], tuple(A.mult_cell[w] for w in ws))]
        top = X.then(a.arr[cells], A.mult_cell[TTH.obj_index[(op, tuple(mu.obj[w] for w in ws))]])
        z = [x for w in ws for l in TTH.labels(w) for x in TH.labels(l)]
        rec.check(("associativity", op, bs, gs), top == bottom, f"at {tup(z)}")
    return rec.report()


# strict algebras and the commutative reflection


@dataclass
class StrictTAlgebra:
    """A strict action ``TX -> X``; ``TX`` may be truncated by the caller."""

    T: TruncatedOperad
    base: ObjOverI
    TX: LabelledOpCategory
    action: FinFunctor

    def law_violations(self) -> list[Violation]:
        T, TX, X, a = self.T, self.TX, self.base.X, self.action
        found = [Violation("NotFunctor", v.witness, v.kind) for v in a.violations()]
        if found:
            return found
        for u in TX.cat.objects:
            if self.base.colour(a.obj[u]) != TX.anchor.obj[u]:
                found.append(Violation("ColourMismatch", (u,)))
        for x in X.objects:
            e = TX.obj_index.get((T.units[self.base.colour(x)], (x,)))
            if e is None or a.obj[e] != x:
                found.append(Violation("UnitLaw", (x,)))
        for g in X.nonidentity:
            e = TX.arr_index.get((T.units[self.base.colour(X.src(g))], Permutation.identity(1), (g,)))
            if e is None or a.arr[e] != g:
                found.append(Violation("UnitLaw", (g,)))
        TTX = self.iterated()
        mu = mult(TX, TTX)
        for w, (op, ls) in TTX.obj_data.items():
            if a.obj[TX.obj_index[(op, tuple(a.obj[l] for l in ls))]] != a.obj[mu.obj[w]]:
                found.append(Violation("AssociativityLaw", (w,)))
        for u, (op, r, gs) in TTX.arr_data.items():
            if a.arr[TX.arr_index[(op, r, tuple(a.arr[g] for g in gs))]] != a.arr[mu.arr[u]]:
                found.append(Violation("AssociativityLaw", (u,)))
        return found

    def iterated(self) -> LabelledOpCategory:
        """The part of ``T TX`` on which both ``a . Ta`` and ``a . mu`` are defined."""
        TX, a, T = self.TX, self.action, self.T

        def admit(op: str, ls: tuple[str, ...]) -> bool:
            if (op, tuple(a.obj[l] for l in ls)) not in TX.obj_index:
                return False
            c = T.compose(op, tuple(TX.op(l) for l in ls))
            return c is not None and (c, tuple(x for l in ls for x in TX.labels(l))) in TX.obj_index

        return apply_T(T, TX.as_base(), admit=admit, budget=arity_budget(TX, T.bound))

    def is_commutative(self) -> bool:
        X = self.base.X
        return all(X.is_identity(self.action.arr[p]) for p in self.TX.permutative())


def strict_algebra(D: LaxMorphismData) -> StrictTAlgebra:
    """The strict algebra of data whose unit and substitution cells are identities."""
    A = data_to_action(D)
    X = A.H.X
    if not all(X.is_identity(c) for c in A.unit_cell.values()) or not all(
        X.is_identity(c) for c in A.mult_cell.values()
    ):
        raise ShapeMismatch("unit and substitution cells must be identities")
    return StrictTAlgebra(D.T, A.H, A.TH, A.action)


def free_algebra(T: TruncatedOperad, Z: ObjOverI) -> StrictTAlgebra:
    """``TZ`` acted on by the multiplication, on the part where it is defined."""
    TZ = apply_T(T, Z)
    TTZ = apply_T2(TZ)
    return StrictTAlgebra(T, TZ.as_base(), TTZ, mult(TZ, TTZ))


@dataclass
class Commutativized:
    algebra: StrictTAlgebra
    r: FinFunctor
    gens: list[str]
    source: StrictTAlgebra


def commutativize(A: StrictTAlgebra) -> Commutativized:
    """Coidentify the images of all permutative arrows and descend the action."""
    T, TX, X, a = A.T, A.TX, A.base.X, A.action
    gens = sorted({a.arr[p] for p in TX.permutative()} - {X.identity(x) for x in X.objects})
    C, r = coidentify(X, gens, name="C")
    colour = {r.obj[x]: A.base.colour(x) for x in X.objects}
    Cbase = ObjOverI.over(C, colour, A.base.colours)
    image = {(op, tuple(r.obj[l] for l in ls)) for op, ls in TX.obj_data.values()}
    TC = apply_T(T, Cbase, admit=lambda op, ls: (op, ls) in image)
    Tr = apply_T_arrow(TX, TC, r)
    obj, arr = {}, {}
    for u in TX.cat.objects:
        key, v = Tr.obj[u], r.obj[a.obj[u]]
        if obj.setdefault(key, v) != v:
            raise DescentFail(f"action does not descend at object {u}")
    for f in TX.cat.arrows:
        key, v = Tr.arr[f], r.arr[a.arr[f]]
        if arr.setdefault(key, v) != v:
            raise DescentFail(f"action does not descend at arrow {f}")
    missing = [f for f in TC.cat.arrows if f not in arr]
    if missing:
        raise DescentFail(f"arrow {missing[0]} of the image is not reached")
    c = FinFunctor(TC.cat, C, obj, arr)
    return Commutativized(StrictTAlgebra(T, Cbase, TC, c), r, gens, A)


def commutativize_up(result: Commutativized, max_size: int = 6):
    """Bounded check that ``r`` is universal among functors killing the generators."""
    X = result.source.base.X
    return coidentifier_up(X, result.gens, result.algebra.base.X, result.r, max_size=max_size)


# lax natural transformations and modifications


@dataclass
class LaxNatData:
    """Functors ``f_i : H_i -> K_i`` with cells ``K_a(f y) -> f_i(H_a y)``."""

    dom: LaxMorphismData
    cod: LaxMorphismData
    components: dict[str, FinFunctor]
    cells: dict[str, dict[str, str]] = field(default_factory=dict)

    def cell(self, a: str, ys: Sequence[str]) -> str:
        found = self.cells.get(a, {}).get(tup(ys))
        if found is not None:
            return found
        i = self.dom.T.target(a)
        return self.cod.fibres[i].identity(self.components[i].obj[self.dom.H(a, ys)])

    def fo(self, colour: str, x: str) -> str:
        return self.components[colour].obj[x]

    def fa(self, colour: str, g: str) -> str:
        return self.components[colour].arr[g]

    def opposite(self) -> LaxNatData:
        H, K = self.dom.opposite(), self.cod.opposite()
        comps = {i: FinFunctor(H.fibres[i], K.fibres[i], F.obj, F.arr) for i, F in self.components.items()}
        return LaxNatData(H, K, comps, {a: dict(c) for a, c in self.cells.items()})


def validate_lax_natural(F: LaxNatData) -> AxiomReport:
    H, K, T = F.dom, F.cod, F.dom.T
    rec = _Recorder()
    for i in T.colours:
        bad = F.components[i].violations()
        rec.check(("components", i), not bad, bad[0].kind if bad else "")
    if rec.fails:
        return rec.report()
    strict = pseudo = True
    for a in T.arrows:
        i, src = T.target(a), T.source(a)
        V = K.fibres[i]
        for y in H.points(src):
            fy = [F.fo(c, x) for c, x in zip(src, y)]
            cell = F.cell(a, y)
            _check_cell(V, cell, K.H(a, fy), F.fo(i, H.H(a, y)), f"cell of {a} at {tup(y)}")
            strict = strict and V.is_identity(cell)
            pseudo = pseudo and V.inverse(cell) is not None
        for gs in H.moves(src):
            y, y2 = _ends_src(H, src, gs), _ends_tgt(H, src, gs)
            fg = [F.fa(c, g) for c, g in zip(src, gs)]
            lhs = V.then(F.cell(a, y), F.fa(i, H.Ha(a, gs)))
            rhs = V.then(K.Ha(a, fg), F.cell(a, y2))
            rec.check(("cell_naturality", a), lhs == rhs, f"along {tup(gs)}")
        for r in all_perms(len(src)):
            ar = T.act(a, r)
            for y in H.points(src):
                fy = [F.fo(c, x) for c, x in zip(src, y)]
                top = V.then(F.cell(ar, _permuted(r, y)), F.fa(i, H.xi(a, r, y)))
                left = V.then(K.xi(a, r, fy), F.cell(a, y))
                rec.check(("symmetry", a, str(r)), top == left, f"at {tup(y)}")
    for i in T.colours:
        V, u = K.fibres[i], T.units[i]
        for x in H.fibres[i].objects:
            lhs = V.then(K.nu(i, F.fo(i, x)), F.cell(u, (x,)))
            rec.check(("unit", i), lhs == F.fa(i, H.nu(i, x)), f"at {x}")
    for a, bs, z in _substitution_points(H):
        i = T.target(a)
        V = K.fibres[i]
        c = T.compose(a, bs)
        flat = _flat_sources(T, bs)
        sizes = [T.arity(b) for b in bs]
        blocks = _split(z, sizes)
        fz = [F.fo(col, x) for col, x in zip(flat, z)]
        inner = K.Ha(a, [F.cell(b, zb) for b, zb in zip(bs, blocks)])
        hz = [H.H(b, zb) for b, zb in zip(bs, blocks)]
        route1 = V.then(V.then(inner, F.cell(a, hz)), F.fa(i, H.sigma(a, bs, z)))
        route2 = V.then(K.sigma(a, bs, fz), F.cell(c, z))
        rec.check(("substitution", a, bs), route1 == route2, f"at {tup(z)}")
    ok = not rec.fails
    return rec.report({"lax": ok, "pseudo": ok and pseudo, "strict": ok and strict})


def validate_colax_natural(F: LaxNatData) -> AxiomReport:
    """Colax transformations between colax morphisms, checked on opposite fibres."""
    return validate_lax_natural(F.opposite())


@dataclass
class ModificationData:
    """Components ``psi_i`` at each object of ``H_i``: ``f_i x -> g_i x``."""

    dom: LaxNatData
    cod: LaxNatData
    components: dict[str, dict[str, str]]


def validate_modification(M: ModificationData) -> AxiomReport:
    f, g = M.dom, M.cod
    H, K, T = f.dom, f.cod, f.dom.T
    rec = _Recorder()
    for i in T.colours:
        V = K.fibres[i]
        psi = M.components[i]
        for x in H.fibres[i].objects:
            _check_cell(V, psi[x], f.fo(i, x), g.fo(i, x), f"component at {x}")
        for h in H.fibres[i].nonidentity:
            lhs = V.then(psi[H.fibres[i].src(h)], g.fa(i, h))
            rhs = V.then(f.fa(i, h), psi[H.fibres[i].tgt(h)])
            rec.check(("component_naturality", i), lhs == rhs, f"along {h}")
    for a in T.arrows:
        i, src = T.target(a), T.source(a)
        V = K.fibres[i]
        for y in H.points(src):
            lhs = V.then(f.cell(a, y), M.components[i][H.H(a, y)])
            spread = K.Ha(a, [M.components[c][x] for c, x in zip(src, y)])
            rhs = V.then(spread, g.cell(a, y))
            rec.check(("modification", a), lhs == rhs, f"at {tup(y)}")
    return rec.report()


# symmetric monoidal categories and algebras in them


@dataclass
class SymMonCat:
    """A strict monoidal category with a symmetry.

    ``symmetry(r, ys)`` is the arrow ``(x) y_{r j} -> (x) y_j``.
    """

    V: FinCategory
    unit_obj: str
    tensor_obj: Callable[[Sequence[str]], str]
    tensor_arr: Callable[[Sequence[str]], str]
    symmetry: Callable[[Permutation, Sequence[str]], str]


def sign_category() -> SymMonCat:
    """Objects ``0`` and ``1`` with automorphisms ``+1`` and ``-1``.

    Tensor adds degrees mod 2 and multiplies signs; swapping two odd objects
    costs a sign.
    """
    V = FinCategory(
        ["0", "1"],
        {"-0": ("0", "0"), "-1": ("1", "1")},
        {("-0", "-0"): "1_0", ("-1", "-1"): "1_1"},
        name="Sign",
    )

    def degree(x: str) -> int:
        return int(x)

    def tensor_obj(ys: Sequence[str]) -> str:
        return str(sum(map(degree, ys)) % 2)

    def arrow(x: str, s: int) -> str:
        return f"1_{x}" if s > 0 else f"-{x}"

    def tensor_arr(gs: Sequence[str]) -> str:
        s = 1
        for g in gs:
            if g.startswith("-"):
                s = -s
        return arrow(tensor_obj([V.src(g) for g in gs]), s)

    def symmetry(r: Permutation, ys: Sequence[str]) -> str:
        s = 1
        for j in range(1, r.n + 1):
            for k in range(j + 1, r.n + 1):
                if r(j) > r(k) and degree(ys[r(j) - 1]) and degree(ys[r(k) - 1]):
                    s = -s
        return arrow(tensor_obj(ys), s)

    return SymMonCat(V, "0", tensor_obj, tensor_arr, symmetry)


def v_bullet(T: TruncatedOperad, M: SymMonCat, name: str = "V") -> LaxMorphismData:
    """Every colour goes to ``V``, every operation to the tensor, ``xi`` to the symmetry."""
    fibres = {i: M.V for i in T.colours}
    D = LaxMorphismData(T, fibres, {a: None for a in T.arrows}, name=name)  # type: ignore[misc]
    for a in T.arrows:
        P = D.domain(T.source(a))
        obj = {x: M.tensor_obj(p) for x, p in P.obj_parts.items()}  # type: ignore[attr-defined]
        arr = {f: M.tensor_arr(p) for f, p in P.parts.items()}  # type: ignore[attr-defined]
        D.products[a] = FinFunctor(P, M.V, obj, arr)
    for a in T.arrows:
        src = T.source(a)
        for r in all_perms(len(src)):
            comp = {tup(y): M.symmetry(r, y) for y in D.points(src)}
            comp = {k: v for k, v in comp.items() if not M.V.is_identity(v)}
            if comp:
                D.symmetries[(a, r)] = comp
    return D


def terminal_morphism(T: TruncatedOperad) -> LaxMorphismData:
    """One object per colour: ``*`` for one colour, ``*i`` otherwise, so fibres stay disjoint."""
    several = len(T.colours) > 1
    fibres = {i: discrete([f"*{i}" if several else "*"], name="1") for i in T.colours}
    D = LaxMorphismData(T, fibres, {a: None for a in T.arrows}, name="1")  # type: ignore[misc]
    for a in T.arrows:
        one = fibres[T.target(a)]
        D.products[a] = FinFunctor.constant(D.domain(T.source(a)), one, one.objects[0])
    return D


def algebra_in(T: TruncatedOperad, M: SymMonCat, objects: Mapping[str, str], maps: Mapping[str, str]) -> LaxNatData:
    """A candidate algebra: an object per colour and a map ``(x) A_{i_j} -> A_i`` per operation."""
    one, V = terminal_morphism(T), v_bullet(T, M)
    comps = {i: FinFunctor.constant(one.fibres[i], M.V, objects[i]) for i in T.colours}
    star = {i: one.fibres[i].objects[0] for i in T.colours}
    cells = {a: {tup([star[c] for c in T.source(a)]): maps[a]} for a in T.arrows}
    return LaxNatData(one, V, comps, cells)


def algebra_map(A: LaxNatData, B: LaxNatData, maps: Mapping[str, str]) -> ModificationData:
    return ModificationData(A, B, {i: {A.dom.fibres[i].objects[0]: f} for i, f in maps.items()})


# small fixtures


def monoid_morphism(
    T: TruncatedOperad,
    elements: Sequence[str],
    op: Callable[[str, str], str],
    neutral: str,
    word: Callable[[str], Sequence[int]] | None = None,
) -> LaxMorphismData:
    """A discrete monoid as a one-colour strict morphism.

    ``word(a)`` lists the variables of ``a`` in the order they are multiplied
    (default: ``1..n``).
    """
    (colour,) = T.colours
    M = FinCategory(elements, {}, {}, name="M")
    D = LaxMorphismData(T, {colour: M}, {a: None for a in T.arrows}, name="monoid")  # type: ignore[misc]
    for a in T.arrows:
        n = T.arity(a)
        order = list(word(a)) if word is not None else list(range(1, n + 1))
        P = D.domain(T.source(a))
        obj = {}
        for x, ys in P.obj_parts.items():  # type: ignore[attr-defined]
            v = neutral
            for k in order:
                v = op(v, ys[k - 1])
            obj[x] = v
        D.products[a] = FinFunctor(P, M, obj)
    return D

