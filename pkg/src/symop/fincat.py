"""Finite categories given by explicit objects, arrows and composition.

Identities are implicit: every object carries exactly one identity arrow,
named ``1_<object>`` unless a construction supplies its own name.  Object
and arrow ids are opaque strings; constructions build structured ids from
their ingredients so that repeated runs produce identical results.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from networkx.utils import UnionFind


def tup(parts: Iterable[str]) -> str:
    return "(" + ",".join(parts) + ")"


def lst(parts: Iterable[str]) -> str:
    return "[" + ",".join(parts) + "]"


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: tuple
    detail: str = ""

    def as_dict(self) -> dict:
        return {"kind": self.kind, "witness": list(self.witness), "detail": self.detail}


class InvalidCategory(ValueError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        first = self.violations[0]
        super().__init__(f"{first.kind} at {first.witness}")


class NotOpfibration(ValueError):
    pass


Composer = Callable[[str, str], str]


class FinCategory:
    """A finite category.

    ``arrows`` maps each non-identity arrow id to its ``(src, tgt)``.
    ``compose`` is either a table ``{(first, then): result}`` on composable
    non-identity pairs or a function ``(first, then) -> result``.
    """

    def __init__(
        self,
        objects: Iterable[str],
        arrows: Mapping[str, tuple[str, str]],
        compose: Mapping[tuple[str, str], str] | Composer | None = None,
        identities: Mapping[str, str] | None = None,
        name: str = "",
    ):
        self.name = name
        self.objects: tuple[str, ...] = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise ValueError(f"duplicate object ids in {name or 'category'}")
        ids = dict(identities) if identities is not None else {x: "1_" + x for x in self.objects}
        self._id = ids
        self._src: dict[str, str] = {}
        self._tgt: dict[str, str] = {}
        for x in self.objects:
            i = ids[x]
            self._src[i] = x
            self._tgt[i] = x
        self._identity_ids = frozenset(ids.values())
        if len(self._identity_ids) != len(self.objects):
            raise ValueError("identity ids must be distinct")
        for f, (a, b) in arrows.items():
            if f in self._src:
                raise ValueError(f"duplicate arrow id {f!r}")
            self._src[f] = a
            self._tgt[f] = b
        self.nonidentity: tuple[str, ...] = tuple(arrows)
        self.arrows: tuple[str, ...] = tuple(ids[x] for x in self.objects) + self.nonidentity
        if compose is None:
            compose = {}
        if callable(compose):
            self._fn: Composer | None = compose
            self._table: dict[tuple[str, str], str] = {}
        else:
            self._fn = None
            self._table = dict(compose)
        self._hom: dict[tuple[str, str], list[str]] | None = None
        self._out: dict[str, list[str]] | None = None
        self._in: dict[str, list[str]] | None = None

    def __repr__(self) -> str:
        label = self.name or "FinCategory"
        return f"<{label}: {len(self.objects)} objects, {len(self.arrows)} arrows>"

    # basic structure

    def src(self, f: str) -> str:
        return self._src[f]

    def tgt(self, f: str) -> str:
        return self._tgt[f]

    def identity(self, x: str) -> str:
        return self._id[x]

    def is_identity(self, f: str) -> bool:
        return f in self._identity_ids

    def has_object(self, x: str) -> bool:
        return x in self._id

    def has_arrow(self, f: str) -> bool:
        return f in self._src

    def then(self, f: str, g: str) -> str:
        """The composite ``g . f`` (first ``f``, then ``g``)."""
        if self._tgt[f] != self._src[g]:
            raise ValueError(f"{f!r} and {g!r} are not composable")
        if f in self._identity_ids:
            return g
        if g in self._identity_ids:
            return f
        key = (f, g)
        found = self._table.get(key)
        if found is None and self._fn is not None:
            found = self._table[key] = self._fn(f, g)
        return found if found is not None else self._table[key]

    def compose(self, g: str, f: str) -> str:
        return self.then(f, g)

    def _index(self) -> None:
        hom: dict[tuple[str, str], list[str]] = {}
        out: dict[str, list[str]] = {x: [] for x in self.objects}
        inn: dict[str, list[str]] = {x: [] for x in self.objects}
        for f in self.arrows:
            a, b = self._src[f], self._tgt[f]
            hom.setdefault((a, b), []).append(f)
            out[a].append(f)
            inn[b].append(f)
        self._hom, self._out, self._in = hom, out, inn

    def hom(self, a: str, b: str) -> list[str]:
        if self._hom is None:
            self._index()
        return self._hom.get((a, b), [])

    def out_of(self, a: str) -> list[str]:
        if self._out is None:
            self._index()
        return self._out[a]

    def into(self, b: str) -> list[str]:
        if self._in is None:
            self._index()
        return self._in[b]

    def composable_pairs(self) -> Iterator[tuple[str, str]]:
        for f in self.arrows:
            for g in self.out_of(self._tgt[f]):
                yield f, g

    def inverse(self, f: str) -> str | None:
        a, b = self._src[f], self._tgt[f]
        for g in self.hom(b, a):
            if self.is_identity(self.then(f, g)) and self.is_identity(self.then(g, f)):
                return g
        return None

    def is_groupoid(self) -> bool:
        return all(self.inverse(f) is not None for f in self.nonidentity)

    def is_discrete(self) -> bool:
        return not self.nonidentity

    # derived categories

    def opposite(self) -> FinCategory:
        arrows = {f: (self._tgt[f], self._src[f]) for f in self.nonidentity}
        return FinCategory(
            self.objects,
            arrows,
            lambda f, g: self.then(g, f),
            identities=self._id,
            name=f"{self.name}^op" if self.name else "",
        )

    def full_subcategory(self, objects: Iterable[str], name: str = "") -> FinCategory:
        keep = set(objects)
        objs = [x for x in self.objects if x in keep]
        arrows = {
            f: (self._src[f], self._tgt[f])
            for f in self.nonidentity
            if self._src[f] in keep and self._tgt[f] in keep
        }
        return FinCategory(objs, arrows, self.then, identities={x: self._id[x] for x in objs}, name=name)

    def materialize(self) -> FinCategory:
        """Copy with an explicit composition table."""
        table = {
            (f, g): self.then(f, g)
            for f, g in self.composable_pairs()
            if not self.is_identity(f) and not self.is_identity(g)
        }
        arrows = {f: (self._src[f], self._tgt[f]) for f in self.nonidentity}
        return FinCategory(self.objects, arrows, table, identities=self._id, name=self.name)

    def violations(self) -> list[Violation]:
        """Endpoint and associativity violations of the stored composition."""
        found: list[Violation] = []
        pairs = {}
        for f, g in self.composable_pairs():
            try:
                h = self.then(f, g)
            except KeyError:
                found.append(Violation("MissingComposite", (f, g)))
                continue
            if h not in self._src or self._src[h] != self._src[f] or self._tgt[h] != self._tgt[g]:
                found.append(Violation("BadEndpoints", (f, g, h)))
                continue
            pairs[(f, g)] = h
        if found:
            return found
        for f in self.nonidentity:
            for g in self.out_of(self._tgt[f]):
                if self.is_identity(g):
                    continue
                fg = pairs[(f, g)]
                for h in self.out_of(self._tgt[g]):
                    if self.is_identity(h):
                        continue
                    if pairs[(fg, h)] != pairs[(f, pairs[(g, h)])]:
                        found.append(Violation("NonAssociative", (f, g, h)))
        return found

    # serialization

    def to_dict(self) -> dict:
        table = []
        for f in self.nonidentity:
            for g in self.out_of(self._tgt[f]):
                if not self.is_identity(g):
                    table.append({"first": f, "then": g, "result": self.then(f, g)})
        out = {
            "objects": list(self.objects),
            "arrows": [{"id": f, "src": self._src[f], "tgt": self._tgt[f]} for f in self.nonidentity],
            "compose": table,
        }
        if any(i != "1_" + x for x, i in self._id.items()):
            out["identities"] = dict(self._id)
        return out

    def signature(self) -> tuple:
        """Hashable summary used for exact comparison of constructions."""
        return (
            self.objects,
            tuple((f, self._src[f], self._tgt[f]) for f in self.arrows),
            tuple(sorted((f, g, self.then(f, g)) for f, g in self.composable_pairs())),
        )


def category_violations(raw: Mapping) -> list[Violation]:
    """Check a raw category description without building it."""
    objects = list(raw.get("objects", []))
    found: list[Violation] = []
    seen = set()
    for x in objects:
        if x in seen:
            found.append(Violation("BadEndpoints", (x,), "duplicate object"))
        seen.add(x)
    ids = dict(raw.get("identities") or {x: "1_" + x for x in objects})
    if set(ids) != seen or len(set(ids.values())) != len(ids):
        found.append(Violation("BadEndpoints", ("identities",), "one distinct identity per object"))
        return found
    id_of = {i: x for x, i in ids.items()}
    ends: dict[str, tuple[str, str]] = {}
    for entry in raw.get("arrows", []):
        f, a, b = entry["id"], entry["src"], entry["tgt"]
        if f in ends or f in id_of:
            found.append(Violation("BadEndpoints", (f,), "duplicate arrow id"))
        if a not in seen or b not in seen:
            found.append(Violation("BadEndpoints", (f, a, b), "unknown endpoint"))
        ends[f] = (a, b)
    table: dict[tuple[str, str], str] = {}
    for entry in raw.get("compose", []):
        f, g, h = entry["first"], entry["then"], entry["result"]
        idh = h in id_of
        if f not in ends or g not in ends or (h not in ends and not idh):
            found.append(Violation("BadEndpoints", (f, g, h), "unknown arrow"))
            continue
        if ends[f][1] != ends[g][0]:
            found.append(Violation("BadEndpoints", (f, g, h), "not composable"))
            continue
        hs, ht = (id_of[h], id_of[h]) if idh else ends[h]
        if (hs, ht) != (ends[f][0], ends[g][1]):
            found.append(Violation("BadEndpoints", (f, g, h), "result has wrong endpoints"))
            continue
        if (f, g) in table and table[(f, g)] != h:
            found.append(Violation("BadEndpoints", (f, g, h), "conflicting entries"))
        table[(f, g)] = h
    if found:
        return found
    for f, (_, b) in ends.items():
        for g, (c, _) in ends.items():
            if c == b and (f, g) not in table:
                found.append(Violation("MissingComposite", (f, g)))
    if found:
        return found
    cat = FinCategory(objects, ends, table, identities=ids)
    return cat.violations()


def validate_category(raw: Mapping, name: str = "") -> FinCategory:
    found = category_violations(raw)
    if found:
        raise InvalidCategory(found)
    ends = {e["id"]: (e["src"], e["tgt"]) for e in raw.get("arrows", [])}
    table = {(e["first"], e["then"]): e["result"] for e in raw.get("compose", [])}
    return FinCategory(raw.get("objects", []), ends, table, identities=raw.get("identities"), name=name)


def discrete(objects: Iterable[str], name: str = "") -> FinCategory:
    return FinCategory(objects, {}, {}, name=name)


def terminal() -> FinCategory:
    return discrete(["*"], name="1")


def chain(n: int) -> FinCategory:
    """The ordinal [n] = 0 -> 1 -> ... -> n."""
    objs = [str(i) for i in range(n + 1)]
    arrows = {f"{i}<{j}": (str(i), str(j)) for i in range(n + 1) for j in range(i + 1, n + 1)}

    def comp(f: str, g: str) -> str:
        i = f.split("<")[0]
        k = g.split("<")[1]
        return f"{i}<{k}"

    return FinCategory(objs, arrows, comp, name=f"[{n}]")


def codiscrete(objects: Sequence[str], name: str = "") -> FinCategory:
    """Exactly one arrow between any two objects."""
    arrows = {f"{a}~{b}": (a, b) for a in objects for b in objects if a != b}
    ids = {x: "1_" + x for x in objects}

    def comp(f: str, g: str) -> str:
        a = f.split("~")[0]
        c = g.split("~")[1]
        return ids[a] if a == c else f"{a}~{c}"

    return FinCategory(objects, arrows, comp, identities=ids, name=name)


def cyclic_group(n: int, name: str = "") -> FinCategory:
    """One object with automorphism group Z/n; arrows g1..g(n-1)."""
    arrows = {f"g{k}": ("*", "*") for k in range(1, n)}

    def comp(f: str, g: str) -> str:
        k = (int(f[1:]) + int(g[1:])) % n
        return "1_*" if k == 0 else f"g{k}"

    return FinCategory(["*"], arrows, comp, name=name or f"Z/{n}")


def product(cats: Sequence[FinCategory], name: str = "") -> FinCategory:
    """Explicit finite product with tuple ids; the empty product is terminal."""
    cats = list(cats)
    obj_parts = {tup(t): t for t in cartesian(*(c.objects for c in cats))}
    ids = {x: tup(c.identity(y) for c, y in zip(cats, t)) for x, t in obj_parts.items()}
    id_ids = set(ids.values())
    parts: dict[str, tuple[str, ...]] = {}
    arrows = {}
    for t in cartesian(*(c.arrows for c in cats)):
        f = tup(t)
        parts[f] = t
        if f not in id_ids:
            arrows[f] = (tup(c.src(a) for c, a in zip(cats, t)), tup(c.tgt(a) for c, a in zip(cats, t)))

    def comp(f: str, g: str) -> str:
        return tup(c.then(a, b) for c, a, b in zip(cats, parts[f], parts[g]))

    cat = FinCategory(list(obj_parts), arrows, comp, identities=ids, name=name)
    cat.factors = cats  # type: ignore[attr-defined]
    cat.parts = parts  # type: ignore[attr-defined]
    cat.obj_parts = obj_parts  # type: ignore[attr-defined]
    return cat


@dataclass
class FinFunctor:
    dom: FinCategory
    cod: FinCategory
    obj: dict[str, str]
    arr: dict[str, str] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        self.obj = dict(self.obj)
        self.arr = dict(self.arr)
        for x in self.dom.objects:
            i = self.dom.identity(x)
            if i not in self.arr and x in self.obj:
                self.arr[i] = self.cod.identity(self.obj[x])

    def fo(self, x: str) -> str:
        return self.obj[x]

    def fa(self, f: str) -> str:
        return self.arr[f]

    def violations(self) -> list[Violation]:
        found = []
        for x in self.dom.objects:
            if x not in self.obj or not self.cod.has_object(self.obj[x]):
                found.append(Violation("BadObjectMap", (x,)))
        if found:
            return found
        for f in self.dom.arrows:
            v = self.arr.get(f)
            if v is None or not self.cod.has_arrow(v):
                found.append(Violation("BadArrowMap", (f,)))
                continue
            if self.cod.src(v) != self.obj[self.dom.src(f)] or self.cod.tgt(v) != self.obj[self.dom.tgt(f)]:
                found.append(Violation("BadEndpoints", (f, v)))
        if found:
            return found
        for x in self.dom.objects:
            if not self.cod.is_identity(self.arr[self.dom.identity(x)]):
                found.append(Violation("IdentityNotPreserved", (x,)))
        for f, g in self.dom.composable_pairs():
            if self.arr[self.dom.then(f, g)] != self.cod.then(self.arr[f], self.arr[g]):
                found.append(Violation("CompositeNotPreserved", (f, g)))
        return found

    def then(self, other: FinFunctor) -> FinFunctor:
        return FinFunctor(
            self.dom,
            other.cod,
            {x: other.obj[y] for x, y in self.obj.items()},
            {f: other.arr[g] for f, g in self.arr.items()},
        )

    def same_as(self, other: FinFunctor) -> bool:
        return self.obj == other.obj and self.arr == other.arr

    def is_bijective(self) -> bool:
        return (
            len(set(self.obj.values())) == len(self.dom.objects) == len(self.cod.objects)
            and len(set(self.arr.values())) == len(self.dom.arrows) == len(self.cod.arrows)
        )

    def inverse(self) -> FinFunctor:
        return FinFunctor(
            self.cod,
            self.dom,
            {v: k for k, v in self.obj.items()},
            {v: k for k, v in self.arr.items()},
        )

    def opposite(self, dom_op: FinCategory, cod_op: FinCategory) -> FinFunctor:
        return FinFunctor(dom_op, cod_op, self.obj, self.arr)

    def to_dict(self) -> dict:
        return {
            "objects": dict(self.obj),
            "arrows": {f: v for f, v in self.arr.items() if not self.dom.is_identity(f)},
        }

    @staticmethod
    def identity(cat: FinCategory) -> FinFunctor:
        return FinFunctor(cat, cat, {x: x for x in cat.objects}, {f: f for f in cat.arrows})

    @staticmethod
    def constant(dom: FinCategory, cod: FinCategory, x: str) -> FinFunctor:
        return FinFunctor(dom, cod, {y: x for y in dom.objects}, {f: cod.identity(x) for f in dom.arrows})

    @staticmethod
    def from_dict(dom: FinCategory, cod: FinCategory, raw: Mapping) -> FinFunctor:
        return FinFunctor(dom, cod, dict(raw.get("objects", {})), dict(raw.get("arrows", {})))


@dataclass
class FinNatTrans:
    dom: FinFunctor
    cod: FinFunctor
    comp: dict[str, str]

    def at(self, x: str) -> str:
        return self.comp[x]

    def violations(self) -> list[Violation]:
        F, G = self.dom, self.cod
        C, D = F.dom, F.cod
        found = []
        for x in C.objects:
            c = self.comp.get(x)
            if c is None or not D.has_arrow(c) or D.src(c) != F.obj[x] or D.tgt(c) != G.obj[x]:
                found.append(Violation("BadComponent", (x,)))
        if found:
            return found
        for f in C.nonidentity:
            a, b = C.src(f), C.tgt(f)
            if D.then(F.arr[f], self.comp[b]) != D.then(self.comp[a], G.arr[f]):
                found.append(Violation("NotNatural", (f,)))
        return found

    def is_identity(self) -> bool:
        return all(self.dom.cod.is_identity(c) for c in self.comp.values())

    def is_invertible(self) -> bool:
        D = self.dom.cod
        return all(D.inverse(c) is not None for c in self.comp.values())

    @staticmethod
    def identity(F: FinFunctor) -> FinNatTrans:
        return FinNatTrans(F, F, {x: F.cod.identity(F.obj[x]) for x in F.dom.objects})


# predicates on functors


def is_discrete_fibration(F: FinFunctor) -> bool:
    E, B = F.dom, F.cod
    for e in E.objects:
        lifts: dict[str, int] = {}
        for u in E.into(e):
            lifts[F.arr[u]] = lifts.get(F.arr[u], 0) + 1
        for v in B.into(F.obj[e]):
            if lifts.get(v, 0) != 1:
                return False
    return True


def is_discrete_opfibration(F: FinFunctor) -> bool:
    E, B = F.dom, F.cod
    for e in E.objects:
        lifts: dict[str, int] = {}
        for u in E.out_of(e):
            lifts[F.arr[u]] = lifts.get(F.arr[u], 0) + 1
        for v in B.out_of(F.obj[e]):
            if lifts.get(v, 0) != 1:
                return False
    return True


def fibres(F: FinFunctor) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {b: [] for b in F.cod.objects}
    for e in F.dom.objects:
        out[F.obj[e]].append(e)
    return out


# pullbacks


@dataclass
class Pullback:
    P: FinCategory
    left: FinFunctor
    right: FinFunctor
    obj_pairs: dict[str, tuple[str, str]]
    arr_pairs: dict[str, tuple[str, str]]
    obj_index: dict[tuple[str, str], str]
    arr_index: dict[tuple[str, str], str]


def pullback(F: FinFunctor, G: FinFunctor, name: str = "") -> Pullback:
    """Strict pullback of ``F : A -> C`` and ``G : B -> C``."""
    A, B = F.dom, G.dom
    by_c: dict[str, list[str]] = {}
    for b in B.objects:
        by_c.setdefault(G.obj[b], []).append(b)
    obj_pairs, obj_index = {}, {}
    objs = []
    for a in A.objects:
        for b in by_c.get(F.obj[a], []):
            x = f"<{a},{b}>"
            objs.append(x)
            obj_pairs[x] = (a, b)
            obj_index[(a, b)] = x
    ids = {x: f"<{A.identity(a)},{B.identity(b)}>" for x, (a, b) in obj_pairs.items()}
    by_arrow: dict[str, list[str]] = {}
    for g in B.arrows:
        by_arrow.setdefault(G.arr[g], []).append(g)
    arrows = {}
    arr_pairs, arr_index = {}, {}
    for x, (a, b) in obj_pairs.items():
        arr_pairs[ids[x]] = (A.identity(a), B.identity(b))
        arr_index[(A.identity(a), B.identity(b))] = ids[x]
    for f in A.arrows:
        for g in by_arrow.get(F.arr[f], []):
            if (A.src(f), B.src(g)) not in obj_index:
                continue
            if A.is_identity(f) and B.is_identity(g):
                continue
            h = f"<{f},{g}>"
            arrows[h] = (obj_index[(A.src(f), B.src(g))], obj_index[(A.tgt(f), B.tgt(g))])
            arr_pairs[h] = (f, g)
            arr_index[(f, g)] = h

    def comp(h: str, k: str) -> str:
        (f1, g1), (f2, g2) = arr_pairs[h], arr_pairs[k]
        return arr_index[(A.then(f1, f2), B.then(g1, g2))]

    P = FinCategory(objs, arrows, comp, identities=ids, name=name)
    left = FinFunctor(P, A, {x: p[0] for x, p in obj_pairs.items()}, {h: p[0] for h, p in arr_pairs.items()})
    right = FinFunctor(P, B, {x: p[1] for x, p in obj_pairs.items()}, {h: p[1] for h, p in arr_pairs.items()})
    return Pullback(P, left, right, obj_pairs, arr_pairs, obj_index, arr_index)


def is_pullback_square(top: FinFunctor, left: FinFunctor, right: FinFunctor, bottom: FinFunctor) -> bool:
    """Whether the commuting square ``right . top = bottom . left`` is a pullback.

    ``top : P -> B``, ``left : P -> A``, ``right : B -> C``, ``bottom : A -> C``.
    """
    if not top.then(right).same_as(left.then(bottom)):
        return False
    pb = pullback(bottom, right)
    P = top.dom
    seen_o = {pb.obj_index.get((left.obj[x], top.obj[x])) for x in P.objects}
    seen_a = {pb.arr_index.get((left.arr[f], top.arr[f])) for f in P.arrows}
    return (
        None not in seen_o
        and None not in seen_a
        and len(seen_o) == len(P.objects) == len(pb.P.objects)
        and len(seen_a) == len(P.arrows) == len(pb.P.arrows)
    )


# arrow categories


@dataclass
class ArrowCatBundle:
    base: FinCategory
    arrowCat: FinCategory
    d: FinFunctor
    c: FinFunctor
    alpha: FinNatTrans


def arrow_category(X: FinCategory, objects: Iterable[str] | None = None, name: str = "") -> ArrowCatBundle:
    """The arrow category, optionally restricted to a full subcategory of arrows."""
    objs = list(X.arrows if objects is None else objects)
    squares: dict[str, tuple[str, str, str, str]] = {}
    index: dict[tuple[str, str, str, str], str] = {}
    arrows = {}
    ids = {}
    for f in objs:
        for f2 in objs:
            for u in X.hom(X.src(f), X.src(f2)):
                fu = X.then(u, f2)
                for v in X.hom(X.tgt(f), X.tgt(f2)):
                    if X.then(f, v) != fu:
                        continue
                    s = f"sq({f};{u},{v};{f2})"
                    squares[s] = (f, u, v, f2)
                    index[(f, u, v, f2)] = s
                    if f == f2 and X.is_identity(u) and X.is_identity(v):
                        ids[f] = s
                    else:
                        arrows[s] = (f, f2)

    def comp(s: str, t: str) -> str:
        f, u, v, _ = squares[s]
        _, u2, v2, f3 = squares[t]
        return index[(f, X.then(u, u2), X.then(v, v2), f3)]

    A = FinCategory(objs, arrows, comp, identities=ids, name=name)
    d = FinFunctor(A, X, {f: X.src(f) for f in objs}, {s: q[1] for s, q in squares.items()})
    c = FinFunctor(A, X, {f: X.tgt(f) for f in objs}, {s: q[2] for s, q in squares.items()})
    alpha = FinNatTrans(d, c, {f: f for f in objs})
    return ArrowCatBundle(X, A, d, c, alpha)


# connected components


def components(X: FinCategory) -> list[list[str]]:
    uf = UnionFind(X.objects)
    for f in X.nonidentity:
        uf.union(X.src(f), X.tgt(f))
    order = {x: k for k, x in enumerate(X.objects)}
    groups = [sorted(g, key=order.__getitem__) for g in uf.to_sets()]
    return sorted(groups, key=lambda g: order[g[0]])


def pi0(X: FinCategory) -> tuple[FinCategory, FinFunctor]:
    groups = components(X)
    label = {}
    names = []
    for g in groups:
        name = f"[{g[0]}]"
        names.append(name)
        for x in g:
            label[x] = name
    D = discrete(names, name=f"pi0({X.name})" if X.name else "")
    q = FinFunctor(X, D, label, {f: D.identity(label[X.src(f)]) for f in X.arrows})
    return D, q


def is_equiv_discrete(X: FinCategory) -> bool:
    """Groupoid with at most one arrow in each hom-set."""
    if not X.is_groupoid():
        return False
    for a in X.objects:
        for f in X.out_of(a):
            if len(X.hom(a, X.tgt(f))) > 1:
                return False
    return True


def is_equiv_discrete_via_pi0(X: FinCategory) -> bool:
    """The projection to connected components is fully faithful."""
    _, q = pi0(X)
    for a in X.objects:
        for b in X.objects:
            expected = 1 if q.obj[a] == q.obj[b] else 0
            if len(X.hom(a, b)) != expected:
                return False
    return True


# distributivity pullbacks along discrete opfibrations


@dataclass
class DpbResult:
    f: FinFunctor
    g: FinFunctor
    P: FinCategory
    Q: FinCategory
    p: FinFunctor
    q: FinFunctor
    r: FinFunctor
    pb: Pullback
    fibre: dict[str, tuple[str, ...]]
    sections: dict[str, tuple[str, tuple[str, ...]]]
    section_index: dict[tuple[str, tuple[str, ...]], str]
    families: dict[str, tuple[str, tuple[str, ...], str]]
    lift: dict[tuple[str, str], str]
    coverage: tuple[int, int] = (0, 0)
    fam_index: dict[tuple[str, tuple[str, ...], str], str] = field(default_factory=dict)

    def value(self, qobj: str, x: str) -> str:
        y, h = self.sections[qobj]
        return h[self.fibre[y].index(x)]


def dpb_along_dopfib(
    f: FinFunctor,
    g: FinFunctor,
    admit: Callable[[str, tuple[str, ...]], bool] | None = None,
    name: str = "",
) -> DpbResult:
    """Distributivity pullback of ``g : W -> X`` along ``f : X -> Y``.

    ``admit`` optionally restricts to a full subcategory of sections; it must
    be invariant under isomorphism for the result to stay meaningful.
    """
    X, Y = f.dom, f.cod
    W = g.dom
    if not is_discrete_opfibration(f):
        raise NotOpfibration("the map to be pushed along is not a discrete opfibration")
    fibre = {y: tuple(xs) for y, xs in fibres(f).items()}
    over: dict[str, list[str]] = {x: [] for x in X.objects}
    for w in W.objects:
        over[g.obj[w]].append(w)
    lift: dict[tuple[str, str], str] = {}
    for u in X.arrows:
        lift[(f.arr[u], X.src(u))] = u
    sections: dict[str, tuple[str, tuple[str, ...]]] = {}
    section_index: dict[tuple[str, tuple[str, ...]], str] = {}
    objs: list[str] = []
    total = 0
    for y in Y.objects:
        for h in cartesian(*(over[x] for x in fibre[y])):
            total += 1
            if admit is not None and not admit(y, h):
                continue
            qid = f"sec({y};{lst(h)})"
            sections[qid] = (y, h)
            section_index[(y, h)] = qid
            objs.append(qid)
    by_tgt_over: dict[tuple[str, str], list[str]] = {}
    for gamma in W.arrows:
        by_tgt_over.setdefault((W.tgt(gamma), g.arr[gamma]), []).append(gamma)
    by_y: dict[str, list[str]] = {}
    for qid in objs:
        by_y.setdefault(sections[qid][0], []).append(qid)
    families: dict[str, tuple[str, tuple[str, ...], str]] = {}
    fam_index: dict[tuple[str, tuple[str, ...], str], str] = {}
    arrows = {}
    ids = {}
    for alpha in Y.arrows:
        y1, y2 = Y.src(alpha), Y.tgt(alpha)
        xs = fibre[y1]
        ups = [lift[(alpha, x)] for x in xs]
        pos2 = {x: k for k, x in enumerate(fibre[y2])}
        for tq in by_y.get(y2, []):
            h2 = sections[tq][1]
            choices = [by_tgt_over.get((h2[pos2[X.tgt(u)]], u), []) for u in ups]
            for gammas in cartesian(*choices):
                h1 = tuple(W.src(c) for c in gammas)
                sq = section_index.get((y1, h1))
                if sq is None:
                    continue
                aid = f"fam({alpha};{lst(gammas)};{tq})"
                families[aid] = (alpha, gammas, tq)
                fam_index[(alpha, gammas, tq)] = aid
                if Y.is_identity(alpha) and sq == tq and all(W.is_identity(c) for c in gammas):
                    ids[sq] = aid
                else:
                    arrows[aid] = (sq, tq)

    def comp(a: str, b: str) -> str:
        alpha, gammas, _ = families[a]
        beta, deltas, tq = families[b]
        xs = fibre[Y.src(alpha)]
        pos = {x: k for k, x in enumerate(fibre[Y.tgt(alpha)])}
        eps = tuple(
            W.then(gammas[k], deltas[pos[X.tgt(lift[(alpha, x)])]]) for k, x in enumerate(xs)
        )
        return fam_index[(Y.then(alpha, beta), eps, tq)]

    Q = FinCategory(objs, arrows, comp, identities=ids, name=name)
    r = FinFunctor(Q, Y, {qid: sections[qid][0] for qid in objs}, {a: fam[0] for a, fam in families.items()})
    pb = pullback(f, r)
    P = pb.P
    p_obj, p_arr = {}, {}
    for e, (x, qid) in pb.obj_pairs.items():
        p_obj[e] = sections[qid][1][fibre[f.obj[x]].index(x)]
    for e, (u, a) in pb.arr_pairs.items():
        alpha, gammas, _ = families[a]
        x = X.src(u)
        p_arr[e] = gammas[fibre[Y.src(alpha)].index(x)]
    p = FinFunctor(P, W, p_obj, p_arr)
    return DpbResult(
        f, g, P, Q, p, pb.right, r, pb, fibre, sections, section_index, families, lift,
        coverage=(len(objs), total), fam_index=fam_index,
    )


# functor enumeration and isomorphism search


def _object_order(C: FinCategory) -> list[str]:
    seen: list[str] = []
    mark = set()
    for root in C.objects:
        if root in mark:
            continue
        queue = deque([root])
        mark.add(root)
        while queue:
            x = queue.popleft()
            seen.append(x)
            for f in C.out_of(x) + C.into(x):
                for y in (C.src(f), C.tgt(f)):
                    if y not in mark:
                        mark.add(y)
                        queue.append(y)
    return seen


def iter_functors(
    C: FinCategory,
    D: FinCategory,
    *,
    obj_candidates: Callable[[str], Iterable[str]] | None = None,
    arrow_ok: Callable[[str, str], bool] | None = None,
    glue: Iterable[tuple[str, str]] = (),
    injective: bool = False,
) -> Iterator[FinFunctor]:
    """Enumerate functors ``C -> D`` by backtracking with propagation.

    ``glue`` lists object pairs forced to have equal images; ``arrow_ok``
    filters arrow images.
    """
    uf = UnionFind(C.objects)
    for a, b in glue:
        uf.union(a, b)
    order = _object_order(C)
    leaders = []
    seen_leader = set()
    for x in order:
        l = uf[x]
        if l not in seen_leader:
            seen_leader.add(l)
            leaders.append(l)
    members: dict[str, list[str]] = {}
    for x in C.objects:
        members.setdefault(uf[x], []).append(x)
    neighbours: dict[str, set[str]] = {l: set() for l in leaders}
    for f in C.nonidentity:
        a, b = uf[C.src(f)], uf[C.tgt(f)]
        neighbours[a].add(b)
        neighbours[b].add(a)

    def cands(l: str) -> list[str]:
        base = list(D.objects)
        for x in members[l]:
            if obj_candidates is not None:
                allowed = set(obj_candidates(x))
                base = [d for d in base if d in allowed]
        return base

    objmap: dict[str, str] = {}
    nonid = list(C.nonidentity)
    if injective and (len(C.objects) != len(D.objects) or len(C.arrows) != len(D.arrows)):
        return

    def objects_ok(l: str, d: str) -> bool:
        if injective and (len(members[l]) > 1 or d in used):
            return False
        for m in members[l]:
            for f in C.out_of(m):
                t = uf[C.tgt(f)]
                if t in objmap or t == l:
                    dt = d if t == l else objmap[t]
                    if not D.hom(d, dt):
                        return False
            for f in C.into(m):
                s = uf[C.src(f)]
                if s in objmap:
                    if not D.hom(objmap[s], d):
                        return False
        return True

    used: set[str] = set()

    def assign_objects(k: int) -> Iterator[dict[str, str]]:
        if k == len(leaders):
            yield {x: objmap[uf[x]] for x in C.objects}
            return
        l = leaders[k]
        for d in cands(l):
            if not objects_ok(l, d):
                continue
            objmap[l] = d
            used.add(d)
            yield from assign_objects(k + 1)
            del objmap[l]
            used.discard(d)

    for omap in assign_objects(0):
        amap: dict[str, str] = {C.identity(x): D.identity(omap[x]) for x in C.objects}
        if arrow_ok is not None and not all(arrow_ok(i, v) for i, v in amap.items()):
            continue
        image_used: set[str] = set(amap.values()) if injective else set()

        def assign(f: str, v: str, trail: list[str]) -> bool:
            queue = [(f, v)]
            while queue:
                a, va = queue.pop()
                if a in amap:
                    if amap[a] != va:
                        return False
                    continue
                if arrow_ok is not None and not arrow_ok(a, va):
                    return False
                if injective:
                    if va in image_used:
                        return False
                    image_used.add(va)
                amap[a] = va
                trail.append(a)
                for b in C.out_of(C.tgt(a)):
                    if b in amap:
                        queue.append((C.then(a, b), D.then(va, amap[b])))
                for b in C.into(C.src(a)):
                    if b in amap:
                        queue.append((C.then(b, a), D.then(amap[b], va)))
            return True

        def undo(trail: list[str]) -> None:
            for a in trail:
                if injective:
                    image_used.discard(amap[a])
                del amap[a]

        def assign_arrows(k: int) -> Iterator[FinFunctor]:
            while k < len(nonid) and nonid[k] in amap:
                k += 1
            if k == len(nonid):
                yield FinFunctor(C, D, omap, dict(amap))
                return
            f = nonid[k]
            for v in D.hom(omap[C.src(f)], omap[C.tgt(f)]):
                trail: list[str] = []
                if assign(f, v, trail):
                    yield from assign_arrows(k + 1)
                undo(trail)

        yield from assign_arrows(0)


def find_isomorphism(C: FinCategory, D: FinCategory) -> FinFunctor | None:
    if len(C.objects) != len(D.objects) or len(C.arrows) != len(D.arrows):
        return None

    def profile(K: FinCategory, x: str) -> tuple[int, int, int]:
        return (len(K.out_of(x)), len(K.into(x)), len(K.hom(x, x)))

    dprof: dict[tuple[int, int, int], list[str]] = {}
    for y in D.objects:
        dprof.setdefault(profile(D, y), []).append(y)
    for F in iter_functors(C, D, obj_candidates=lambda x: dprof.get(profile(C, x), []), injective=True):
        return F
    return None


# quotients


def quotient_category(
    X: FinCategory,
    obj_rep: Mapping[str, str],
    arr_rep: Mapping[str, str],
    connect: Callable[[str, str], str],
    name: str = "",
) -> tuple[FinCategory, FinFunctor]:
    """Category of classes with canonical ids ``orb(k)`` and ``cls(k)``.

    ``obj_rep``/``arr_rep`` send each object/arrow to a class representative;
    ``connect(b, b2)`` returns an arrow ``b -> b2`` that becomes an identity.
    Composition of classes is ``[g][f] = [g . connect(tgt f, src g) . f]``.
    """
    oname: dict[str, str] = {}
    for x in X.objects:
        r = obj_rep[x]
        if r not in oname:
            oname[r] = f"orb({len(oname)})"
    aname: dict[str, str] = {}
    for f in X.arrows:
        r = arr_rep[f]
        if r not in aname:
            aname[r] = f"cls({len(aname)})"
    first_of: dict[str, str] = {}
    for f in X.arrows:
        first_of.setdefault(aname[arr_rep[f]], f)
    ids = {}
    arrows = {}
    for cname, f in first_of.items():
        s, t = oname[obj_rep[X.src(f)]], oname[obj_rep[X.tgt(f)]]
        if X.is_identity(f):
            ids[s] = cname
        else:
            arrows[cname] = (s, t)
    for x in X.objects:
        cname = aname[arr_rep[X.identity(x)]]
        ids.setdefault(oname[obj_rep[x]], cname)
    arrows = {a: e for a, e in arrows.items() if a not in ids.values()}
    table = {}

    def comp(a: str, b: str) -> str:
        key = (a, b)
        if key not in table:
            f, g = first_of[a], first_of[b]
            k = connect(X.tgt(f), X.src(g))
            table[key] = aname[arr_rep[X.then(X.then(f, k), g)]]
        return table[key]

    objs = list(dict.fromkeys(oname[obj_rep[x]] for x in X.objects))
    Q = FinCategory(objs, arrows, comp, identities=ids, name=name)
    q = FinFunctor(X, Q, {x: oname[obj_rep[x]] for x in X.objects}, {f: aname[arr_rep[f]] for f in X.arrows})
    return Q, q


def groupoid_closure(X: FinCategory, gens: Iterable[str]) -> set[str]:
    """Arrows of the subgroupoid generated by invertible ``gens``."""
    closed = {X.identity(x) for x in X.objects}
    frontier = []
    for g in gens:
        inv = X.inverse(g)
        if inv is None:
            raise ValueError(f"{g!r} is not invertible")
        frontier += [g, inv]
    while frontier:
        f = frontier.pop()
        if f in closed:
            continue
        closed.add(f)
        for g in list(closed):
            if X.tgt(f) == X.src(g):
                frontier.append(X.then(f, g))
            if X.tgt(g) == X.src(f):
                frontier.append(X.then(g, f))
    return closed


def coidentify(X: FinCategory, gens: Iterable[str], name: str = "") -> tuple[FinCategory, FinFunctor]:
    """Universal functor out of ``X`` sending the invertible ``gens`` to identities.

    Computed by congruence closure: arrows are identified by the smallest
    equivalence that kills the generated subgroupoid and is compatible with
    composition through killed arrows.
    """
    G = groupoid_closure(X, gens)
    ouf = UnionFind(X.objects)
    for g in G:
        ouf.union(X.src(g), X.tgt(g))
    Gfrom: dict[str, list[str]] = {}
    for g in G:
        Gfrom.setdefault(X.src(g), []).append(g)
    Ghom: dict[tuple[str, str], list[str]] = {}
    for g in G:
        Ghom.setdefault((X.src(g), X.tgt(g)), []).append(g)
    Ginto: dict[str, list[str]] = {}
    for g in G:
        Ginto.setdefault(X.tgt(g), []).append(g)
    auf = UnionFind(X.arrows)
    for f in X.arrows:
        for k in Gfrom.get(X.tgt(f), []):
            auf.union(f, X.then(f, k))
        for k in Ginto.get(X.src(f), []):
            auf.union(f, X.then(k, f))
    changed = True
    while changed:
        changed = False
        classes = [sorted(c) for c in auf.to_sets()]
        for cls in classes:
            if len(cls) < 2:
                continue
            r = cls[0]
            for f in cls[1:]:
                for k in Ghom.get((X.tgt(r), X.tgt(f)), []):
                    rk = X.then(r, k)
                    for h in X.out_of(X.tgt(f)):
                        a, b = X.then(f, h), X.then(rk, h)
                        if auf[a] != auf[b]:
                            auf.union(a, b)
                            changed = True
                for k in Ghom.get((X.src(f), X.src(r)), []):
                    for h in X.into(X.src(f)):
                        a, b = X.then(h, f), X.then(X.then(h, k), r)
                        if auf[a] != auf[b]:
                            auf.union(a, b)
                            changed = True
    order = {f: i for i, f in enumerate(X.arrows)}
    arr_rep = {}
    for cls in auf.to_sets():
        rep = min(cls, key=order.__getitem__)
        for f in cls:
            arr_rep[f] = rep
    oorder = {x: i for i, x in enumerate(X.objects)}
    obj_rep = {}
    for cls in ouf.to_sets():
        rep = min(cls, key=oorder.__getitem__)
        for x in cls:
            obj_rep[x] = rep

    def connect(b: str, b2: str) -> str:
        found = Ghom.get((b, b2))
        if not found:
            raise ValueError(f"{b!r} and {b2!r} are not identified")
        return found[0]

    return quotient_category(X, obj_rep, arr_rep, connect, name=name)


def probe_categories(max_size: int) -> list[FinCategory]:
    """Small test categories with at most ``max_size`` objects."""
    out = [terminal()]
    if max_size >= 2:
        out += [discrete(["a", "b"], name="2"), chain(1), codiscrete(["a", "b"], name="iso")]
    out += [cyclic_group(2)]
    for n in range(2, max_size):
        out.append(chain(n))
    if max_size >= 3:
        out.append(discrete(["a", "b", "c"], name="3"))
    return out
