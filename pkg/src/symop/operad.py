"""Arity-truncated coloured symmetric operads and their polynomial monads."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product as cartesian
from math import factorial, prod
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .fincat import FinCategory, FinFunctor, Violation, discrete, is_discrete_fibration, is_equiv_discrete, iter_functors
from .perm import Permutation, SizeMismatch, all_perms, block_perm, block_perm_src
from .poly import (
    PolyMonadData,
    PolyMorphism,
    Polynomial,
    TruncatedS,
    composite_object_count,
    compose_polynomials,
    identity_polynomial,
    pullback_square_holds,
    truncated_s,
)

__all__ = [
    "Permutation",
    "SizeMismatch",
    "block_perm",
    "TruncatedOperad",
    "OperadMorphism",
    "InvalidOperad",
    "NotOperadShape",
    "validate_operad",
    "operad_violations",
    "com",
    "ass",
    "ass_word",
    "category_as_operad",
    "free_operad",
    "free2",
    "broken_ass",
    "ass_to_com",
    "to_polynomial",
    "from_polynomial",
    "operad_polynomial",
    "sigma_free",
]


class InvalidOperad(ValueError):
    def __init__(self, violations: Sequence[Violation], coverage: Mapping | None = None):
        self.violations = list(violations)
        self.coverage = dict(coverage or {})
        first = self.violations[0]
        super().__init__(f"{first.kind} at {first.witness}")


class NotOperadShape(ValueError):
    pass


Inners = tuple[str, ...]


@dataclass
class TruncatedOperad:
    colours: tuple[str, ...]
    bound: int
    arrows: dict[str, tuple[tuple[str, ...], str]]
    action: dict[tuple[str, Permutation], str]
    units: dict[str, str]
    composition: dict[tuple[str, Inners], str]
    name: str = ""
    _into: dict[str, list[str]] | None = field(default=None, repr=False, compare=False)

    def source(self, a: str) -> tuple[str, ...]:
        return self.arrows[a][0]

    def target(self, a: str) -> str:
        return self.arrows[a][1]

    def arity(self, a: str) -> int:
        return len(self.arrows[a][0])

    def act(self, a: str, rho: Permutation) -> str:
        found = self.action.get((a, rho))
        if found is None and rho.is_identity():
            return a
        if found is None:
            raise KeyError(f"no action entry for {a} and {rho}")
        return found

    def unit(self, colour: str) -> str:
        return self.units[colour]

    def compose(self, outer: str, inners: Sequence[str]) -> str | None:
        inners = tuple(inners)
        if not inners and self.arity(outer) == 0:
            return self.composition.get((outer, ()), outer)
        return self.composition.get((outer, inners))

    def into(self, colour: str) -> list[str]:
        if self._into is None:
            idx: dict[str, list[str]] = {i: [] for i in self.colours}
            for a, (_, t) in self.arrows.items():
                idx.setdefault(t, []).append(a)
            self._into = idx
        return self._into.get(colour, [])

    def inner_tuples(self, colours: Sequence[str], budget: int) -> Iterator[Inners]:
        """Tuples ``(b_1..b_n)`` with targets ``colours`` and total arity at most ``budget``."""
        if not colours:
            yield ()
            return
        head, rest = colours[0], colours[1:]
        for b in self.into(head):
            m = self.arity(b)
            if m > budget:
                continue
            for tail in self.inner_tuples(rest, budget - m):
                yield (b,) + tail

    def to_dict(self) -> dict:
        out: dict = {}
        if self.name:
            out["name"] = self.name
        out["colours"] = list(self.colours)
        out["arity_bound"] = self.bound
        out["arrows"] = [{"id": a, "source": list(s), "target": t} for a, (s, t) in self.arrows.items()]
        out["units"] = dict(self.units)
        out["action"] = [
            {"arrow": a, "perm": list(r.images), "result": v} for (a, r), v in sorted(self.action.items())
        ]
        out["composition"] = [
            {"outer": a, "inners": list(bs), "result": v} for (a, bs), v in sorted(self.composition.items())
        ]
        return out

    @staticmethod
    def from_dict(raw: Mapping) -> TruncatedOperad:
        arrows = {}
        for entry in raw["arrows"]:
            if entry["id"] in arrows:
                raise ValueError(f"duplicate arrow id {entry['id']!r}")
            arrows[entry["id"]] = (tuple(entry["source"]), entry["target"])
        action = {(e["arrow"], Permutation.parse(e["perm"])): e["result"] for e in raw.get("action", [])}
        comp = {(e["outer"], tuple(e["inners"])): e["result"] for e in raw.get("composition", [])}
        return TruncatedOperad(
            tuple(raw["colours"]),
            int(raw["arity_bound"]),
            arrows,
            action,
            dict(raw.get("units", {})),
            comp,
            name=raw.get("name", ""),
        )

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @staticmethod
    def load(path: str | Path) -> TruncatedOperad:
        return TruncatedOperad.from_dict(json.loads(Path(path).read_text()))


# validation


def _typing_violations(T: TruncatedOperad) -> list[Violation]:
    found = []
    cols = set(T.colours)
    for a, (s, t) in T.arrows.items():
        if t not in cols or any(c not in cols for c in s):
            found.append(Violation("BadArrow", (a,), "unknown colour"))
        elif len(s) > T.bound:
            found.append(Violation("BadArrow", (a,), f"arity {len(s)} exceeds the bound {T.bound}"))
    for i in T.colours:
        u = T.units.get(i)
        if u is None or u not in T.arrows or T.arrows[u] != ((i,), i):
            found.append(Violation("UnitLawFail", (i,), "missing or mistyped unit"))
    return found


def _action_violations(T: TruncatedOperad) -> list[Violation]:
    found = []
    for (a, r), v in T.action.items():
        if a not in T.arrows or v not in T.arrows or r.n != T.arity(a):
            found.append(Violation("ActionNotFunctorial", (a, str(r)), "stray action entry"))
    if found:
        return found
    for a in T.arrows:
        s, t = T.arrows[a]
        for r in all_perms(len(s)):
            v = T.action.get((a, r))
            if v is None:
                if not r.is_identity():
                    found.append(Violation("ActionNotFunctorial", (a, str(r)), "missing action entry"))
                continue
            if r.is_identity() and v != a:
                found.append(Violation("ActionNotFunctorial", (a, str(r)), "identity acts non-trivially"))
            if T.arrows[v] != (tuple(s[r(j) - 1] for j in range(1, len(s) + 1)), t):
                found.append(Violation("ActionNotFunctorial", (a, str(r)), "wrong source profile"))
    if found:
        return found
    for a in T.arrows:
        n = T.arity(a)
        for r1 in all_perms(n):
            for r2 in all_perms(n):
                if T.act(T.act(a, r1), r2) != T.act(a, r1 * r2):
                    found.append(Violation("ActionNotFunctorial", (a, str(r1), str(r2)), "not a right action"))
    return found


def _composition_violations(T: TruncatedOperad) -> list[Violation]:
    found = []
    for (a, bs), v in T.composition.items():
        if a not in T.arrows or v not in T.arrows or any(b not in T.arrows for b in bs):
            found.append(Violation("BadComposite", (a, list(bs)), "unknown arrow"))
            continue
        if tuple(T.target(b) for b in bs) != T.source(a):
            found.append(Violation("BadComposite", (a, list(bs)), "operands do not match the source"))
            continue
        total = sum(T.arity(b) for b in bs)
        if total > T.bound:
            found.append(Violation("TruncationViolation", (a, list(bs)), f"result arity {total} exceeds the bound"))
            continue
        expected = (tuple(c for b in bs for c in T.source(b)), T.target(a))
        if T.arrows[v] != expected:
            found.append(Violation("BadComposite", (a, list(bs)), "result has the wrong profile"))
    if found:
        return found
    for a in T.arrows:
        for bs in T.inner_tuples(T.source(a), T.bound):
            if T.compose(a, bs) is None:
                found.append(Violation("MissingComposite", (a, list(bs))))
    return found


def _unit_violations(T: TruncatedOperad) -> list[Violation]:
    found = []
    for a in T.arrows:
        s, t = T.arrows[a]
        if T.compose(T.units[t], (a,)) != a:
            found.append(Violation("UnitLawFail", ("left", a)))
        if T.compose(a, tuple(T.units[c] for c in s)) != a:
            found.append(Violation("UnitLawFail", ("right", a)))
    return found


def _blocks(T: TruncatedOperad, bs: Inners) -> list[tuple[str, ...]]:
    return [T.source(b) for b in bs]


def _assoc_violations(T: TruncatedOperad) -> tuple[list[Violation], int]:
    found = []
    checked = 0
    for a in T.arrows:
        for bs in T.inner_tuples(T.source(a), T.bound):
            ab = T.compose(a, bs)
            leaves = [c for b in bs for c in T.source(b)]
            for gs in T.inner_tuples(leaves, T.bound):
                checked += 1
                grouped, k = [], 0
                for b in bs:
                    m = T.arity(b)
                    grouped.append(T.compose(b, gs[k : k + m]))
                    k += m
                left = T.compose(a, tuple(grouped))
                right = T.compose(ab, gs)
                if left != right:
                    found.append(
                        Violation("AssocFail", (a, list(bs), list(gs)), f"{left} != {right}")
                    )
    return found, checked


def _equivariance_violations(T: TruncatedOperad) -> tuple[list[Violation], int]:
    found = []
    checked = 0
    for a in T.arrows:
        n = T.arity(a)
        for bs in T.inner_tuples(T.source(a), T.bound):
            ab = T.compose(a, bs)
            for r in all_perms(n):
                ar = T.act(a, r)
                for rs in cartesian(*(all_perms(T.arity(b)) for b in bs)):
                    checked += 1
                    left = T.act(ab, block_perm(r, rs))
                    inner = tuple(T.act(bs[r(j) - 1], rs[r(j) - 1]) for j in range(1, n + 1))
                    right = T.compose(ar, inner)
                    if left != right:
                        found.append(
                            Violation(
                                "EquivarianceFail",
                                (a, list(bs), str(r), [str(x) for x in rs]),
                                f"{left} != {right}",
                            )
                        )
    return found, checked


def _candidate_counts(T: TruncatedOperad) -> tuple[int, int]:
    """Typed configurations ignoring the bound, for assoc and equivariance coverage."""
    c1 = {i: len(T.into(i)) for i in T.colours}
    c2 = {i: sum(prod(c1[c] for c in T.source(b)) for b in T.into(i)) for i in T.colours}
    assoc = sum(prod(c2[c] for c in T.source(a)) for a in T.arrows)
    w1 = {i: sum(factorial(T.arity(b)) for b in T.into(i)) for i in T.colours}
    equi = sum(factorial(T.arity(a)) * prod(w1[c] for c in T.source(a)) for a in T.arrows)
    return assoc, equi


def operad_violations(T: TruncatedOperad) -> tuple[list[Violation], dict]:
    """All violated axioms with witnesses, plus coverage of the bounded checks."""
    found = _typing_violations(T)
    if found:
        return found, {}
    found = _action_violations(T) + _composition_violations(T)
    if found:
        return found, {}
    found = _unit_violations(T)
    assoc, n_assoc = _assoc_violations(T)
    equi, n_equi = _equivariance_violations(T)
    total_assoc, total_equi = _candidate_counts(T)
    coverage = {
        "associativity": {"checked": n_assoc, "candidates": total_assoc},
        "equivariance": {"checked": n_equi, "candidates": total_equi},
    }
    return found + assoc + equi, coverage


def validate_operad(raw: Mapping | TruncatedOperad) -> TruncatedOperad:
    T = raw if isinstance(raw, TruncatedOperad) else TruncatedOperad.from_dict(raw)
    found, coverage = operad_violations(T)
    if found:
        raise InvalidOperad(found, coverage)
    return T


# morphisms


@dataclass
class OperadMorphism:
    dom: TruncatedOperad
    cod: TruncatedOperad
    colour_map: dict[str, str]
    arrow_map: dict[str, str]

    def violations(self) -> list[Violation]:
        S, T, f, F = self.dom, self.cod, self.colour_map, self.arrow_map
        found = []
        for i in S.colours:
            if f.get(i) not in T.colours:
                found.append(Violation("BadColour", (i,)))
        for a in S.arrows:
            v = F.get(a)
            if v not in T.arrows:
                found.append(Violation("BadArrowMap", (a,)))
            elif T.arrows[v] != (tuple(f[c] for c in S.source(a)), f[S.target(a)]):
                found.append(Violation("BadTyping", (a, v)))
        if found:
            return found
        for i in S.colours:
            if F[S.units[i]] != T.units[f[i]]:
                found.append(Violation("UnitNotPreserved", (i,)))
        for a in S.arrows:
            for r in all_perms(S.arity(a)):
                if F[S.act(a, r)] != T.act(F[a], r):
                    found.append(Violation("NotEquivariant", (a, str(r))))
        for (a, bs), v in S.composition.items():
            w = T.compose(F[a], tuple(F[b] for b in bs))
            if w is not None and w != F[v]:
                found.append(Violation("CompositeNotPreserved", (a, list(bs))))
        return found


def enumerate_operad_morphisms(S: TruncatedOperad, T: TruncatedOperad) -> list[OperadMorphism]:
    """All operad morphisms by exhaustive search over colour maps and typed arrow maps."""
    out = []
    for images in cartesian(T.colours, repeat=len(S.colours)):
        f = dict(zip(S.colours, images))
        choices = []
        for a in S.arrows:
            profile = (tuple(f[c] for c in S.source(a)), f[S.target(a)])
            choices.append([v for v in T.into(profile[1]) if T.arrows[v] == profile])
        for arrs in cartesian(*choices):
            m = OperadMorphism(S, T, f, dict(zip(S.arrows, arrs)))
            if not m.violations():
                out.append(m)
    return out


# fixtures


def com(bound: int) -> TruncatedOperad:
    """One colour, one arrow of each arity, trivial action."""
    ids = [f"com{n}" for n in range(bound + 1)]
    arrows = {ids[n]: (("*",) * n, "*") for n in range(bound + 1)}
    action = {(ids[n], r): ids[n] for n in range(bound + 1) for r in all_perms(n)}
    comp = {}
    for n in range(bound + 1):
        for ms in cartesian(range(bound + 1), repeat=n):
            if sum(ms) <= bound:
                comp[(ids[n], tuple(ids[m] for m in ms))] = ids[sum(ms)]
    return TruncatedOperad(("*",), bound, arrows, action, {"*": "com1"}, comp, name=f"Com<={bound}")


def _ass_id(sigma: Permutation) -> str:
    return f"ass{sigma}"


def _substitute(word: tuple[int, ...], inner: Sequence[tuple[int, ...]]) -> tuple[int, ...]:
    """Replace variable ``k`` of ``word`` by ``inner[k-1]`` with its variables shifted."""
    offset = [0]
    for w in inner:
        offset.append(offset[-1] + len(w))
    out: list[int] = []
    for k in word:
        out.extend(offset[k - 1] + v for v in inner[k - 1])
    return tuple(out)


def ass_word(a: str) -> tuple[int, ...]:
    """Variables of an arrow of ``ass(N)`` in the order they are multiplied."""
    return Permutation.parse(a[len("ass") :]).inverse().images


def ass(bound: int) -> TruncatedOperad:
    """Arrows of arity n are orderings of n variables, composed by substitution.

    The arrow named by ``sigma`` lists variable ``sigma^-1(p)`` at position ``p``,
    so the action reads ``sigma . rho = sigma rho``.
    """
    words: dict[str, tuple[int, ...]] = {}
    arrows = {}
    action = {}
    by_arity: dict[int, list[str]] = {}
    for n in range(bound + 1):
        for s in all_perms(n):
            a = _ass_id(s)
            words[a] = s.inverse().images
            arrows[a] = (("*",) * n, "*")
            by_arity.setdefault(n, []).append(a)
    for n in range(bound + 1):
        for s in all_perms(n):
            for r in all_perms(n):
                inv = tuple(r.inverse()(v) for v in words[_ass_id(s)])
                action[(_ass_id(s), r)] = _ass_id(Permutation(inv).inverse())
    comp = {}
    for a, w in words.items():
        n = len(w)
        for ms in cartesian(range(bound + 1), repeat=n):
            if sum(ms) > bound:
                continue
            for bs in cartesian(*(by_arity[m] for m in ms)):
                sub = _substitute(w, [words[b] for b in bs])
                comp[(a, bs)] = _ass_id(Permutation(sub).inverse())
    unit = _ass_id(Permutation.identity(1))
    return TruncatedOperad(("*",), bound, arrows, action, {"*": unit}, comp, name=f"Ass<={bound}")


def ass_to_com(bound: int) -> OperadMorphism:
    S, T = ass(bound), com(bound)
    return OperadMorphism(S, T, {"*": "*"}, {a: f"com{S.arity(a)}" for a in S.arrows})


def category_as_operad(C: FinCategory, name: str = "") -> TruncatedOperad:
    """Every arrow becomes a unary operation; composition is that of ``C``."""
    arrows = {f: ((C.src(f),), C.tgt(f)) for f in C.arrows}
    one = Permutation.identity(1)
    action = {(f, one): f for f in C.arrows}
    comp = {}
    for f in C.arrows:
        for g in C.out_of(C.tgt(f)):
            comp[(g, (f,))] = C.then(f, g)
    units = {x: C.identity(x) for x in C.objects}
    return TruncatedOperad(tuple(C.objects), 1, arrows, action, units, comp, name=name or C.name)


def _render(term, top: bool, colour: str) -> str:
    if term[0] == "x":
        return f"id_{colour}" if top else f"x{term[1]}"
    return f"{term[0]}(" + ",".join(_render(t, False, colour) for t in term[1]) + ")"


def free_operad(
    colours: Sequence[str],
    generators: Mapping[str, tuple[Sequence[str], str]],
    bound: int,
    name: str = "",
) -> TruncatedOperad:
    """Free operad on a collection, truncated at ``bound``.

    Operations are trees of generators with leaves labelled by distinct
    variables.  Generators must have arity at least two so that the truncation
    is finite.
    """
    for g, (s, _) in generators.items():
        if len(s) < 2:
            raise ValueError(f"generator {g!r} must have arity at least 2")
    # shapes: ("x",) for a leaf, or (g, children); leaf colours listed left to right
    shapes: dict[str, list[tuple[tuple, tuple[str, ...]]]] = {c: [(("x",), (c,))] for c in colours}
    changed = True
    while changed:
        changed = False
        for g, (src, tgt) in generators.items():
            pools = [shapes[c] for c in src]
            for kids in cartesian(*pools):
                leaves = tuple(c for _, ls in kids for c in ls)
                if len(leaves) > bound:
                    continue
                shape = ((g, tuple(k for k, _ in kids)), leaves)
                if shape not in shapes[tgt]:
                    shapes[tgt].append(shape)
                    changed = True

    def label(shape, numbers: Iterator[int]):
        if shape[0] == "x":
            return ("x", next(numbers))
        return (shape[0], tuple(label(k, numbers) for k in shape[1]))

    terms: dict[str, tuple] = {}
    arrows: dict[str, tuple[tuple[str, ...], str]] = {}
    for c in colours:
        for shape, leaves in sorted(shapes[c], key=lambda s: (len(s[1]), repr(s[0]))):
            n = len(leaves)
            for s in all_perms(n):
                # leaf p carries variable s^-1(p)
                word = s.inverse().images
                term = label(shape, iter(word))
                a = _render(term, True, c)
                source = [""] * n
                for p, v in enumerate(word):
                    source[v - 1] = leaves[p]
                terms[a] = (term, c)
                arrows[a] = (tuple(source), c)
    index = {(_render(t, True, c)): a for a, (t, c) in terms.items()}

    def rename(term, mapping):
        if term[0] == "x":
            return ("x", mapping[term[1]])
        return (term[0], tuple(rename(k, mapping) for k in term[1]))

    def graft(term, subs):
        if term[0] == "x":
            return subs[term[1]]
        return (term[0], tuple(graft(k, subs) for k in term[1]))

    def arity(t) -> int:
        return 1 if t[0] == "x" else sum(arity(k) for k in t[1])

    action = {}
    for a, (term, c) in terms.items():
        n = len(arrows[a][0])
        for r in all_perms(n):
            rinv = r.inverse()
            moved = rename(term, {v: rinv(v) for v in range(1, n + 1)})
            action[(a, r)] = index[_render(moved, True, c)]
    comp = {}
    for a, (term, c) in terms.items():
        src = arrows[a][0]
        for bs in _typed_tuples(arrows, src, bound):
            subs, k = {}, 0
            for j, b in enumerate(bs, start=1):
                bt = terms[b][0]
                m = len(arrows[b][0])
                subs[j] = rename(bt, {v: v + k for v in range(1, m + 1)})
                k += m
            comp[(a, bs)] = index[_render(graft(term, subs), True, c)]
    units = {c: f"id_{c}" for c in colours}
    return TruncatedOperad(tuple(colours), bound, arrows, action, units, comp, name=name)


def _typed_tuples(arrows, colours: Sequence[str], budget: int) -> Iterator[Inners]:
    if not colours:
        yield ()
        return
    for b, (s, t) in arrows.items():
        if t == colours[0] and len(s) <= budget:
            for tail in _typed_tuples(arrows, colours[1:], budget - len(s)):
                yield (b,) + tail


def free2() -> TruncatedOperad:
    """Two colours with ``m : (a,b) -> a`` and ``k : (b,b) -> b``, bound 3."""
    return free_operad(("a", "b"), {"m": (("a", "b"), "a"), "k": (("b", "b"), "b")}, 3, name="free2")


def broken_ass(bound: int = 3) -> TruncatedOperad:
    """``ass(bound)`` with one non-unital composite replaced by its transpose."""
    T = ass(bound)
    swap, one = Permutation((2, 1)), Permutation.identity(1)
    key = (_ass_id(Permutation.identity(2)), (_ass_id(swap), _ass_id(one)))
    T.composition[key] = T.act(T.composition[key], Permutation((2, 1, 3)))
    T.name = f"broken Ass<={bound}"
    return T


# the polynomial of an operad


@dataclass
class OperadPolynomial:
    operad: TruncatedOperad
    poly: Polynomial
    over_s: PolyMorphism
    S: TruncatedS
    b_arrows: dict[str, tuple[str, Permutation]]
    e_objects: dict[str, tuple[str, int]]


def _e_id(a: str, j: int) -> str:
    return f"({a},{j})"


def operad_polynomial(T: TruncatedOperad, S: TruncatedS | None = None) -> OperadPolynomial:
    """The polynomial ``I <- E_T -> B_T -> I`` with its map to the symmetric polynomial."""
    S = S or truncated_s(T.bound)
    I = discrete(T.colours, name="I")
    b_data: dict[str, tuple[str, Permutation]] = {}
    b_arrows, b_ids = {}, {}
    for a in T.arrows:
        for r in all_perms(T.arity(a)):
            u = f"{a}|{r}"
            b_data[u] = (a, r)
            if r.is_identity():
                b_ids[a] = u
            else:
                b_arrows[u] = (T.act(a, r), a)

    def b_comp(u: str, v: str) -> str:
        _, s = b_data[u]
        a, r = b_data[v]
        return f"{a}|{r * s}"

    B = FinCategory(list(T.arrows), b_arrows, b_comp, identities=b_ids, name="B")
    e_objs: dict[str, tuple[str, int]] = {}
    for a in T.arrows:
        for j in range(1, T.arity(a) + 1):
            e_objs[_e_id(a, j)] = (a, j)
    e_data: dict[str, tuple[str, Permutation, int]] = {}
    e_arrows, e_ids = {}, {}
    for x, (a, j) in e_objs.items():
        for r in all_perms(T.arity(a)):
            # r : (a r, j) -> (a, r j)
            src = T.act(a, r)
            u = f"{a}|{r}#{j}"
            e_data[u] = (a, r, j)
            if r.is_identity():
                e_ids[x] = u
            else:
                e_arrows[u] = (_e_id(src, j), _e_id(a, r(j)))

    def e_comp(u: str, v: str) -> str:
        _, s, j = e_data[u]
        a, r, _ = e_data[v]
        return f"{a}|{r * s}#{j}"

    E = FinCategory(list(e_objs), e_arrows, e_comp, identities=e_ids, name="E")
    s_obj = {x: T.source(a)[j - 1] for x, (a, j) in e_objs.items()}
    s = FinFunctor(E, I, s_obj, {u: I.identity(s_obj[E.src(u)]) for u in E.arrows})
    p = FinFunctor(E, B, {x: a for x, (a, _) in e_objs.items()}, {u: f"{a}|{r}" for u, (a, r, _) in e_data.items()})
    t = FinFunctor(B, I, {a: T.target(a) for a in T.arrows}, {u: I.identity(T.target(a)) for u, (a, _) in b_data.items()})
    poly = Polynomial(I, E, B, s, p, t, J=I)
    one = S.poly.I
    f1 = FinFunctor(B, S.P, {a: str(T.arity(a)) for a in T.arrows}, {u: str(r) for u, (_, r) in b_data.items()})
    f2 = FinFunctor(
        E,
        S.Pstar,
        {x: f"({T.arity(a)},{j})" for x, (a, j) in e_objs.items()},
        {u: f"{r}@{j}" for u, (_, r, j) in e_data.items()},
    )
    over_s = PolyMorphism(poly, S.poly, FinFunctor.constant(I, one, "*"), f1, f2)
    return OperadPolynomial(T, poly, over_s, S, b_data, e_objs)


def _parse_nj(x: str) -> tuple[int, int]:
    n, j = x.strip("()").split(",")
    return int(n), int(j)


def to_polynomial(T: TruncatedOperad, S: TruncatedS | None = None) -> tuple[PolyMonadData, PolyMorphism]:
    """The polynomial monad of ``T`` and its cartesian map to the symmetric one.

    Multiplication is defined on the part of the composite whose total arity
    stays within the bound.
    """
    op = operad_polynomial(T, S)
    poly, I = op.poly, op.poly.I
    unit = PolyMorphism(
        identity_polynomial(I),
        poly,
        FinFunctor.identity(I),
        FinFunctor(I, poly.B, {i: T.units[i] for i in T.colours}),
        FinFunctor(I, poly.E, {i: _e_id(T.units[i], 1) for i in T.colours}),
    )
    D_pairs: dict[str, tuple[str, str]] = {}

    def admit(y: str, h: tuple[str, ...]) -> bool:
        return sum(T.arity(D_pairs[w][1]) for w in h) <= T.bound

    # D is rebuilt inside the composite with the same ids; record its pairs first
    from .fincat import pullback

    D_pairs.update(pullback(poly.s, poly.t).obj_pairs)
    composite = compose_polynomials(poly, poly, admit=admit)
    mult = _operad_mult(T, op, composite)
    total = composite_object_count(poly, poly)
    return PolyMonadData(poly, unit, mult, (len(composite.B.objects), total)), op.over_s


def _operad_mult(T: TruncatedOperad, op: OperadPolynomial, composite: Polynomial) -> PolyMorphism:
    build = composite.build
    dpb, D = build.dpb, build.D
    poly = op.poly
    b_obj: dict[str, str] = {}
    inners: dict[str, tuple[str, ...]] = {}
    for qid, (a, h) in dpb.sections.items():
        bs = tuple(D.obj_pairs[w][1] for w in h)
        inners[qid] = bs
        b_obj[qid] = T.compose(a, bs)
    b_arr = {}
    for aid, (u, gammas, tq) in dpb.families.items():
        _, r = op.b_arrows[u]
        taus = [op.b_arrows[D.arr_pairs[g][1]][1] for g in gammas]
        b_arr[aid] = f"{b_obj[tq]}|{block_perm_src(r, taus)}"
    f1 = FinFunctor(composite.B, poly.B, b_obj, b_arr)
    e_obj = {}
    for eid, (e1, pid) in build.E.obj_pairs.items():
        x, qid = dpb.pb.obj_pairs[pid]
        _, j = op.e_objects[x]
        _, k = op.e_objects[e1]
        offset = sum(T.arity(b) for b in inners[qid][: j - 1])
        e_obj[eid] = _e_id(b_obj[qid], offset + k)
    e_arr = {}
    for eid in composite.E.arrows:
        _, j = op.e_objects[e_obj[composite.E.src(eid)]]
        a, r = op.b_arrows[b_arr[composite.p.arr[eid]]]
        e_arr[eid] = f"{a}|{r}#{j}"
    f2 = FinFunctor(composite.E, poly.E, e_obj, e_arr)
    return PolyMorphism(composite, poly, FinFunctor.identity(poly.I), f1, f2)


def from_polynomial(M: PolyMonadData, over_s: PolyMorphism, name: str = "") -> TruncatedOperad:
    """Read an operad back from a polynomial monad over the symmetric one."""
    P = M.carrier
    if not P.I.is_discrete():
        raise NotOperadShape("carrier category is not discrete")
    if not is_discrete_fibration(over_s.f1):
        raise NotOperadShape("the map to the permutation groupoid is not a discrete fibration")
    bound = max(int(n) for n in over_s.cod.B.objects)
    pos: dict[str, int] = {}
    arrows: dict[str, tuple[tuple[str, ...], str]] = {}
    fibre: dict[str, list[str]] = {b: [] for b in P.B.objects}
    for e in P.E.objects:
        pos[e] = _parse_nj(over_s.f2.obj[e])[1]
        fibre[P.p.obj[e]].append(e)
    for b in P.B.objects:
        fibre[b].sort(key=pos.__getitem__)
        arrows[b] = (tuple(P.s.obj[e] for e in fibre[b]), P.t.obj[b])
    action = {}
    lifts: dict[tuple[str, str], str] = {}
    for u in P.B.arrows:
        lifts[(P.B.tgt(u), over_s.f1.arr[u])] = P.B.src(u)
    for b, (src, _) in arrows.items():
        for r in all_perms(len(src)):
            action[(b, r)] = lifts[(b, str(r))]
    units = {i: M.unit.f1.obj[i] for i in P.I.objects}
    build = M.composite.build
    comp = {}
    for qid, (a, h) in build.dpb.sections.items():
        xs = build.dpb.fibre[a]
        by_pos = sorted(zip(xs, h), key=lambda xw: pos[xw[0]])
        bs = tuple(build.D.obj_pairs[w][1] for _, w in by_pos)
        comp[(a, bs)] = M.mult.f1.obj[qid]
    return TruncatedOperad(tuple(P.I.objects), bound, arrows, action, units, comp, name=name)


def sigma_free(T: TruncatedOperad) -> dict[str, bool]:
    """Freeness of the symmetric action, decided three independent ways."""
    direct = not any(
        T.act(a, r) == a for a in T.arrows for r in all_perms(T.arity(a)) if not r.is_identity()
    )
    op = operad_polynomial(T)
    return {
        "direct": direct,
        "via_B": is_equiv_discrete(op.poly.B),
        "via_pullback": pullback_square_holds(op.poly),
    }


def enumerate_poly_morphisms_over_s(NS: OperadPolynomial, NT: OperadPolynomial) -> list[PolyMorphism]:
    """Cartesian maps ``N(S) -> N(T)`` over the symmetric polynomial, found exhaustively.

    The map on ``E`` is forced by the pullback condition, so the search runs
    over colour maps and functors ``B_S -> B_T`` commuting with the maps to
    the permutation groupoid.
    """
    out = []
    IS, IT = NS.poly.I, NT.poly.I
    bS, bT = NS.over_s.f1, NT.over_s.f1
    for images in cartesian(IT.objects, repeat=len(IS.objects)):
        f0 = FinFunctor(IS, IT, dict(zip(IS.objects, images)))
        S = NS.operad

        def cands(a: str) -> list[str]:
            src = tuple(f0.obj[c] for c in S.source(a))
            return [v for v in NT.operad.into(f0.obj[S.target(a)]) if NT.operad.source(v) == src]

        for f1 in iter_functors(
            NS.poly.B,
            NT.poly.B,
            obj_candidates=cands,
            arrow_ok=lambda u, v: bT.arr[v] == bS.arr[u],
        ):
            e_obj = {x: _e_id(f1.obj[a], j) for x, (a, j) in NS.e_objects.items()}
            e_arr = {}
            for u in NS.poly.E.arrows:
                a, r = NS.b_arrows[NS.poly.p.arr[u]]
                _, j = NS.e_objects[NS.poly.E.src(u)]
                b, r2 = NT.b_arrows[f1.arr[NS.poly.p.arr[u]]]
                e_arr[u] = f"{b}|{r2}#{j}"
            f2 = FinFunctor(NS.poly.E, NT.poly.E, e_obj, e_arr)
            m = PolyMorphism(NS.poly, NT.poly, f0, f1, f2)
            out.append(m)
    return out
