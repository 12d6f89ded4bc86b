from __future__ import annotations

from fractions import Fraction
from itertools import product as cartesian
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from symop.fincat import FinCategory, codiscrete, discrete, validate_category
from symop.operad import ass, category_as_operad, com, free2
from symop.perm import all_perms
from symop.tmonad import ObjOverI

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def load_category(name: str) -> FinCategory:
    import json

    return validate_category(json.loads((FIXTURES / name).read_text()), name=Path(name).stem)


def span_category() -> FinCategory:
    """``a -> c <- b`` with one extra object ``d``."""
    return FinCategory(["a", "b", "c", "d"], {"f": ("a", "c"), "g": ("b", "c")}, {}, name="span")


def two_colour_category() -> FinCategory:
    """Two objects joined by an isomorphism."""
    return codiscrete(["u", "v"], name="iso")


def operad_fixtures() -> dict:
    return {
        "com3": com(3),
        "ass3": ass(3),
        "cat_span": category_as_operad(span_category()),
        "cat_iso": category_as_operad(two_colour_category()),
        "free2": free2(),
    }


def thin_category(n: int, relation: set[tuple[int, int]]) -> FinCategory:
    """The preorder generated by ``relation`` on ``0..n-1``, one arrow per related pair."""
    reach = {(i, i) for i in range(n)} | set(relation)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in cartesian(list(reach), repeat=2):
            if b == c and (a, d) not in reach:
                reach.add((a, d))
                changed = True
    objs = [f"o{i}" for i in range(n)]
    arrows = {f"o{a}<o{b}": (f"o{a}", f"o{b}") for a, b in sorted(reach) if a != b}

    def name(a: int, b: int) -> str:
        return f"1_o{a}" if a == b else f"o{a}<o{b}"

    def comp(f: str, g: str) -> str:
        a = int(f.split("<")[0][1:]) if "<" in f else int(f[3:])
        b = int(g.split("<")[1][1:]) if "<" in g else int(g[3:])
        return name(a, b)

    return FinCategory(objs, arrows, comp, name="thin")


@st.composite
def thin_categories(draw, max_objects: int = 4):
    n = draw(st.integers(1, max_objects))
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    rel = draw(st.sets(st.sampled_from(pairs), max_size=len(pairs))) if pairs else set()
    return thin_category(n, rel)


def over_one(X: FinCategory, colour: str = "*") -> ObjOverI:
    return ObjOverI.over(X, {x: colour for x in X.objects}, [colour])


def points(k: int) -> FinCategory:
    return discrete([f"x{j}" for j in range(1, k + 1)], name=f"{k} points")


@pytest.fixture(scope="session")
def operads() -> dict:
    return operad_fixtures()


def load_json(name: str):
    import json

    return json.loads((FIXTURES / name).read_text())


def load_algebra(name: str):
    """Algebra file whose operad and fibres refer to other fixture files."""
    from symop.algebra import LaxMorphismData

    raw = load_json(name)
    ref = lambda v: load_json(v) if isinstance(v, str) else v  # noqa: E731
    return LaxMorphismData.from_dict(dict(raw, operad=ref(raw["operad"]), fibres={i: ref(c) for i, c in raw["fibres"].items()}))


def flip_sign(f: str) -> str:
    """``1_x <-> -x`` in the sign category."""
    return "1_" + f[1:] if f.startswith("-") else "-" + f[2:]


def cyclic_monoid(T, n: int = 3):
    from symop.algebra import monoid_morphism

    return monoid_morphism(T, [str(k) for k in range(n)], lambda x, y: str((int(x) + int(y)) % n), "0")


def algebra_fixtures() -> dict:
    """Name -> (data, whether it is a lax morphism)."""
    from symop.algebra import sign_category, terminal_morphism, v_bullet
    from symop.fincat import tup

    def broken_unit():
        D = v_bullet(com(3), sign_category())
        D.units["*"] = {"1": "-1"}
        return D

    def broken_substitution():
        D = v_bullet(com(3), sign_category())
        D.substitutions[("com2", ("com1", "com1"))] = {tup(["1", "0"]): "-1"}
        return D

    def broken_ass_symmetry():
        from symop.perm import Permutation

        D = v_bullet(ass(2), sign_category())
        D.symmetries[("ass[1,2]", Permutation((2, 1)))] = {tup(["0", "1"]): "-1"}
        return D

    return {
        "sign_com3": (load_algebra("sign_algebra.json"), True),
        "sign_ass2": (v_bullet(ass(2), sign_category()), True),
        "cyclic_com3": (cyclic_monoid(com(3)), True),
        "terminal_free2": (terminal_morphism(free2()), True),
        "sign_com3_broken_symmetry": (load_algebra("sign_algebra_broken.json"), False),
        "sign_com3_broken_unit": (broken_unit(), False),
        "sign_com3_broken_substitution": (broken_substitution(), False),
        "sign_ass2_broken_symmetry": (broken_ass_symmetry(), False),
    }


def arrow_base() -> ObjOverI:
    return over_one(FinCategory(["a", "b"], {"f": ("a", "b")}, {}, name="arrow"))


def span_base() -> ObjOverI:
    C = span_category()
    return ObjOverI.over(discrete(C.objects), {x: x for x in C.objects}, C.objects)


def free2_base(k: int = 1) -> ObjOverI:
    X = discrete([f"p{j}" for j in range(k)] + ["q"])
    return ObjOverI.over(X, {x: ("b" if x == "q" else "a") for x in X.objects}, ("a", "b"))


def orbit_count(T, base: ObjOverI) -> int:
    """Objects of TX modulo symmetries for discrete X, by Burnside's lemma on the action table."""
    total = Fraction(0)
    seen = set()
    for a in T.arrows:
        n = T.arity(a)
        orbit = frozenset(T.act(a, r) for r in all_perms(n))
        if orbit in seen:
            continue
        seen.add(orbit)
        fixed = Fraction(0)
        for r in all_perms(n):
            for b in orbit:
                if T.act(b, r) != b:
                    continue
                # labels constant on the cycles of r
                count = 1
                done = set()
                for j in range(1, n + 1):
                    if j in done:
                        continue
                    k = j
                    while k not in done:
                        done.add(k)
                        k = r(k)
                    count *= len(base.fibre(T.source(b)[j - 1]))
                fixed += count
        total += fixed / len(all_perms(n))
    assert total.denominator == 1
    return int(total)


# acceptance criteria report one line each at the end of the run
ACCEPTANCE: dict[int, str] = {}


def record_criterion(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
