from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from symop.operad import ass
from symop.perm import Permutation, SizeMismatch, all_perms, block_perm, shuffle_perm


def perms(n: int):
    return st.permutations(list(range(1, n + 1))).map(lambda xs: Permutation(tuple(xs)))


@lru_cache(maxsize=None)
def ass3():
    return ass(3)


def block_perm_by_relabelling(a: str, bs: tuple[str, ...], r: Permutation, rs: tuple[Permutation, ...]) -> Permutation:
    """The unique permutation relating the two sides of equivariance in the free operad Ass."""
    T = ass3()
    n = r.n
    right = T.compose(T.act(a, r), tuple(T.act(bs[r(j) - 1], rs[r(j) - 1]) for j in range(1, n + 1)))
    base = T.compose(a, bs)
    found = [p for p in all_perms(T.arity(base)) if T.act(base, p) == right]
    assert len(found) == 1
    return found[0]


def test_product_convention():
    r1, r2 = Permutation((2, 3, 1)), Permutation((2, 1, 3))
    assert (r1 * r2).images == (r1(r2(1)), r1(r2(2)), r1(r2(3)))
    assert (r1 * r1.inverse()).is_identity()


def test_parse_and_str_roundtrip():
    r = Permutation.parse("[3,1,2]")
    assert str(r) == "[3,1,2]"
    assert Permutation.parse([3, 1, 2]) == r
    assert Permutation.parse("[]") == Permutation.identity(0)


def test_size_mismatch():
    with pytest.raises(SizeMismatch):
        Permutation.identity(2) * Permutation.identity(3)
    with pytest.raises(ValueError):
        Permutation((1, 1))


def test_block_perm_identities():
    ids = [Permutation.identity(m) for m in (2, 0, 3)]
    assert block_perm(Permutation.identity(3), ids).is_identity()


def test_block_swap_of_singletons():
    one = Permutation.identity(1)
    assert block_perm(Permutation((2, 1)), [one, one]).images == (2, 1)


def test_block_perm_mixed_sizes():
    swap, one = Permutation((2, 1)), Permutation.identity(1)
    assert block_perm(swap, [swap, one]).images == (3, 2, 1)
    # the same value by relabelling positions in Ass
    assert block_perm_by_relabelling("ass[1,2]", ("ass[1,2]", "ass[1]"), swap, (swap, one)).images == (3, 2, 1)


@given(st.data())
def test_block_perm_matches_relabelling(data):
    T = ass3()
    n = data.draw(st.integers(0, 3))
    sizes = data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n).filter(lambda ms: sum(ms) <= 3))
    a = data.draw(st.sampled_from([b for b in T.arrows if T.arity(b) == n]))
    bs = tuple(data.draw(st.sampled_from([b for b in T.arrows if T.arity(b) == m])) for m in sizes)
    r = data.draw(perms(n))
    rs = tuple(data.draw(perms(m)) for m in sizes)
    assert block_perm(r, rs) == block_perm_by_relabelling(a, bs, r, rs)


@given(st.data())
def test_block_perm_is_multiplicative(data):
    n = data.draw(st.integers(0, 3))
    sizes = data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    r, s = data.draw(perms(n)), data.draw(perms(n))
    rs = [data.draw(perms(m)) for m in sizes]
    # blocks of the middle stage are the blocks of ``sizes`` reordered by s
    mid = [sizes[s(j) - 1] for j in range(1, n + 1)]
    ss = [data.draw(perms(m)) for m in mid]
    left = block_perm(s, rs) * block_perm(r, ss)
    combined = [rs[s(k) - 1] * ss[k - 1] for k in range(1, n + 1)]
    assert left == block_perm(s * r, [combined[s.inverse()(j) - 1] for j in range(1, n + 1)])


def test_shuffle_small_cases():
    assert shuffle_perm(0).images == ()
    assert shuffle_perm(1).images == (1, 2)
    assert shuffle_perm(2).images == (1, 3, 2, 4)


@given(st.integers(0, 6))
def test_shuffle_sends_odd_letters_to_the_first_half(n):
    sh = shuffle_perm(n)
    assert [sh(j) for j in range(1, 2 * n + 1, 2)] == list(range(1, n + 1))
    assert [sh(j) for j in range(2, 2 * n + 1, 2)] == list(range(n + 1, 2 * n + 1))


@given(st.integers(0, 5).flatmap(perms))
def test_sign_is_a_homomorphism_on_squares(r):
    assert (r * r).sign() == 1
    assert r.inverse().sign() == r.sign()
