"""Permutations of {1..n} with images listed one-indexed."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Sequence


class SizeMismatch(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Permutation:
    """``images[j-1]`` is the image of ``j``.

    Products follow ``(r1 * r2)(j) = r1(r2(j))``.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise ValueError(f"not a permutation: {self.images}")

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, j: int) -> int:
        return self.images[j - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        if self.n != other.n:
            raise SizeMismatch(f"cannot compose permutations of {self.n} and {other.n} letters")
        return Permutation(tuple(self.images[k - 1] for k in other.images))

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for j, k in enumerate(self.images, start=1):
            inv[k - 1] = j
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(k == j for j, k in enumerate(self.images, start=1))

    def sign(self) -> int:
        s = 1
        for a in range(self.n):
            for b in range(a + 1, self.n):
                if self.images[a] > self.images[b]:
                    s = -s
        return s

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.images)) + "]"

    @staticmethod
    def identity(n: int) -> Permutation:
        return Permutation(tuple(range(1, n + 1)))

    @staticmethod
    def parse(text: str | Sequence[int]) -> Permutation:
        if isinstance(text, str):
            body = text.strip().strip("[]")
            return Permutation(tuple(int(t) for t in body.split(",") if t.strip()))
        return Permutation(tuple(int(t) for t in text))


@lru_cache(maxsize=None)
def all_perms(n: int) -> tuple[Permutation, ...]:
    return tuple(Permutation(p) for p in permutations(range(1, n + 1)))


def block_perm_src(rho: Permutation, taus: Sequence[Permutation]) -> Permutation:
    """Block permutation indexed by source blocks.

    Block ``j`` of the source (size ``taus[j].n``) is sent to block ``rho(j)``
    of the target, letter ``l`` landing on letter ``taus[j](l)`` there.
    """
    if len(taus) != rho.n:
        raise SizeMismatch("one inner permutation per block is required")
    sizes_tgt = [0] * rho.n
    for j, t in enumerate(taus, start=1):
        sizes_tgt[rho(j) - 1] = t.n
    offset = [0] * rho.n
    for k in range(1, rho.n):
        offset[k] = offset[k - 1] + sizes_tgt[k - 1]
    images = []
    for j, t in enumerate(taus, start=1):
        base = offset[rho(j) - 1]
        images.extend(base + t(l) for l in range(1, t.n + 1))
    return Permutation(tuple(images))


def block_perm(rho: Permutation, rhos: Sequence[Permutation]) -> Permutation:
    """The permutation ``rho(rho_1, ..., rho_n)`` on ``m_1 + ... + m_n`` letters.

    ``rhos[k-1]`` permutes the ``k``-th block (of size ``m_k``) and ``rho``
    permutes the blocks.  Letter ``l`` of the new ``j``-th block is sent to
    letter ``rhos[rho(j)-1](l)`` of the old block ``rho(j)``.
    """
    if len(rhos) != rho.n:
        raise SizeMismatch(f"expected {rho.n} block permutations, got {len(rhos)}")
    return block_perm_src(rho, [rhos[rho(j) - 1] for j in range(1, rho.n + 1)])


def shuffle_perm(n: int) -> Permutation:
    """Interleaving permutation of ``2n`` letters: odd ``j`` to ``(j+1)/2``, even ``j`` to ``n + j/2``."""
    return Permutation(tuple((j + 1) // 2 if j % 2 else n + j // 2 for j in range(1, 2 * n + 1)))
