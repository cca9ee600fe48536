"""Finite groups as explicit multiplication tables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import GroupError


@dataclass(frozen=True)
class GroupTable:
    """A finite group given by an ordered element list and a product table.

    ``product[i][j]`` is the index of ``elements[i] * elements[j]``.  The
    table is checked exhaustively on construction: associativity, a two-sided
    identity and two-sided inverses.
    """

    elements: tuple[str, ...]
    product: tuple[tuple[int, ...], ...]
    identity: int = field(init=False)
    inverse: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        n = len(self.elements)
        if n == 0:
            raise GroupError("empty element list")
        if len(set(self.elements)) != n:
            raise GroupError("duplicate element names")
        if len(self.product) != n or any(len(row) != n for row in self.product):
            raise GroupError("product table is not square")
        for row in self.product:
            if any(not (0 <= v < n) for v in row):
                raise GroupError("product table entry out of range")
        identity = None
        for e in range(n):
            if all(self.product[e][a] == a and self.product[a][e] == a for a in range(n)):
                identity = e
                break
        if identity is None:
            raise GroupError("no two-sided identity")
        inverse = [None] * n
        for a in range(n):
            for b in range(n):
                if self.product[a][b] == identity and self.product[b][a] == identity:
                    inverse[a] = b
                    break
            if inverse[a] is None:
                raise GroupError(f"element {self.elements[a]!r} has no inverse")
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.product[self.product[a][b]][c] != self.product[a][self.product[b][c]]:
                raise GroupError("product table is not associative")
        object.__setattr__(self, "identity", identity)
        object.__setattr__(self, "inverse", tuple(inverse))

    @property
    def order(self) -> int:
        return len(self.elements)

    def index(self, name: str) -> int:
        try:
            return self.elements.index(name)
        except ValueError:
            raise GroupError(f"unknown group element {name!r}") from None

    def mul(self, i: int, j: int) -> int:
        return self.product[i][j]

    def mul_named(self, a: str, b: str) -> str:
        return self.elements[self.mul(self.index(a), self.index(b))]

    def inv(self, i: int) -> int:
        return self.inverse[i]

    def power(self, i: int, exponent: int) -> int:
        if exponent < 0:
            return self.power(self.inv(i), -exponent)
        acc = self.identity
        for _ in range(exponent):
            acc = self.mul(acc, i)
        return acc

    def signed_product(self, pairs: list[tuple[int, int]]) -> int:
        """Product of g_i^{e_i} for (index, exponent sign) pairs."""
        acc = self.identity
        for idx, sign in pairs:
            acc = self.mul(acc, idx if sign > 0 else self.inv(idx))
        return acc


def trivial_group() -> GroupTable:
    return GroupTable(elements=("1",), product=((0,),))


def cyclic_group(n: int) -> GroupTable:
    if n < 1:
        raise GroupError("cyclic group order must be positive")
    names = tuple("1" if k == 0 else f"g{k}" if n > 2 else "g" for k in range(n))
    table = tuple(tuple((i + j) % n for j in range(n)) for i in range(n))
    return GroupTable(elements=names, product=table)


def direct_product(g: GroupTable, h: GroupTable) -> GroupTable:
    names = tuple(f"{a}|{b}" for a in g.elements for b in h.elements)
    nh = h.order

    def mul(i, j):
        ai, bi = divmod(i, nh)
        aj, bj = divmod(j, nh)
        return g.mul(ai, aj) * nh + h.mul(bi, bj)

    n = len(names)
    table = tuple(tuple(mul(i, j) for j in range(n)) for i in range(n))
    return GroupTable(elements=names, product=table)


def symmetric_group(n: int) -> GroupTable:
    """S_n for small n; used for exhaustive group sweeps in tests."""
    perms = sorted(itertools.permutations(range(n)))
    names = tuple("".join(map(str, p)) for p in perms)
    index = {p: i for i, p in enumerate(perms)}
    table = tuple(
        tuple(index[tuple(p[q[k]] for k in range(n))] for q in perms) for p in perms
    )
    return GroupTable(elements=names, product=table)
