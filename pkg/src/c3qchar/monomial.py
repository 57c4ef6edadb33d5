"""The free abelian group of loop-weight monomials for type C3.

A monomial is a finite product of variables ``Y_{i,s}`` with node index
i in {1,2,3} and integer spectral exponent s (the base point of the
q-lattice is fixed once and never stored).  Printing follows the compact
shorthand ``i_s`` with an optional ``^e`` suffix, e.g. ``3_0 2_5^-1``.

The generators ``A_{i,s}`` of the root sublattice are

    A_{1,s} = Y_{1,s+1} Y_{1,s-1} Y_{2,s}^{-1}
    A_{2,s} = Y_{2,s+1} Y_{2,s-1} Y_{1,s}^{-1} Y_{3,s}^{-1}
    A_{3,s} = Y_{3,s+2} Y_{3,s-2} Y_{2,s+1}^{-1} Y_{2,s-1}^{-1}

(the node-3 pattern is stretched because r_3 = 2).
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator

from .cartan import Weight

__all__ = [
    "LMonomial",
    "NotInLattice",
    "a_monomial",
    "decompose_in_a_basis",
    "monomial_leq",
]

NODE_STEP = (1, 1, 2)  # r_i, indexed by node-1

_TOKEN_RE = re.compile(r"^([123])_(-?\d+)(?:\^(-?\d+))?$")


class NotInLattice(Exception):
    """Raised when a monomial is not a product of A-generators."""


class LMonomial:
    """Immutable sparse Laurent monomial; canonical form drops zero exponents."""

    __slots__ = ("items", "_hash")

    items: tuple[tuple[int, int, int], ...]  # (node, spectral, exponent), sorted by (node, spectral)

    def __init__(self, items: Iterable[tuple[int, int, int]] = (), *, _canonical: bool = False):
        if _canonical:
            tup = tuple(items)
        else:
            acc: dict[tuple[int, int], int] = {}
            for i, s, e in items:
                if i not in (1, 2, 3):
                    raise ValueError(f"node index must be 1, 2 or 3, got {i}")
                key = (i, s)
                acc[key] = acc.get(key, 0) + e
            tup = tuple(
                (i, s, e) for (i, s), e in sorted(acc.items()) if e
            )
        object.__setattr__(self, "items", tup)
        object.__setattr__(self, "_hash", hash(tup))

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("LMonomial is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def one() -> "LMonomial":
        return _ONE

    @staticmethod
    def y(i: int, s: int, e: int = 1) -> "LMonomial":
        return LMonomial(((i, s, e),))

    @staticmethod
    def from_dict(d: dict[tuple[int, int], int]) -> "LMonomial":
        return LMonomial((i, s, e) for (i, s), e in d.items())

    # -- group structure ---------------------------------------------------

    def __mul__(self, other: "LMonomial") -> "LMonomial":
        if not self.items:
            return other
        if not other.items:
            return self
        acc = {(i, s): e for i, s, e in self.items}
        for i, s, e in other.items:
            key = (i, s)
            v = acc.get(key, 0) + e
            if v:
                acc[key] = v
            else:
                del acc[key]
        return LMonomial(
            ((i, s, e) for (i, s), e in sorted(acc.items())), _canonical=True
        )

    def inverse(self) -> "LMonomial":
        return LMonomial(((i, s, -e) for i, s, e in self.items), _canonical=True)

    def __pow__(self, n: int) -> "LMonomial":
        if n == 0:
            return _ONE
        return LMonomial(((i, s, n * e) for i, s, e in self.items), _canonical=True)

    def __truediv__(self, other: "LMonomial") -> "LMonomial":
        return self * other.inverse()

    # -- queries -----------------------------------------------------------

    def exponent(self, i: int, s: int) -> int:
        for ni, ns, e in self.items:
            if ni == i and ns == s:
                return e
        return 0

    @property
    def is_identity(self) -> bool:
        return not self.items

    @property
    def is_dominant(self) -> bool:
        return all(e > 0 for _, _, e in self.items)

    @property
    def is_antidominant(self) -> bool:
        return all(e < 0 for _, _, e in self.items)

    def is_j_dominant(self, j: int) -> bool:
        return all(e > 0 for i, _, e in self.items if i == j)

    def node_entries(self, j: int) -> list[tuple[int, int]]:
        """The (spectral, exponent) pairs carried by node j, ascending."""
        return [(s, e) for i, s, e in self.items if i == j]

    def is_right_negative(self) -> bool:
        """Every entry at the maximal spectral parameter has negative exponent."""
        if not self.items:
            raise ValueError("right-negativity is undefined for the identity monomial")
        smax = max(s for _, s, _ in self.items)
        return all(e < 0 for _, s, e in self.items if s == smax)

    def weight(self) -> Weight:
        w = [0, 0, 0]
        for i, _, e in self.items:
            w[i - 1] += e
        return Weight(tuple(w))

    # -- symmetries --------------------------------------------------------

    def tau_shift(self, b: int) -> "LMonomial":
        """Translate every spectral exponent by b."""
        return LMonomial(((i, s + b, e) for i, s, e in self.items), _canonical=True)

    def iota_dual(self) -> "LMonomial":
        """The involution Y_{i,s} -> Y_{i,8-s}^{-1}."""
        return LMonomial((i, 8 - s, -e) for i, s, e in self.items)

    # -- text / JSON forms -------------------------------------------------

    def __str__(self) -> str:
        if not self.items:
            return "1"
        parts = []
        for i, s, e in sorted(self.items, key=lambda t: (-t[0], t[1])):
            parts.append(f"{i}_{s}" if e == 1 else f"{i}_{s}^{e}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"LMonomial({self})"

    @staticmethod
    def parse(text: str) -> "LMonomial":
        text = text.strip()
        if text in ("1", ""):
            return _ONE
        items = []
        for token in text.split():
            m = _TOKEN_RE.match(token)
            if m is None:
                raise ValueError(f"cannot parse monomial token {token!r}")
            i, s, e = int(m.group(1)), int(m.group(2)), int(m.group(3) or 1)
            items.append((i, s, e))
        return LMonomial(items)

    def to_json(self) -> list[list[int]]:
        return [[i, s, e] for i, s, e in self.items]

    @staticmethod
    def from_json(data: list[list[int]]) -> "LMonomial":
        return LMonomial((int(i), int(s), int(e)) for i, s, e in data)

    # -- dunder plumbing ---------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, LMonomial) and self.items == other.items

    def __hash__(self) -> int:
        return self._hash

    def __iter__(self) -> Iterator[tuple[int, int, int]]:
        return iter(self.items)


_ONE = LMonomial((), _canonical=True)


def a_monomial(i: int, s: int) -> LMonomial:
    """The generator A_{i,s} of the root sublattice."""
    if i == 1:
        return LMonomial(((1, s - 1, 1), (1, s + 1, 1), (2, s, -1)))
    if i == 2:
        return LMonomial(((1, s, -1), (2, s - 1, 1), (2, s + 1, 1), (3, s, -1)))
    if i == 3:
        return LMonomial(((2, s - 1, -1), (2, s + 1, -1), (3, s - 2, 1), (3, s + 2, 1)))
    raise ValueError(f"node index must be 1, 2 or 3, got {i}")


def decompose_in_a_basis(m: LMonomial) -> dict[tuple[int, int], int]:
    """Write m as a product of A-generators; the exponent map is unique.

    Peels greedily from the largest spectral parameter downwards: the only
    generator able to supply a Y-entry for node i at the current spectral
    top s is A_{i, s - r_i}, so each step is forced.  Raises NotInLattice
    when no finite decomposition exists.
    """
    if m.is_identity:
        return {}
    if not m.weight().in_root_lattice():
        raise NotInLattice(f"weight of {m} is not in the root lattice")

    cur = {(i, s): e for i, s, e in m.items}
    out: dict[tuple[int, int], int] = {}
    spectrals = [s for _, s in cur]
    mass = sum(abs(e) for e in cur.values())
    # A genuine decomposition drains within a bounded spectral window; runaway
    # descent (weight in the root lattice but m outside the A-span) is cut off
    # by generous round/mass caps.
    max_rounds = (max(spectrals) - min(spectrals)) + 8 * mass + 64
    rounds = 0
    while cur:
        rounds += 1
        if rounds > max_rounds or sum(abs(e) for e in cur.values()) > 4_000_000:
            raise NotInLattice(f"{m} has no finite A-decomposition")
        smax = max(s for _, s in cur)
        for i in (1, 2, 3):
            e = cur.get((i, smax), 0)
            if not e:
                continue
            t = smax - NODE_STEP[i - 1]
            out[(i, t)] = out.get((i, t), 0) + e
            for ai, as_, ae in (a_monomial(i, t) ** (-e)).items:
                key = (ai, as_)
                v = cur.get(key, 0) + ae
                if v:
                    cur[key] = v
                else:
                    del cur[key]
    return {k: v for k, v in out.items() if v}


def monomial_leq(m: LMonomial, m2: LMonomial) -> bool:
    """The root-lattice partial order: m <= m2 iff m2/m is a product of A's
    with nonnegative exponents."""
    try:
        dec = decompose_in_a_basis(m2 / m)
    except NotInLattice:
        return False
    return all(v >= 0 for v in dec.values())
