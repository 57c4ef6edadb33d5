"""Restriction to the finite quantum group and splitting into irreducibles.

Forgetting the spectral parameter sends a Laurent monomial in the variables
``Y_{i,a}`` to the weight ``sum_i e_i omega_i``; applied term by term this
restricts a q-character to an ordinary character, represented here as a
sparse :class:`WeightCharacter`.  Restrictions of module characters are
Weyl-invariant with nonnegative multiplicities, so they split uniquely into
irreducible characters; :func:`decompose` recovers that splitting by
repeatedly peeling a maximal dominant weight and subtracting the
Freudenthal character it generates.

:func:`conjecture_prediction` evaluates the conjectured closed-form
splittings for the three minimal-affinization shapes ``T[k,l,0]``,
``T[k,0,m]`` and ``Ttilde[k,0,m]``, and :func:`h_lambda_character` the
determinant formula

    H_lambda = det(h_{lambda_i - i + j}),   h_p = sum_r ch V((p-2r) omega_1),

so the two can be compared against a computed decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from .cartan import Weight, freudenthal_weight_mults, weight_leq, weyl_dim
from .monomial import LMonomial
from .qchar import QCharacter

__all__ = [
    "WeightCharacter",
    "weight_of",
    "restrict",
    "irreducible_character",
    "decompose",
    "conjecture_prediction",
    "h_lambda_character",
]


def weight_of(m: LMonomial) -> Weight:
    """The weight of a monomial: each ``i``-factor contributes its exponent
    to the ``omega_i`` coordinate."""
    c = [0, 0, 0]
    for i, _s, e in m.items:
        c[i - 1] += e
    return Weight((c[0], c[1], c[2]))


@dataclass(frozen=True)
class WeightCharacter:
    """Sparse integer combination of weights, closed under ring operations."""

    weights: Mapping[Weight, int]

    def __init__(self, weights: Mapping[Weight, int]):
        cleaned = {w: c for w, c in weights.items() if c}
        object.__setattr__(self, "weights", MappingProxyType(cleaned))

    @staticmethod
    def zero() -> "WeightCharacter":
        return WeightCharacter({})

    @staticmethod
    def one() -> "WeightCharacter":
        return WeightCharacter({Weight.zero(): 1})

    def dimension(self) -> int:
        return sum(self.weights.values())

    def __bool__(self) -> bool:
        return bool(self.weights)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightCharacter):
            return NotImplemented
        return dict(self.weights) == dict(other.weights)

    def __hash__(self) -> int:
        return hash(frozenset(self.weights.items()))

    def __add__(self, other: "WeightCharacter") -> "WeightCharacter":
        acc = dict(self.weights)
        for w, c in other.weights.items():
            acc[w] = acc.get(w, 0) + c
        return WeightCharacter(acc)

    def __sub__(self, other: "WeightCharacter") -> "WeightCharacter":
        acc = dict(self.weights)
        for w, c in other.weights.items():
            acc[w] = acc.get(w, 0) - c
        return WeightCharacter(acc)

    def __mul__(self, other: "WeightCharacter") -> "WeightCharacter":
        acc: dict[Weight, int] = {}
        for w1, c1 in self.weights.items():
            for w2, c2 in other.weights.items():
                k = w1 + w2
                acc[k] = acc.get(k, 0) + c1 * c2
        return WeightCharacter(acc)

    def scaled(self, n: int) -> "WeightCharacter":
        return WeightCharacter({w: n * c for w, c in self.weights.items()})

    def sorted_items(self) -> list[tuple[Weight, int]]:
        return sorted(self.weights.items(), key=lambda t: t[0].coords, reverse=True)

    def to_json(self) -> list:
        return [[list(w.coords), c] for w, c in self.sorted_items()]

    @staticmethod
    def from_json(data: list) -> "WeightCharacter":
        return WeightCharacter({Weight(tuple(c)): m for c, m in data})


def restrict(x: QCharacter) -> WeightCharacter:
    """Forget spectral parameters, keeping each term's weight and multiplicity."""
    acc: dict[Weight, int] = {}
    for m, c in x.terms.items():
        w = weight_of(m)
        acc[w] = acc.get(w, 0) + c
    return WeightCharacter(acc)


def irreducible_character(lam: Weight) -> WeightCharacter:
    """ch V(lam) with full weight multiplicities."""
    return WeightCharacter(freudenthal_weight_mults(lam))


def decompose(w: WeightCharacter) -> dict[Weight, int]:
    """Split a restriction into irreducible characters by greedy peeling.

    Each round takes a maximal dominant weight among the remaining ones
    (lexicographically largest coordinates when several are incomparable),
    reads off its residual multiplicity and subtracts that multiple of its
    irreducible character.  For the restriction of a module character every
    peel removes genuine constituents, so the residue stays nonnegative and
    reaches zero; inputs that are not module characters surface as a
    negative multiplicity or a leftover with no dominant weight, reported
    as ``ValueError``.

    Returns ``{highest weight: multiplicity}`` in peeling order.
    """
    residual = dict(w.weights)
    out: dict[Weight, int] = {}
    while residual:
        dominants = [lam for lam in residual if lam.is_dominant]
        if not dominants:
            sample = sorted(residual.items(), key=lambda t: t[0].coords)[:4]
            raise ValueError(
                f"no dominant weight left in a nonzero residue (sample: {sample})"
            )
        maximal = [
            lam
            for lam in dominants
            if not any(mu is not lam and weight_leq(lam, mu) for mu in dominants)
        ]
        lam = max(maximal, key=lambda t: t.coords)
        c = residual[lam]
        if c < 0:
            raise ValueError(f"negative residual multiplicity {c} at {lam}")
        out[lam] = out.get(lam, 0) + c
        for mu, m in freudenthal_weight_mults(lam).items():
            v = residual.get(mu, 0) - c * m
            if v:
                residual[mu] = v
            else:
                residual.pop(mu, None)
    return out


def conjecture_prediction(family: str, k: int, l: int, m: int) -> dict[Weight, int]:
    """Conjectured irreducible splitting for the three covered label shapes.

    ``("T", k, l, 0)``, ``("T", k, 0, m)`` and ``("Ttilde", k, 0, m)`` have
    closed-form predictions; any other shape raises ``ValueError``.  The
    result maps each predicted highest weight to its multiplicity, directly
    comparable with :func:`decompose`.
    """
    if min(k, l, m) < 0:
        raise ValueError("family parameters must be nonnegative")
    out: dict[Weight, int] = {}

    def add(a: int, b: int, c: int) -> None:
        w = Weight((a, b, c))
        out[w] = out.get(w, 0) + 1

    if family == "T" and m == 0:
        for i in range(l // 2 + 1):
            for j in range(i + 1):
                add(2 * i - 2 * j, l - 2 * i, k)
        return out
    if family == "T" and l == 0:
        for i in range(m // 2 + 1):
            add(m - 2 * i, 0, k)
        return out
    if family == "Ttilde" and l == 0:
        for i in range(k // 2 + 1):
            add(k - 2 * i, 0, m)
        return out
    raise ValueError(
        f"no conjectured splitting for {family}[{k},{l},{m}]; covered shapes are "
        "T[k,l,0], T[k,0,m] and Ttilde[k,0,m]"
    )


def _h(p: int, memo: dict[int, WeightCharacter]) -> WeightCharacter:
    if p < 0:
        return WeightCharacter.zero()
    hit = memo.get(p)
    if hit is None:
        acc = WeightCharacter.zero()
        for r in range(p // 2 + 1):
            acc = acc + irreducible_character(Weight(((p - 2 * r), 0, 0)))
        memo[p] = hit = acc
    return hit


def _det(mat: list[list[WeightCharacter]]) -> WeightCharacter:
    n = len(mat)
    if n == 0:
        return WeightCharacter.one()
    if n == 1:
        return mat[0][0]
    acc = WeightCharacter.zero()
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
        term = mat[0][j] * _det(minor)
        acc = acc + (term if j % 2 == 0 else term.scaled(-1))
    return acc


def h_lambda_character(lam: Weight) -> WeightCharacter:
    """The determinant character ``H_lambda`` for ``lam = m1*w1 + m2*w2``.

    The matrix entry at ``(i, j)`` is ``h_{lambda_i - i + j}`` where
    ``lambda_i`` sums the coordinates from ``i`` up to the last nonzero one
    (a partition), ``h_p`` is the sum of ``ch V((p-2r) omega_1)`` over
    ``0 <= r <= p//2``, ``h_{p<0} = 0``.  Only defined away from the long
    node: a nonzero ``omega_3`` coordinate raises ``ValueError``.
    """
    m1, m2, m3 = lam.coords
    if m3 != 0:
        raise ValueError("the determinant formula requires the omega_3 coordinate to vanish")
    if min(m1, m2) < 0:
        raise ValueError(f"highest weight must be dominant, got {lam}")
    mults = (m1, m2)
    ilam = max((i + 1 for i in range(2) if mults[i]), default=0)
    parts = [sum(mults[i - 1 : ilam]) for i in range(1, ilam + 1)]
    memo: dict[int, WeightCharacter] = {}
    mat = [
        [_h(parts[i] - (i + 1) + (j + 1), memo) for j in range(ilam)]
        for i in range(ilam)
    ]
    return _det(mat)
