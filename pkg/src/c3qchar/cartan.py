"""Root and weight combinatorics for the simple Lie algebra of type C3.

Weights are stored in the fundamental-weight basis (integer coordinates).
Internally most computations switch to the orthogonal (epsilon) coordinates
of the standard realisation of C3 inside R^3, where the bilinear form is the
dot product, the Weyl group acts by signed permutations, and everything is
integer-exact:

    alpha_1 = e1 - e2,   alpha_2 = e2 - e3,   alpha_3 = 2 e3
    omega_1 = e1,        omega_2 = e1 + e2,   omega_3 = e1 + e2 + e3

The long root is alpha_3, with squared length 4; the symmetrizer is
(r1, r2, r3) = (1, 1, 2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "Weight",
    "RootSystemC3",
    "CARTAN_MATRIX",
    "SYMMETRIZER",
    "root_system",
    "simple_root",
    "bilinear_form",
    "weight_leq",
    "freudenthal_weight_mults",
    "weyl_dim",
]

CARTAN_MATRIX: tuple[tuple[int, int, int], ...] = ((2, -1, 0), (-1, 2, -2), (0, -1, 2))
SYMMETRIZER: tuple[int, int, int] = (1, 1, 2)

# 2 * C^{-1}; entries of the inverse Cartan matrix are half-integers (det C = 2).
_TWO_CARTAN_INV: tuple[tuple[int, int, int], ...] = ((2, 2, 2), (2, 4, 4), (1, 2, 3))


@dataclass(frozen=True, slots=True)
class Weight:
    """An element of the weight lattice, as integer fundamental-weight coordinates."""

    coords: tuple[int, int, int]

    @staticmethod
    def zero() -> "Weight":
        return Weight((0, 0, 0))

    @staticmethod
    def fundamental(i: int) -> "Weight":
        """The fundamental weight omega_i, i in {1, 2, 3}."""
        if i not in (1, 2, 3):
            raise ValueError(f"node index must be 1, 2 or 3, got {i}")
        c = [0, 0, 0]
        c[i - 1] = 1
        return Weight(tuple(c))

    def __post_init__(self) -> None:
        if len(self.coords) != 3 or not all(isinstance(c, int) for c in self.coords):
            raise ValueError(f"weight coordinates must be 3 integers, got {self.coords!r}")

    def __add__(self, other: "Weight") -> "Weight":
        a, b = self.coords, other.coords
        return Weight((a[0] + b[0], a[1] + b[1], a[2] + b[2]))

    def __sub__(self, other: "Weight") -> "Weight":
        a, b = self.coords, other.coords
        return Weight((a[0] - b[0], a[1] - b[1], a[2] - b[2]))

    def __neg__(self) -> "Weight":
        a = self.coords
        return Weight((-a[0], -a[1], -a[2]))

    def __rmul__(self, n: int) -> "Weight":
        a = self.coords
        return Weight((n * a[0], n * a[1], n * a[2]))

    @property
    def is_dominant(self) -> bool:
        return all(c >= 0 for c in self.coords)

    def eps(self) -> tuple[int, int, int]:
        """Orthogonal coordinates (x, y, z) with x = a+b+c, y = b+c, z = c."""
        a, b, c = self.coords
        return (a + b + c, b + c, c)

    @staticmethod
    def from_eps(e: tuple[int, int, int]) -> "Weight":
        x, y, z = e
        return Weight((x - y, y - z, z))

    def root_coords(self) -> tuple[Fraction, Fraction, Fraction]:
        """Coordinates in the simple-root basis; exact rationals (denominator <= 2)."""
        return tuple(
            Fraction(sum(m * c for m, c in zip(row, self.coords)), 2)
            for row in _TWO_CARTAN_INV
        )  # type: ignore[return-value]

    def in_root_lattice(self) -> bool:
        return all(r.denominator == 1 for r in self.root_coords())

    def __str__(self) -> str:
        return "({}, {}, {})".format(*self.coords)


def simple_root(j: int) -> Weight:
    """alpha_j in fundamental-weight coordinates (the j-th column of the Cartan matrix)."""
    if j not in (1, 2, 3):
        raise ValueError(f"node index must be 1, 2 or 3, got {j}")
    return Weight(tuple(CARTAN_MATRIX[i][j - 1] for i in range(3)))


def _closure_positive_roots() -> tuple[tuple[int, int, int], ...]:
    """Generate the positive roots in simple-root coordinates by closure under addition."""
    simple = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]

    def as_eps(v: tuple[int, int, int]) -> tuple[int, int, int]:
        w = sum((v[j] * simple_root(j + 1) for j in range(3)), Weight.zero())
        return w.eps()

    def is_root(v: tuple[int, int, int]) -> bool:
        e = sorted(abs(x) for x in as_eps(v))
        return e in ([0, 1, 1], [0, 0, 2])

    roots = set(simple)
    changed = True
    while changed:
        changed = False
        for a, b in itertools.product(list(roots), simple):
            s = (a[0] + b[0], a[1] + b[1], a[2] + b[2])
            if s not in roots and is_root(s):
                roots.add(s)
                changed = True
    return tuple(sorted(roots))


@dataclass(frozen=True)
class RootSystemC3:
    """Static root data: Cartan matrix, symmetrizer, positive roots, rho."""

    cartan_matrix: tuple[tuple[int, int, int], ...]
    symmetrizer: tuple[int, int, int]
    positive_roots: tuple[tuple[int, int, int], ...]
    rho: Weight

    @staticmethod
    def create() -> "RootSystemC3":
        pos = _closure_positive_roots()
        if len(pos) != 9:
            raise AssertionError(f"positive-root closure produced {len(pos)} roots, expected 9")
        return RootSystemC3(
            cartan_matrix=CARTAN_MATRIX,
            symmetrizer=SYMMETRIZER,
            positive_roots=pos,
            rho=Weight((1, 1, 1)),
        )

    def positive_root_weights(self) -> tuple[Weight, ...]:
        """The positive roots as Weight values (fundamental-weight coordinates)."""
        return tuple(
            sum((v[j] * simple_root(j + 1) for j in range(3)), Weight.zero())
            for v in self.positive_roots
        )


@lru_cache(maxsize=1)
def root_system() -> RootSystemC3:
    return RootSystemC3.create()


def bilinear_form(x: Weight, y: Weight) -> int:
    """The invariant symmetric form, normalised so short roots have squared length 2.

    In orthogonal coordinates this is the plain dot product, which is
    integer-valued on the weight lattice.
    """
    a, b = x.eps(), y.eps()
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def weight_leq(lam: Weight, mu: Weight) -> bool:
    """True iff mu - lam is a nonnegative integer combination of simple roots."""
    diff = (mu - lam).root_coords()
    return all(r.denominator == 1 and r >= 0 for r in diff)


def _dominant_eps_rep(e: tuple[int, int, int]) -> tuple[int, int, int]:
    # The Weyl group of C3 is all signed permutations of the epsilon coordinates;
    # the dominant chamber is x >= y >= z >= 0.
    return tuple(sorted((abs(e[0]), abs(e[1]), abs(e[2])), reverse=True))  # type: ignore[return-value]


def _weyl_orbit_eps(e: tuple[int, int, int]) -> set[tuple[int, int, int]]:
    out: set[tuple[int, int, int]] = set()
    for p in itertools.permutations(e):
        for signs in itertools.product((1, -1), repeat=3):
            out.add((signs[0] * p[0], signs[1] * p[1], signs[2] * p[2]))
    return out


# Positive roots in epsilon coordinates (i < j): e_i - e_j, e_i + e_j, 2 e_i.
_POS_ROOTS_EPS: tuple[tuple[int, int, int], ...] = (
    (1, -1, 0), (1, 0, -1), (0, 1, -1),
    (1, 1, 0), (1, 0, 1), (0, 1, 1),
    (2, 0, 0), (0, 2, 0), (0, 0, 2),
)


def _dot(a: tuple[int, int, int], b: tuple[int, int, int]) -> int:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@lru_cache(maxsize=None)
def _freudenthal_dominant(lam_coords: tuple[int, int, int]) -> dict[tuple[int, int, int], int]:
    """Multiplicities of the dominant weights of V(lam), keyed by epsilon coordinates."""
    lam = Weight(lam_coords)
    lam_eps = lam.eps()
    rho_eps = (3, 2, 1)

    # Candidate dominant weights mu <= lam: lam - n1 a1 - n2 a2 - n3 a3 with n >= 0.
    # Each n_i is bounded by the root coordinates of lam - w0(lam) = 2 lam.
    n_bound = [int(2 * r) for r in lam.root_coords()]
    dominants: list[tuple[int, int, int]] = []
    for n1 in range(n_bound[0] + 1):
        for n2 in range(n_bound[1] + 1):
            for n3 in range(n_bound[2] + 1):
                mu = lam - (n1 * simple_root(1) + n2 * simple_root(2) + n3 * simple_root(3))
                if mu.is_dominant:
                    dominants.append(mu.eps())

    # Freudenthal recursion, processed from the highest weight downwards.  The
    # weights feeding mult(mu) all lie strictly above mu in the root order, so
    # sorting by decreasing depth-from-lam works.
    def depth(mu_eps: tuple[int, int, int]) -> int:
        d = (lam - Weight.from_eps(mu_eps)).root_coords()
        return int(sum(d))

    dominants.sort(key=depth)
    lam_norm = _dot(
        (lam_eps[0] + rho_eps[0], lam_eps[1] + rho_eps[1], lam_eps[2] + rho_eps[2]),
        (lam_eps[0] + rho_eps[0], lam_eps[1] + rho_eps[1], lam_eps[2] + rho_eps[2]),
    )
    mults: dict[tuple[int, int, int], int] = {}
    norm_cap = _dot(lam_eps, lam_eps)
    for mu_eps in dominants:
        if mu_eps == lam_eps:
            mults[mu_eps] = 1
            continue
        acc = 0
        for alpha in _POS_ROOTS_EPS:
            k = 1
            while True:
                nu = (mu_eps[0] + k * alpha[0], mu_eps[1] + k * alpha[1], mu_eps[2] + k * alpha[2])
                if _dot(nu, nu) > norm_cap:
                    break
                m = mults.get(_dominant_eps_rep(nu), 0)
                if m:
                    acc += 2 * m * _dot(nu, alpha)
                k += 1
        mu_rho = (mu_eps[0] + rho_eps[0], mu_eps[1] + rho_eps[1], mu_eps[2] + rho_eps[2])
        denom = lam_norm - _dot(mu_rho, mu_rho)
        if denom <= 0 or acc % denom:
            raise AssertionError(f"Freudenthal recursion inconsistent at {mu_eps}")
        m = acc // denom
        if m:
            mults[mu_eps] = m
    return mults


def freudenthal_weight_mults(lam: Weight) -> dict[Weight, int]:
    """The full weight-multiplicity function of the irreducible module V(lam).

    Raises ValueError unless lam is dominant.  The result is Weyl-group
    invariant and sums to weyl_dim(lam).
    """
    if not lam.is_dominant:
        raise ValueError(f"highest weight must be dominant, got {lam}")
    dominant_mults = _freudenthal_dominant(lam.coords)
    out: dict[Weight, int] = {}
    for mu_eps, m in dominant_mults.items():
        for nu_eps in _weyl_orbit_eps(mu_eps):
            out[Weight.from_eps(nu_eps)] = m
    return out


def weyl_dim(lam: Weight) -> int:
    """dim V(lam) by the Weyl dimension formula (exact integer arithmetic)."""
    if not lam.is_dominant:
        raise ValueError(f"highest weight must be dominant, got {lam}")
    x, y, z = lam.eps()
    x, y, z = x + 3, y + 2, z + 1  # lam + rho in epsilon coordinates
    num = (x - y) * (y - z) * (x - z) * (x + y) * (y + z) * (x + z) * (2 * x) * (2 * y) * (2 * z)
    q, r = divmod(num, 5760)  # same product evaluated at rho
    if r:
        raise AssertionError("Weyl dimension product not divisible by the rho product")
    return q
