"""The sparse character ring and the sl2 string engine.

A character is a finite integer combination of loop-weight monomials.  The
ring operations are exact; products of large characters are routed through
the packed kernels in :mod:`c3qchar._accel`.

Term order
----------

"Highest" is taken with respect to a graded order: the grade of a monomial
is the linear functional ``2H = 5 w1 + 8 w2 + 9 w3`` of its weight, chosen
so that every generator ``A_{i,s}`` has grade exactly 2.  Multiplying by any
``A_{i,s}^{-1}`` therefore drops the grade by 2, which makes the grade a
depth counter below a module's highest monomial, independent of spectral
position.  Ties are broken by a translation-invariant lexicographic
comparison of exponent vectors, so the order is total and compatible with
multiplication — hence usable for exact division.
"""

from __future__ import annotations

import heapq
from typing import Iterable, Iterator

from . import _accel
from .monomial import LMonomial

__all__ = [
    "QCharacter",
    "NotDivisible",
    "GradedProduct",
    "term_sort_key",
    "grade",
    "exact_divide",
    "product_dominant_ledger",
    "beta_project",
    "sl2_string_decompose",
    "sl2_kr_character",
    "sl2_character",
    "sl2_expansion_steps",
]

_GRADE_COEF = (5, 8, 9)

# products with at most this many monomial pairs stay on the object path
_OBJ_PAIRS_MAX = 50_000


def grade(m: LMonomial) -> int:
    """The 2H functional; drops by exactly 2 under any A_{i,s}^{-1}."""
    g = 0
    for i, _, e in m.items:
        g += _GRADE_COEF[i - 1] * e
    return g


class _LexKey:
    """Translation-invariant lexicographic tie-break on sparse exponent vectors.

    Slots are walked in (node, spectral) order with missing entries read as 0;
    at the first difference the larger exponent wins.
    """

    __slots__ = ("items",)

    def __init__(self, items: tuple[tuple[int, int, int], ...]):
        self.items = items

    def __eq__(self, other) -> bool:
        return self.items == other.items

    def __lt__(self, other) -> bool:
        a, b = self.items, other.items
        for (i1, s1, e1), (i2, s2, e2) in zip(a, b):
            if i1 == i2 and s1 == s2:
                if e1 != e2:
                    return e1 < e2
            elif (i1, s1) < (i2, s2):
                return e1 < 0
            else:
                return e2 > 0
        if len(a) == len(b):
            return False
        if len(a) > len(b):
            return a[len(b)][2] < 0
        return b[len(a)][2] > 0

    def __gt__(self, other) -> bool:
        return other.__lt__(self)

    def __hash__(self) -> int:  # pragma: no cover - keys are transient
        return hash(self.items)


def term_sort_key(m: LMonomial):
    """Sort key realising the graded term order (use max/sorted with it)."""
    return (grade(m), _LexKey(m.items))


class QCharacter:
    """Immutable sparse integer combination of monomials."""

    __slots__ = ("terms", "_highest")

    terms: dict[LMonomial, int]

    def __init__(self, terms: dict[LMonomial, int] | Iterable[tuple[LMonomial, int]] = ()):
        if isinstance(terms, dict):
            d = {m: c for m, c in terms.items() if c}
        else:
            d = {}
            for m, c in terms:
                v = d.get(m, 0) + c
                if v:
                    d[m] = v
                elif m in d:
                    del d[m]
        object.__setattr__(self, "terms", d)
        object.__setattr__(self, "_highest", None)

    def __setattr__(self, name, value):
        raise AttributeError("QCharacter is immutable")

    @staticmethod
    def _raw(d: dict[LMonomial, int]) -> "QCharacter":
        out = object.__new__(QCharacter)
        object.__setattr__(out, "terms", d)
        object.__setattr__(out, "_highest", None)
        return out

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "QCharacter":
        return QCharacter._raw({})

    @staticmethod
    def one() -> "QCharacter":
        return QCharacter._raw({LMonomial.one(): 1})

    @staticmethod
    def from_monomial(m: LMonomial, c: int = 1) -> "QCharacter":
        return QCharacter._raw({m: c}) if c else QCharacter._raw({})

    # -- basic queries -----------------------------------------------------

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __iter__(self) -> Iterator[tuple[LMonomial, int]]:
        return iter(self.terms.items())

    def __contains__(self, m: LMonomial) -> bool:
        return m in self.terms

    def __getitem__(self, m: LMonomial) -> int:
        return self.terms.get(m, 0)

    def dimension(self) -> int:
        """Sum of multiplicities (the classical dimension for module characters)."""
        return sum(self.terms.values())

    def mass(self) -> int:
        return sum(abs(c) for c in self.terms.values())

    @property
    def highest_monomial(self) -> LMonomial | None:
        if not self.terms:
            return None
        cached = self._highest
        if cached is None:
            cached = max(self.terms, key=term_sort_key)
            object.__setattr__(self, "_highest", cached)
        return cached

    def dominant_monomials(self) -> list[tuple[LMonomial, int]]:
        out = [(m, c) for m, c in self.terms.items() if m.is_dominant]
        out.sort(key=lambda t: term_sort_key(t[0]), reverse=True)
        return out

    def antidominant_monomials(self) -> list[tuple[LMonomial, int]]:
        out = [(m, c) for m, c in self.terms.items() if m.is_antidominant]
        out.sort(key=lambda t: term_sort_key(t[0]), reverse=True)
        return out

    def _require_module_character(self) -> None:
        for m, c in self.terms.items():
            if c < 0:
                raise ValueError(f"not a module character: {m} has multiplicity {c}")

    def is_special(self) -> bool:
        self._require_module_character()
        return len(self.dominant_monomials()) == 1

    def is_antispecial(self) -> bool:
        self._require_module_character()
        return len(self.antidominant_monomials()) == 1

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "QCharacter") -> "QCharacter":
        if not other.terms:
            return self
        if not self.terms:
            return other
        d = dict(self.terms)
        for m, c in other.terms.items():
            v = d.get(m, 0) + c
            if v:
                d[m] = v
            else:
                del d[m]
        return QCharacter._raw(d)

    def __neg__(self) -> "QCharacter":
        return QCharacter._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "QCharacter") -> "QCharacter":
        if not other.terms:
            return self
        d = dict(self.terms)
        for m, c in other.terms.items():
            v = d.get(m, 0) - c
            if v:
                d[m] = v
            else:
                del d[m]
        return QCharacter._raw(d)

    def scale(self, n: int) -> "QCharacter":
        if n == 0:
            return QCharacter.zero()
        return QCharacter._raw({m: n * c for m, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        if not isinstance(other, QCharacter):
            return NotImplemented
        if not self.terms or not other.terms:
            return QCharacter.zero()
        nx, ny = len(self.terms), len(other.terms)
        if min(nx, ny) == 1 or nx * ny <= _OBJ_PAIRS_MAX:
            return QCharacter._raw(_mul_object(self.terms, other.terms))
        return QCharacter._raw(GradedProduct(self, other).full())

    __rmul__ = __mul__

    def monomial_multiple(self, m: LMonomial, c: int = 1) -> "QCharacter":
        """self * (c * m), computed directly."""
        return QCharacter._raw({k * m: v * c for k, v in self.terms.items()}) if c else QCharacter.zero()

    def tau_shift(self, b: int) -> "QCharacter":
        if b == 0:
            return self
        return QCharacter._raw({m.tau_shift(b): c for m, c in self.terms.items()})

    def iota_dual(self) -> "QCharacter":
        return QCharacter._raw({m.iota_dual(): c for m, c in self.terms.items()})

    # -- grading -----------------------------------------------------------

    def components_by_grade(self) -> dict[int, dict[LMonomial, int]]:
        """Split terms by the 2H grade (keys are absolute grade values)."""
        out: dict[int, dict[LMonomial, int]] = {}
        for m, c in self.terms.items():
            out.setdefault(grade(m), {})[m] = c
        return out

    # -- equality / display ------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, QCharacter) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        n = len(self.terms)
        if n == 0:
            return "QCharacter(0)"
        top = self.highest_monomial
        return f"QCharacter({n} terms, dim {self.dimension()}, top {top})"

    def sorted_terms(self) -> list[tuple[LMonomial, int]]:
        """Terms sorted by the term order, highest first (deterministic)."""
        return sorted(self.terms.items(), key=lambda t: term_sort_key(t[0]), reverse=True)

    def to_json(self) -> list:
        return [[m.to_json(), c] for m, c in self.sorted_terms()]

    @staticmethod
    def from_json(data: list) -> "QCharacter":
        return QCharacter._raw({LMonomial.from_json(mj): int(c) for mj, c in data})


def _mul_object(x: dict[LMonomial, int], y: dict[LMonomial, int]) -> dict[LMonomial, int]:
    if len(y) < len(x):
        x, y = y, x
    acc: dict[LMonomial, int] = {}
    for m1, c1 in x.items():
        for m2, c2 in y.items():
            k = m1 * m2
            v = acc.get(k, 0) + c1 * c2
            if v:
                acc[k] = v
            elif k in acc:
                del acc[k]
    return acc


class GradedProduct:
    """A product of two characters, addressable one grade component at a time.

    Splitting by grade keeps peak memory at one component and lets relation
    verification compare sides component-by-component.  When the pair count
    is large the factors are bit-packed once and every component reuses the
    packed rows.
    """

    def __init__(self, x: QCharacter, y: QCharacter):
        self._xg = {h: list(comp.items()) for h, comp in x.components_by_grade().items()}
        self._yg = {h: list(comp.items()) for h, comp in y.components_by_grade().items()}
        npairs = len(x.terms) * len(y.terms)
        self._packed = npairs > _OBJ_PAIRS_MAX
        if self._packed:
            xall = [t for h in sorted(self._xg) for t in self._xg[h]]
            yall = [t for h in sorted(self._yg) for t in self._yg[h]]
            if (
                sum(abs(c) for _, c in xall) * sum(abs(c) for _, c in yall)
                >= _accel.COEF_SAFE_LIMIT
            ):
                self._packed = False  # big-int safety fallback
            else:
                self._layout = _accel.SlotLayout(xall, yall)
                self._xp = {}
                self._yp = {}
                for h, terms in self._xg.items():
                    self._xp[h] = self._layout.pack(terms, "x")
                for h, terms in self._yg.items():
                    self._yp[h] = self._layout.pack(terms, "y")

    def grades(self) -> list[int]:
        """All achievable component grades, descending."""
        out = {hx + hy for hx in self._xg for hy in self._yg}
        return sorted(out, reverse=True)

    def component(self, h: int) -> dict[LMonomial, int]:
        pairs = [
            (hx, h - hx) for hx in self._xg if (h - hx) in self._yg
        ]
        if not pairs:
            return {}
        total = sum(len(self._xg[a]) * len(self._yg[b]) for a, b in pairs)
        if self._packed and _accel.HAVE_NUMBA and total > 20_000:
            acc = _accel.PairAccumulator(self._layout, min(total, 1 << 22))
            for a, b in pairs:
                xp, xc = self._xp[a]
                yp, yc = self._yp[b]
                acc.add(xp, xc, yp, yc)
            return acc.result()
        out: dict[LMonomial, int] = {}
        for a, b in pairs:
            for m1, c1 in self._xg[a]:
                for m2, c2 in self._yg[b]:
                    k = m1 * m2
                    v = out.get(k, 0) + c1 * c2
                    if v:
                        out[k] = v
                    elif k in out:
                        del out[k]
        return out

    def full(self) -> dict[LMonomial, int]:
        out: dict[LMonomial, int] = {}
        for h in self.grades():
            out.update(self.component(h))
        return out


class NotDivisible(Exception):
    """Raised when exact character division leaves a remainder."""


def exact_divide(num: QCharacter, den: QCharacter) -> QCharacter:
    """The unique q with q * den = num, or raise NotDivisible.

    When the top grade component of the divisor is a single monomial (true
    for every module character) the quotient is built grade by grade against
    a running residual; otherwise falls back to leading-term elimination
    under the full term order.
    """
    if not den:
        raise ValueError("division by the zero character")
    if not num:
        return QCharacter.zero()

    den_comps = den.components_by_grade()
    g0 = max(den_comps)
    top = den_comps[g0]
    if len(top) == 1:
        return _exact_divide_graded(num, den, g0, *next(iter(top.items())))
    return _exact_divide_elimination(num, den)


def _exact_divide_graded(
    num: QCharacter, den: QCharacter, g0: int, m0: LMonomial, c0: int
) -> QCharacter:
    m0_inv = m0.inverse()
    den_rest = [(m, c, grade(m)) for m, c in den.terms.items() if m != m0]
    residual: dict[int, dict[LMonomial, int]] = {
        h: dict(comp) for h, comp in num.components_by_grade().items()
    }
    # the grading is a ring grading over a domain, so an exact quotient has
    # grades confined to [min(num) - min(den), max(num) - g0]
    gq_floor = min(residual) - min((grade(m) for m in den.terms), default=g0)
    quotient: dict[LMonomial, int] = {}
    while residual:
        h_top = max(residual)
        comp = residual.pop(h_top)
        if not comp:
            continue
        gq = h_top - g0
        if gq < gq_floor:
            leftover = next(iter(comp))
            raise NotDivisible(f"nonzero remainder at {leftover}")
        for m, c in comp.items():
            qc, rem = divmod(c, c0)
            if rem:
                raise NotDivisible(
                    f"coefficient {c} of {m} not divisible by leading coefficient {c0}"
                )
            qm = m * m0_inv
            quotient[qm] = qc
            # subtract qc*qm*(den minus leading term); all targets sit at
            # grades strictly below h_top
            for dm, dc, dh in den_rest:
                comp_h = residual.setdefault(dh + gq, {})
                k = qm * dm
                v = comp_h.get(k, 0) - qc * dc
                if v:
                    comp_h[k] = v
                elif k in comp_h:
                    del comp_h[k]
    return QCharacter(quotient)


def _exact_divide_elimination(num: QCharacter, den: QCharacter) -> QCharacter:
    lead = den.highest_monomial
    assert lead is not None
    c_lead = den.terms[lead]
    lead_inv = lead.inverse()
    residual = dict(num.terms)
    quotient: dict[LMonomial, int] = {}
    # max-heap on the term order; lazily deleted entries
    heap = [(_NegKey(m), m) for m in residual]
    heapq.heapify(heap)
    steps = 0
    cap = 200_000 + 20 * (len(num.terms) + len(den.terms))
    while residual:
        steps += 1
        if steps > cap:
            raise NotDivisible("elimination did not terminate; no exact quotient")
        while heap:
            _, r = heap[0]
            if r in residual:
                break
            heapq.heappop(heap)
        r = heap[0][1]
        c = residual[r]
        qc, rem = divmod(c, c_lead)
        if rem:
            raise NotDivisible(f"coefficient {c} of {r} not divisible by {c_lead}")
        qm = r * lead_inv
        quotient[qm] = quotient.get(qm, 0) + qc
        for dm, dc in den.terms.items():
            k = qm * dm
            v = residual.get(k, 0) - qc * dc
            if v:
                residual[k] = v
                heapq.heappush(heap, (_NegKey(k), k))
            elif k in residual:
                del residual[k]
    return QCharacter(quotient)


def product_dominant_ledger(*factors: QCharacter) -> list[tuple[LMonomial, int]]:
    """Dominant monomials of ``prod(factors)`` with exact multiplicities.

    Equivalent to ``(f1 * f2 * ...).dominant_monomials()`` but computed by a
    packed threshold scan over monomial pairs, so the product itself is never
    built.  For characters of modules this ledger pins the character
    completely: peeling the highest dominant entry and subtracting the simple
    character it names leaves a smaller such ledger, so two module characters
    with equal ledgers are equal as Laurent polynomials.  That makes ledger
    comparison an exact identity test for products far past the size where
    expanding them is feasible.

    Sorted highest-first like :meth:`QCharacter.dominant_monomials`.
    """
    if not factors:
        return [(LMonomial(()), 1)]
    if len(factors) == 1:
        return factors[0].dominant_monomials()
    term_lists = [list(f.terms.items()) for f in factors]
    try:
        found = _accel.product_dominant_terms(term_lists)
    except OverflowError:
        # big-int fallback: expand pairwise on the object path
        acc = factors[0]
        for f in factors[1:]:
            acc = acc * f
        return acc.dominant_monomials()
    out = [(m, c) for m, c in found.items()]
    out.sort(key=lambda t: term_sort_key(t[0]), reverse=True)
    return out


class _NegKey:
    """Inverts the term order so heapq's min-heap pops the highest monomial."""

    __slots__ = ("key",)

    def __init__(self, m: LMonomial):
        self.key = term_sort_key(m)

    def __lt__(self, other) -> bool:
        return other.key < self.key

    def __eq__(self, other) -> bool:
        return self.key == other.key


# ---------------------------------------------------------------------------
# sl2 engine
#
# Monomials of the rank-1 quotient are tuples ((s, e), ...) sorted by s.
# A string with step d is a set {a + d(k-1), a + d(k-3), ..., a - d(k-1)}
# (spacing 2d); its simple character has k+1 terms, obtained by flipping
# members from the top, a member at s flipping to Y_{s+2d}^{-1} through the
# lowering A_{s+d} (where A_b = Y_{b-d} Y_{b+d}).
# ---------------------------------------------------------------------------

Sl2Monomial = tuple  # tuple[tuple[int, int], ...]


def beta_project(m: LMonomial, j: int) -> Sl2Monomial:
    """Keep only node-j entries of m, relabelled to the rank-1 variables."""
    return tuple((s, e) for i, s, e in m.items if i == j)


def sl2_string_decompose(m: Sl2Monomial, step: int = 1) -> list[tuple[int, int]]:
    """The unique decomposition of a dominant sl2 monomial into strings in
    pairwise general position, as (center, length) pairs.

    Greedy: repeatedly take the maximal spectral point present and extend the
    string downwards as far as multiplicity remains.
    """
    if not m:
        raise ValueError("the identity monomial has no string decomposition")
    rem = dict(m)
    if any(e <= 0 for e in rem.values()):
        raise ValueError(f"not a dominant sl2 monomial: {m}")
    out: list[tuple[int, int]] = []
    while rem:
        hi = max(rem)
        s = hi
        while s - 2 * step in rem:
            s -= 2 * step
        lo = s
        for t in range(lo, hi + 1, 2 * step):
            if rem[t] == 1:
                del rem[t]
            else:
                rem[t] -= 1
        k = (hi - lo) // (2 * step) + 1
        out.append(((hi + lo) // 2, k))
    return out


def _string_terms(members: list[int], step: int) -> list[tuple[Sl2Monomial, tuple[int, ...]]]:
    """All k+1 terms of one string's character with their lowering steps."""
    k = len(members)
    out = []
    for i in range(k + 1):
        entries: dict[int, int] = {}
        for j in range(k - i):
            entries[members[j]] = entries.get(members[j], 0) + 1
        for j in range(k - i, k):
            s = members[j] + 2 * step
            entries[s] = entries.get(s, 0) - 1
        mono = tuple(sorted((s, e) for s, e in entries.items() if e))
        steps = tuple(sorted(members[j] + step for j in range(k - 1, k - i - 1, -1)))
        out.append((mono, steps))
    return out


def sl2_kr_character(k: int, a: int, step: int = 1) -> dict[Sl2Monomial, int]:
    """Character of the simple string module with k-point string centered at a."""
    if k < 1:
        raise ValueError(f"string length must be >= 1, got {k}")
    members = [a - step * (k - 1) + 2 * step * t for t in range(k)]
    return {mono: 1 for mono, _ in _string_terms(members, step)}


def _convolve_sl2(x: dict[Sl2Monomial, int], y: dict[Sl2Monomial, int]) -> dict[Sl2Monomial, int]:
    out: dict[Sl2Monomial, int] = {}
    for m1, c1 in x.items():
        for m2, c2 in y.items():
            acc = dict(m1)
            for s, e in m2:
                v = acc.get(s, 0) + e
                if v:
                    acc[s] = v
                elif s in acc:
                    del acc[s]
            key = tuple(sorted(acc.items()))
            out[key] = out.get(key, 0) + c1 * c2
    return out


def sl2_character(m: Sl2Monomial, step: int = 1) -> dict[Sl2Monomial, int]:
    """Full character of the simple module with dominant highest monomial m."""
    if not m:
        return {(): 1}
    out: dict[Sl2Monomial, int] | None = None
    for a, k in sl2_string_decompose(m, step):
        factor = sl2_kr_character(k, a, step)
        out = factor if out is None else _convolve_sl2(out, factor)
    return out  # type: ignore[return-value]


def sl2_expansion_steps(m: Sl2Monomial, step: int = 1) -> dict[tuple[int, ...], int]:
    """The full sl2 character of dominant m, keyed by lowering-step multisets.

    The empty tuple (the highest term) always maps to 1.  Keying by steps is
    faithful: within one character two distinct terms never share a step
    multiset, and the step data is what the rank-3 algorithm needs to pull
    a term back through A_{j,b}^{-1} factors.
    """
    if not m:
        return {(): 1}
    out: dict[tuple[int, ...], int] | None = None
    for a, k in sl2_string_decompose(m, step):
        members = [a - step * (k - 1) + 2 * step * t for t in range(k)]
        terms = _string_terms(members, step)
        factor = {steps: 1 for _, steps in terms}
        if out is None:
            out = dict(factor)
        else:
            nxt: dict[tuple[int, ...], int] = {}
            for s1, c1 in out.items():
                for s2, c2 in factor.items():
                    key = tuple(sorted(s1 + s2))
                    nxt[key] = nxt.get(key, 0) + c1 * c2
            out = nxt
    assert out is not None
    return out
