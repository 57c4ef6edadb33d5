"""Packed-key sparse product kernels.

Multiplying two large characters means accumulating coefficient products over
up to ~1e9 monomial pairs.  Doing that with hash maps keyed by monomial
objects is far too slow, so the hot path packs each monomial's exponent
vector into a few 64-bit limbs (offset-encoded per slot so that pairwise
key addition is carry-free) and runs an open-addressing hash accumulation
over the raw limbs, jitted with numba when available.

Exactness: coefficients are int64 with a proved no-overflow precondition —
the caller checks mass(x) * mass(y) < 2**62 (mass = sum of |coefficients|),
which bounds every partial sum; inputs violating it fall back to Python
big-int dictionaries.

Nothing in here is mathematical: the module only reorganises exponent data.
All results are bit-identical to the naive dictionary product.
"""

from __future__ import annotations

import numpy as np

from .monomial import LMonomial

try:  # pragma: no cover - exercised implicitly by which path runs
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(f):
            return f

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap


_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)

# int64 coefficient safety bound for the jit path
COEF_SAFE_LIMIT = 1 << 62


@njit(cache=True, nogil=True)
def _accumulate_kernel(xp, xc, yp, yc, tkeys, tvals, tused, count):  # pragma: no cover
    """Add all pair products of (xp, xc) x (yp, yc) into the open table.

    Returns the new occupancy count, or -1 if the table passed its load
    limit (caller reallocates and replays).
    """
    cap = tkeys.shape[0]
    K = tkeys.shape[1]
    mask = np.uint64(cap - 1)
    limit = (cap * 3) // 5
    key = np.empty(K, np.uint64)
    for ii in range(xp.shape[0]):
        for jj in range(yp.shape[0]):
            c = xc[ii] * yc[jj]
            h = _FNV_OFFSET
            for t in range(K):
                v = xp[ii, t] + yp[jj, t]
                key[t] = v
                h = (h ^ v) * _FNV_PRIME
            idx = np.int64(h & mask)
            while True:
                if tused[idx]:
                    same = True
                    for t in range(K):
                        if tkeys[idx, t] != key[t]:
                            same = False
                            break
                    if same:
                        tvals[idx] += c
                        break
                    idx += 1
                    if idx == cap:
                        idx = 0
                else:
                    if count >= limit:
                        return -1
                    tused[idx] = np.uint8(1)
                    for t in range(K):
                        tkeys[idx, t] = key[t]
                    tvals[idx] = c
                    count += 1
                    break
    return count


@njit(cache=True, nogil=True)
def _extract_kernel(tkeys, tvals, tused):  # pragma: no cover
    cap = tkeys.shape[0]
    K = tkeys.shape[1]
    n = 0
    for i in range(cap):
        if tused[i] and tvals[i] != 0:
            n += 1
    keys = np.empty((n, K), np.uint64)
    vals = np.empty(n, np.int64)
    p = 0
    for i in range(cap):
        if tused[i] and tvals[i] != 0:
            for t in range(K):
                keys[p, t] = tkeys[i, t]
            vals[p] = tvals[i]
            p += 1
    return keys, vals


def _accumulate_numpy(xp, xc, yp, yc, acc: dict) -> None:
    """Vectorised fallback when numba is unavailable: blockwise pair sums,
    aggregated through a bytes-keyed dictionary."""
    block = max(1, 2_000_000 // max(1, yp.shape[0]))
    for lo in range(0, xp.shape[0], block):
        hi = min(lo + block, xp.shape[0])
        sums = xp[lo:hi, None, :] + yp[None, :, :]  # (b, ny, K)
        coefs = xc[lo:hi, None] * yc[None, :]
        flat = sums.reshape(-1, sums.shape[2])
        cflat = coefs.reshape(-1)
        for row, c in zip(flat, cflat):
            k = row.tobytes()
            acc[k] = acc.get(k, 0) + int(c)


class SlotLayout:
    """Bit-field layout for one product: slot -> (limb, shift, width, offsets)."""

    __slots__ = (
        "slots",
        "index",
        "limb",
        "shift",
        "mask",
        "lo_x",
        "lo_y",
        "nlimbs",
        "_base",
    )

    def __init__(self, x_terms, y_terms):
        span_x: dict[tuple[int, int], list[int]] = {}
        span_y: dict[tuple[int, int], list[int]] = {}
        for terms, span in ((x_terms, span_x), (y_terms, span_y)):
            for m, _ in terms:
                for i, s, e in m.items:
                    sl = (i, s)
                    v = span.get(sl)
                    if v is None:
                        span[sl] = [e, e]
                    else:
                        if e < v[0]:
                            v[0] = e
                        if e > v[1]:
                            v[1] = e
        self.slots = tuple(sorted(set(span_x) | set(span_y)))
        self.index = {sl: t for t, sl in enumerate(self.slots)}
        n = len(self.slots)
        self.limb = np.empty(n, np.int64)
        self.shift = np.empty(n, np.int64)
        self.mask = np.empty(n, np.uint64)
        self.lo_x = np.empty(n, np.int64)
        self.lo_y = np.empty(n, np.int64)
        limb = 0
        used = 0
        for t, sl in enumerate(self.slots):
            lx0, lx1 = _safe_span(span_x.get(sl))
            ly0, ly1 = _safe_span(span_y.get(sl))
            width = max(1, ((lx1 - lx0) + (ly1 - ly0)).bit_length())
            if used + width > 64:
                limb += 1
                used = 0
            self.limb[t] = limb
            self.shift[t] = used
            self.mask[t] = np.uint64((1 << width) - 1)
            self.lo_x[t] = lx0
            self.lo_y[t] = ly0
            used += width
        self.nlimbs = limb + 1
        # a row's field holds e - lo, so an absent slot must pack as -lo,
        # not 0: bake the -lo of every slot into a per-side baseline
        base_x = [0] * self.nlimbs
        base_y = [0] * self.nlimbs
        for t in range(n):
            base_x[int(self.limb[t])] |= int(-self.lo_x[t]) << int(self.shift[t])
            base_y[int(self.limb[t])] |= int(-self.lo_y[t]) << int(self.shift[t])
        self._base = {"x": tuple(base_x), "y": tuple(base_y)}

    def pack(self, terms, which: str):
        base = self._base[which]
        arr = np.empty((len(terms), self.nlimbs), np.uint64)
        coefs = np.empty(len(terms), np.int64)
        index = self.index
        limb = self.limb
        shift = self.shift
        for r, (m, c) in enumerate(terms):
            coefs[r] = c
            limbs = list(base)
            for i, s, e in m.items:
                t = index[(i, s)]
                limbs[int(limb[t])] += e << int(shift[t])
            for l in range(self.nlimbs):
                arr[r, l] = limbs[l]
        return arr, coefs

    def unpack(self, keys: np.ndarray, vals: np.ndarray) -> dict[LMonomial, int]:
        nd = keys.shape[0]
        rows: list[list[tuple[int, int, int]]] = [[] for _ in range(nd)]
        for t, (i, s) in enumerate(self.slots):
            col = ((keys[:, self.limb[t]] >> np.uint64(self.shift[t])) & self.mask[t]).astype(
                np.int64
            ) + (self.lo_x[t] + self.lo_y[t])
            for r in np.nonzero(col)[0]:
                rows[int(r)].append((i, s, int(col[r])))
        out: dict[LMonomial, int] = {}
        for r in range(nd):
            out[LMonomial(rows[r], _canonical=True)] = int(vals[r])
        return out


def _safe_span(v) -> tuple[int, int]:
    if v is None:
        return (0, 0)
    return (min(v[0], 0), max(v[1], 0))


class PairAccumulator:
    """Accumulates packed pair products of row-slices into a growable table."""

    def __init__(self, layout: SlotLayout, expected: int):
        self._layout = layout
        cap = 1 << max(10, (2 * max(16, expected)).bit_length())
        self._alloc(cap)
        self._batches: list[tuple] = []

    def _alloc(self, cap: int) -> None:
        self._cap = cap
        K = self._layout.nlimbs
        self._tkeys = np.zeros((cap, K), np.uint64)
        self._tvals = np.zeros(cap, np.int64)
        self._tused = np.zeros(cap, np.uint8)
        self._count = 0

    def add(self, xp, xc, yp, yc) -> None:
        self._batches.append((xp, xc, yp, yc))
        self._run(xp, xc, yp, yc)

    def _run(self, xp, xc, yp, yc) -> None:
        n = _accumulate_kernel(
            xp, xc, yp, yc, self._tkeys, self._tvals, self._tused, self._count
        )
        if n >= 0:
            self._count = n
            return
        # table passed its load limit: grow and replay all batches from an
        # empty table (the current batch is already in self._batches)
        while True:
            self._alloc(self._cap * 4)
            ok = True
            for bxp, bxc, byp, byc in self._batches:
                m = _accumulate_kernel(
                    bxp, bxc, byp, byc, self._tkeys, self._tvals, self._tused, self._count
                )
                if m < 0:
                    ok = False
                    break
                self._count = m
            if ok:
                return

    def result(self) -> dict[LMonomial, int]:
        keys, vals = _extract_kernel(self._tkeys, self._tvals, self._tused)
        return self._layout.unpack(keys, vals)


@njit(cache=True, nogil=True)
def _scan_kernel(xp, xc, yp, yc, thr, guard, ybest, tkeys, tvals, tused, count):  # pragma: no cover
    """Accumulate the dominant pair sums of (xp, xc) x (yp, yc) into the table.

    A pair survives when every bit-field of the summed key meets its threshold,
    tested one limb at a time: fields carry a spare guard bit, so
    ``((s | guard) - thr) & guard == guard`` holds exactly when no field of
    ``s`` is below the matching field of ``thr``.  Rows whose sum with the
    field-wise maximum of the y side already fail are skipped wholesale.

    Returns the new occupancy count, or -1 if the table passed its load limit
    (caller reallocates and rescans).
    """
    cap = tkeys.shape[0]
    K = tkeys.shape[1]
    hmask = np.uint64(cap - 1)
    limit = (cap * 3) // 5
    key = np.empty(K, np.uint64)
    for ii in range(xp.shape[0]):
        ok = True
        for t in range(K):
            s = xp[ii, t] + ybest[t]
            if ((s | guard[t]) - thr[t]) & guard[t] != guard[t]:
                ok = False
                break
        if not ok:
            continue
        for jj in range(yp.shape[0]):
            good = True
            for t in range(K):
                s = xp[ii, t] + yp[jj, t]
                key[t] = s
                if ((s | guard[t]) - thr[t]) & guard[t] != guard[t]:
                    good = False
                    break
            if not good:
                continue
            c = xc[ii] * yc[jj]
            h = _FNV_OFFSET
            for t in range(K):
                h = (h ^ key[t]) * _FNV_PRIME
            idx = np.int64(h & hmask)
            while True:
                if tused[idx]:
                    same = True
                    for t in range(K):
                        if tkeys[idx, t] != key[t]:
                            same = False
                            break
                    if same:
                        tvals[idx] += c
                        break
                    idx += 1
                    if idx == cap:
                        idx = 0
                else:
                    if count >= limit:
                        return -1
                    tused[idx] = np.uint8(1)
                    for t in range(K):
                        tkeys[idx, t] = key[t]
                    tvals[idx] = c
                    count += 1
                    break
    return count


def _scan_numpy(xp, xc, yp, yc, thr, guard, acc: dict) -> None:
    """Vectorised scan fallback when numba is unavailable."""
    block = max(1, 2_000_000 // max(1, yp.shape[0]))
    K = xp.shape[1]
    for lo in range(0, xp.shape[0], block):
        hi = min(lo + block, xp.shape[0])
        sums = xp[lo:hi, None, :] + yp[None, :, :]
        ok = np.ones(sums.shape[:2], bool)
        for t in range(K):
            ok &= (((sums[:, :, t] | guard[t]) - thr[t]) & guard[t]) == guard[t]
        xi, yi = np.nonzero(ok)
        for a, b in zip(xi, yi):
            k = sums[a, b].tobytes()
            c = int(xc[lo + a]) * int(yc[b])
            acc[k] = acc.get(k, 0) + c


class ScanLayout:
    """Bit-field layout for an n-factor product, sized for dominance scans.

    Each slot's field is wide enough for the sum of all n per-factor spans
    plus one spare guard bit, so row sums over any subset of factors stay
    carry-free and a packed limb can be threshold-tested in a handful of ops.
    ``thr``/``guard`` encode the per-slot lower bounds for full n-factor sums.
    """

    __slots__ = (
        "slots",
        "index",
        "limb",
        "shift",
        "mask",
        "lo",
        "nlimbs",
        "thr",
        "guard",
        "_base",
    )

    def __init__(self, factor_terms):
        nf = len(factor_terms)
        spans: list[dict[tuple[int, int], list[int]]] = [{} for _ in range(nf)]
        for terms, span in zip(factor_terms, spans):
            for m, _ in terms:
                for i, s, e in m.items:
                    sl = (i, s)
                    v = span.get(sl)
                    if v is None:
                        span[sl] = [e, e]
                    else:
                        if e < v[0]:
                            v[0] = e
                        if e > v[1]:
                            v[1] = e
        allslots: set[tuple[int, int]] = set()
        for span in spans:
            allslots.update(span)
        self.slots = tuple(sorted(allslots))
        self.index = {sl: t for t, sl in enumerate(self.slots)}
        n = len(self.slots)
        self.limb = np.empty(n, np.int64)
        self.shift = np.empty(n, np.int64)
        self.mask = np.empty(n, np.uint64)
        self.lo = np.zeros((nf, n), np.int64)
        limb = 0
        used = 0
        for t, sl in enumerate(self.slots):
            total = 0
            for f in range(nf):
                f0, f1 = _safe_span(spans[f].get(sl))
                self.lo[f, t] = f0
                total += f1 - f0
            width = max(1, total.bit_length()) + 1
            if used + width > 64:
                limb += 1
                used = 0
            self.limb[t] = limb
            self.shift[t] = used
            self.mask[t] = np.uint64((1 << width) - 1)
            used += width
        self.nlimbs = limb + 1
        self._base = []
        for f in range(nf):
            base = [0] * self.nlimbs
            for t in range(n):
                base[int(self.limb[t])] += int(-self.lo[f, t]) << int(self.shift[t])
            self._base.append(tuple(base))
        thr = [0] * self.nlimbs
        grd = [0] * self.nlimbs
        for t in range(n):
            width = int(self.mask[t]).bit_length()
            grd[int(self.limb[t])] |= 1 << (int(self.shift[t]) + width - 1)
            bound = -int(self.lo[:, t].sum())
            if bound > 0:
                thr[int(self.limb[t])] += bound << int(self.shift[t])
        self.thr = np.array(thr, np.uint64)
        self.guard = np.array(grd, np.uint64)

    def pack(self, terms, f: int):
        base = self._base[f]
        arr = np.empty((len(terms), self.nlimbs), np.uint64)
        coefs = np.empty(len(terms), np.int64)
        index = self.index
        limb = self.limb
        shift = self.shift
        for r, (m, c) in enumerate(terms):
            coefs[r] = c
            limbs = list(base)
            for i, s, e in m.items:
                t = index[(i, s)]
                limbs[int(limb[t])] += e << int(shift[t])
            for l in range(self.nlimbs):
                arr[r, l] = limbs[l]
        return arr, coefs

    def unpack(self, keys: np.ndarray, vals: np.ndarray) -> dict[LMonomial, int]:
        """Decode full n-factor row sums (every factor contributing once)."""
        nd = keys.shape[0]
        rows: list[list[tuple[int, int, int]]] = [[] for _ in range(nd)]
        total_lo = self.lo.sum(axis=0)
        for t, (i, s) in enumerate(self.slots):
            col = ((keys[:, self.limb[t]] >> np.uint64(self.shift[t])) & self.mask[t]).astype(
                np.int64
            ) + total_lo[t]
            for r in np.nonzero(col)[0]:
                rows[int(r)].append((i, s, int(col[r])))
        out: dict[LMonomial, int] = {}
        for r in range(nd):
            v = int(vals[r])
            if v:
                out[LMonomial(rows[r], _canonical=True)] = v
        return out


def _field_max(rows: np.ndarray, layout: ScanLayout) -> np.ndarray:
    """Field-wise maximum over packed rows, one packed limb vector."""
    best = [0] * layout.nlimbs
    for t in range(len(layout.slots)):
        col = (rows[:, layout.limb[t]] >> np.uint64(layout.shift[t])) & layout.mask[t]
        best[int(layout.limb[t])] += int(col.max()) << int(layout.shift[t])
    return np.array(best, np.uint64)


def _fold_packed(xp, xc, yp, yc, nlimbs: int):
    """Full packed product of two packed row sets, returned packed."""
    expected = min(xp.shape[0] * yp.shape[0], 8 * (xp.shape[0] + yp.shape[0]))
    cap = 1 << max(12, (2 * max(16, expected)).bit_length())
    while True:
        tkeys = np.zeros((cap, nlimbs), np.uint64)
        tvals = np.zeros(cap, np.int64)
        tused = np.zeros(cap, np.uint8)
        n = _accumulate_kernel(xp, xc, yp, yc, tkeys, tvals, tused, 0)
        if n >= 0:
            return _extract_kernel(tkeys, tvals, tused)
        cap *= 4


def scan_dominant_packed(xp, xc, yp, yc, layout: ScanLayout):
    """All row sums of xp x yp meeting the layout's thresholds, packed."""
    ybest = _field_max(yp, layout) if yp.shape[0] else layout.thr
    cap = 1 << 17
    while True:
        tkeys = np.zeros((cap, layout.nlimbs), np.uint64)
        tvals = np.zeros(cap, np.int64)
        tused = np.zeros(cap, np.uint8)
        if HAVE_NUMBA:
            n = _scan_kernel(
                xp, xc, yp, yc, layout.thr, layout.guard, ybest, tkeys, tvals, tused, 0
            )
            if n >= 0:
                return _extract_kernel(tkeys, tvals, tused)
            cap *= 4
            continue
        acc: dict[bytes, int] = {}
        _scan_numpy(xp, xc, yp, yc, layout.thr, layout.guard, acc)
        items = [(k, v) for k, v in acc.items() if v]
        keys = np.frombuffer(b"".join(k for k, _ in items), dtype=np.uint64).reshape(
            len(items), layout.nlimbs
        )
        vals = np.array([v for _, v in items], np.int64)
        return keys, vals


def product_dominant_terms(factor_terms) -> dict[LMonomial, int]:
    """Exact multiset of threshold-passing monomials of a multi-factor product.

    Folds all factors but the last-smallest into a packed intermediate, then
    scans the final pairing, so the full product is never materialised as
    monomial objects.  With the layout thresholds encoding "every exponent
    nonnegative" the result is the dominant part of the product.
    """
    if any(len(t) == 0 for t in factor_terms):
        return {}
    mass = 1
    for terms in factor_terms:
        mass *= sum(abs(c) for _, c in terms)
    if mass >= COEF_SAFE_LIMIT:
        raise OverflowError("coefficient mass exceeds the exact int64 budget")
    layout = ScanLayout(factor_terms)
    order = sorted(range(len(factor_terms)), key=lambda f: len(factor_terms[f]), reverse=True)
    packed = {f: layout.pack(factor_terms[f], f) for f in order}
    if len(order) == 1:
        xp, xc = packed[order[0]]
        one = np.zeros((1, layout.nlimbs), np.uint64)
        onec = np.ones(1, np.int64)
        keys, vals = scan_dominant_packed(xp, xc, one, onec, layout)
        return layout.unpack(keys, vals)
    xp, xc = packed[order[0]]
    for f in order[1:-1]:
        fp, fc = packed[f]
        xp, xc = _fold_packed(xp, xc, fp, fc, layout.nlimbs)
    yp, yc = packed[order[-1]]
    if yp.shape[0] > xp.shape[0]:
        xp, xc, yp, yc = yp, yc, xp, xc
    keys, vals = scan_dominant_packed(xp, xc, yp, yc, layout)
    return layout.unpack(keys, vals)


def multiply_packed(x_terms, y_terms) -> dict[LMonomial, int]:
    """Exact product of two term lists [(LMonomial, int)] via the packed path."""
    mass_x = sum(abs(c) for _, c in x_terms)
    mass_y = sum(abs(c) for _, c in y_terms)
    if mass_x * mass_y >= COEF_SAFE_LIMIT:
        # dictionary big-int path; never hit at this project's scale
        acc: dict[LMonomial, int] = {}
        for m1, c1 in x_terms:
            for m2, c2 in y_terms:
                k = m1 * m2
                v = acc.get(k, 0) + c1 * c2
                if v:
                    acc[k] = v
                elif k in acc:
                    del acc[k]
        return acc

    layout = SlotLayout(x_terms, y_terms)
    xp, xc = layout.pack(x_terms, "x")
    yp, yc = layout.pack(y_terms, "y")
    if HAVE_NUMBA:
        expected = min(len(x_terms) * len(y_terms), 4 * (len(x_terms) + len(y_terms)))
        acc = PairAccumulator(layout, expected)
        acc.add(xp, xc, yp, yc)
        return acc.result()

    byte_acc: dict[bytes, int] = {}
    _accumulate_numpy(xp, xc, yp, yc, byte_acc)
    items = [(k, v) for k, v in byte_acc.items() if v]
    if not items:
        return {}
    keys = np.frombuffer(b"".join(k for k, _ in items), dtype=np.uint64).reshape(
        len(items), layout.nlimbs
    )
    vals = np.array([v for _, v in items], np.int64)
    return layout.unpack(keys, vals)
