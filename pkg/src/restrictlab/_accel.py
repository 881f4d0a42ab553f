"""Twin implementations of the hot kernels.

Every kernel exists as a pure-numpy function and, when numba is
available, an ``@njit`` twin.  ``dispatch(name)`` returns the active
implementation per :mod:`restrictlab.backend`; both registries stay
importable so the benchmark can race them.

All integer kernels run in int64.  Callers certify against overflow
beforehand (see ``int64_safe``), falling back to exact big-int Python
paths when the certification fails, so no kernel here ever silently
wraps.
"""

from __future__ import annotations

import numpy as np

from .backend import ACTIVE_BACKEND, HAS_NUMBA

INT64_SAFE = 2**62


def int64_safe(bound: int) -> bool:
    """True when every intermediate certified <= bound fits int64 safely."""
    return bound < INT64_SAFE


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _isqrt_vec(n: np.ndarray) -> np.ndarray:
    """Exact floor-sqrt of a nonnegative int64 vector."""
    r = np.sqrt(n.astype(np.float64)).astype(np.int64)
    # float sqrt can be off by one ulp either way
    r = np.where(r > 0, r - ((r * r) > n), r)
    r += ((r + 1) * (r + 1)) <= n
    return r


def _ikroot_vec(n: np.ndarray, k: int) -> np.ndarray:
    if k == 2:
        return _isqrt_vec(n)
    r = np.power(np.maximum(n, 0).astype(np.float64), 1.0 / k).astype(np.int64)
    r = np.maximum(r, 0)
    for _ in range(2):
        r = np.where((r > 0) & (r**k > n), r - 1, r)
    for _ in range(2):
        r = np.where((r + 1) ** k <= n, r + 1, r)
    return r


def eval_terms_np(points: np.ndarray, coeffs: np.ndarray, exps: np.ndarray) -> np.ndarray:
    """Values of an integer form at int64 points, shape (n,)."""
    n = points.shape[0]
    acc = np.zeros(n, dtype=np.int64)
    for t in range(coeffs.shape[0]):
        term = np.full(n, coeffs[t], dtype=np.int64)
        for j in range(points.shape[1]):
            e = int(exps[t, j])
            if e:
                term *= points[:, j] ** e
        acc += term
    return acc


def _ragged_arange(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Concatenation of arange(lo[i], hi[i]+1) for each i."""
    counts = hi - lo + 1
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    idx = np.arange(total, dtype=np.int64)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    return idx - starts + np.repeat(lo, counts)


def ball_level_points_np(
    coeffs: np.ndarray, exps: np.ndarray, b2: int, lam: int
) -> np.ndarray:
    """All x in Z^d with sum x_i^2 <= b2 and Q(x) = lam, lex-sorted."""
    d = exps.shape[1]
    pts = np.zeros((1, 0), dtype=np.int64)
    sq = np.zeros(1, dtype=np.int64)
    for _ in range(d):
        rr = _isqrt_vec(b2 - sq)
        counts = 2 * rr + 1
        ext = np.repeat(pts, counts, axis=0)
        vals = _ragged_arange(-rr, rr)
        pts = np.column_stack([ext, vals]) if ext.shape[1] else vals[:, None]
        sq = np.repeat(sq, counts) + vals * vals
    good = eval_terms_np(pts, coeffs, exps) == lam
    out = pts[good]
    order = np.lexsort(out.T[::-1])
    return out[order]


def diag_level_points_np(cs: np.ndarray, k: int, lam: int) -> np.ndarray:
    """Solutions of sum c_i x_i^k = lam for a diagonal form (k even, c>0)."""
    d = cs.shape[0]
    pts = np.zeros((1, 0), dtype=np.int64)
    part = np.zeros(1, dtype=np.int64)
    for j in range(d):
        rr = _ikroot_vec((lam - part) // cs[j], k)
        counts = 2 * rr + 1
        ext = np.repeat(pts, counts, axis=0)
        vals = _ragged_arange(-rr, rr)
        pts = np.column_stack([ext, vals]) if ext.shape[1] else vals[:, None]
        part = np.repeat(part, counts) + cs[j] * vals**k
    out = pts[part == lam]
    order = np.lexsort(out.T[::-1])
    return out[order]


def ball_value_histogram_np(
    coeffs: np.ndarray, exps: np.ndarray, b2: int, lam_max: int
) -> np.ndarray:
    """counts[v] = #{x : sum x_i^2 <= b2, Q(x) = v} for 0 <= v <= lam_max."""
    d = exps.shape[1]
    pts = np.zeros((1, 0), dtype=np.int64)
    sq = np.zeros(1, dtype=np.int64)
    for _ in range(d):
        rr = _isqrt_vec(b2 - sq)
        counts = 2 * rr + 1
        ext = np.repeat(pts, counts, axis=0)
        vals = _ragged_arange(-rr, rr)
        pts = np.column_stack([ext, vals]) if ext.shape[1] else vals[:, None]
        sq = np.repeat(sq, counts) + vals * vals
    v = eval_terms_np(pts, coeffs, exps)
    v = v[(v >= 0) & (v <= lam_max)]
    return np.bincount(v, minlength=lam_max + 1).astype(np.int64)


def gauss_phase_histogram_np(
    coeffs_mod: np.ndarray,
    exps: np.ndarray,
    a: int,
    q: int,
    m_mod: np.ndarray,
) -> np.ndarray:
    """hist[r] = #{b in (Z/q)^d : (a*Q(b) + b.m) mod q == r}."""
    d = exps.shape[1]
    total = q**d
    hist = np.zeros(q, dtype=np.int64)
    chunk = 1 << 20
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = np.empty((idx.shape[0], d), dtype=np.int64)
        rem = idx
        for j in range(d - 1, -1, -1):
            digits[:, j] = rem % q
            rem = rem // q
        acc = np.zeros(idx.shape[0], dtype=np.int64)
        for t in range(coeffs_mod.shape[0]):
            term = np.full(idx.shape[0], coeffs_mod[t] % q, dtype=np.int64)
            for j in range(d):
                e = int(exps[t, j])
                for _ in range(e):
                    term = (term * digits[:, j]) % q
            acc = (acc + a * term) % q
        for j in range(d):
            acc = (acc + digits[:, j] * m_mod[j]) % q
        hist += np.bincount(acc, minlength=q).astype(np.int64)
    return hist


def packed_convolve_np(
    k1: np.ndarray, v1: np.ndarray, k2: np.ndarray, v2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Additive convolution of two packed-key integer histograms."""
    kk = np.add.outer(k1, k2).ravel()
    vv = np.multiply.outer(v1, v2).ravel()
    keys, inv = np.unique(kk, return_inverse=True)
    out = np.zeros(keys.shape[0], dtype=np.int64)
    np.add.at(out, inv, vv)
    return keys, out


def phase_sum_np(
    points: np.ndarray, weights: np.ndarray, xis: np.ndarray
) -> np.ndarray:
    """sum_x w(x) e(x.xi) with e(t) = exp(-2*pi*i*t), one value per row of xis."""
    out = np.empty(xis.shape[0], dtype=np.complex128)
    chunk = max(1, (1 << 22) // max(points.shape[0], 1))
    for start in range(0, xis.shape[0], chunk):
        ph = points @ xis[start : start + chunk].T
        out[start : start + chunk] = (weights[:, None] * np.exp(-2j * np.pi * ph)).sum(
            axis=0
        )
    return out


_NUMPY_IMPLS = {
    "eval_terms": eval_terms_np,
    "ball_level_points": ball_level_points_np,
    "diag_level_points": diag_level_points_np,
    "ball_value_histogram": ball_value_histogram_np,
    "gauss_phase_histogram": gauss_phase_histogram_np,
    "packed_convolve": packed_convolve_np,
    "phase_sum": phase_sum_np,
}

# ---------------------------------------------------------------------------
# numba twins
# ---------------------------------------------------------------------------

_NUMBA_IMPLS: dict = {}

if HAS_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _isqrt_nb(n):
        if n <= 0:
            return 0
        r = np.int64(np.sqrt(np.float64(n)))
        while r * r > n:
            r -= 1
        while (r + 1) * (r + 1) <= n:
            r += 1
        return r

    @njit(cache=True)
    def _ikroot_nb(n, k):
        if n <= 0:
            return 0
        r = np.int64(np.float64(n) ** (1.0 / k))
        while r > 0 and r**k > n:
            r -= 1
        while (r + 1) ** k <= n:
            r += 1
        return r

    @njit(cache=True)
    def eval_terms_nb(points, coeffs, exps):
        n = points.shape[0]
        d = points.shape[1]
        acc = np.zeros(n, dtype=np.int64)
        for i in range(n):
            s = np.int64(0)
            for t in range(coeffs.shape[0]):
                term = coeffs[t]
                for j in range(d):
                    e = exps[t, j]
                    for _ in range(e):
                        term *= points[i, j]
                s += term
            acc[i] = s
        return acc

    @njit(cache=True)
    def _eval_one_nb(x, coeffs, exps):
        s = np.int64(0)
        for t in range(coeffs.shape[0]):
            term = coeffs[t]
            for j in range(x.shape[0]):
                e = exps[t, j]
                for _ in range(e):
                    term *= x[j]
            s += term
        return s

    @njit(cache=True)
    def ball_level_points_nb(coeffs, exps, b2, lam):
        d = exps.shape[1]
        x = np.zeros(d, dtype=np.int64)
        sq = np.zeros(d + 1, dtype=np.int64)
        val = np.zeros(d, dtype=np.int64)
        hi = np.zeros(d, dtype=np.int64)
        cap = 1024
        out = np.empty((cap, d), dtype=np.int64)
        n = 0
        rr = _isqrt_nb(b2)
        val[0] = -rr
        hi[0] = rr
        level = 0
        while level >= 0:
            if val[level] > hi[level]:
                level -= 1
                if level >= 0:
                    val[level] += 1
                continue
            x[level] = val[level]
            sq[level + 1] = sq[level] + val[level] * val[level]
            if level == d - 1:
                if _eval_one_nb(x, coeffs, exps) == lam:
                    if n == cap:
                        cap *= 2
                        grown = np.empty((cap, d), dtype=np.int64)
                        grown[:n] = out[:n]
                        out = grown
                    out[n] = x
                    n += 1
                val[level] += 1
            else:
                level += 1
                rr = _isqrt_nb(b2 - sq[level])
                val[level] = -rr
                hi[level] = rr
        return out[:n]

    @njit(cache=True)
    def diag_level_points_nb(cs, k, lam):
        d = cs.shape[0]
        x = np.zeros(d, dtype=np.int64)
        part = np.zeros(d + 1, dtype=np.int64)
        val = np.zeros(d, dtype=np.int64)
        hi = np.zeros(d, dtype=np.int64)
        cap = 1024
        out = np.empty((cap, d), dtype=np.int64)
        n = 0
        rr = _ikroot_nb(lam // cs[0], k)
        val[0] = -rr
        hi[0] = rr
        level = 0
        while level >= 0:
            if val[level] > hi[level]:
                level -= 1
                if level >= 0:
                    val[level] += 1
                continue
            x[level] = val[level]
            part[level + 1] = part[level] + cs[level] * val[level] ** k
            if level == d - 1:
                if part[d] == lam:
                    if n == cap:
                        cap *= 2
                        grown = np.empty((cap, d), dtype=np.int64)
                        grown[:n] = out[:n]
                        out = grown
                    out[n] = x
                    n += 1
                val[level] += 1
            else:
                level += 1
                rr = _ikroot_nb((lam - part[level]) // cs[level], k)
                val[level] = -rr
                hi[level] = rr
        return out[:n]

    @njit(cache=True)
    def ball_value_histogram_nb(coeffs, exps, b2, lam_max):
        d = exps.shape[1]
        x = np.zeros(d, dtype=np.int64)
        sq = np.zeros(d + 1, dtype=np.int64)
        val = np.zeros(d, dtype=np.int64)
        hi = np.zeros(d, dtype=np.int64)
        hist = np.zeros(lam_max + 1, dtype=np.int64)
        rr = _isqrt_nb(b2)
        val[0] = -rr
        hi[0] = rr
        level = 0
        while level >= 0:
            if val[level] > hi[level]:
                level -= 1
                if level >= 0:
                    val[level] += 1
                continue
            x[level] = val[level]
            sq[level + 1] = sq[level] + val[level] * val[level]
            if level == d - 1:
                v = _eval_one_nb(x, coeffs, exps)
                if 0 <= v <= lam_max:
                    hist[v] += 1
                val[level] += 1
            else:
                level += 1
                rr = _isqrt_nb(b2 - sq[level])
                val[level] = -rr
                hi[level] = rr
        return hist

    @njit(cache=True)
    def gauss_phase_histogram_nb(coeffs_mod, exps, a, q, m_mod):
        d = exps.shape[1]
        nt = coeffs_mod.shape[0]
        hist = np.zeros(q, dtype=np.int64)
        b = np.zeros(d, dtype=np.int64)
        total = 1
        for _ in range(d):
            total *= q
        for _ in range(total):
            acc = np.int64(0)
            for t in range(nt):
                term = coeffs_mod[t] % q
                for j in range(d):
                    e = exps[t, j]
                    for _ in range(e):
                        term = (term * b[j]) % q
                acc = (acc + a * term) % q
            for j in range(d):
                acc = (acc + b[j] * m_mod[j]) % q
            hist[acc] += 1
            j = d - 1
            while j >= 0:
                b[j] += 1
                if b[j] < q:
                    break
                b[j] = 0
                j -= 1
        return hist

    @njit(cache=True)
    def packed_convolve_nb(k1, v1, k2, v2):
        n1 = k1.shape[0]
        n2 = k2.shape[0]
        kk = np.empty(n1 * n2, dtype=np.int64)
        vv = np.empty(n1 * n2, dtype=np.int64)
        p = 0
        for i in range(n1):
            for j in range(n2):
                kk[p] = k1[i] + k2[j]
                vv[p] = v1[i] * v2[j]
                p += 1
        order = np.argsort(kk, kind="mergesort")
        keys = np.empty(n1 * n2, dtype=np.int64)
        vals = np.empty(n1 * n2, dtype=np.int64)
        m = 0
        for p in range(n1 * n2):
            kcur = kk[order[p]]
            vcur = vv[order[p]]
            if m > 0 and keys[m - 1] == kcur:
                vals[m - 1] += vcur
            else:
                keys[m] = kcur
                vals[m] = vcur
                m += 1
        return keys[:m], vals[:m]

    @njit(cache=True)
    def phase_sum_nb(points, weights, xis):
        n = points.shape[0]
        d = points.shape[1]
        m = xis.shape[0]
        out = np.empty(m, dtype=np.complex128)
        for r in range(m):
            acc = 0.0 + 0.0j
            for i in range(n):
                ph = 0.0
                for j in range(d):
                    ph += points[i, j] * xis[r, j]
                ang = -2.0 * np.pi * ph
                acc += weights[i] * complex(np.cos(ang), np.sin(ang))
            out[r] = acc
        return out

    _NUMBA_IMPLS = {
        "eval_terms": eval_terms_nb,
        "ball_level_points": ball_level_points_nb,
        "diag_level_points": diag_level_points_nb,
        "ball_value_histogram": ball_value_histogram_nb,
        "gauss_phase_histogram": gauss_phase_histogram_nb,
        "packed_convolve": packed_convolve_nb,
        "phase_sum": phase_sum_nb,
    }


IMPLS = {"numpy": _NUMPY_IMPLS, "numba": _NUMBA_IMPLS}


def dispatch(name: str):
    """Active implementation of the named kernel."""
    return IMPLS[ACTIVE_BACKEND][name]
