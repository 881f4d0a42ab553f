"""Exact lattice-point enumeration and counting.

Level sets of positive definite forms are enumerated inside the exact
Euclidean-ball bound |x| <= (lam / m_low)^(1/k) supplied by the
positivity certificate (per-coordinate bounds for diagonal forms), so no
point is ever missed to rounding.  Box value maps, their sup counts and
their l-fold additive convolutions (the even-moment engine) are computed
over packed integer keys; weighted histograms carry exact rational
complex weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _accel
from .budget import check_budget
from .forms import (
    GradedSystem,
    IntegerForm,
    PositivityCertificate,
    evaluate,
)
from .intmath import ikroot

ComplexFraction = tuple[Fraction, Fraction]


# ---------------------------------------------------------------------------
# kernel plumbing
# ---------------------------------------------------------------------------


def _form_arrays(form: IntegerForm) -> tuple[np.ndarray, np.ndarray]:
    coeffs = np.array([t.coefficient for t in form.terms], dtype=np.int64)
    exps = np.array([t.exponents for t in form.terms], dtype=np.int64)
    return coeffs, exps


def _max_abs_value(form: IntegerForm, radius: int) -> int:
    return sum(abs(t.coefficient) for t in form.terms) * radius**form.degree


def _int64_certified(form: IntegerForm, radius: int) -> bool:
    return _accel.int64_safe(_max_abs_value(form, radius) * max(len(form.terms), 1))


def _ball_radius_sq(form: IntegerForm, certificate: PositivityCertificate, lam: int) -> int:
    """Exact integer bound b2 with {Q = lam} contained in {sum x_i^2 <= b2}."""
    if not certificate.usable():
        raise ValueError(
            "enumeration requires a verified or user-declared positivity "
            "certificate with m_low > 0"
        )
    t = (Fraction(lam) / certificate.m_low) ** 2
    tc = -((-t.numerator) // t.denominator)  # ceil
    return ikroot(tc, form.degree) + 1


def _ball_points_py(form: IntegerForm, b2: int, lam: int) -> np.ndarray:
    """Big-int fallback used when int64 certification fails."""
    d = form.arity
    out = []
    x = [0] * d

    def rec(level: int, sq: int) -> None:
        rr = math.isqrt(b2 - sq)
        for v in range(-rr, rr + 1):
            x[level] = v
            if level == d - 1:
                if evaluate(form, x) == lam:
                    out.append(tuple(x))
            else:
                rec(level + 1, sq + v * v)

    rec(0, 0)
    return np.array(sorted(out), dtype=np.int64).reshape(len(out), d)


# ---------------------------------------------------------------------------
# level sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeSolutionSet:
    form: IntegerForm
    lam: int
    points: np.ndarray  # (n, d) int64, lex sorted

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def coordinate_bound(self) -> int:
        if self.points.size == 0:
            return 0
        return int(np.abs(self.points).max())


def enumerate_level_set(
    form: IntegerForm,
    certificate: PositivityCertificate,
    lam: int,
    budget: int | None = None,
) -> LatticeSolutionSet:
    """All x in Z^d with Q(x) = lam, complete by the certified ball bound."""
    d = form.arity
    if lam < 0:
        return LatticeSolutionSet(form, lam, np.empty((0, d), dtype=np.int64))
    cs = form.diagonal_coefficients() if form.is_diagonal() else None
    if cs is not None and form.degree % 2 == 0 and all(c > 0 for c in cs):
        if not certificate.usable():
            raise ValueError("positivity certificate required")
        r = max(ikroot(lam // c, form.degree) for c in cs)
        check_budget((2 * r + 1) ** d, "diagonal level-set scan", budget)
        if _accel.int64_safe(lam * 4):
            pts = _accel.dispatch("diag_level_points")(
                np.array(cs, dtype=np.int64), form.degree, lam
            )
        else:
            pts = _ball_points_py(form, d * r * r, lam)
        return LatticeSolutionSet(form, lam, pts)
    b2 = _ball_radius_sq(form, certificate, lam)
    r = math.isqrt(b2)
    check_budget((2 * r + 1) ** d, "level-set ball scan", budget)
    coeffs, exps = _form_arrays(form)
    if _int64_certified(form, r):
        pts = _accel.dispatch("ball_level_points")(coeffs, exps, b2, lam)
    else:
        pts = _ball_points_py(form, b2, lam)
    return LatticeSolutionSet(form, lam, pts)


# ---------------------------------------------------------------------------
# counting series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CountSeries:
    form: IntegerForm
    entries: list[tuple[int, int, float | None]]  # (lam, N, C) with C absent at lam=0


def count_series(
    form: IntegerForm,
    certificate: PositivityCertificate,
    lambdas: Sequence[int],
    budget: int | None = None,
) -> CountSeries:
    """N_Q(lam) for each lam, one certified ball sweep for the whole range."""
    lams = sorted(set(int(x) for x in lambdas))
    if not lams:
        return CountSeries(form, [])
    lam_max = max(lams)
    if lam_max < 0:
        return CountSeries(form, [(lam, 0, None) for lam in lams])
    b2 = _ball_radius_sq(form, certificate, lam_max)
    r = math.isqrt(b2)
    d = form.arity
    check_budget((2 * r + 1) ** d, "count-series ball sweep", budget)
    check_budget(lam_max + 1, "count-series histogram", budget)
    coeffs, exps = _form_arrays(form)
    if not _int64_certified(form, r):
        raise NotImplementedError(
            "count_series beyond the int64 value envelope is not supported"
        )
    hist = _accel.dispatch("ball_value_histogram")(coeffs, exps, b2, lam_max)
    entries: list[tuple[int, int, float | None]] = []
    dk = d / form.degree
    for lam in lams:
        n = int(hist[lam]) if lam >= 0 else 0
        c = float(n) * lam ** (1.0 - dk) if lam >= 1 else None
        entries.append((lam, n, c))
    return CountSeries(form, entries)


# ---------------------------------------------------------------------------
# value histograms over boxes
# ---------------------------------------------------------------------------


@dataclass
class ValueHistogram:
    """Sparse map from integer key vectors to exact multiplicities.

    Count mode stores int64 counts; weighted mode stores exact complex
    rationals as (re, im) Fraction pairs.  Keys are kept lex sorted.
    """

    keys: np.ndarray  # (n, m) int64
    counts: np.ndarray | None = None
    weights: list[ComplexFraction] | None = None

    @property
    def width(self) -> int:
        return self.keys.shape[1]

    def __len__(self) -> int:
        return self.keys.shape[0]

    def is_weighted(self) -> bool:
        return self.weights is not None

    def total_mass(self):
        if self.counts is not None:
            return int(self.counts.sum())
        re = sum(w[0] for w in self.weights)
        im = sum(w[1] for w in self.weights)
        return (re, im)

    def sup_count(self) -> tuple[int, tuple[int, ...]]:
        """(max multiplicity, a key attaining it); count mode only."""
        if self.counts is None:
            raise ValueError("sup_count applies to count mode")
        i = int(np.argmax(self.counts))
        return int(self.counts[i]), tuple(int(v) for v in self.keys[i])

    def sum_of_squares(self):
        """Exact sum over keys of the squared multiplicity (|w|^2 if weighted)."""
        if self.counts is not None:
            return sum(int(c) ** 2 for c in self.counts)
        return sum(re * re + im * im for re, im in self.weights)

    def as_dict(self) -> dict:
        if self.counts is not None:
            return {
                tuple(int(v) for v in self.keys[i]): int(self.counts[i])
                for i in range(len(self))
            }
        return {
            tuple(int(v) for v in self.keys[i]): self.weights[i]
            for i in range(len(self))
        }

    def count_at(self, key: Sequence[int]):
        d = self.as_dict()
        return d.get(tuple(int(v) for v in key), 0)


def _histogram_from_dict(data: Mapping[tuple, object], width: int) -> ValueHistogram:
    items = sorted(data.items())
    keys = np.array([k for k, _ in items], dtype=np.int64).reshape(len(items), width)
    first = items[0][1] if items else 0
    if isinstance(first, tuple):
        return ValueHistogram(keys, weights=[v for _, v in items])
    return ValueHistogram(keys, counts=np.array([v for _, v in items], dtype=np.int64))


def _unpack_lex(packed: np.ndarray, lo: np.ndarray, strides: np.ndarray) -> np.ndarray:
    m = strides.shape[0]
    out = np.empty((packed.shape[0], m), dtype=np.int64)
    rem = packed
    for j in range(m):
        out[:, j] = rem // strides[j] + lo[j]
        rem = rem % strides[j]
    return out


def convolve_histograms(
    h1: ValueHistogram, h2: ValueHistogram, budget: int | None = None
) -> ValueHistogram:
    """Additive convolution: (h1 * h2)(t) = sum_{u+v=t} h1(u) h2(v).

    Count mode packs keys into a shared mixed radix sized for the sum
    ranges, so vector addition becomes int64 addition and the kernels can
    sort-and-merge; anything outside the int64 envelope falls back to an
    exact big-int dictionary pass.
    """
    check_budget(len(h1) * len(h2), "histogram convolution", budget)
    if h1.is_weighted() or h2.is_weighted():
        return _convolve_weighted(h1, h2)
    lo1 = h1.keys.min(axis=0)
    lo2 = h2.keys.min(axis=0)
    lo = lo1 + lo2
    hi = h1.keys.max(axis=0) + h2.keys.max(axis=0)
    ranges = [int(x) for x in (hi - lo + 1)]
    strides_obj = [1] * len(ranges)
    for j in range(len(ranges) - 2, -1, -1):
        strides_obj[j] = strides_obj[j + 1] * ranges[j + 1]
    total = strides_obj[0] * ranges[0]
    mass_bound = int(h1.counts.sum()) * int(h2.counts.sum())
    if total < 2**62 and _accel.int64_safe(mass_bound):
        strides = np.array(strides_obj, dtype=np.int64)
        # pack(v)+pack(w) then equals the packing of v+w relative to lo
        p1 = ((h1.keys - lo1) * strides).sum(axis=1)
        p2 = ((h2.keys - lo2) * strides).sum(axis=1)
        pk, pv = _accel.dispatch("packed_convolve")(p1, h1.counts, p2, h2.counts)
        return ValueHistogram(_unpack_lex(pk, lo, strides), counts=pv)
    # exact big-int fallback
    d1 = h1.as_dict()
    d2 = h2.as_dict()
    out: dict[tuple, int] = {}
    for k1, v1 in d1.items():
        for k2, v2 in d2.items():
            key = tuple(a + b for a, b in zip(k1, k2))
            out[key] = out.get(key, 0) + v1 * v2
    return _histogram_from_dict(out, h1.width)


def _convolve_weighted(h1: ValueHistogram, h2: ValueHistogram) -> ValueHistogram:
    def items(h):
        if h.is_weighted():
            return list(zip(map(tuple, h.keys.tolist()), h.weights))
        return [
            (tuple(k), (Fraction(int(c)), Fraction(0)))
            for k, c in zip(h.keys.tolist(), h.counts)
        ]

    out: dict[tuple, ComplexFraction] = {}
    for k1, (a, b) in items(h1):
        for k2, (c, d) in items(h2):
            key = tuple(x + y for x, y in zip(k1, k2))
            re, im = out.get(key, (Fraction(0), Fraction(0)))
            out[key] = (re + a * c - b * d, im + a * d + b * c)
    return _histogram_from_dict(out, h1.width)


# ---------------------------------------------------------------------------
# box scans
# ---------------------------------------------------------------------------


def box_points(n: int, d: int, budget: int | None = None) -> np.ndarray:
    """All integer vectors with |n_i| <= n, lex sorted, shape ((2n+1)^d, d)."""
    check_budget((2 * n + 1) ** d * d, "box grid", budget)
    axes = [np.arange(-n, n + 1, dtype=np.int64)] * d
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack(grid, axis=-1).reshape(-1, d)


def _system_values(system: GradedSystem, pts: np.ndarray) -> np.ndarray:
    """Columns of block-form values at the given points (block order)."""
    cols = []
    n = pts.shape[0]
    for form in system.all_forms():
        coeffs, exps = _form_arrays(form)
        bound = _max_abs_value(form, int(np.abs(pts).max()) if pts.size else 0)
        if not _accel.int64_safe(bound * max(len(form.terms), 1)):
            raise OverflowError("system values exceed the int64 envelope")
        cols.append(_accel.dispatch("eval_terms")(pts, coeffs, exps))
    return np.stack(cols, axis=1) if cols else np.empty((n, 0), dtype=np.int64)


def box_system_count(
    system: GradedSystem,
    n: int,
    target: Sequence[int] | None = None,
    budget: int | None = None,
):
    """Histogram of block values over the box |n_i| <= n, or one exact count.

    With no target, returns the full ValueHistogram of t -> #{n in box :
    Q_blocks(n) = t}; its sup over t is the Schmidt-type quantity.  With a
    target vector, returns the single exact count.
    """
    pts = box_points(n, system.arity, budget)
    vals = _system_values(system, pts)
    if target is not None:
        t = np.array(list(target), dtype=np.int64)
        if t.shape[0] != vals.shape[1]:
            raise ValueError("target length does not match block count")
        return int((vals == t).all(axis=1).sum())
    order = np.lexsort(vals.T[::-1])
    sv = vals[order]
    change = np.ones(sv.shape[0], dtype=bool)
    if sv.shape[0] > 1:
        change[1:] = (sv[1:] != sv[:-1]).any(axis=1)
    starts = np.flatnonzero(change)
    counts = np.diff(np.append(starts, sv.shape[0])).astype(np.int64)
    return ValueHistogram(sv[starts], counts=counts)


# ---------------------------------------------------------------------------
# moment counts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentResult:
    sup: object  # int count, or exact |w|^2 Fraction in weighted mode
    sum_sq: object  # exact int or Fraction
    histogram: ValueHistogram
    weighted: bool


WeightFn = Callable[[tuple[int, ...]], ComplexFraction]


def value_map_histogram(
    system: GradedSystem,
    n: int,
    weight: WeightFn | None = None,
    budget: int | None = None,
) -> ValueHistogram:
    """Histogram of n -> (n, Q^(2)(n), ..., Q^(k)(n)) over the box |n_i| <= n."""
    pts = box_points(n, system.arity, budget)
    vals = _system_values(system, pts)
    keys = np.concatenate([pts, vals], axis=1)
    if weight is None:
        # injective on the linear block, so every key has multiplicity 1
        order = np.lexsort(keys.T[::-1])
        return ValueHistogram(
            keys[order], counts=np.ones(keys.shape[0], dtype=np.int64)
        )
    data: dict[tuple, ComplexFraction] = {}
    for i in range(keys.shape[0]):
        w = weight(tuple(int(v) for v in pts[i]))
        if w[0] == 0 and w[1] == 0:
            continue
        data[tuple(int(v) for v in keys[i])] = w
    if not data:
        return ValueHistogram(np.empty((0, keys.shape[1]), dtype=np.int64), weights=[])
    return _histogram_from_dict(data, keys.shape[1])


def moment_count(
    system: GradedSystem,
    n: int,
    l: int,
    weight: WeightFn | None = None,
    budget: int | None = None,
) -> MomentResult:
    """Schmidt-type sup and even-moment sum for the l-fold direct sum.

    The value map n -> (n, Q_blocks(n)) is convolved with itself l-1
    times; sup_t of the result bounds the slice counts, and sum_t of its
    squared entries is exactly the 2l-th moment of E_N for the given
    weights (indicator weights when none are supplied).
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    h = value_map_histogram(system, n, weight, budget)
    conv = h
    for _ in range(l - 1):
        conv = convolve_histograms(conv, h, budget)
    if conv.is_weighted():
        sup = max((re * re + im * im for re, im in conv.weights), default=Fraction(0))
        return MomentResult(sup, conv.sum_of_squares(), conv, True)
    sup, _at = conv.sup_count() if len(conv) else (0, ())
    return MomentResult(sup, conv.sum_of_squares(), conv, False)
