"""Integral homogeneous forms, graded systems, and their structural data.

Everything here is exact: coefficients are arbitrary-precision integers,
derived scalars are ``fractions.Fraction``, ranks come from fraction
Gaussian elimination, and the positivity certificate for quadratics is
anchored to Sturm-sequence root counting of the Gram characteristic
polynomial.  No floating point enters this module.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Scalar = Union[int, Fraction]


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonomialTerm:
    coefficient: int
    exponents: tuple[int, ...]

    def __post_init__(self):
        if self.coefficient == 0:
            raise ValueError("zero coefficient term")
        if any(e < 0 for e in self.exponents):
            raise ValueError("negative exponent")

    @property
    def degree(self) -> int:
        return sum(self.exponents)


@dataclass(frozen=True)
class IntegerForm:
    arity: int
    degree: int
    terms: tuple[MonomialTerm, ...]

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be positive")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        seen = set()
        for t in self.terms:
            if len(t.exponents) != self.arity:
                raise ValueError("term arity mismatch")
            if t.degree != self.degree:
                raise ValueError(
                    f"non-homogeneous term {t.exponents} in degree-{self.degree} form"
                )
            if t.exponents in seen:
                raise ValueError(f"duplicate exponent vector {t.exponents}")
            seen.add(t.exponents)
        object.__setattr__(
            self, "terms", tuple(sorted(self.terms, key=lambda t: t.exponents))
        )

    def is_diagonal(self) -> bool:
        return all(sum(1 for e in t.exponents if e) == 1 for t in self.terms)

    def diagonal_coefficients(self) -> list[int]:
        """Coefficient per variable; 0 for variables that do not appear."""
        if not self.is_diagonal():
            raise ValueError("not a diagonal form")
        cs = [0] * self.arity
        for t in self.terms:
            j = next(i for i, e in enumerate(t.exponents) if e)
            cs[j] = t.coefficient
        return cs


def form_from_terms(arity: int, terms: Iterable[tuple[int, Sequence[int]]]) -> IntegerForm:
    tlist = [MonomialTerm(c, tuple(e)) for c, e in terms]
    if not tlist:
        raise ValueError("empty form")
    return IntegerForm(arity, tlist[0].degree, tuple(tlist))


def diagonal_form(coefficients: Sequence[int], degree: int) -> IntegerForm:
    d = len(coefficients)
    terms = []
    for i, c in enumerate(coefficients):
        if c:
            exps = [0] * d
            exps[i] = degree
            terms.append((c, exps))
    return form_from_terms(d, terms)


def sphere_form(d: int) -> IntegerForm:
    return diagonal_form([1] * d, 2)


@dataclass(frozen=True)
class GradedSystem:
    arity: int
    blocks: Mapping[int, tuple[IntegerForm, ...]]

    def __post_init__(self):
        blocks = {int(i): tuple(fs) for i, fs in self.blocks.items() if fs}
        if not blocks:
            raise ValueError("empty system")
        for i, fs in blocks.items():
            if i < 2:
                raise ValueError("block degrees start at 2")
            for f in fs:
                if f.arity != self.arity:
                    raise ValueError("block arity mismatch")
                if f.degree != i:
                    raise ValueError(f"degree-{f.degree} form in block {i}")
            if not block_linearly_independent(fs):
                raise ValueError(f"block {i} is linearly dependent")
        object.__setattr__(self, "blocks", dict(sorted(blocks.items())))

    @property
    def max_degree(self) -> int:
        return max(self.blocks)

    @property
    def block_counts(self) -> dict[int, int]:
        return {i: len(fs) for i, fs in self.blocks.items()}

    @property
    def total_nonlinear(self) -> int:
        """R: the number of nonlinear polynomials in the system."""
        return sum(len(fs) for fs in self.blocks.values())

    @property
    def total_degree(self) -> int:
        """D: arity + sum of i * r_i over the blocks."""
        return self.arity + sum(i * len(fs) for i, fs in self.blocks.items())

    @property
    def max_block_size(self) -> int:
        return max(len(fs) for fs in self.blocks.values())

    def all_forms(self) -> list[IntegerForm]:
        return [f for fs in self.blocks.values() for f in fs]


def system_from_blocks(arity: int, blocks: Mapping[int, Sequence[IntegerForm]]) -> GradedSystem:
    return GradedSystem(arity, {i: tuple(fs) for i, fs in blocks.items()})


# ---------------------------------------------------------------------------
# evaluation and derivatives
# ---------------------------------------------------------------------------


def evaluate(form: IntegerForm, point: Sequence[Scalar]) -> Scalar:
    """Exact value of the form at an integer or rational point."""
    if len(point) != form.arity:
        raise ValueError(f"point has length {len(point)}, form arity {form.arity}")
    total: Scalar = 0
    for t in form.terms:
        v: Scalar = t.coefficient
        for x, e in zip(point, t.exponents):
            for _ in range(e):
                v = v * x
        total = total + v
    return total


def gradient(form: IntegerForm, point: Sequence[Scalar]) -> list[Scalar]:
    if len(point) != form.arity:
        raise ValueError(f"point has length {len(point)}, form arity {form.arity}")
    g: list[Scalar] = [0] * form.arity
    for t in form.terms:
        for j, e in enumerate(t.exponents):
            if not e:
                continue
            v: Scalar = t.coefficient * e
            for i, (x, ei) in enumerate(zip(point, t.exponents)):
                m = ei - 1 if i == j else ei
                for _ in range(m):
                    v = v * x
            g[j] = g[j] + v
    return g


def jacobian(forms: Sequence[IntegerForm], point: Sequence[Scalar]) -> list[list[Scalar]]:
    """Rows are the gradients of the given forms at the point."""
    return [gradient(f, point) for f in forms]


# ---------------------------------------------------------------------------
# exact rational linear algebra
# ---------------------------------------------------------------------------


def rank_exact(rows: Sequence[Sequence[Scalar]]) -> int:
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    col = 0
    while rank < len(m) and col < ncols:
        pivot = None
        for r in range(rank, len(m)):
            if m[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            col += 1
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        pv = m[rank][col]
        for r in range(rank + 1, len(m)):
            if m[r][col] != 0:
                factor = m[r][col] / pv
                for c in range(col, ncols):
                    m[r][c] -= factor * m[rank][c]
        rank += 1
        col += 1
    return rank


def gram_matrix(form: IntegerForm) -> list[list[Fraction]]:
    """Symmetric A with Q(x) = x^T A x for a quadratic form."""
    if form.degree != 2:
        raise ValueError("gram_matrix needs a quadratic form")
    d = form.arity
    a = [[Fraction(0)] * d for _ in range(d)]
    for t in form.terms:
        idx = [i for i, e in enumerate(t.exponents) if e]
        if len(idx) == 1:
            a[idx[0]][idx[0]] = Fraction(t.coefficient)
        else:
            i, j = idx
            a[i][j] = a[j][i] = Fraction(t.coefficient, 2)
    return a


def charpoly(matrix: Sequence[Sequence[Scalar]]) -> list[Fraction]:
    """Coefficients [c_0, ..., c_{d-1}, 1] of det(tI - A), Faddeev-LeVerrier."""
    a = [[Fraction(x) for x in row] for row in matrix]
    d = len(a)
    coeffs = [Fraction(0)] * d + [Fraction(1)]
    m = [[Fraction(1) if i == j else Fraction(0) for j in range(d)] for i in range(d)]
    for k in range(1, d + 1):
        am = [
            [sum(a[i][l] * m[l][j] for l in range(d)) for j in range(d)]
            for i in range(d)
        ]
        c = -sum(am[i][i] for i in range(d)) / k
        coeffs[d - k] = c
        m = [
            [am[i][j] + (c if i == j else 0) for j in range(d)]
            for i in range(d)
        ]
    return coeffs


def _poly_eval(p: Sequence[Fraction], x: Fraction) -> Fraction:
    v = Fraction(0)
    for c in reversed(p):
        v = v * x + c
    return v


def _poly_deriv(p: Sequence[Fraction]) -> list[Fraction]:
    return [c * i for i, c in enumerate(p)][1:]


def _poly_rem(num: list[Fraction], den: list[Fraction]) -> list[Fraction]:
    num = num[:]
    while len(num) >= len(den) and any(c != 0 for c in num):
        if num[-1] == 0:
            num.pop()
            continue
        factor = num[-1] / den[-1]
        shift = len(num) - len(den)
        for i, c in enumerate(den):
            num[shift + i] -= factor * c
        num.pop()
    while num and num[-1] == 0:
        num.pop()
    return num


def sturm_chain(p: Sequence[Fraction]) -> list[list[Fraction]]:
    chain = [list(p)]
    dp = _poly_deriv(p)
    if dp:
        chain.append(dp)
    while len(chain[-1]) > 1:
        rem = _poly_rem(chain[-2], chain[-1])
        if not rem:
            break
        chain.append([-c for c in rem])
    return chain


def _sign_changes(values: Iterable[Fraction]) -> int:
    signs = [1 if v > 0 else -1 for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots_at_most(p: Sequence[Fraction], t: Fraction) -> int:
    """Number of distinct real roots of p in (-inf, t]."""
    chain = sturm_chain(p)
    at_minus_inf = _sign_changes(
        q[-1] * (-1) ** (len(q) - 1) for q in chain if q
    )
    at_t = _sign_changes(_poly_eval(q, t) for q in chain if q)
    return at_minus_inf - at_t


def smallest_eigenvalue_bound(
    matrix: Sequence[Sequence[Scalar]], bits: int = 48
) -> tuple[bool, Fraction | None]:
    """(is_positive_definite, certified rational lower bound on lambda_min).

    The bound is exact when the smallest eigenvalue is a rational root of
    the characteristic polynomial; otherwise it comes from Sturm-guided
    bisection refined to 2^-bits, never exceeding the true eigenvalue.
    """
    d = len(matrix)
    p = charpoly(matrix)
    if count_roots_at_most(p, Fraction(0)) > 0 or _poly_eval(p, Fraction(0)) == 0:
        return False, None
    # exact rational root, if the minimum is one
    scale = 1
    for c in p:
        scale = scale * c.denominator // _gcd(scale, c.denominator)
    ip = [int(c * scale) for c in p]
    candidates = set()
    const = next((c for c in ip if c != 0), 0)
    lead = ip[-1]
    for r in _divisors(abs(const)):
        for s in _divisors(abs(lead)):
            candidates.add(Fraction(r, s))
    rational_roots = sorted(c for c in candidates if c > 0 and _poly_eval(p, c) == 0)
    if rational_roots:
        r0 = rational_roots[0]
        # the only root at or below r0 is r0 itself, so lambda_min = r0
        if count_roots_at_most(p, r0) == 1:
            return True, r0
    # Gershgorin start, then bisection on the Sturm count
    rows = [[Fraction(x) for x in row] for row in matrix]
    gersh = min(
        rows[i][i] - sum(abs(rows[i][j]) for j in range(d) if j != i)
        for i in range(d)
    )
    lo = gersh if gersh > 0 else Fraction(0)
    hi = sum(rows[i][i] for i in range(d)) / d
    if count_roots_at_most(p, lo) > 0:
        lo = Fraction(0)
    steps = 0
    while steps < bits or lo == 0:
        mid = (lo + hi) / 2
        if count_roots_at_most(p, mid) == 0:
            lo = mid
        else:
            hi = mid
        steps += 1
        if steps > 8 * bits:
            raise ArithmeticError("eigenvalue bisection failed to separate from 0")
    return True, lo


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _divisors(n: int) -> list[int]:
    if n == 0:
        return [1]
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            out.append(n // i)
        i += 1
    return sorted(set(out))


# ---------------------------------------------------------------------------
# positivity certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PositivityCertificate:
    is_positive_definite: bool | str
    m_low: Fraction | None
    method: str

    def usable(self) -> bool:
        return self.is_positive_definite is True and self.m_low is not None and self.m_low > 0


def positivity_certificate(form: IntegerForm) -> PositivityCertificate:
    """Certify positive definiteness where this can be done exactly.

    Quadratics get the Gram smallest-eigenvalue bound.  Diagonal forms of
    even degree with positive coefficients on every variable get the exact
    sphere minimum c_min * d^(1-k/2).  Everything else is left unverified
    for the user-declared path.
    """
    if form.degree == 2:
        pd, m_low = smallest_eigenvalue_bound(gram_matrix(form))
        return PositivityCertificate(pd, m_low, "quadratic-exact")
    if form.is_diagonal() and form.degree % 2 == 0:
        cs = form.diagonal_coefficients()
        if all(c > 0 for c in cs):
            # min over |x|=1 of sum c_i x_i^k is >= c_min * d^(1-k/2)
            # (power-mean), with equality when the coefficients are equal
            m_low = Fraction(min(cs), form.arity ** (form.degree // 2 - 1))
            return PositivityCertificate(True, m_low, "diagonal-exact")
        return PositivityCertificate(False, None, "diagonal-exact")
    return PositivityCertificate("unverified", None, "user-declared")


def user_declared_certificate(m_low: Scalar) -> PositivityCertificate:
    m = Fraction(m_low)
    if m <= 0:
        raise ValueError("declared m_low must be positive")
    return PositivityCertificate(True, m, "user-declared")


# ---------------------------------------------------------------------------
# Birch ranks
# ---------------------------------------------------------------------------


def birch_rank_quadratic(form: IntegerForm) -> int:
    """B(Q) = rank of the Gram matrix; dim of the singular locus is d - B."""
    if form.degree != 2:
        raise ValueError(
            "exact Birch rank is only computed for quadratics; "
            "declare the singular-locus dimension for other forms"
        )
    return rank_exact(gram_matrix(form))


def direct_sum_rank_check(form: IntegerForm, s: int) -> tuple[int, int, bool]:
    """Compare B of the s-fold direct sum against s * B(Q).

    Returns (B(Q^{s+}), s*B(Q), verdict of the >= comparison).  For
    quadratics the block-diagonal Gram makes this an equality, which the
    rank computation re-derives rather than assumes.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    b1 = birch_rank_quadratic(form)
    a = gram_matrix(form)
    d = form.arity
    big = [[Fraction(0)] * (d * s) for _ in range(d * s)]
    for blk in range(s):
        for i in range(d):
            for j in range(d):
                big[blk * d + i][blk * d + j] = a[i][j]
    bs = rank_exact(big)
    return bs, s * b1, bs >= s * b1


def block_linearly_independent(forms: Sequence[IntegerForm]) -> bool:
    """Exact rank test on the monomial-coefficient matrix of a block."""
    monomials = sorted({t.exponents for f in forms for t in f.terms})
    col = {m: i for i, m in enumerate(monomials)}
    rows = []
    for f in forms:
        row = [Fraction(0)] * len(monomials)
        for t in f.terms:
            row[col[t.exponents]] = Fraction(t.coefficient)
        rows.append(row)
    return rank_exact(rows) == len(forms)


def certify_block_rank_positive(
    forms: Sequence[IntegerForm], trials: int = 64, seed: int = 0
) -> bool:
    """Exhibit an integer point where the block Jacobian has full rank.

    Schwartz-Zippel style sampling over [-10^6, 10^6]; success certifies
    B >= 1 for the block, which is all that is generally checkable.
    """
    rng = random.Random(seed)
    r = len(forms)
    d = forms[0].arity
    for _ in range(trials):
        point = [rng.randint(-(10**6), 10**6) for _ in range(d)]
        if rank_exact(jacobian(forms, point)) == r:
            return True
    return False


# ---------------------------------------------------------------------------
# parameter report
# ---------------------------------------------------------------------------

UNCONSTRAINED = "unconstrained"


@dataclass(frozen=True)
class ParamReport:
    arity: int
    max_degree: int
    block_counts: dict[int, int]
    total_nonlinear: int
    total_degree: int
    max_block_size: int
    dim_singular_locus: int | None
    dim_source: str
    kappa: Fraction | None
    gamma: Fraction | None
    p_critical: Fraction | None
    threshold_thm1: Fraction | None
    threshold_majorarcs: Fraction | None
    birch_criterion_holds: bool | None
    chi_table: dict[int, int]
    birch_ranks: dict[int, object] = field(default_factory=dict)

    def birch_even_ok(self, s: int) -> dict[int, bool | None]:
        """Per-degree verdicts of B_i >= (chi_i + (r_i+1)d) / (r_i + s).

        True/False when the rank is known (or the degree is unconstrained
        by having an empty block); None when only B_i >= 1 is certified
        and the threshold exceeds 1.
        """
        if s < 1:
            raise ValueError("s must be >= 1")
        out: dict[int, bool | None] = {}
        for i in range(2, self.max_degree + 1):
            r_i = self.block_counts.get(i, 0)
            if r_i == 0:
                out[i] = True
                continue
            thr = Fraction(self.chi_table[i] + (r_i + 1) * self.arity, r_i + s)
            b = self.birch_ranks.get(i)
            if b == UNCONSTRAINED:
                out[i] = True
            elif isinstance(b, int):
                out[i] = b >= thr
            elif thr <= 1:
                out[i] = True
            else:
                out[i] = None
        return out


def chi_constant(i: int, r_i: int, big_r: int, k: int) -> int:
    """chi(i, r_i, R, k) = (i-1) * 2^(3i) * r_i * R * k."""
    return (i - 1) * 2 ** (3 * i) * r_i * big_r * k


def _dim_singular_locus_form(form: IntegerForm) -> int | None:
    if form.degree == 2:
        return form.arity - birch_rank_quadratic(form)
    if form.is_diagonal():
        present = sum(1 for c in form.diagonal_coefficients() if c)
        return form.arity - present
    return None


def parameter_report(
    obj: IntegerForm | GradedSystem,
    dim_singular_locus: int | None = None,
    birch_ranks: Mapping[int, int] | None = None,
) -> ParamReport:
    """Structural parameters of a form or graded system, all exact.

    For a single form the hypersurface diagnostics (kappa, gamma, p_c and
    the theorem thresholds) are populated; the singular-locus dimension is
    computed for quadratics and diagonal forms and must be declared
    otherwise.  For a system, per-degree chi constants and Birch-rank
    bookkeeping are populated instead.
    """
    if isinstance(obj, IntegerForm):
        form = obj
        d, k = form.arity, form.degree
        if k < 2:
            raise ValueError("parameters are defined for degree >= 2")
        dim_v = _dim_singular_locus_form(form)
        source = "computed"
        if dim_v is None:
            if dim_singular_locus is None:
                raise ValueError(
                    "singular-locus dimension is not computable for this form; "
                    "pass dim_singular_locus explicitly"
                )
            dim_v = int(dim_singular_locus)
            source = "user-declared"
        codim = d - dim_v
        kappa = Fraction(codim, 2 ** (k - 1) * (k - 1))
        gamma = Fraction(1, 6 * k) * (Fraction(codim, (k - 1) * 2 ** (k + 1)) - 1)
        criterion = codim > (k - 1) * 2**k
        p_c = Fraction(2 * d, d - k) if d > k else None
        thr1 = 2 + Fraction(2 * k) / gamma if gamma > 0 else None
        thr_major = 2 + Fraction(4) / (kappa - 2) if kappa > 2 else None
        return ParamReport(
            arity=d,
            max_degree=k,
            block_counts={k: 1},
            total_nonlinear=1,
            total_degree=d + k,
            max_block_size=1,
            dim_singular_locus=dim_v,
            dim_source=source,
            kappa=kappa,
            gamma=gamma,
            p_critical=p_c,
            threshold_thm1=thr1,
            threshold_majorarcs=thr_major,
            birch_criterion_holds=criterion,
            chi_table={k: chi_constant(k, 1, 1, k)},
            birch_ranks={k: codim},
        )

    system = obj
    d = system.arity
    k = system.max_degree
    big_r = system.total_nonlinear
    counts = system.block_counts
    chi = {
        i: chi_constant(i, counts.get(i, 0), big_r, k)
        for i in range(2, k + 1)
        if counts.get(i, 0)
    }
    ranks: dict[int, object] = {}
    for i in range(2, k + 1):
        r_i = counts.get(i, 0)
        if r_i == 0:
            ranks[i] = UNCONSTRAINED
        elif birch_ranks and i in birch_ranks:
            ranks[i] = int(birch_ranks[i])
        elif r_i == 1 and system.blocks[i][0].degree == 2:
            ranks[i] = birch_rank_quadratic(system.blocks[i][0])
    return ParamReport(
        arity=d,
        max_degree=k,
        block_counts=counts,
        total_nonlinear=big_r,
        total_degree=system.total_degree,
        max_block_size=system.max_block_size,
        dim_singular_locus=None,
        dim_source="n/a",
        kappa=None,
        gamma=None,
        p_critical=None,
        threshold_thm1=None,
        threshold_majorarcs=None,
        birch_criterion_holds=None,
        chi_table=chi,
        birch_ranks=ranks,
    )


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def form_to_dict(form: IntegerForm) -> dict:
    return {
        "arity": form.arity,
        "degree": form.degree,
        "terms": [
            {"coeff": str(t.coefficient), "exps": list(t.exponents)}
            for t in form.terms
        ],
    }


def form_from_dict(data: Mapping) -> IntegerForm:
    terms = [(int(t["coeff"]), tuple(int(e) for e in t["exps"])) for t in data["terms"]]
    form = form_from_terms(int(data["arity"]), terms)
    if form.degree != int(data["degree"]):
        raise ValueError("declared degree does not match the terms")
    return form


def system_to_dict(system: GradedSystem) -> dict:
    return {
        "arity": system.arity,
        "blocks": {
            str(i): [
                [{"coeff": str(t.coefficient), "exps": list(t.exponents)} for t in f.terms]
                for f in fs
            ]
            for i, fs in system.blocks.items()
        },
    }


def system_from_dict(data: Mapping) -> GradedSystem:
    arity = int(data["arity"])
    blocks = {}
    for key, forms in data["blocks"].items():
        fs = [
            form_from_terms(
                arity, [(int(t["coeff"]), tuple(int(e) for e in t["exps"])) for t in terms]
            )
            for terms in forms
        ]
        blocks[int(key)] = tuple(fs)
    return GradedSystem(arity, blocks)


def canonical_json(data: Mapping) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


def load_form_or_system(path: str) -> IntegerForm | GradedSystem:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "blocks" in data:
        return system_from_dict(data)
    return form_from_dict(data)


def save_form_or_system(obj: IntegerForm | GradedSystem, path: str) -> None:
    data = form_to_dict(obj) if isinstance(obj, IntegerForm) else system_to_dict(obj)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(data))
