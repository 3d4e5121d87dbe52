"""Desk-scale solving-degree probe for public systems.

The probe fixes n - m public variables at random (so the system becomes
square), then runs a mutant-XL loop on Macaulay matrices whose columns are
ordered by descending graded reverse lexicographic order:

* at degree d the row space is closed under multiplication of its
  lower-degree members (degree falls) by variables;
* the witness degree is the first d at which every monomial of degree d is
  a leading term, so the quotient ring is finite and spanned by standard
  monomials of degree < d;
* solutions are read off the eigenvectors of a multiplication matrix on
  the quotient and re-checked against the original equations.

If the specialised system has no solution over GF(q) (the row space
contains 1, or no eigenvalue lies in the field), fresh values are drawn.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from math import comb, log2

import mpmath
import numpy as np

from .algebra import FieldSpec, inverse, nullspace
from .errors import BudgetExceeded, NoSolutionFound
from .mpoly import MonomialBasis, PolySystem, monomial_basis, scatter_add

COLUMN_BUDGET = 1 << 21
PANEL = 96


# ----------------------------------------------------------------------
def rref_blocked(M: np.ndarray, F: FieldSpec, panel: int = PANEL) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with panel-wise updates through field matmuls.

    Produces the same (unique) reduced form as a column-by-column
    elimination; zero rows are dropped from the result.
    """
    R = np.array(M, dtype=np.int64, copy=True)
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c0 in range(0, cols, panel):
        if r >= R.shape[0]:
            break
        c1 = min(cols, c0 + panel)
        # local elimination on the panel picks pivot rows and columns
        block = R[r:, c0:c1].copy()
        local_rows: list[int] = []
        local_cols: list[int] = []
        order = np.arange(block.shape[0])
        br = 0
        for c in range(c1 - c0):
            if br >= block.shape[0]:
                break
            nz = np.flatnonzero(block[br:, c])
            if nz.size == 0:
                continue
            piv = br + int(nz[0])
            if piv != br:
                block[[br, piv]] = block[[piv, br]]
                order[[br, piv]] = order[[piv, br]]
            lead_inv = F.inv(int(block[br, c]))
            below = block[br + 1 :, c]
            hit = np.flatnonzero(below)
            if hit.size:
                f = F.mul(below[hit], lead_inv)
                block[br + 1 + hit] = F.sub(block[br + 1 + hit], F.mul(f[:, None], block[br][None, :]))
            local_rows.append(int(order[br]) + r)
            local_cols.append(c0 + c)
            br += 1
        if not local_rows:
            continue
        P = np.array(local_rows)
        pc = np.array(local_cols)
        B = R[np.ix_(P, pc)]
        X = F.matmul(inverse(B, F), R[P][:, c0:])
        others = np.setdiff1d(np.arange(R.shape[0]), P)
        coef = R[np.ix_(others, pc)]
        if others.size:
            R[others, c0:] = F.sub(R[others, c0:], F.matmul(coef, X))
        R[P, c0:] = X
        # move pivot rows up, drop rows that became zero
        rest = others[others >= r]
        top = others[others < r]
        rest = rest[np.any(R[rest, c0:] != 0, axis=1)] if rest.size else rest
        R = R[np.concatenate([top, P, rest]).astype(np.int64)]
        r += len(local_rows)
        pivots.extend(local_cols)
    return R[:r], pivots


# ----------------------------------------------------------------------
def grevlex_order(basis: MonomialBasis) -> np.ndarray:
    """Column permutation listing the basis from largest to smallest in grevlex."""
    keys = [(-sum(e), tuple(reversed(e))) for e in basis.monomials]
    return np.array(sorted(range(len(keys)), key=keys.__getitem__), dtype=np.int64)


@dataclass
class MacaulayMatrix:
    """Rows are polynomials over all monomials of degree <= ``degree``."""

    degree: int
    basis: MonomialBasis
    rows: np.ndarray  # canonical column order
    labels: list[tuple[tuple[int, ...], int]] = field(default_factory=list)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape

    @classmethod
    def build(cls, sys: PolySystem, degree: int, q_eff: int) -> "MacaulayMatrix":
        """Classic Macaulay matrix: every monomial multiple m * f_i of degree <= ``degree``."""
        n = sys.n
        basis = monomial_basis(n, degree, q_eff)
        src = sys.with_degree(min(sys.basis.degree, degree)) if sys.degree() <= degree else None
        if src is None:
            return cls(degree, basis, np.zeros((0, len(basis)), dtype=np.int64))
        src_cols = np.array([basis.index[e] for e in src.basis.monomials], dtype=np.int64)
        rows, labels = [], []
        for i, d_i in enumerate(src.degrees()):
            for mono in basis.monomials:
                if sum(mono) + d_i > degree:
                    break
                row = np.zeros(len(basis), dtype=np.int64)
                tgt = _shift_columns(basis, src_cols, mono)
                row[tgt] = src.coeffs[i]
                rows.append(row)
                labels.append((mono, i))
        M = np.array(rows, dtype=np.int64).reshape(len(rows), len(basis))
        return cls(degree, basis, M, labels)


def _shift_columns(basis: MonomialBasis, cols: np.ndarray, mono: tuple[int, ...]) -> np.ndarray:
    out = cols.copy()
    for v, x in enumerate(mono):
        for _ in range(x):
            out = basis.shift[out, v]
    return out


@dataclass
class SolveDegreeEstimate:
    params: tuple
    witness_degree: int | None
    rank_profile: dict[int, int]
    termination: str
    solution: list[int] | None = None
    specialisations: int = 1
    max_rank_degree: int | None = None
    seconds: float = 0.0
    caveat: str = ("witness degree of a mutant-XL run on a specialised square system; "
                   "it can differ from an F4 solving degree by a small offset")


# ----------------------------------------------------------------------
def specialise(sys: PolySystem, fixed: dict[int, int]) -> tuple[PolySystem, list[int]]:
    """Substitute constants for some variables; returns (system, remaining variable ids)."""
    F = sys.field
    keep = [v for v in range(sys.n) if v not in fixed]
    D = sys.basis.degree
    nb = monomial_basis(len(keep), D, sys.basis.q)
    exps = sys.basis.exps
    factor = np.ones(len(sys.basis), dtype=np.int64)
    for v, val in fixed.items():
        for k in range(1, int(exps[:, v].max(initial=0)) + 1):
            hit = exps[:, v] >= k
            factor[hit] = F.mul(factor[hit], val)
    target = np.array([nb.index[tuple(int(e[v]) for v in keep)] for e in sys.basis.monomials], dtype=np.int64)
    out = np.zeros((sys.m, len(nb)), dtype=np.int64)
    scaled = F.mul(sys.coeffs, factor[None, :])
    for i in range(sys.m):
        scatter_add(F, out[i], target, scaled[i])
    return PolySystem(F, nb, out), keep


class _MutantXL:
    """Mutant-closed Macaulay row spaces of increasing degree."""

    def __init__(self, sys: PolySystem, q_eff: int, column_budget: int) -> None:
        self.sys = sys
        self.F = sys.field
        self.n = sys.n
        self.q_eff = q_eff
        self.column_budget = column_budget
        self.degree = 0
        self.basis: MonomialBasis | None = None
        self.R = np.zeros((0, 0), dtype=np.int64)  # canonical columns
        self.pivots: np.ndarray = np.zeros(0, dtype=np.int64)  # canonical indices of leading monomials

    def _reduce(self, rows: np.ndarray) -> None:
        b = self.basis
        perm = grevlex_order(b)
        R, piv = rref_blocked(rows[:, perm], self.F)
        out = np.zeros((R.shape[0], len(b)), dtype=np.int64)
        out[:, perm] = R
        self.R = out
        self.pivots = perm[np.array(piv, dtype=np.int64)] if piv else np.zeros(0, dtype=np.int64)

    def _lift(self, rows: np.ndarray, old: MonomialBasis) -> np.ndarray:
        out = np.zeros((rows.shape[0], len(self.basis)), dtype=np.int64)
        out[:, : len(old)] = rows  # canonical order: lower degree basis is a prefix
        return out

    def _times_vars(self, rows: np.ndarray) -> np.ndarray:
        b = self.basis
        N = rows.shape[1]
        blocks = []
        for v in range(self.n):
            tgt = b.shift[:N, v]
            ok = tgt >= 0
            blk = np.zeros((rows.shape[0], len(b)), dtype=np.int64)
            blk[:, tgt[ok]] = rows[:, ok]
            blocks.append(blk)
        return np.vstack(blocks) if blocks else np.zeros((0, len(b)), dtype=np.int64)

    def _fresh(self, low: np.ndarray) -> np.ndarray:
        """Basis of span(low) modulo the already multiplied rows W."""
        F = self.F
        if low.shape[0] == 0:
            return low
        if self.W.shape[0]:
            pivW = self._w_pivots
            low = F.sub(low, F.matmul(low[:, pivW], self.W))
        R, _ = rref_blocked(low, F)
        return R

    def _absorb(self, rows: np.ndarray) -> None:
        W, piv = rref_blocked(np.vstack([self.W, rows]) if self.W.shape[0] else rows, self.F)
        self.W = W
        self._w_pivots = np.array(piv, dtype=np.int64)

    def step(self, d: int) -> None:
        """Advance to degree d and close the row space under multiplication of degree falls."""
        cols = comb(self.n + d, d)
        if cols > self.column_budget:
            raise BudgetExceeded(f"{cols} columns at degree {d} exceed budget {self.column_budget}")
        old = self.basis
        self.basis = monomial_basis(self.n, d, self.q_eff)
        b = self.basis
        if old is None:
            rows = MacaulayMatrix.build(self.sys, d, self.q_eff).rows
            self.W = np.zeros((0, len(b)), dtype=np.int64)
            self._w_pivots = np.zeros(0, dtype=np.int64)
        else:
            prev = self.R[:, : len(old)]
            Rl = self._lift(prev, old)
            top = b.degrees[self.pivots] == self.degree
            rows = np.vstack([Rl, self._times_vars(prev[top])]) if top.any() else Rl
            # every earlier row now has all its variable multiples in the span
            self.W = np.zeros((0, len(b)), dtype=np.int64)
            if Rl.shape[0]:
                self._absorb(Rl)
        self.degree = d
        self._reduce(rows)
        Nd1 = b.count_upto(d - 1)
        while True:
            low_rows = self.R[b.degrees[self.pivots] < d]
            fresh = self._fresh(low_rows)
            if fresh.shape[0] == 0:
                break
            self._absorb(fresh)
            before = self.R.shape[0]
            self._reduce(np.vstack([self.R, self._times_vars(fresh[:, :Nd1])]))
            if self.R.shape[0] == before and not np.any(b.degrees[self.pivots] < d):
                break

    # queries -------------------------------------------------------------
    def rank(self) -> int:
        return int(self.R.shape[0])

    def inconsistent(self) -> bool:
        return bool(np.any(self.pivots == 0))

    def staircase_closed(self) -> bool:
        b = self.basis
        top = set(np.flatnonzero(b.degrees == self.degree).tolist())
        return top.issubset(set(self.pivots.tolist()))

    def standard_monomials(self) -> np.ndarray:
        piv = set(self.pivots.tolist())
        return np.array([j for j in range(len(self.basis)) if j not in piv], dtype=np.int64)

    def multiplication_matrix(self, lin: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Matrix of multiplication by sum lin[v] z_v on the span of standard monomials."""
        F, b = self.F, self.basis
        std = self.standard_monomials()
        pos = {int(j): i for i, j in enumerate(std)}
        row_of = {int(p): i for i, p in enumerate(self.pivots)}
        k = len(std)
        M = np.zeros((k, k), dtype=np.int64)
        for i, j in enumerate(std):
            for v in range(self.n):
                if not lin[v]:
                    continue
                tgt = int(b.shift[j, v])
                col = np.zeros(k, dtype=np.int64)
                if tgt in pos:
                    col[pos[tgt]] = 1
                else:
                    col = F.neg(self.R[row_of[tgt], std])
                M[:, i] = F.add(M[:, i], F.mul(col, int(lin[v])))
        return M, std

    def linear_normal_forms(self, std: np.ndarray) -> np.ndarray:
        """Row v: coefficients over standard monomials of the normal form of z_v."""
        b, F = self.basis, self.F
        pos = {int(j): i for i, j in enumerate(std)}
        row_of = {int(p): i for i, p in enumerate(self.pivots)}
        out = np.zeros((self.n, len(std)), dtype=np.int64)
        for v in range(self.n):
            e = [0] * self.n
            e[v] = 1
            j = b.index[tuple(e)]
            if j in pos:
                out[v, pos[j]] = 1
            else:
                out[v] = F.neg(self.R[row_of[j], std])
        return out


def _extract_solutions(xl: _MutantXL, rng: np.random.Generator, tries: int = 4) -> list[np.ndarray]:
    F = xl.F
    std = xl.standard_monomials()
    if std.size == 0:
        return []
    one = int(np.flatnonzero(std == 0)[0]) if 0 in std else None
    if one is None:
        return []
    nf = xl.linear_normal_forms(std)
    found: list[np.ndarray] = []
    for _ in range(tries):
        lin = F.random(rng, xl.n)
        M, _ = xl.multiplication_matrix(lin)
        clean = True
        found = []
        for r in range(F.q):
            A = F.sub(M.T, np.diag(np.full(len(std), r, dtype=np.int64)))
            ker = nullspace(A, F)
            if ker.shape[0] == 0:
                continue
            if ker.shape[0] > 1:
                clean = False
                break
            e = ker[0]
            if not e[one]:
                continue
            e = F.mul(e, F.inv(int(e[one])))
            found.append(F.sum(F.mul(nf, e[None, :]), axis=1))
        if clean:
            return found
    return found


def xl_witness_degree(sys: PolySystem, target=None, rng: np.random.Generator | None = None,
                      d_max: int = 10, column_budget: int = COLUMN_BUDGET,
                      field_equations: bool = False, max_specialisations: int = 16,
                      params: tuple = ()) -> SolveDegreeEstimate:
    """Witness degree for solving ``sys(z) = target`` by specialisation + mutant XL."""
    start = time.perf_counter()
    F = sys.field
    rng = rng if rng is not None else np.random.default_rng()
    w = np.zeros(sys.m, dtype=np.int64) if target is None else np.asarray(target, dtype=np.int64)
    shifted = sys.add_constants(F.neg(w))
    n_fix = max(0, sys.n - sys.m)
    k = sys.n - n_fix
    if comb(k + d_max, d_max) > column_budget:
        raise BudgetExceeded(f"C({k}+{d_max},{d_max}) columns exceed budget {column_budget}")
    q_eff = F.q if field_equations else d_max + 2
    deg0 = max(sys.degree(), 1)
    last_profile: dict[int, int] = {}
    for attempt in range(1, max_specialisations + 1):
        fixed = {v: int(F.random(rng)) for v in range(k, sys.n)}
        spec, keep = specialise(shifted, fixed)
        spec = PolySystem(F, monomial_basis(k, spec.basis.degree, q_eff) if not field_equations else spec.basis,
                          spec.coeffs) if spec.basis.q != q_eff else spec
        xl = _MutantXL(spec, q_eff, column_budget)
        profile: dict[int, int] = {}
        witness = None
        reason = "d_max reached"
        for d in range(deg0, d_max + 1):
            xl.step(d)
            profile[d] = xl.rank()
            if xl.inconsistent():
                reason = "inconsistent specialisation"
                break
            if xl.staircase_closed():
                sols = _extract_solutions(xl, rng)
                for s in sols:
                    z = np.zeros(sys.n, dtype=np.int64)
                    z[keep] = s
                    for v, val in fixed.items():
                        z[v] = val
                    if np.array_equal(sys.evaluate(z), w):
                        est = SolveDegreeEstimate(params, d, profile, "verified solution", z.tolist(), attempt,
                                                  max(profile, key=lambda x: (profile[x], -x)))
                        est.seconds = time.perf_counter() - start
                        return est
                reason = "no solution in the field"
                witness = d
                break
        last_profile = profile
        if witness is None and reason == "d_max reached":
            raise NoSolutionFound(f"no witness up to degree {d_max}")
    raise NoSolutionFound(f"no verified solution after {max_specialisations} specialisations "
                          f"(last profile {last_profile})")


def gb_complexity_bound(n: int, sd: int, omega: float) -> tuple[mpmath.mpf, float]:
    """C(n+sd, n)^omega and its log2."""
    if sd < 1 or not 2 < omega < 3:
        raise ValueError("need sd >= 1 and 2 < omega < 3")
    binom = comb(n + sd, n)
    value = mpmath.power(mpmath.mpf(binom), omega)
    return value, float(omega * mpmath.log(binom, 2))


CSV_COLUMNS = ("q", "n", "m", "t", "s", "seed", "witness_degree", "max_rank_degree", "runtime_ms")


def estimates_to_csv(rows: list[tuple[SolveDegreeEstimate, int]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for est, seed in rows:
        q, n, m, t, s = est.params
        w.writerow([q, n, m, t, s, seed, est.witness_degree, est.max_rank_degree, int(est.seconds * 1000)])
    return buf.getvalue()


def log2_binomial(n: int, k: int) -> float:
    return log2(comb(n, k))
