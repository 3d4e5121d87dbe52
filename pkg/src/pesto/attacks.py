"""Cryptanalytic procedures against the public system.

* :func:`isolate_quadratic` finds the combinations of public polynomials
  whose cubic and quartic terms cancel.
* :func:`linear_structures` / :func:`common_linear_structures` compute the
  directions along which a component has a constant derivative.
* :func:`linearization_attack` fits bilinear input/output relations from
  samples, then forges by solving the relations for the input.
* :func:`forge_with_known_a2` inverts the public map when the input
  transformation is known.
"""

from __future__ import annotations

import json
import time
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Sequence

import numpy as np

from .algebra import (
    AffineBijection,
    FieldSpec,
    all_vectors,
    inverse,
    left_nullspace,
    nullspace,
    rank,
    rref,
    solve_linear,
)
from .errors import (
    BudgetExceeded,
    DegreeTooHigh,
    ForgeryFailed,
    InsufficientSamples,
    IsolationAmbiguous,
)
from .mpoly import Poly, PolySystem, quadratic_matrix, substitute
from .scheme import PestoPublicKey

BRUTE_FORCE_BUDGET = 1 << 16
ENUMERATION_BUDGET = 1 << 20


def _system(pk: PestoPublicKey | PolySystem) -> PolySystem:
    return pk.system if isinstance(pk, PestoPublicKey) else pk


@dataclass
class AttackReport:
    attack: str
    success: bool
    details: dict[str, Any] = field(default_factory=dict)
    candidates: list[list[int]] = field(default_factory=list)
    seconds: float = 0.0

    def to_text(self) -> str:
        lines = [f"attack: {self.attack}", f"success: {str(self.success).lower()}",
                 f"seconds: {self.seconds:.3f}"]
        for k, v in self.details.items():
            lines.append(f"{k}: {v}")
        for c in self.candidates:
            lines.append("candidate: " + " ".join(str(x) for x in c))
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {"attack": self.attack, "success": self.success, "seconds": round(self.seconds, 6),
             "details": self.details, "candidates": self.candidates},
            sort_keys=True,
        )


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ComponentSpace:
    """λ vectors whose public components have degree <= 2 (one per row)."""

    basis: np.ndarray
    field: FieldSpec
    n_high_terms: int

    @property
    def dimension(self) -> int:
        return int(self.basis.shape[0])

    def components(self, sys: PolySystem) -> list[Poly]:
        return [sys.component(lam) for lam in self.basis]


def high_degree_columns(sys: PolySystem) -> np.ndarray:
    return np.flatnonzero(sys.basis.degrees >= 3)


def isolate_quadratic(pk: PestoPublicKey | PolySystem) -> ComponentSpace:
    """Left nullspace of the m x |Δ| matrix of cubic and quartic coefficients."""
    sys = _system(pk)
    cols = high_degree_columns(sys)
    A = sys.coeffs[:, cols]
    if cols.size == 0:
        basis = np.eye(sys.m, dtype=np.int64)
    else:
        basis = left_nullspace(A, sys.field)
    return ComponentSpace(basis, sys.field, int(cols.size))


# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class LinearStructureSpace:
    basis: np.ndarray  # rows span the space
    field: FieldSpec
    n: int
    component: Poly | None = None

    @property
    def dimension(self) -> int:
        return int(self.basis.shape[0])

    @property
    def size(self) -> int:
        return self.field.q**self.dimension

    def contains(self, a) -> bool:
        a = np.asarray(a, dtype=np.int64)
        if self.dimension == 0:
            return not a.any()
        return rank(np.vstack([self.basis, a]), self.field) == self.dimension

    def elements(self) -> np.ndarray:
        if self.dimension == 0:
            return np.zeros((1, self.n), dtype=np.int64)
        return self.field.matmul(all_vectors(self.field, self.dimension), self.basis)


def _span_basis(vectors: np.ndarray, F: FieldSpec) -> np.ndarray:
    if vectors.size == 0:
        return np.zeros((0, vectors.shape[1] if vectors.ndim == 2 else 0), dtype=np.int64)
    R, piv = rref(vectors, F)
    return R[: len(piv)]


def derivative_matrix(f: Poly) -> np.ndarray:
    """Q + Q^T for the upper-triangular quadratic coefficient matrix Q of f."""
    if f.degree() > 2:
        raise DegreeTooHigh(f"linear-algebra method needs degree <= 2, got {f.degree()}")
    F = f.field
    Q = quadratic_matrix(f)[1:, 1:]
    return F.add(Q, Q.T)


def _shift_tables(F: FieldSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(points, plus) with plus[a, x] = index of point x + point a."""
    pts = all_vectors(F, n)
    N = pts.shape[0]
    if F.binary:
        idx = np.arange(N, dtype=np.int64)
        return pts, idx[:, None] ^ idx[None, :]
    weights = F.q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    plus = np.empty((N, N), dtype=np.int64)
    for a in range(N):
        plus[a] = ((pts + pts[a]) % F.p) @ weights
    return pts, plus


def _constant_derivative(vals: np.ndarray, plus: np.ndarray, F: FieldSpec) -> np.ndarray:
    """Boolean per (direction a, column) whether vals(x+a) - vals(x) is constant in x."""
    N = plus.shape[0]
    V = vals.reshape(N, -1)
    out = np.empty((N, V.shape[1]), dtype=bool)
    for a in range(N):
        D = F.sub(V[plus[a]], V)
        out[a] = np.all(D == D[0:1], axis=0)
    return out


def linear_structures(f: Poly, method: str = "linear_algebra", budget: int = BRUTE_FORCE_BUDGET) -> LinearStructureSpace:
    """All directions a along which D_a f is constant."""
    F, n = f.field, f.n
    if method == "linear_algebra":
        basis = nullspace(derivative_matrix(f), F)
        return LinearStructureSpace(basis, F, n, f)
    if method != "brute_force":
        raise ValueError("method must be 'linear_algebra' or 'brute_force'")
    if F.q**n > budget:
        raise BudgetExceeded(f"q^n = {F.q}^{n} exceeds brute-force budget {budget}")
    pts, plus = _shift_tables(F, n)
    vals = PolySystem.from_polys([f], F, n).evaluate(pts)[:, 0]
    mask = _constant_derivative(vals, plus, F)[:, 0]
    found = pts[mask]
    return LinearStructureSpace(_span_basis(found, F), F, n, f)


def linear_structure_set(f: Poly, budget: int = BRUTE_FORCE_BUDGET) -> np.ndarray:
    """Every linear structure of f as rows (brute force, no span closure)."""
    F, n = f.field, f.n
    if F.q**n > budget:
        raise BudgetExceeded(f"q^n = {F.q}^{n} exceeds brute-force budget {budget}")
    pts, plus = _shift_tables(F, n)
    vals = PolySystem.from_polys([f], F, n).evaluate(pts)[:, 0]
    return pts[_constant_derivative(vals, plus, F)[:, 0]]


def common_linear_structures(components: Sequence[Poly]) -> LinearStructureSpace:
    """Intersection of the structure spaces of quadratic components."""
    if not components:
        raise ValueError("need at least one component")
    F, n = components[0].field, components[0].n
    S = np.vstack([derivative_matrix(f) for f in components])
    return LinearStructureSpace(nullspace(S, F), F, n, None)


def structure_count_multiset(sys: PolySystem, spec: FieldSpec | None = None,
                             budget: int = BRUTE_FORCE_BUDGET) -> Counter:
    """Multiset over nonzero λ of the number of linear structures of λ·sys."""
    F = sys.field if spec is None else spec
    if F.q**sys.m > budget or F.q**sys.n > budget:
        raise BudgetExceeded("component or point enumeration exceeds brute-force budget")
    lams = all_vectors(F, sys.m)[1:]
    pts, plus = _shift_tables(F, sys.n)
    vals = sys.evaluate(pts)  # (q^n, m)
    comps = F.matmul(vals, lams.T)  # (q^n, q^m - 1)
    counts = _constant_derivative(comps, plus, F).sum(axis=0)
    return Counter(int(c) for c in counts)


def structures_per_component(sys: PolySystem, budget: int = BRUTE_FORCE_BUDGET) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(lambdas, points, mask) with mask[a, j] true iff point a is a structure of lambdas[j]·sys."""
    F = sys.field
    if F.q**sys.m > budget or F.q**sys.n > budget:
        raise BudgetExceeded("component or point enumeration exceeds brute-force budget")
    lams = all_vectors(F, sys.m)[1:]
    pts, plus = _shift_tables(F, sys.n)
    comps = F.matmul(sys.evaluate(pts), lams.T)
    return lams, pts, _constant_derivative(comps, plus, F)


# ----------------------------------------------------------------------
def relation_terms(n: int, m: int) -> list[tuple[str, tuple[int, ...]]]:
    """Term labels for bilinear relations: i_j o_k, o_j o_k (j <= k), i_j, o_j, 1."""
    terms: list[tuple[str, tuple[int, ...]]] = []
    terms += [("io", (j, k)) for j in range(n) for k in range(m)]
    terms += [("oo", (j, k)) for j in range(m) for k in range(j, m)]
    terms += [("i", (j,)) for j in range(n)]
    terms += [("o", (j,)) for j in range(m)]
    terms.append(("1", ()))
    return terms


def _relation_rows(F: FieldSpec, I: np.ndarray, O: np.ndarray) -> np.ndarray:
    n, m = I.shape[1], O.shape[1]
    ju, ku = np.triu_indices(m)
    io = F.mul(I[:, :, None], O[:, None, :]).reshape(I.shape[0], n * m)
    oo = F.mul(O[:, ju], O[:, ku])
    ones = np.ones((I.shape[0], 1), dtype=np.int64)
    return np.hstack([io, oo, I, O, ones])


def fit_relations(pk: PestoPublicKey | PolySystem, rng: np.random.Generator,
                  sample_budget: int | None = None, max_rounds: int = 4) -> tuple[np.ndarray, int]:
    """Basis of bilinear relations satisfied by sampled (input, output) pairs.

    Samples are added in batches of one term-count until the relation space
    stops shrinking; returns (relations, samples used).
    """
    sys = _system(pk)
    F, n, m = sys.field, sys.n, sys.m
    n_terms = len(relation_terms(n, m))
    count = sample_budget if sample_budget is not None else 3 * n_terms
    I = F.random(rng, (count, n))
    rows = _relation_rows(F, I, sys.evaluate(I))
    rel = nullspace(rows, F)
    for _ in range(max_rounds):
        extra = F.random(rng, (n_terms, n))
        more = _relation_rows(F, extra, sys.evaluate(extra))
        rows = np.vstack([rows, more])
        new = nullspace(rows, F)
        if new.shape[0] == rel.shape[0]:
            return new, rows.shape[0]
        rel = new
    raise InsufficientSamples(f"relation space still shrinking after {rows.shape[0]} samples")


def _relations_at_output(F: FieldSpec, rel: np.ndarray, n: int, m: int, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Specialise relations at output ``target``: returns (A, b) with A i = b."""
    o = target
    ju, ku = np.triu_indices(m)
    io = rel[:, : n * m].reshape(-1, n, m)
    off = n * m
    oo = rel[:, off : off + len(ju)]
    off += len(ju)
    lin_i = rel[:, off : off + n]
    off += n
    lin_o = rel[:, off : off + m]
    const = rel[:, off + m]
    A = F.add(F.sum(F.mul(io, o[None, None, :]), axis=2), lin_i)
    oo_vals = F.mul(o[ju], o[ku])
    rest = F.add(F.add(F.sum(F.mul(oo, oo_vals[None, :]), axis=1), F.sum(F.mul(lin_o, o[None, :]), axis=1)), const)
    return A, F.neg(rest)


def linearization_attack(pk: PestoPublicKey | PolySystem, target, rng: np.random.Generator,
                         sample_budget: int | None = None, relations: np.ndarray | None = None,
                         enum_budget: int = BRUTE_FORCE_BUDGET) -> AttackReport:
    """Forge a preimage of ``target`` from bilinear input/output relations."""
    start = time.perf_counter()
    sys = _system(pk)
    F, n, m = sys.field, sys.n, sys.m
    target = np.asarray(target, dtype=np.int64)
    details: dict[str, Any] = {"terms": len(relation_terms(n, m))}
    if relations is None:
        relations, used = fit_relations(sys, rng, sample_budget)
        details["samples"] = used
    details["relations"] = int(relations.shape[0])
    report = AttackReport("linearize", False, details)
    if relations.shape[0] == 0:
        details["reason"] = "no bilinear relations"
        report.seconds = time.perf_counter() - start
        return report
    A, b = _relations_at_output(F, relations, n, m, target)
    sol = solve_linear(A, b, F)
    if sol is None:
        details["reason"] = "specialised relations are inconsistent"
    else:
        details["solution_dimension"] = sol.dimension
        if sol.count(F.q) > enum_budget:
            details["reason"] = f"solution space q^{sol.dimension} exceeds enumeration budget"
        else:
            cands = sol.enumerate(F)
            ok = cands[np.all(sys.evaluate(cands) == target[None, :], axis=1)]
            report.candidates = ok.tolist()
            report.success = bool(ok.shape[0])
            if not report.success:
                details["reason"] = "no candidate verified"
    report.seconds = time.perf_counter() - start
    return report


# ----------------------------------------------------------------------
def _min_cover(vertices: list[int], edges: list[tuple[int, ...]], forced: set[int]) -> list[int]:
    """Smallest vertex set that leaves at most one free variable in every edge."""
    rest = [v for v in vertices if v not in forced]
    for size in range(len(rest) + 1):
        for extra in combinations(rest, size):
            S = forced | set(extra)
            if all(sum(1 for v in e if v not in S) <= 1 for e in edges):
                return sorted(S)
    return sorted(vertices)


def forge_with_known_a2(pk: PestoPublicKey | PolySystem, a2: AffineBijection, c,
                        t: int | None = None, budget: int = ENUMERATION_BUDGET,
                        report: AttackReport | None = None) -> np.ndarray:
    """Preimage of ``c`` under the public map, given its input transformation."""
    sys = _system(pk)
    F, n, m = sys.field, sys.n, sys.m
    if t is None:
        if not isinstance(pk, PestoPublicKey):
            raise ValueError("t is required when passing a bare system")
        t = pk.params.t
    c = np.asarray(c, dtype=np.int64)
    rep = report if report is not None else AttackReport("known-a2", False)
    gbar = sys.compose_affine(a2.inverse(), side="input")
    space = isolate_quadratic(gbar)
    rep.details["quadratic_dimension"] = space.dimension
    if space.dimension > t:
        raise IsolationAmbiguous(f"{space.dimension} independent quadratic components, expected {t}")
    if space.dimension < t:
        raise ForgeryFailed(f"only {space.dimension} quadratic components found, expected {t}")
    Lam = space.basis
    H = gbar.combine(Lam).with_degree(2)
    # split each isolated component into its x-linear part and a y-only part
    x_cols = [H.basis.index[tuple(int(i == j) for i in range(n))] for j in range(t)]
    Mx = H.coeffs[:, x_cols]
    x_vars = H.basis.exps[:, :t].sum(axis=1)
    if np.any(H.coeffs[:, (x_vars >= 1) & (H.basis.degrees >= 2)]):
        raise ForgeryFailed("isolated components are not linear in the twisted variables")
    try:
        Mx_inv = inverse(Mx, F)
    except ArithmeticError as exc:
        raise ForgeryFailed("twisted variables are not determined by the isolated components") from exc
    ny = n - t
    hy = []
    for row in H:
        hy.append(Poly(F, ny, {e[t:]: v for e, v in row.terms.items() if not any(e[:t])}))
    lam_c = F.matmul(Lam, c)
    # x = Mx^-1 (Λc - h(y))
    x_of_y = []
    for i in range(t):
        acc = Poly(F, ny)
        for j in range(t):
            coef = int(Mx_inv[i, j])
            if coef:
                acc = acc + (Poly.const(F, ny, int(lam_c[j])) - hy[j]).scale(coef)
        x_of_y.append(acc)
    subs = x_of_y + [Poly.var(F, ny, k) for k in range(ny)]
    # complement rows of Λ
    comp = []
    cur = Lam.copy()
    for i in range(m):
        e = np.zeros(m, dtype=np.int64)
        e[i] = 1
        trial = np.vstack([cur, e])
        if rank(trial, F) > cur.shape[0]:
            cur = trial
            comp.append(e)
    K = np.array(comp, dtype=np.int64).reshape(-1, m)
    rhs = F.matmul(K, c) if K.size else np.zeros(0, dtype=np.int64)
    residual = [substitute(p, subs) - int(r) for p, r in zip(gbar.combine(K), rhs)]
    rep.details["residual_degree"] = max((p.degree() for p in residual), default=0)
    # variables to enumerate: a minimal set leaving every nonlinear term with one free variable
    edges: list[tuple[int, ...]] = []
    forced: set[int] = set()
    for p in residual:
        for e in p.terms:
            if sum(e) >= 2:
                vs = tuple(v for v, x in enumerate(e) for _ in range(x))
                if len(set(vs)) == 1:
                    forced.add(vs[0])
                edges.append(vs)
    S = _min_cover(list(range(ny)), edges, forced)
    free = [v for v in range(ny) if v not in S]
    rep.details["enumerated_variables"] = len(S)
    if F.q ** len(S) > budget:
        raise BudgetExceeded(f"q^{len(S)} assignments exceed budget {budget}")
    z = _solve_residual(F, residual, S, free, ny, x_of_y, a2, sys, c, budget)
    if z is None:
        raise ForgeryFailed("no assignment produced a verified preimage")
    rep.success = True
    rep.candidates = [z.tolist()]
    return z


def _solve_residual(F: FieldSpec, residual: list[Poly], S: list[int], free: list[int], ny: int,
                    x_of_y: list[Poly], a2: AffineBijection, sys: PolySystem, c: np.ndarray,
                    budget: int) -> np.ndarray | None:
    """Enumerate the cover variables; each leaves a linear system in the rest."""
    pos_free = {v: i for i, v in enumerate(free)}
    nf = len(free)
    # each term -> (row, column in [free..., const], S-exponent vector, coefficient)
    rows_, cols_, sexp, coefs = [], [], [], []
    for r, p in enumerate(residual):
        for e, v in p.terms.items():
            fv = [u for u in free if e[u]]
            rows_.append(r)
            cols_.append(pos_free[fv[0]] if fv else nf)
            sexp.append([e[u] for u in S])
            coefs.append(v)
    sexp_a = np.array(sexp, dtype=np.int64).reshape(len(sexp), len(S))
    assigns = all_vectors(F, len(S))
    # value of the S-part of every term under every assignment
    vals = np.ones((assigns.shape[0], len(coefs)), dtype=np.int64)
    for j in range(len(S)):
        for k in range(1, int(sexp_a[:, j].max(initial=0)) + 1):
            hit = sexp_a[:, j] >= k
            vals[:, hit] = F.mul(vals[:, hit], assigns[:, j : j + 1])
    scaled = F.mul(vals, np.array(coefs, dtype=np.int64)[None, :])
    R = len(residual)
    flat = np.array(rows_, dtype=np.int64) * (nf + 1) + np.array(cols_, dtype=np.int64)
    # accumulate into (assignment, R*(nf+1)) via a 0/1 incidence matmul
    inc = np.zeros((len(coefs), R * (nf + 1)), dtype=np.int64)
    inc[np.arange(len(coefs)), flat] = 1
    systems = F.matmul(scaled, inc).reshape(-1, R, nf + 1)
    xsys = PolySystem.from_polys(x_of_y, F, ny, 2) if x_of_y else None
    spent = 0
    for a_idx in range(assigns.shape[0]):
        Msys = systems[a_idx]
        sol = solve_linear(Msys[:, :nf], F.neg(Msys[:, nf]), F)
        if sol is None:
            continue
        spent += sol.count(F.q)
        if spent > budget:
            raise BudgetExceeded("residual solution sets exceed the enumeration budget")
        ys = np.zeros((sol.count(F.q), ny), dtype=np.int64)
        if nf:
            ys[:, free] = sol.enumerate(F)
        ys[:, S] = assigns[a_idx]
        xs = xsys.evaluate(ys) if xsys is not None else np.zeros((ys.shape[0], 0), dtype=np.int64)
        Z = a2.apply_inverse(np.hstack([xs, ys]))
        good = np.flatnonzero(np.all(sys.evaluate(Z) == c[None, :], axis=1))
        if good.size:
            return Z[good[0]]
    return None


def known_a2_attack(pk: PestoPublicKey, a2: AffineBijection, c) -> AttackReport:
    start = time.perf_counter()
    rep = AttackReport("known-a2", False)
    try:
        forge_with_known_a2(pk, a2, c, report=rep)
    except (ForgeryFailed, IsolationAmbiguous) as exc:
        rep.details["reason"] = str(exc)
    rep.seconds = time.perf_counter() - start
    return rep
