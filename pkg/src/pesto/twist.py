"""The t-twist of a central map F = (T, U) with T(x, y) = x + q(y).

Variables are ordered z = (x_1..x_t, y_1..y_{n-t}).  The vinegar variables
of U are the first t + s coordinates of z, the oil variables the remaining
n - t - s.  Twisting swaps the first t input and output coordinates of the
graph of F, which yields

    G(x, y) = (x - q(y), U(x - q(y), y)).

Besides the symbolic construction this module carries brute-force graph
oracles used to check the twist relation exhaustively at toy sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .algebra import AffineBijection, FieldSpec, all_vectors
from .errors import BudgetExceeded, DimensionMismatch, ParamRange
from .mpoly import Poly, PolySystem, fold_tensor, monomial_basis, quadratic_matrix, substitute

GRAPH_BUDGET = 1 << 20


def embed_system(sys: PolySystem, positions: list[int], n: int) -> PolySystem:
    """Re-express a system in ``len(positions)`` variables inside ``n`` variables."""
    if len(positions) != sys.n:
        raise DimensionMismatch("one position per source variable required")
    D = sys.basis.degree
    big = monomial_basis(n, D, sys.field.q)
    pos = np.asarray(positions, dtype=np.int64)
    cols = np.empty(len(sys.basis), dtype=np.int64)
    for j, e in enumerate(sys.basis.monomials):
        full = [0] * n
        for v, x in enumerate(e):
            full[pos[v]] = x
        cols[j] = big.index[tuple(full)]
    C = np.zeros((sys.m, len(big)), dtype=np.int64)
    C[:, cols] = sys.coeffs
    return PolySystem(sys.field, big, C)


@dataclass(frozen=True, eq=False)
class CentralMap:
    """Secret central map: the twist payload q and the OV system U."""

    field: FieldSpec
    n: int
    m: int
    t: int
    s: int
    qmap: PolySystem  # t quadratics in the n - t variables y
    U: PolySystem  # m - t quadratics in all n variables
    check: bool = dc_field(default=True, repr=False)

    def __post_init__(self) -> None:
        n, m, t, s = self.n, self.m, self.t, self.s
        if not (0 <= t <= min(n, m)) or not (0 <= s <= n - t):
            raise ParamRange(f"invalid central map shape n={n} m={m} t={t} s={s}")
        if self.qmap.m != t or self.qmap.n != n - t:
            raise DimensionMismatch(f"q-map must be {t} polynomials in {n - t} variables")
        if self.U.m != m - t or self.U.n != n:
            raise DimensionMismatch(f"U must be {m - t} polynomials in {n} variables")
        if self.qmap.basis.degree != 2:
            object.__setattr__(self, "qmap", self.qmap.with_degree(2))
        if self.U.basis.degree != 2:
            object.__setattr__(self, "U", self.U.with_degree(2))
        if self.check and not self.is_ov_shaped():
            raise ParamRange("U contains a product of two oil variables")

    @property
    def n_vinegar(self) -> int:
        return self.t + self.s

    @property
    def n_oil(self) -> int:
        return self.n - self.t - self.s

    def is_ov_shaped(self) -> bool:
        exps = self.U.basis.exps
        oil_deg = exps[:, self.n_vinegar:].sum(axis=1)
        bad = oil_deg >= 2
        return not np.any(self.U.coeffs[:, bad])

    # coefficient views used by signing and the codec -------------------
    @cached_property
    def _vinegar_columns(self) -> np.ndarray:
        vb = monomial_basis(self.n_vinegar, 2, self.field.q)
        idx = self.U.basis.index
        pad = (0,) * self.n_oil
        return np.array([idx[e + pad] for e in vb.monomials], dtype=np.int64)

    @cached_property
    def _oil_columns(self) -> np.ndarray:
        """(n_oil, n_vinegar + 1) column indices: [o_k, v_1 o_k, ..., v_V o_k]."""
        n, V = self.n, self.n_vinegar
        idx = self.U.basis.index
        out = np.empty((self.n_oil, V + 1), dtype=np.int64)
        for k in range(self.n_oil):
            e = [0] * n
            e[V + k] = 1
            out[k, 0] = idx[tuple(e)]
            for j in range(V):
                f = list(e)
                f[j] = 1
                out[k, j + 1] = idx[tuple(f)]
        return out

    def vinegar_coeffs(self) -> np.ndarray:
        """(m - t) x C(t+s+2, 2): the vinegar-only quadratic part of U."""
        return self.U.coeffs[:, self._vinegar_columns]

    def oil_coeffs(self) -> np.ndarray:
        """(m - t) x (n - t - s) x (t + s + 1): coefficients of o_k and v_j o_k."""
        return self.U.coeffs[:, self._oil_columns]

    def oil_system(self, vinegar) -> tuple[np.ndarray, np.ndarray]:
        """Fix the vinegar values; return (M, c) with U = M @ oil + c."""
        F = self.field
        v = np.asarray(vinegar, dtype=np.int64)
        h = np.concatenate([[1], v])
        M = F.sum(F.mul(self.oil_coeffs(), h[None, None, :]), axis=2)
        vb = monomial_basis(self.n_vinegar, 2, F.q)
        mv = PolySystem(F, vb, self.vinegar_coeffs()).evaluate(v)
        return M, mv

    @classmethod
    def from_blocks(cls, field: FieldSpec, n: int, m: int, t: int, s: int,
                    q_coeffs: np.ndarray, vinegar: np.ndarray, oil: np.ndarray) -> "CentralMap":
        """Assemble from the dense blocks returned by the coefficient views."""
        qb = monomial_basis(n - t, 2, field.q)
        qmap = PolySystem(field, qb, np.asarray(q_coeffs, dtype=np.int64).reshape(t, len(qb)))
        ub = monomial_basis(n, 2, field.q)
        proto = cls(field, n, m, t, s, qmap, PolySystem.zeros(field, n, m - t, 2), check=False)
        C = np.zeros((m - t, len(ub)), dtype=np.int64)
        C[:, proto._vinegar_columns] = vinegar
        C[:, proto._oil_columns] = np.asarray(oil, dtype=np.int64).reshape(m - t, n - t - s, t + s + 1)
        return cls(field, n, m, t, s, qmap, PolySystem(field, ub, C))

    @classmethod
    def random(cls, field: FieldSpec, n: int, m: int, t: int, s: int, rng: np.random.Generator) -> "CentralMap":
        """Uniform q-map (all quadratic coefficients) and uniform OV-shaped U."""
        V, O = t + s, n - t - s
        q_coeffs = field.random(rng, (t, len(monomial_basis(n - t, 2, field.q))))
        vin = field.random(rng, (m - t, len(monomial_basis(V, 2, field.q))))
        oil = field.random(rng, (m - t, O, V + 1))
        return cls.from_blocks(field, n, m, t, s, q_coeffs, vin, oil)

    # derived systems ---------------------------------------------------
    def qmap_full(self) -> PolySystem:
        """q as a system in all n variables (depends on y only)."""
        return embed_system(self.qmap, list(range(self.t, self.n)), self.n)

    def system(self) -> PolySystem:
        """The central map F(x, y) = (x + q(y), U(x, y))."""
        F, n, t = self.field, self.n, self.t
        T = self.qmap_full()
        C = np.array(T.coeffs, copy=True)
        for i in range(t):
            e = [0] * n
            e[i] = 1
            j = T.basis.index[tuple(e)]
            C[i, j] = F.add(C[i, j], 1)
        return PolySystem(F, T.basis, C).stack(self.U)

    def t_inverse(self) -> PolySystem:
        """x - q(y), the inverse of T_y applied to x."""
        F, n, t = self.field, self.n, self.t
        T = self.qmap_full()
        C = np.array(F.neg(T.coeffs), copy=True)
        for i in range(t):
            e = [0] * n
            e[i] = 1
            j = T.basis.index[tuple(e)]
            C[i, j] = F.add(C[i, j], 1)
        return PolySystem(F, T.basis, C)


@dataclass(frozen=True)
class TwistMatrix:
    t: int
    n: int
    m: int
    matrix: np.ndarray

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Apply to rows of (input, output) points; a pure coordinate permutation."""
        return np.asarray(points)[:, self.permutation]

    @property
    def permutation(self) -> np.ndarray:
        return np.argmax(self.matrix, axis=1)


def mt_matrix(t: int, n: int, m: int) -> TwistMatrix:
    """The (n+m) x (n+m) block permutation swapping the first t inputs and outputs."""
    if not (0 <= t <= min(n, m)):
        raise ParamRange(f"t={t} outside [0, min(n, m)={min(n, m)}]")
    N = n + m
    M = np.zeros((N, N), dtype=np.int64)
    for i in range(t):
        M[i, n + i] = 1
        M[n + i, i] = 1
    for i in range(t, n):
        M[i, i] = 1
    for i in range(n + t, N):
        M[i, i] = 1
    M.setflags(write=False)
    return TwistMatrix(t, n, m, M)


# ----------------------------------------------------------------------
def _homogeneous_affine(F: FieldSpec, A2: AffineBijection | None, n: int) -> np.ndarray:
    """M with (1, A2(w)) = M (1, w)."""
    M = np.zeros((n + 1, n + 1), dtype=np.int64)
    M[0, 0] = 1
    if A2 is None:
        M[1:, 1:] = np.eye(n, dtype=np.int64)
    else:
        M[1:, 0] = A2.translation
        M[1:, 1:] = A2.linear
    return M


def _congruence(F: FieldSpec, K: np.ndarray, M: np.ndarray) -> np.ndarray:
    return F.matmul(F.matmul(M.T, K), M)


def twisted_system(cm: CentralMap, A2: AffineBijection | None = None) -> PolySystem:
    """G o A2 as a degree-4 system, via quadratic-form tensors (needs q >= 5).

    Each argument of U after the substitution x -> x - q(y) is a quadratic
    form in h = (1, z).  Every coordinate of U then becomes a 4-tensor
    sum_b R_b (x) P_b that is folded onto the monomial basis.
    """
    F, n, t = cm.field, cm.n, cm.t
    if F.q <= 4:
        raise ParamRange("tensor construction needs q >= 5; use twist_by_substitution")
    h = n + 1
    M2 = _homogeneous_affine(F, A2, n)
    basis = monomial_basis(n, 4, F.q)
    # argument forms P_a: 1, x_i - q_i(y), y_k
    P = np.zeros((h, h, h), dtype=np.int64)
    P[0, 0, 0] = 1
    Tinv = cm.t_inverse()
    for i in range(t):
        P[1 + i] = quadratic_matrix(Tinv[i])
    for k in range(t, n):
        P[1 + k, 0, 1 + k] = 1
    P = np.stack([_congruence(F, P[a], M2) for a in range(h)])
    out = np.zeros((cm.m, len(basis)), dtype=np.int64)
    for i in range(t):
        out[i] = fold_tensor(F, basis, P[1 + i])
    Pflat = P.reshape(h, h * h)
    for j in range(cm.m - t):
        Ku = quadratic_matrix(cm.U[j])
        # R_b = sum_a Ku[a, b] P_a, laid out as (h*h, h)
        R = F.matmul(Pflat.T, Ku)
        T4 = F.matmul(R, Pflat)
        out[t + j] = fold_tensor(F, basis, T4.reshape(h, h, h, h))
    return PolySystem(F, basis, out)


def twist_by_substitution(cm: CentralMap) -> PolySystem:
    """G built with sparse polynomial substitution (any q; intended for small n)."""
    F, n, t = cm.field, cm.n, cm.t
    tinv = list(cm.t_inverse())
    subs = tinv + [Poly.var(F, n, k) for k in range(t, n)]
    rows = tinv + [substitute(u, subs) for u in cm.U]
    return PolySystem.from_polys(rows, F, n, 4)


def build_twisted(cm: CentralMap) -> PolySystem:
    """G(x, y) = (x - q(y), U(x - q(y), y)) over the degree-4 monomial basis."""
    if cm.field.q >= 5:
        return twisted_system(cm)
    return twist_by_substitution(cm)


# ----------------------------------------------------------------------
def _check_budget(F: FieldSpec, n: int, budget: int) -> None:
    if F.q**n > budget:
        raise BudgetExceeded(f"q^n = {F.q}^{n} exceeds graph budget {budget}")


def graph_array(sys: PolySystem, budget: int = GRAPH_BUDGET) -> np.ndarray:
    """All q^n rows (v, F(v)), inputs in base-q counting order."""
    _check_budget(sys.field, sys.n, budget)
    pts = all_vectors(sys.field, sys.n)
    return np.hstack([pts, sys.evaluate(pts)])


def graph_of(sys: PolySystem, spec: FieldSpec | None = None, budget: int = GRAPH_BUDGET) -> set[tuple[int, ...]]:
    """The graph {(v, F(v))} as a set of tuples."""
    if spec is not None and spec != sys.field:
        from .errors import SpecMismatch

        raise SpecMismatch(f"{spec} vs {sys.field}")
    return {tuple(r) for r in graph_array(sys, budget).tolist()}


@dataclass(frozen=True)
class TwistCheck:
    ok: bool
    diagnostic: str

    def __bool__(self) -> bool:
        return self.ok


def ccz_check_via_twist(Fsys: PolySystem, Gsys: PolySystem, t: int, budget: int = GRAPH_BUDGET) -> TwistCheck:
    """Does M_t map the graph of F exactly onto the graph of G?"""
    if Fsys.n != Gsys.n or Fsys.m != Gsys.m:
        return TwistCheck(False, "F and G have different shapes")
    n, m = Fsys.n, Fsys.m
    mt = mt_matrix(t, n, m)
    image = mt.apply(graph_array(Fsys, budget))
    inputs = {tuple(r) for r in image[:, :n].tolist()}
    if len(inputs) != image.shape[0]:
        dup = image.shape[0] - len(inputs)
        return TwistCheck(False, f"twisted graph is not a graph: {dup} repeated input coordinates")
    target = graph_of(Gsys, budget=budget)
    got = {tuple(r) for r in image.tolist()}
    if got != target:
        return TwistCheck(False, f"twisted graph differs from graph of G in {len(got ^ target)} points")
    return TwistCheck(True, f"M_{t} maps the graph of F onto the graph of G ({len(got)} points)")
