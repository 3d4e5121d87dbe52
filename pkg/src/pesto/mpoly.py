"""Multivariate polynomials over GF(q) in reduced form (every exponent < q).

Two representations are used:

* :class:`Poly` -- sparse map from exponent tuple to nonzero coefficient.
  Arithmetic applies the field equation ``x^q = x`` eagerly, so equal
  functions always have identical term maps.
* :class:`PolySystem` -- an ordered tuple of polynomials stored densely as a
  coefficient matrix over a :class:`MonomialBasis` (all reduced monomials up
  to a degree bound, in canonical order).  This is the working form for
  keys: evaluation and affine composition are vectorised.

Canonical monomial order: ascending total degree, then ascending
lexicographic exponent vector.  In degree one this lists ``z_n`` first and
``z_1`` last.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import AffineBijection, FieldSpec
from .errors import BudgetExceeded, DimensionMismatch

Exp = tuple[int, ...]

COMPOSE_BUDGET = 4096  # max basis size for the generic dense input-side composition


def reduce_exponent(e: int, q: int) -> int:
    """Fold ``x^e`` to the exponent in ``[1, q)`` given by ``x^q = x``."""
    if e < q:
        return e
    return (e - 1) % (q - 1) + 1


def _compositions(n: int, d: int, cap: int) -> list[Exp]:
    """Exponent vectors of length n, sum d, entries <= cap, ascending lex."""
    if n == 0:
        return [()] if d == 0 else []
    out: list[Exp] = []
    for e0 in range(0, min(d, cap) + 1):
        for rest in _compositions(n - 1, d - e0, cap):
            out.append((e0,) + rest)
    return out


class MonomialBasis:
    """All reduced monomials in ``n`` variables of total degree <= ``degree``."""

    def __init__(self, n: int, degree: int, q: int) -> None:
        if n < 0 or degree < 0:
            raise DimensionMismatch("negative basis dimensions")
        self.n = n
        self.degree = degree
        self.q = q
        exps: list[Exp] = []
        for d in range(degree + 1):
            exps.extend(_compositions(n, d, q - 1))
        self.monomials: tuple[Exp, ...] = tuple(exps)
        self.index: dict[Exp, int] = {e: i for i, e in enumerate(exps)}
        self.exps = np.array(exps, dtype=np.int64).reshape(len(exps), n)
        self.degrees = self.exps.sum(axis=1)
        self.exps.setflags(write=False)

    def __len__(self) -> int:
        return len(self.monomials)

    def __repr__(self) -> str:
        return f"MonomialBasis(n={self.n}, degree={self.degree}, q={self.q}, size={len(self)})"

    def count_upto(self, d: int) -> int:
        """Number of basis monomials of degree <= d (a prefix of the order)."""
        return int(np.count_nonzero(self.degrees <= d))

    @cached_property
    def by_degree(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.degrees == d) for d in range(self.degree + 1)]

    @cached_property
    def parent(self) -> tuple[np.ndarray, np.ndarray]:
        """For each monomial of degree >= 1: (index of m / z_v, v) with v its first variable."""
        N = len(self)
        par = np.zeros(N, dtype=np.int64)
        var = np.zeros(N, dtype=np.int64)
        for i, e in enumerate(self.monomials):
            if i == 0:
                continue
            v = next(j for j, x in enumerate(e) if x)
            par[i] = self.index[e[:v] + (e[v] - 1,) + e[v + 1 :]]
            var[i] = v
        return par, var

    @cached_property
    def shift(self) -> np.ndarray:
        """``shift[i, v]`` = index of ``m_i * z_v`` (reduced), or -1 past the degree bound."""
        N, n, q = len(self), self.n, self.q
        out = np.full((N, n), -1, dtype=np.int64)
        for i, e in enumerate(self.monomials):
            for v in range(n):
                f = list(e)
                f[v] = reduce_exponent(f[v] + 1, q)
                j = self.index.get(tuple(f))
                if j is not None:
                    out[i, v] = j
        return out

    def fold_index(self, d: int) -> np.ndarray:
        """Map every homogenised index tuple in ``[0, n]^d`` to its monomial.

        Index 0 stands for the constant 1 and index ``v+1`` for ``z_v``.
        Only valid when no reduction is needed (``d < q``).
        """
        return _fold_index(self, d)


@lru_cache(maxsize=64)
def monomial_basis(n: int, degree: int, q: int) -> MonomialBasis:
    return MonomialBasis(n, degree, q)


@lru_cache(maxsize=8)
def _fold_lookup(n: int, degree: int, q: int, d: int) -> np.ndarray:
    basis = monomial_basis(n, degree, q)
    if d >= q or d > degree:
        raise DimensionMismatch("fold index requires d < q and d <= basis degree")
    h = n + 1
    mask = basis.degrees <= d
    codes = np.zeros(int(mask.sum()), dtype=np.int64)
    # each monomial -> its sorted d-tuple padded with zeros in front
    for pos, i in enumerate(np.flatnonzero(mask)):
        e = basis.monomials[i]
        tup = [0] * (d - int(basis.degrees[i]))
        for v, x in enumerate(e):
            tup.extend([v + 1] * x)
        c = 0
        for x in tup:
            c = c * h + x
        codes[pos] = c
    lookup = np.full(h**d, -1, dtype=np.int64)
    lookup[codes] = np.flatnonzero(mask)
    grid = np.indices((h,) * d).reshape(d, -1).T
    grid.sort(axis=1)
    code = np.zeros(grid.shape[0], dtype=np.int64)
    for j in range(d):
        code = code * h + grid[:, j]
    out = lookup[code]
    out.setflags(write=False)
    return out


def _fold_index(basis: MonomialBasis, d: int) -> np.ndarray:
    return _fold_lookup(basis.n, basis.degree, basis.q, d)


def fold_tensor(F: FieldSpec, basis: MonomialBasis, T: np.ndarray) -> np.ndarray:
    """Coefficient vector (over ``basis``) of the form sum T[i1..id] h_i1...h_id, h = (1, z)."""
    d = T.ndim
    idx = basis.fold_index(d)
    flat = np.asarray(T, dtype=np.int64).ravel()
    N = len(basis)
    if not F.binary:
        return np.bincount(idx, weights=flat, minlength=N).astype(np.int64) % F.p
    out = np.zeros(N, dtype=np.int64)
    for b in range(F.k):
        plane = np.bincount(idx, weights=(flat >> b) & 1, minlength=N).astype(np.int64) & 1
        out |= plane << b
    return out


def scatter_add(F: FieldSpec, out: np.ndarray, idx: np.ndarray, vals: np.ndarray) -> None:
    """In-place ``out[idx] += vals`` with repeated indices accumulated in the field."""
    if F.binary:
        np.bitwise_xor.at(out, idx, vals)
    else:
        np.add.at(out, idx, vals)
        out %= F.p


class MulCounter:
    """Counts field multiplications on instrumented evaluation paths."""

    def __init__(self) -> None:
        self.count = 0

    def reset(self) -> None:
        self.count = 0


# ----------------------------------------------------------------------
class Poly:
    """Sparse reduced polynomial in ``n`` variables over ``field``."""

    __slots__ = ("field", "n", "terms")

    def __init__(self, field: FieldSpec, n: int, terms: Mapping[Exp, int] | None = None) -> None:
        self.field = field
        self.n = n
        clean: dict[Exp, int] = {}
        if terms:
            q = field.q
            for e, c in terms.items():
                if len(e) != n:
                    raise DimensionMismatch(f"exponent {e} in a {n}-variable polynomial")
                c = int(c) % field.p if field.k == 1 else int(c)
                if c:
                    if any(x >= q for x in e):
                        e = tuple(reduce_exponent(x, q) for x in e)
                        c = field.add(clean.pop(e, 0), c)
                        if not c:
                            continue
                    clean[tuple(e)] = c
        self.terms = clean

    # construction helpers
    @classmethod
    def zero(cls, field: FieldSpec, n: int) -> "Poly":
        return cls(field, n)

    @classmethod
    def const(cls, field: FieldSpec, n: int, c: int) -> "Poly":
        return cls(field, n, {(0,) * n: c})

    @classmethod
    def var(cls, field: FieldSpec, n: int, i: int, coeff: int = 1) -> "Poly":
        e = [0] * n
        e[i] = 1
        return cls(field, n, {tuple(e): coeff})

    @classmethod
    def affine(cls, field: FieldSpec, coeffs: Sequence[int], const: int = 0) -> "Poly":
        n = len(coeffs)
        terms = {(0,) * n: const}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = int(c)
        return cls(field, n, terms)

    # basic queries
    def degree(self) -> int:
        """Total degree; 0 for constants and for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def coeff(self, e: Exp) -> int:
        return self.terms.get(tuple(e), 0)

    def constant(self) -> int:
        return self.terms.get((0,) * self.n, 0)

    def sorted_terms(self) -> list[tuple[Exp, int]]:
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly(self.field, self.n, {e: c for e, c in self.terms.items() if sum(e) == d})

    def variables(self) -> set[int]:
        return {v for e in self.terms for v, x in enumerate(e) if x}

    # arithmetic
    def _check(self, other: "Poly") -> None:
        if other.field != self.field:
            from .errors import SpecMismatch

            raise SpecMismatch(f"{self.field} vs {other.field}")
        if other.n != self.n:
            raise DimensionMismatch(f"{self.n} vs {other.n} variables")

    def __add__(self, other):
        if isinstance(other, int):
            other = Poly.const(self.field, self.n, other)
        self._check(other)
        F = self.field
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = F.add(out.get(e, 0), c)
        return Poly(F, self.n, out)

    __radd__ = __add__

    def __neg__(self):
        F = self.field
        return Poly(F, self.n, {e: F.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = Poly.const(self.field, self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: int) -> "Poly":
        F = self.field
        c = int(c)
        if not c:
            return Poly(F, self.n)
        return Poly(F, self.n, {e: F.mul(c, v) for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        self._check(other)
        F, q = self.field, self.field.q
        out: dict[Exp, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(reduce_exponent(a + b, q) for a, b in zip(e1, e2))
                out[e] = F.add(out.get(e, 0), F.mul(c1, c2))
        return Poly(F, self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        result = Poly.const(self.field, self.n, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poly)
            and other.field == self.field
            and other.n == self.n
            and other.terms == self.terms
        )

    def __hash__(self) -> int:
        return hash((self.field, self.n, frozenset(self.terms.items())))

    # evaluation and substitution
    def eval(self, point: Sequence[int], counter: MulCounter | None = None) -> int:
        """Value at ``point``; each term costs (degree - 1) + 1 multiplications."""
        if len(point) != self.n:
            raise DimensionMismatch(f"point of length {len(point)} for {self.n} variables")
        F = self.field
        pt = [int(v) for v in point]
        acc = 0
        mults = 0
        for e, c in self.terms.items():
            val = None
            for v, x in enumerate(e):
                for _ in range(x):
                    if val is None:
                        val = pt[v]
                    else:
                        val = F.mul(val, pt[v])
                        mults += 1
            if val is None:
                acc = F.add(acc, c)
            else:
                acc = F.add(acc, F.mul(c, val))
                mults += 1
        if counter is not None:
            counter.count += mults
        return acc

    __call__ = eval

    def substitute(self, subs: Sequence["Poly"]) -> "Poly":
        """Replace variable ``i`` by ``subs[i]``; result lives in the ambient of ``subs``."""
        return substitute(self, subs)

    def to_string(self, names: Sequence[str] | None = None) -> str:
        return format_poly(self, names)

    def __repr__(self) -> str:
        return f"Poly({self.to_string()!s} over {self.field})"


def substitute(p: Poly, subs: Sequence[Poly]) -> Poly:
    if len(subs) != p.n:
        raise DimensionMismatch(f"{len(subs)} substitutions for {p.n} variables")
    if not subs:
        return p
    F = p.field
    n2 = subs[0].n
    for s in subs:
        if s.n != n2:
            raise DimensionMismatch("substitutions with differing ambient dimension")
    powers: dict[tuple[int, int], Poly] = {}

    def power(v: int, k: int) -> Poly:
        key = (v, k)
        if key not in powers:
            powers[key] = subs[v] if k == 1 else power(v, k - 1) * subs[v]
        return powers[key]

    out: dict[Exp, int] = {}
    for e, c in p.terms.items():
        term = Poly.const(F, n2, c)
        for v, x in enumerate(e):
            if x:
                term = term * power(v, x)
        for e2, c2 in term.terms.items():
            out[e2] = F.add(out.get(e2, 0), c2)
    return Poly(F, n2, out)


def degree(p: Poly) -> int:
    return p.degree()


def poly_mul(p1: Poly, p2: Poly) -> Poly:
    return p1 * p2


def eval_poly(p: Poly, point: Sequence[int]) -> int:
    return p.eval(point)


# ----------------------------------------------------------------------
_FACTOR = re.compile(r"([A-Za-z_]+\d*)(?:\^(\d+))?")


def parse_poly(text: str, field: FieldSpec, names: Sequence[str]) -> Poly:
    """Parse ``"x1^2 + 2x1x2 + 4"`` style text (variables named by ``names``)."""
    n = len(names)
    pos = {name: i for i, name in enumerate(names)}
    text = text.replace("\n", " ").replace("\\", " ").strip()
    out: dict[Exp, int] = {}
    for raw in re.split(r"(?=[+-])", text):
        raw = raw.strip()
        if not raw:
            continue
        sign = -1 if raw.startswith("-") else 1
        raw = raw.lstrip("+-").strip()
        m = re.match(r"(\d*)\s*\*?\s*(.*)$", raw)
        coef = int(m.group(1)) if m.group(1) else 1
        rest = m.group(2).replace("*", "").replace(" ", "")
        e = [0] * n
        consumed = 0
        for fm in _FACTOR.finditer(rest):
            if fm.start() != consumed:
                raise ValueError(f"cannot parse term {raw!r}")
            name = fm.group(1)
            if name not in pos:
                raise ValueError(f"unknown variable {name!r}")
            e[pos[name]] += int(fm.group(2) or 1)
            consumed = fm.end()
        if consumed != len(rest):
            raise ValueError(f"cannot parse term {raw!r}")
        c = coef * sign
        c = c % field.p if field.k == 1 else c
        key = tuple(e)
        out[key] = field.add(out.get(key, 0), c)
    return Poly(field, n, out)


def format_poly(p: Poly, names: Sequence[str] | None = None) -> str:
    names = names or [f"z{i + 1}" for i in range(p.n)]
    if p.is_zero():
        return "0"
    parts = []
    for e, c in sorted(p.terms.items(), key=lambda kv: (-sum(kv[0]), tuple(-x for x in kv[0]))):
        mono = "".join(names[v] + (f"^{x}" if x > 1 else "") for v, x in enumerate(e) if x)
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        else:
            parts.append(f"{c}{mono}")
    return " + ".join(parts)


# ----------------------------------------------------------------------
def quadratic_matrix(p: Poly) -> np.ndarray:
    """Upper-triangular (n+1)x(n+1) matrix K with p = h^T K h, h = (1, z)."""
    if p.degree() > 2:
        from .errors import DegreeTooHigh

        raise DegreeTooHigh("quadratic_matrix needs degree <= 2")
    n = p.n
    K = np.zeros((n + 1, n + 1), dtype=np.int64)
    for e, c in p.terms.items():
        vs = [v + 1 for v, x in enumerate(e) for _ in range(x)]
        if not vs:
            K[0, 0] = c
        elif len(vs) == 1:
            K[0, vs[0]] = c
        else:
            K[vs[0], vs[1]] = c
    return K


@dataclass(frozen=True, eq=False)
class PolySystem:
    """Ordered system of polynomials over a shared dense monomial basis."""

    field: FieldSpec
    basis: MonomialBasis
    coeffs: np.ndarray  # shape (m, len(basis))

    def __post_init__(self) -> None:
        C = np.asarray(self.coeffs, dtype=np.int64)
        if C.ndim != 2 or C.shape[1] != len(self.basis):
            raise DimensionMismatch(f"coefficient matrix {C.shape} vs basis of size {len(self.basis)}")
        C.setflags(write=False)
        object.__setattr__(self, "coeffs", C)

    # construction
    @classmethod
    def from_polys(cls, polys: Sequence[Poly], field: FieldSpec | None = None, n: int | None = None,
                   degree: int | None = None) -> "PolySystem":
        if not polys and (field is None or n is None):
            raise DimensionMismatch("empty system needs explicit field and n")
        field = field or polys[0].field
        n = polys[0].n if n is None and polys else n
        for p in polys:
            if p.n != n:
                raise DimensionMismatch("polynomials with differing ambient dimension")
        D = max([p.degree() for p in polys] + [1]) if degree is None else degree
        basis = monomial_basis(n, D, field.q)
        C = np.zeros((len(polys), len(basis)), dtype=np.int64)
        for i, p in enumerate(polys):
            for e, c in p.terms.items():
                j = basis.index.get(e)
                if j is None:
                    raise DimensionMismatch(f"term {e} exceeds degree bound {D}")
                C[i, j] = c
        return cls(field, basis, C)

    @classmethod
    def zeros(cls, field: FieldSpec, n: int, m: int, degree: int) -> "PolySystem":
        basis = monomial_basis(n, degree, field.q)
        return cls(field, basis, np.zeros((m, len(basis)), dtype=np.int64))

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "PolySystem":
        return cls.from_polys([Poly.var(field, n, i) for i in range(n)], field, n, 1)

    # shape
    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, i: int) -> Poly:
        row = self.coeffs[i]
        nz = np.flatnonzero(row)
        mons = self.basis.monomials
        return Poly(self.field, self.n, {mons[j]: int(row[j]) for j in nz})

    def __iter__(self):
        return (self[i] for i in range(self.m))

    def polys(self) -> list[Poly]:
        return list(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolySystem) or other.field != self.field or other.n != self.n:
            return False
        if other.m != self.m:
            return False
        D = max(self.basis.degree, other.basis.degree)
        return np.array_equal(self.with_degree(D).coeffs, other.with_degree(D).coeffs)

    __hash__ = None  # type: ignore[assignment]

    def degrees(self) -> list[int]:
        """Algebraic degree of each coordinate (0 for constants and zero)."""
        out = []
        for row in self.coeffs:
            nz = np.flatnonzero(row)
            out.append(int(self.basis.degrees[nz].max()) if nz.size else 0)
        return out

    def degree(self) -> int:
        return max(self.degrees(), default=0)

    def with_degree(self, D: int) -> "PolySystem":
        """Re-embed into the basis of degree bound ``D`` (must cover every term)."""
        if D == self.basis.degree:
            return self
        nb = monomial_basis(self.n, D, self.field.q)
        if D > self.basis.degree:
            # old basis is a prefix of the new one
            C = np.zeros((self.m, len(nb)), dtype=np.int64)
            C[:, : len(self.basis)] = self.coeffs
            return PolySystem(self.field, nb, C)
        if np.any(self.coeffs[:, len(nb):]):
            raise DimensionMismatch(f"system has terms of degree > {D}")
        return PolySystem(self.field, nb, self.coeffs[:, : len(nb)])

    def subsystem(self, rows: Sequence[int] | slice) -> "PolySystem":
        return PolySystem(self.field, self.basis, self.coeffs[rows])

    def stack(self, other: "PolySystem") -> "PolySystem":
        D = max(self.basis.degree, other.basis.degree)
        a, b = self.with_degree(D), other.with_degree(D)
        return PolySystem(self.field, a.basis, np.vstack([a.coeffs, b.coeffs]))

    # evaluation
    def monomial_values(self, points) -> np.ndarray:
        """Values of every basis monomial at each row of ``points`` (k x N)."""
        F, b = self.field, self.basis
        Z = np.asarray(points, dtype=np.int64)
        if Z.ndim != 2 or Z.shape[1] != self.n:
            raise DimensionMismatch(f"points of shape {Z.shape} for {self.n} variables")
        mv = np.empty((Z.shape[0], len(b)), dtype=np.int64)
        mv[:, 0] = 1
        par, var = b.parent
        for d in range(1, b.degree + 1):
            idx = b.by_degree[d]
            if idx.size:
                mv[:, idx] = F.mul(mv[:, par[idx]], Z[:, var[idx]])
        return mv

    def evaluate(self, point) -> np.ndarray:
        """Evaluate at one point (returns length m) or at each row of a 2-D array."""
        Z = np.asarray(point, dtype=np.int64)
        single = Z.ndim == 1
        if single:
            Z = Z[None, :]
        out = self.field.matmul(self.monomial_values(Z), self.coeffs.T)
        return out[0] if single else out

    __call__ = evaluate

    def evaluate_direct(self, point: Sequence[int], counter: MulCounter | None = None) -> list[int]:
        """Coordinate-by-coordinate dense evaluation with exact multiplication accounting.

        Each coordinate is evaluated independently: every basis monomial of
        degree >= 2 costs one multiplication (from its parent monomial) and
        every non-constant basis monomial costs one more for its coefficient.
        Zero coefficients are not skipped.
        """
        F, b = self.field, self.basis
        if len(point) != self.n:
            raise DimensionMismatch(f"point of length {len(point)} for {self.n} variables")
        pt = [int(v) for v in point]
        par, var = b.parent
        par_l, var_l, deg_l = par.tolist(), var.tolist(), b.degrees.tolist()
        out = []
        mults = 0
        for row in self.coeffs.tolist():
            mv = [1] * len(b)
            acc = row[0]
            for j in range(1, len(b)):
                if deg_l[j] == 1:
                    mv[j] = pt[var_l[j]]
                else:
                    mv[j] = F.mul(mv[par_l[j]], pt[var_l[j]])
                    mults += 1
                acc = F.add(acc, F.mul(row[j], mv[j]))
                mults += 1
            out.append(acc)
        if counter is not None:
            counter.count += mults
        return out

    # algebra
    def component(self, lam: Sequence[int]) -> Poly:
        lam = np.asarray(lam, dtype=np.int64)
        if lam.shape != (self.m,):
            raise DimensionMismatch(f"lambda of length {lam.shape} for {self.m} coordinates")
        row = self.field.matmul(lam, self.coeffs)
        return PolySystem(self.field, self.basis, row[None, :])[0]

    def combine(self, M) -> "PolySystem":
        """Rows replaced by ``M @ rows`` (linear recombination of coordinates)."""
        M = np.asarray(M, dtype=np.int64)
        return PolySystem(self.field, self.basis, self.field.matmul(M, self.coeffs))

    def add_constants(self, c) -> "PolySystem":
        C = np.array(self.coeffs, copy=True)
        C[:, 0] = self.field.add(C[:, 0], np.asarray(c, dtype=np.int64))
        return PolySystem(self.field, self.basis, C)

    def compose_affine(self, B: AffineBijection, side: str = "input") -> "PolySystem":
        """``self o B`` for side="input", ``B o self`` for side="output"."""
        if side == "output":
            if B.dim != self.m:
                raise DimensionMismatch(f"output map of dimension {B.dim} for {self.m} coordinates")
            return self.combine(B.linear).add_constants(B.translation)
        if side != "input":
            raise ValueError("side must be 'input' or 'output'")
        if B.dim != self.n:
            raise DimensionMismatch(f"input map of dimension {B.dim} for {self.n} variables")
        img = affine_image_matrix(self.field, self.basis, B.linear, B.translation)
        return PolySystem(self.field, self.basis, self.field.matmul(self.coeffs, img))

    def substitute(self, subs: Sequence[Poly]) -> "PolySystem":
        return PolySystem.from_polys([substitute(p, subs) for p in self], self.field, subs[0].n if subs else self.n)

    def __repr__(self) -> str:
        return f"PolySystem(m={self.m}, n={self.n}, degree<={self.basis.degree}, {self.field})"


def affine_image_matrix(F: FieldSpec, basis: MonomialBasis, L: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Row i = coefficients of ``m_i(L z + c)``: the substitution as an N x N matrix."""
    N = len(basis)
    if N > COMPOSE_BUDGET:
        raise BudgetExceeded(f"dense composition over {N} monomials exceeds budget {COMPOSE_BUDGET}")
    L = np.asarray(L, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    par, var = basis.parent
    shift = basis.shift
    img = np.zeros((N, N), dtype=np.int64)
    img[0, 0] = 1
    for j in range(1, N):
        src_row = img[par[j]]
        v = var[j]
        src = np.flatnonzero(src_row)
        vals = src_row[src]
        row = img[j]
        if c[v]:
            scatter_add(F, row, src, F.mul(vals, int(c[v])))
        us = np.flatnonzero(L[v])
        if us.size:
            tgt = shift[src][:, us]
            contrib = F.mul(vals[:, None], L[v, us][None, :])
            scatter_add(F, row, tgt.ravel(), contrib.ravel())
    return img


def compose_affine(sys: PolySystem, B: AffineBijection, side: str = "input") -> PolySystem:
    return sys.compose_affine(B, side)


def component(lam: Sequence[int], sys: PolySystem) -> Poly:
    return sys.component(lam)


def affine_system(B: AffineBijection) -> PolySystem:
    """The affine bijection as a degree-1 polynomial system."""
    F = B.spec
    polys = [Poly.affine(F, B.linear[i].tolist(), int(B.translation[i])) for i in range(B.dim)]
    return PolySystem.from_polys(polys, F, B.dim, 1)


def polys_equal_as_functions(p1: Poly, p2: Poly, points: Iterable[Sequence[int]]) -> bool:
    return all(p1.eval(z) == p2.eval(z) for z in points)
