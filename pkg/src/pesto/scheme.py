"""Key generation, signing, verification, encryption and decryption.

The public key is ``G_pub = A1 o G o A2`` with G the twist of the central
map.  Signing and decryption invert each layer: ``A1``, then the twist
(``x = w_T + q(y)``), then ``A2``.  Vinegar values are drawn (signing) or
enumerated (decryption) and the remaining oil variables solve a linear
system.
"""

from __future__ import annotations

import hashlib
import logging
import warnings
from dataclasses import dataclass
from math import comb, ceil, log2

import numpy as np

from .algebra import (
    AffineBijection,
    FieldSpec,
    all_vectors,
    block_affine_bijection,
    has_zero_block,
    parse_field,
    random_affine_bijection,
    solve_linear,
)
from .errors import BudgetExceeded, DimensionMismatch, ParamRange, SigningFailed
from .mpoly import MulCounter, PolySystem
from .twist import CentralMap, twisted_system

log = logging.getLogger(__name__)

SIGN_RETRIES = 256
DECRYPT_BUDGET = 1 << 20


class ParameterWarning(UserWarning):
    """Parameters are valid but outside the recommended region."""


@dataclass(frozen=True)
class PestoParams:
    field: FieldSpec
    n: int
    m: int
    t: int
    s: int
    allow_zero_vinegar: bool = False  # test hook for the s = 0 family

    def __post_init__(self) -> None:
        n, m, t, s = self.n, self.m, self.t, self.s
        if self.field.q < 5:
            raise ParamRange("field must have at least 5 elements")
        if n < 1 or m < 1:
            raise ParamRange("n and m must be positive")
        if not 1 <= t <= min(n, m):
            raise ParamRange(f"t={t} must lie in [1, min(n, m)={min(n, m)}]")
        lo = 0 if self.allow_zero_vinegar else 1
        if not lo <= s <= n - t:
            raise ParamRange(f"s={s} must lie in [{lo}, n - t = {n - t}]")
        if abs(t - n / 3) > 0.2 * n / 3:
            warnings.warn(f"t={t} is far from n/3={n / 3:.1f}", ParameterWarning, stacklevel=3)
        if s != n - m:
            warnings.warn(f"s={s} differs from n - m = {n - m}; the oil system is not square",
                          ParameterWarning, stacklevel=3)

    @property
    def q(self) -> int:
        return self.field.q

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.q, self.n, self.m, self.t, self.s)

    @classmethod
    def parse(cls, text: str, **kw) -> "PestoParams":
        """``"2^6,10,8,3,2"`` -> PestoParams."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 5:
            raise ParamRange("expected q,n,m,t,s")
        F = parse_field(parts[0])
        n, m, t, s = (int(x) for x in parts[1:])
        return cls(F, n, m, t, s, **kw)

    def __str__(self) -> str:
        return f"(q={self.field.q}, n={self.n}, m={self.m}, t={self.t}, s={self.s})"


@dataclass(frozen=True, eq=False)
class PestoSecretKey:
    params: PestoParams
    A1: AffineBijection
    A2: AffineBijection
    central: CentralMap

    @property
    def reduced_a1(self) -> bool:
        return has_zero_block(self.A1.linear, self.params.t)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PestoSecretKey)
            and other.params == self.params
            and other.A1 == self.A1
            and other.A2 == self.A2
            and other.central.qmap == self.central.qmap
            and other.central.U == self.central.U
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class PestoPublicKey:
    params: PestoParams
    system: PolySystem
    reduced_a1: bool = False

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PestoPublicKey)
            and other.params == self.params
            and other.reduced_a1 == self.reduced_a1
            and other.system == self.system
        )

    __hash__ = None  # type: ignore[assignment]


# ----------------------------------------------------------------------
def public_system(central: CentralMap, A1: AffineBijection, A2: AffineBijection) -> PolySystem:
    return twisted_system(central, A2).compose_affine(A1, side="output")


def keygen_from_parts(params: PestoParams, central: CentralMap, A1: AffineBijection,
                      A2: AffineBijection) -> tuple[PestoSecretKey, PestoPublicKey]:
    """Assemble a key pair from explicit secret components."""
    if (central.n, central.m, central.t, central.s) != (params.n, params.m, params.t, params.s):
        raise DimensionMismatch("central map shape does not match parameters")
    if A1.dim != params.m or A2.dim != params.n:
        raise DimensionMismatch("affine bijections have the wrong dimension")
    sk = PestoSecretKey(params, A1, A2, central)
    pk = PestoPublicKey(params, public_system(central, A1, A2), sk.reduced_a1)
    return sk, pk


def keygen(params: PestoParams, rng: np.random.Generator, reduced_a1: bool = True,
           measure: bool = False) -> tuple[PestoSecretKey, PestoPublicKey]:
    """Random key pair.  With ``measure`` the quadratic-component dimension is logged."""
    F = params.field
    central = CentralMap.random(F, params.n, params.m, params.t, params.s, rng)
    if reduced_a1:
        A1 = block_affine_bijection(params.m, params.t, F, rng)
    else:
        A1 = random_affine_bijection(params.m, F, rng)
    A2 = random_affine_bijection(params.n, F, rng)
    sk, pk = keygen_from_parts(params, central, A1, A2)
    if measure:
        from .attacks import isolate_quadratic

        r = isolate_quadratic(pk).dimension
        log.info("keygen %s: quadratic component space has dimension %d (t=%d)", params, r, params.t)
        if r > params.t:
            log.warning("keygen %s: %d extra quadratic components", params, r - params.t)
    return sk, pk


# ----------------------------------------------------------------------
def _vector(v, length: int, what: str) -> np.ndarray:
    a = np.asarray(v, dtype=np.int64)
    if a.shape != (length,):
        raise DimensionMismatch(f"{what} must have length {length}, got {a.shape}")
    return a


def sign_detailed(sk: PestoSecretKey, w, rng: np.random.Generator,
                  retries: int = SIGN_RETRIES) -> tuple[np.ndarray, int]:
    """Return (signature, number of vinegar draws used)."""
    p, F, cm = sk.params, sk.params.field, sk.central
    w = _vector(w, p.m, "message")
    wp = sk.A1.apply_inverse(w)
    w_T, w_U = wp[: p.t], wp[p.t :]
    for attempt in range(1, retries + 1):
        y_vin = F.random(rng, p.s)
        vin = np.concatenate([w_T, y_vin])
        if p.m > p.t:
            M, c = cm.oil_system(vin)
            sol = solve_linear(M, F.sub(w_U, c), F)
            if sol is None:
                continue
            oil = sol.sample(F, rng)
        else:
            oil = F.random(rng, cm.n_oil)
        y = np.concatenate([y_vin, oil])
        x = F.add(w_T, cm.qmap.evaluate(y)) if p.t else w_T
        return sk.A2.apply_inverse(np.concatenate([x, y])), attempt
    raise SigningFailed(f"no consistent oil system after {retries} vinegar draws")


def sign(sk: PestoSecretKey, w, rng: np.random.Generator) -> np.ndarray:
    return sign_detailed(sk, w, rng)[0]


def verify(pk: PestoPublicKey, w, sig, counter: MulCounter | None = None) -> bool:
    """Check ``G_pub(sig) == w``; a counter selects the instrumented evaluation path."""
    p = pk.params
    w = _vector(w, p.m, "message")
    sig = _vector(sig, p.n, "signature")
    if counter is None:
        return bool(np.array_equal(pk.system.evaluate(sig), w))
    return pk.system.evaluate_direct(sig.tolist(), counter) == w.tolist()


def encrypt(pk: PestoPublicKey, z) -> np.ndarray:
    return pk.system.evaluate(_vector(z, pk.params.n, "plaintext"))


def decrypt(sk: PestoSecretKey, c, budget: int = DECRYPT_BUDGET, pk: PestoPublicKey | None = None) -> np.ndarray:
    """All preimages of ``c`` as rows, sorted lexicographically.

    Every vinegar assignment is tried; underdetermined oil systems contribute
    their full solution sets.  With ``pk`` given, each candidate is re-encrypted
    as a final filter.
    """
    p, F, cm = sk.params, sk.params.field, sk.central
    c = _vector(c, p.m, "ciphertext")
    if F.q**p.s > budget:
        raise BudgetExceeded(f"q^s = {F.q}^{p.s} exceeds decryption budget {budget}")
    cp = sk.A1.apply_inverse(c)
    w_T, w_U = cp[: p.t], cp[p.t :]
    ys = []
    total = 0
    for y_vin in all_vectors(F, p.s):
        vin = np.concatenate([w_T, y_vin])
        if p.m > p.t:
            M, k = cm.oil_system(vin)
            sol = solve_linear(M, F.sub(w_U, k), F)
            if sol is None:
                continue
            total += sol.count(F.q)
            if total > budget:
                raise BudgetExceeded(f"more than {budget} candidate preimages")
            oils = sol.enumerate(F)
        else:
            total += F.q**cm.n_oil
            if total > budget:
                raise BudgetExceeded(f"more than {budget} candidate preimages")
            oils = all_vectors(F, cm.n_oil)
        ys.append(np.hstack([np.tile(y_vin, (oils.shape[0], 1)), oils]))
    if not ys:
        return np.zeros((0, p.n), dtype=np.int64)
    Y = np.vstack(ys)
    X = F.add(w_T[None, :], cm.qmap.evaluate(Y)) if p.t else np.zeros((Y.shape[0], 0), dtype=np.int64)
    Z = sk.A2.apply_inverse(np.hstack([X, Y]))
    if pk is not None:
        Z = Z[np.all(pk.system.evaluate(Z) == c[None, :], axis=1)]
    Z = np.unique(Z, axis=0)
    return Z


# ----------------------------------------------------------------------
def key_counts(params: PestoParams, reduced: bool = False) -> tuple[int, int]:
    """(public, secret) key sizes in field coefficients."""
    n, m, t, s = params.n, params.m, params.t, params.s
    return public_key_count(n, m, t, reduced), secret_key_count(n, m, t, s, reduced)


def public_key_count(n: int, m: int, t: int, reduced: bool = False) -> int:
    if reduced:
        return (m - t) * comb(n + 4, 4) + t * comb(n + 2, 2)
    return m * comb(n + 4, 4)


def secret_key_count(n: int, m: int, t: int, s: int, reduced: bool = False) -> int:
    sk = (
        m * m + m + n * n + n
        + t * comb(n - t + 2, 2)
        + (m - t) * comb(t + s + 2, 2)
        + (m - t) * (n - t - s) * (t + s + 1)
    )
    return sk - t * (m - t) if reduced else sk


def _matrix_solve_cost(rows: int, cols: int) -> int:
    return rows * cols * min(rows, cols)


def mult_cost(params: PestoParams) -> tuple[int, int]:
    """(verify, sign) field multiplication counts."""
    n, m, t, s = params.n, params.m, params.t, params.s
    verify_cost = m * (2 * comb(n + 4, 4) - n - 2)
    sign_cost = (
        m * m
        + t * (n - t) * (n - t + 2)
        + n * n
        + (m - t) * (t * (t + 2) + s * (s + 2))
        + _matrix_solve_cost(m - t, n - t - s)
    )
    return verify_cost, sign_cost


def element_bits(F: FieldSpec) -> int:
    return max(1, ceil(log2(F.q)))


def hash_to_field(data: bytes, F: FieldSpec, length: int) -> np.ndarray:
    """Uniform vector in GF(q)^length from a SHAKE256 stream with rejection."""
    bits = element_bits(F)
    out: list[int] = []
    need = length
    stream_len = max(64, (need * bits) // 8 * 2 + 8)
    while True:
        stream = hashlib.shake_256(data).digest(stream_len)
        acc = int.from_bytes(stream, "little")
        avail = len(stream) * 8 // bits
        out = []
        mask = (1 << bits) - 1
        for i in range(avail):
            v = (acc >> (i * bits)) & mask
            if v < F.q:
                out.append(v)
                if len(out) == need:
                    return np.array(out, dtype=np.int64)
        stream_len *= 2
