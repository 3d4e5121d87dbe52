"""Fixed toy instance over GF(5) with n=5, m=4, t=2, s=1.

The expected twisted system is stored as text and parsed, so the regression
test compares coefficient maps rather than evaluations.
"""

from __future__ import annotations

import numpy as np

from .algebra import GF, AffineBijection, FieldSpec
from .mpoly import Poly, PolySystem, parse_poly
from .twist import CentralMap

N, M, T, S = 5, 4, 2, 1
VARS = ("x1", "x2", "y1", "y2", "y3")
Y_VARS = ("y1", "y2", "y3")

Q_TEXT = (
    "y1^2 + 2y1y2 + 4y2^2 + 3y2y3 + y2 + 3y3^2 + 4",
    "3y1^2 + 3y1y2 + 2y1y3 + 2y2y3 + 2y2 + y3^2 + 2y3",
)

U_TEXT = (
    "x1^2 + 2x1x2 + 3x1y1 + x1y2 + 4x1y3 + 2x1 + x2^2 + x2y1 + x2y2"
    " + 3x2y3 + 3x2 + 2y1^2 + 2y1y2 + 2y1y3 + y1 + 4y2 + y3",
    "x1x2 + x1 + 4x2^2 + 2x2y2 + 3x2y3 + 3x2 + 2y1y3 + 3y1 + 3y3 + 1",
)

G_TEXT = (
    "x1 + 4y1^2 + 3y1y2 + y2^2 + 2y2y3 + 4y2 + 2y3^2 + 1",
    "x2 + 2y1^2 + 2y1y2 + 3y1y3 + 3y2y3 + 3y2 + 4y3^2 + 3y3",
    "x1^2 + 2x1x2 + 2x1y1^2 + x1y1y3 + 3x1y1 + 2x1y2^2 + 2x1y3^2 + 4x1 + x2^2 + 2x2y1^2"
    " + x2y1y3 + x2y1 + 2x2y2^2 + 2x2y3^2 + 4x2y3 + y1^4 + y1^3y3 + 4y1^3 + 2y1^2y2^2"
    " + y1^2y2 + y1^2y3^2 + y1^2y3 + 3y1^2 + y1y2^2y3 + 3y1y2^2 + 2y1y2y3 + 4y1y2"
    " + y1y3^3 + 2y1y3^2 + 4y1 + y2^4 + 2y2^2y3^2 + 2y2y3^2 + 3y2y3 + y2 + y3^4"
    " + y3^3 + y3^2 + 3",
    "x1x2 + 2x1y1^2 + 2x1y1y2 + 3x1y1y3 + 3x1y2y3 + 3x1y2 + 4x1y3^2 + 3x1y3 + x1"
    " + 4x2^2 + 4x2y1y2 + 4x2y1y3 + x2y2^2 + x2y2y3 + 4x2y3^2 + 2x2y3 + 4x2 + 4y1^4"
    " + y1^3y2 + 4y1^2y2^2 + y1^2y2y3 + 2y1^2y2 + y1^2y3 + 2y1^2 + 2y1y2^3"
    " + 4y1y2^2y3 + 4y1y2^2 + 3y1y2y3^2 + 3y1y2y3 + y1y2 + 2y1y3^3 + y1y3^2"
    " + 4y1y3 + 3y1 + 3y2^3y3 + 3y2^3 + y2^2y3^2 + 4y2^2y3 + 3y2y3^2 + 3y2y3"
    " + y2 + 2y3^4 + 4y3^3 + 3y3^2 + 2",
)

A2_LINEAR = (
    (1, 4, 3, 2, 1),
    (2, 0, 1, 1, 4),
    (3, 2, 2, 0, 2),
    (1, 2, 2, 2, 3),
    (2, 3, 4, 4, 2),
)
A2_TRANSLATION = (2, 1, 3, 2, 2)

A1_LINEAR = (
    (2, 3, 2, 1),
    (4, 2, 3, 1),
    (1, 2, 1, 3),
    (1, 4, 3, 1),
)
A1_TRANSLATION = (1, 0, 0, 4)


def field() -> FieldSpec:
    return GF(5)


def central_map() -> CentralMap:
    F = field()
    qmap = PolySystem.from_polys([parse_poly(s, F, Y_VARS) for s in Q_TEXT], F, len(Y_VARS), 2)
    U = PolySystem.from_polys([parse_poly(s, F, VARS) for s in U_TEXT], F, N, 2)
    return CentralMap(F, N, M, T, S, qmap, U)


def expected_g() -> list[Poly]:
    F = field()
    return [parse_poly(s, F, VARS) for s in G_TEXT]


def a1() -> AffineBijection:
    return AffineBijection(field(), np.array(A1_LINEAR), np.array(A1_TRANSLATION))


def a2() -> AffineBijection:
    return AffineBijection(field(), np.array(A2_LINEAR), np.array(A2_TRANSLATION))


def keypair():
    """(params, sk, pk) for the fixed instance."""
    from .scheme import PestoParams, keygen_from_parts

    params = PestoParams(field(), N, M, T, S)
    sk, pk = keygen_from_parts(params, central_map(), a1(), a2())
    return params, sk, pk


def run_fixture(trials: int = 20, seed: int = 0) -> dict:
    """End-to-end check of the fixed instance; every boolean in the result should be true."""
    from .scheme import decrypt, encrypt, sign, verify
    from .twist import ccz_check_via_twist, twist_by_substitution, twisted_system

    F = field()
    rng = np.random.default_rng(seed)
    cm = central_map()
    G = twisted_system(cm)
    expected = expected_g()
    coords = []
    for i, e in enumerate(expected):
        got = G[i]
        coords.append({"terms": len(e.terms), "match": got == e})
    _, sk, pk = keypair()
    pub = pk.system
    space = np.array(list(np.ndindex(*(F.q,) * N)), dtype=np.int64)
    images = pub.evaluate(space)
    sig_ok = enc_ok = True
    for _ in range(trials):
        w = F.random(rng, M)
        sig = sign(sk, w, rng)
        sig_ok &= verify(pk, w, sig)
        z = F.random(rng, N)
        c = encrypt(pk, z)
        got = decrypt(sk, c)
        oracle = space[np.all(images == c[None, :], axis=1)]
        enc_ok &= bool(np.array_equal(got, oracle)) and any(np.array_equal(r, z) for r in got)
    return {
        "coordinates": coords,
        "g_match": all(c["match"] for c in coords),
        "generic_route_agrees": twist_by_substitution(cm) == G,
        "ccz_check": bool(ccz_check_via_twist(cm.system(), G, T)),
        "public_degrees": pub.degrees(),
        "public_terms": [int(np.count_nonzero(r)) for r in pub.coeffs],
        "sign_verify": bool(sig_ok),
        "decrypt_oracle": bool(enc_ok),
        "trials": trials,
    }
