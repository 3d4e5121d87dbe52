"""Twisted oil-vinegar multivariate signature and encryption toolkit.

Submodules: ``algebra`` (finite fields, linear algebra), ``mpoly`` (dense
multivariate systems), ``twist`` (central map and graph twist), ``scheme``
(keys, sign, verify, encrypt, decrypt), ``attacks``, ``solvedeg``, ``codec``
and ``cli``.
"""

from .algebra import GF, AffineBijection, FieldSpec, make_rng
from .mpoly import Poly, PolySystem
from .scheme import (PestoParams, PestoPublicKey, PestoSecretKey, decrypt, encrypt, key_counts,
                     keygen, sign, verify)

__version__ = "0.1.0"

__all__ = [
    "GF", "AffineBijection", "FieldSpec", "make_rng", "Poly", "PolySystem",
    "PestoParams", "PestoPublicKey", "PestoSecretKey", "keygen", "sign", "verify",
    "encrypt", "decrypt", "key_counts",
]
