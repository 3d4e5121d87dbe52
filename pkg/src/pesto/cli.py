"""Command-line front end.

Exit codes: 0 success, 1 verification failure or no solution, 2 usage or
bad input file, 3 budget exhausted or internal error.
"""

from __future__ import annotations

import argparse
import logging
import secrets
import sys
import warnings
from pathlib import Path

import numpy as np

from . import codec
from .algebra import make_rng
from .errors import (BudgetExceeded, CodecError, DimensionMismatch, NoSolutionFound,
                     ParamRange, PestoError, SigningFailed)
from .scheme import (PestoParams, decrypt, encrypt, hash_to_field, key_counts, keygen,
                     mult_cost, sign, verify)

log = logging.getLogger("pesto")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class _Usage(Exception):
    pass


def _params(text: str) -> PestoParams:
    try:
        return PestoParams.parse(text)
    except (ParamRange, ValueError) as exc:
        raise _Usage(f"bad --params {text!r}: {exc}") from exc


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from exc


def _write(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise _Usage(f"cannot write {path}: {exc.strerror}") from exc


def _message(args, params: PestoParams) -> np.ndarray:
    """Digest of the input file, or the file itself when ``--vector`` is given."""
    data = _read(args.infile)
    if args.vector:
        return codec.decode_vector(data, params.q, expect=params.m)
    return hash_to_field(data, params.field, params.m)


# ----------------------------------------------------------------------
def cmd_keygen(args) -> int:
    params = _params(args.params)
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    print(f"seed={seed}")
    sk, pk = keygen(params, make_rng(seed), reduced_a1=args.reduced_a1)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pk_bytes = codec.encode_key(pk, args.packed)
    sk_bytes = codec.encode_key(sk, args.packed)
    _write(str(out / "pk.bin"), pk_bytes)
    _write(str(out / "sk.bin"), sk_bytes)
    print(f"pk={out / 'pk.bin'} bytes={len(pk_bytes)}")
    print(f"sk={out / 'sk.bin'} bytes={len(sk_bytes)}")
    return EXIT_OK


def cmd_sign(args) -> int:
    sk = codec.decode_secret_key(_read(args.sk))
    w = _message(args, sk.params)
    rng = make_rng(args.seed)
    sig = sign(sk, w, rng)
    _write(args.out, codec.encode_vector(sig, sk.params.q))
    return EXIT_OK


def cmd_verify(args) -> int:
    pk = codec.decode_public_key(_read(args.pk))
    w = _message(args, pk.params)
    sig = codec.decode_vector(_read(args.sig), pk.params.q, expect=pk.params.n)
    if verify(pk, w, sig):
        print("valid")
        return EXIT_OK
    print("invalid")
    return EXIT_FAIL


def cmd_encrypt(args) -> int:
    pk = codec.decode_public_key(_read(args.pk))
    z = codec.decode_vector(_read(args.infile), pk.params.q, expect=pk.params.n)
    _write(args.out, codec.encode_vector(encrypt(pk, z), pk.params.q))
    return EXIT_OK


def cmd_decrypt(args) -> int:
    sk = codec.decode_secret_key(_read(args.sk))
    c = codec.decode_vector(_read(args.infile), sk.params.q, expect=sk.params.m)
    rows = decrypt(sk, c, budget=args.budget)
    _write(args.out, codec.encode_vector_list(rows, sk.params.q))
    print(f"preimages={rows.shape[0]}")
    return EXIT_OK if rows.shape[0] else EXIT_FAIL


def cmd_keysize(args) -> int:
    params = _params(args.params)
    pk, sk = key_counts(params, args.reduced)
    print(f"sk={sk} pk={pk}")
    if args.packed:
        pkb, skb = codec.packed_sizes(params, args.reduced)
        print(f"packed_bytes sk={skb} pk={pkb} (bits per element={codec.element_bits(params.field)})")
    return EXIT_OK


def cmd_cost(args) -> int:
    v, s = mult_cost(_params(args.params))
    print(f"verify={v} sign={s}")
    return EXIT_OK


def cmd_attack(args) -> int:
    from . import attacks

    pk = codec.decode_public_key(_read(args.pk))
    F, params = pk.params.field, pk.params
    rng = make_rng(args.seed)
    if args.kind == "iso-quad":
        space = attacks.isolate_quadratic(pk)
        rep = attacks.AttackReport("iso-quad", space.dimension >= params.t,
                                   {"dimension": space.dimension, "t": params.t,
                                    "high_degree_terms": space.n_high_terms},
                                   space.basis.tolist())
    elif args.kind == "lin-struct":
        space = attacks.isolate_quadratic(pk)
        if space.dimension == 0:
            rep = attacks.AttackReport("lin-struct", False, {"reason": "no quadratic components"})
        else:
            V = attacks.common_linear_structures(space.components(pk.system))
            rep = attacks.AttackReport("lin-struct", V.dimension > 0,
                                       {"components": space.dimension, "dimension": V.dimension},
                                       V.basis.tolist())
    else:
        if args.target:
            target = codec.decode_vector(_read(args.target), F.q, expect=params.m)
        else:
            target = pk.system.evaluate(F.random(rng, params.n))
        if args.kind == "linearize":
            rep = attacks.linearization_attack(pk, target, rng)
        else:
            if not args.sk:
                raise _Usage("known-a2 needs --sk to supply A2")
            sk = codec.decode_secret_key(_read(args.sk))
            rep = attacks.known_a2_attack(pk, sk.A2, target)
    print(rep.to_json() if args.json else rep.to_text())
    return EXIT_OK if rep.success else EXIT_FAIL


def cmd_solvedeg(args) -> int:
    from .solvedeg import estimates_to_csv, xl_witness_degree

    params = _params(args.params)
    rows = []
    for i in range(args.trials):
        seed = args.seed + i
        rng = make_rng(seed)
        sk, pk = keygen(params, rng, reduced_a1=False)
        w = params.field.random(rng, params.m)
        est = xl_witness_degree(pk.system, w, rng, d_max=args.d_max, params=params.as_tuple())
        log.info("seed %d: witness degree %s (%s)", seed, est.witness_degree, est.termination)
        rows.append((est, seed))
    text = estimates_to_csv(rows)
    if args.out:
        _write(args.out, text.encode())
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_toy(args) -> int:
    from .toy import run_fixture

    rep = run_fixture(trials=args.trials, seed=args.seed)
    for i, c in enumerate(rep["coordinates"], 1):
        print(f"G{i}: {c['terms']} terms {'match' if c['match'] else 'MISMATCH'}")
    print(f"substitution route agrees: {rep['generic_route_agrees']}")
    print(f"graph twist check: {rep['ccz_check']}")
    print(f"public degrees: {rep['public_degrees']} terms: {rep['public_terms']}")
    print(f"sign/verify ({rep['trials']} trials): {rep['sign_verify']}")
    print(f"decrypt vs exhaustive oracle: {rep['decrypt_oracle']}")
    ok = rep["g_match"] and rep["generic_route_agrees"] and rep["ccz_check"] \
        and rep["sign_verify"] and rep["decrypt_oracle"]
    print("toy: OK" if ok else "toy: FAILED")
    return EXIT_OK if ok else EXIT_FAIL


# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pesto", description="Twisted oil-vinegar multivariate scheme toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a key pair")
    p.add_argument("--params", required=True, help="q,n,m,t,s e.g. 2^6,10,8,3,2")
    p.add_argument("--seed", type=int)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--reduced-a1", dest="reduced_a1", action="store_true", default=True)
    g.add_argument("--full-a1", dest="reduced_a1", action="store_false")
    p.add_argument("--packed", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("sign", help="sign a file")
    p.add_argument("--sk", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--vector", action="store_true", help="input is a digest vector file, not a document")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_sign)

    p = sub.add_parser("verify", help="verify a signature")
    p.add_argument("--pk", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sig", required=True)
    p.add_argument("--vector", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("encrypt", help="evaluate the public map on a plaintext vector")
    p.add_argument("--pk", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="list all preimages of a ciphertext vector")
    p.add_argument("--sk", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--budget", type=int, default=1 << 20)
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("keysize", help="key sizes in field elements")
    p.add_argument("--params", required=True)
    p.add_argument("--reduced", action="store_true")
    p.add_argument("--packed", action="store_true", help="also print bit-packed byte sizes")
    p.set_defaults(func=cmd_keysize)

    p = sub.add_parser("cost", help="field multiplications for verify and sign")
    p.add_argument("--params", required=True)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("attack", help="run a structural attack on a public key")
    p.add_argument("kind", choices=["iso-quad", "lin-struct", "linearize", "known-a2"])
    p.add_argument("--pk", required=True)
    p.add_argument("--sk", help="secret key (known-a2 reads A2 from it)")
    p.add_argument("--target", help="target vector file (default: image of a random point)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("solvedeg", help="XL witness degree probe, CSV output")
    p.add_argument("--params", required=True)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d-max", type=int, default=9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solvedeg)

    p = sub.add_parser("toy", help="run the fixed GF(5) instance end to end")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_toy)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")
    try:
        return args.func(args)
    except (_Usage, CodecError, ParamRange, DimensionMismatch) as exc:
        print(f"pesto: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoSolutionFound, SigningFailed) as exc:
        print(f"pesto: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except BudgetExceeded as exc:
        print(f"pesto: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (PestoError, ArithmeticError, MemoryError) as exc:
        print(f"pesto: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
