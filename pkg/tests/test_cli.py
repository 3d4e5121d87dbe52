import csv
import io
import subprocess
import sys

import pytest

from pesto import codec
from pesto.cli import main


@pytest.fixture
def keydir(tmp_path):
    assert main(["keygen", "--params", "2^6,10,8,3,2", "--seed", "7", "--out-dir", str(tmp_path)]) == 0
    return tmp_path


def test_keysize_exact(capsys):
    assert main(["keysize", "--params", "2^6,27,25,10,2", "--reduced"]) == 0
    assert capsys.readouterr().out.strip() == "sk=7256 pk=476035"
    assert main(["keysize", "--params", "2^6,27,25,10,2"]) == 0
    assert capsys.readouterr().out.strip() == "sk=7406 pk=786625"


def test_keysize_packed(capsys):
    main(["keysize", "--params", "2^6,27,25,10,2", "--reduced", "--packed"])
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "sk=7256 pk=476035"
    assert "sk=5442 pk=357027" in out[1]


def test_cost(capsys):
    assert main(["cost", "--params", "5,5,4,2,1"]) == 0
    assert capsys.readouterr().out.startswith("verify=980 ")


def test_toy(capsys):
    assert main(["toy", "--trials", "5"]) == 0
    out = capsys.readouterr().out
    assert out.count(" match") == 4 and "toy: OK" in out


def test_sign_verify_cycle(keydir, tmp_path, capsys):
    msg = tmp_path / "msg.txt"
    msg.write_bytes(b"hello world")
    sig = tmp_path / "sig.bin"
    assert main(["sign", "--sk", str(keydir / "sk.bin"), "--in", str(msg), "--out", str(sig), "--seed", "1"]) == 0
    assert main(["verify", "--pk", str(keydir / "pk.bin"), "--in", str(msg), "--sig", str(sig)]) == 0
    data = bytearray(sig.read_bytes())
    data[4] ^= 1
    sig.write_bytes(bytes(data))
    assert main(["verify", "--pk", str(keydir / "pk.bin"), "--in", str(msg), "--sig", str(sig)]) == 1
    assert "invalid" in capsys.readouterr().out


def test_vector_messages(keydir, tmp_path):
    w = tmp_path / "w.bin"
    w.write_bytes(codec.encode_vector(list(range(8)), 64))
    sig = tmp_path / "sig.bin"
    assert main(["sign", "--sk", str(keydir / "sk.bin"), "--in", str(w), "--out", str(sig), "--vector"]) == 0
    assert main(["verify", "--pk", str(keydir / "pk.bin"), "--in", str(w), "--sig", str(sig), "--vector"]) == 0


def test_encrypt_decrypt(tmp_path, capsys):
    assert main(["keygen", "--params", "7,6,5,2,1", "--seed", "3", "--out-dir", str(tmp_path)]) == 0
    pt = tmp_path / "pt"
    pt.write_bytes(codec.encode_vector([1, 2, 3, 4, 5, 6], 7))
    ct, pre = tmp_path / "ct", tmp_path / "pre"
    assert main(["encrypt", "--pk", str(tmp_path / "pk.bin"), "--in", str(pt), "--out", str(ct)]) == 0
    assert main(["decrypt", "--sk", str(tmp_path / "sk.bin"), "--in", str(ct), "--out", str(pre)]) == 0
    rows = codec.decode_vector_list(pre.read_bytes(), 7).tolist()
    assert [1, 2, 3, 4, 5, 6] in rows


def test_keygen_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        main(["keygen", "--params", "2^6,10,8,3,2", "--seed", "11", "--out-dir", str(d)])
    assert (a / "pk.bin").read_bytes() == (b / "pk.bin").read_bytes()
    assert (a / "sk.bin").read_bytes() == (b / "sk.bin").read_bytes()


def test_attacks(keydir, capsys):
    pk, sk = str(keydir / "pk.bin"), str(keydir / "sk.bin")
    assert main(["attack", "iso-quad", "--pk", pk]) == 0
    assert "dimension: 3" in capsys.readouterr().out
    assert main(["attack", "lin-struct", "--pk", pk]) == 0
    assert main(["attack", "known-a2", "--pk", pk, "--sk", sk, "--json"]) == 0
    assert '"success": true' in capsys.readouterr().out
    assert main(["attack", "linearize", "--pk", pk]) == 1
    assert main(["attack", "known-a2", "--pk", pk]) == 2


def test_solvedeg_csv(capsys):
    assert main(["solvedeg", "--params", "2^6,7,5,2,2", "--trials", "1", "--d-max", "8"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0][0] == "q" and rows[1][:5] == ["64", "7", "5", "2", "2"]


@pytest.mark.parametrize("argv,code", [
    (["keysize", "--params", "3,5,4,2,1"], 2),
    (["keysize", "--params", "abc"], 2),
    (["bogus"], 2),
    ([], 2),
    (["verify", "--pk", "/nonexistent", "--in", "/nonexistent", "--sig", "/nonexistent"], 2),
])
def test_error_paths(argv, code, capsys):
    assert main(argv) == code
    err = capsys.readouterr().err.strip().splitlines()
    assert err and "error" in err[-1]


def test_wrong_key_kind(keydir, tmp_path, capsys):
    msg = tmp_path / "m"
    msg.write_bytes(b"x")
    rc = main(["sign", "--sk", str(keydir / "pk.bin"), "--in", str(msg), "--out", str(tmp_path / "s")])
    assert rc == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("pesto: error:")


def test_budget_exit_code(keydir, tmp_path):
    c = tmp_path / "c"
    c.write_bytes(codec.encode_vector([0] * 8, 64))
    rc = main(["decrypt", "--sk", str(keydir / "sk.bin"), "--in", str(c), "--out", str(tmp_path / "o"),
               "--budget", "10"])
    assert rc == 3


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pesto", "keysize", "--params", "2^6,40,38,14,2", "--reduced"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and r.stdout.strip() == "sk=21542 pk=3270078"
