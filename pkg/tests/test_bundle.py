import hashlib
import json

import pytest

from kummer.bundle import (
    BundleError,
    EquationBundle,
    VerificationReport,
    kernel_bundle,
    load,
    load_manifest,
    manifest_path,
    save,
    schottky_json,
)
from kummer.checks import cached_kernel
from kummer.heis import heisenberg_basis
from kummer.lift import schottky_build


def pt_bundle(g=2):
    b = heisenberg_basis(g)
    return EquationBundle("pT_basis", g, b.polynomials, b.labels(), degree=4)


def test_roundtrip_preserves_contents_and_hash(tmp_path):
    b = pt_bundle(3)
    path = save(b, tmp_path / "pt.json")
    back = load(path)
    assert back == b
    assert back.content_hash == b.content_hash
    assert back.to_bytes() == path.read_bytes()


def test_hash_is_sha256_of_document_without_hash():
    b = pt_bundle()
    obj = json.loads(b.to_bytes())
    h = obj.pop("content_hash")
    body = b.to_bytes().decode().rsplit(',"content_hash"', 1)[0] + "}"
    assert h == hashlib.sha256(body.encode()).hexdigest()
    assert json.loads(body) == obj


def test_bytes_are_deterministic():
    assert pt_bundle().to_bytes() == pt_bundle().to_bytes()
    assert pt_bundle(2).content_hash != pt_bundle(3).content_hash


def test_tampering_is_detected(tmp_path):
    path = save(pt_bundle(), tmp_path / "pt.json")
    data = path.read_bytes().replace(b'"genus":2', b'"genus":3')
    with pytest.raises(BundleError):
        EquationBundle.from_bytes(data)


def test_bundles_are_immutable(tmp_path):
    path = tmp_path / "pt.json"
    save(pt_bundle(2), path)
    save(pt_bundle(2), path)  # identical rewrite is a no-op
    with pytest.raises(BundleError):
        save(pt_bundle(3), path)
    assert load(path) == pt_bundle(2)


def test_invalid_bundles():
    with pytest.raises(BundleError):
        EquationBundle("nonsense", 2, ())
    with pytest.raises(BundleError):
        EquationBundle("pT_basis", 2, heisenberg_basis(2).polynomials, ("a",))


def test_kernel_manifest(tmp_path):
    b, m = kernel_bundle(cached_kernel(2, 4), seed=0)
    assert m == {"genus": 2, "degree": 4, "dimension": 1, "strategy": "exact",
                 "primes": [], "verified": True}
    path = save(b, tmp_path / "k.json", m)
    assert manifest_path(path).exists()
    man = load_manifest(path)
    assert man["content_hash"] == b.content_hash and man["dimension"] == 1
    assert load_manifest(tmp_path / "missing.json") is None


def test_schottky_json_is_stable():
    a = schottky_json(schottky_build())
    obj = json.loads(a)
    assert len(obj["characteristics"]) == 36 and len(obj["quadratic_expressions"]) == 5
    assert a == schottky_json(schottky_build())


def test_verification_report():
    r = VerificationReport("numeric")
    r.add_residual("a", 1e-20, 1e-8, 2, seed=0)
    assert r.passed
    r.add_residual("b", 1e-2, 1e-8, 2, seed=1)
    assert not r.passed
    assert r.summary() == {"suite": "numeric", "total": 2, "passed": 1, "failed": 1, "pass": False}
    lines = [json.loads(x) for x in r.to_jsonl().splitlines()]
    assert [x["pass"] for x in lines] == [True, False] and lines[1]["seed"] == 1
