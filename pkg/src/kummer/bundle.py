"""Persistence: equation bundles, kernel manifests and verification reports.

A bundle is a JSON document whose bytes are a pure function of its
contents: metadata keys are sorted, polynomials use the canonical
polynomial serialization, and ``content_hash`` is the SHA-256 of the
document written without the hash field.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .polycore import Polynomial, canonical_serialize, from_json_obj

SCHEMA_VERSION = 1
CONSTRUCTIONS = (
    "pT_basis", "quadrics", "kernel", "f_r", "det_g2", "det_g3",
    "tilde_lift", "moduli", "schottky",
)


class BundleError(ValueError):
    pass


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class EquationBundle:
    construction: str
    genus: int
    polynomials: tuple[Polynomial, ...]
    labels: tuple[str, ...] = ()
    degree: int | None = None
    bidegree: tuple[int, int] | None = None
    provenance: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise BundleError(f"unknown construction {self.construction!r}")
        object.__setattr__(self, "polynomials", tuple(self.polynomials))
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.labels and len(self.labels) != len(self.polynomials):
            raise BundleError("one label per polynomial")
        if self.bidegree is not None:
            object.__setattr__(self, "bidegree", tuple(self.bidegree))

    def __len__(self) -> int:
        return len(self.polynomials)

    def _body(self) -> str:
        meta = {
            "bidegree": list(self.bidegree) if self.bidegree is not None else None,
            "construction": self.construction,
            "degree": self.degree,
            "genus": self.genus,
            "labels": list(self.labels),
            "provenance": self.provenance,
            "schema_version": self.schema_version,
        }
        head = _dumps(meta)[:-1]
        polys = ",".join(canonical_serialize(f).decode("utf-8") for f in self.polynomials)
        return f'{head},"polynomials":[{polys}]'

    @property
    def content_hash(self) -> str:
        return hashlib.sha256((self._body() + "}").encode("utf-8")).hexdigest()

    def to_bytes(self) -> bytes:
        return f'{self._body()},"content_hash":"{self.content_hash}"}}\n'.encode("utf-8")

    @classmethod
    def from_bytes(cls, data: bytes) -> "EquationBundle":
        obj = json.loads(data)
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise BundleError(f"unsupported schema version {obj.get('schema_version')}")
        b = cls(
            construction=obj["construction"],
            genus=obj["genus"],
            polynomials=tuple(from_json_obj(p) for p in obj["polynomials"]),
            labels=tuple(obj["labels"]),
            degree=obj["degree"],
            bidegree=tuple(obj["bidegree"]) if obj["bidegree"] is not None else None,
            provenance=obj["provenance"],
        )
        if b.content_hash != obj.get("content_hash"):
            raise BundleError("content hash does not match the bundle contents")
        return b


def manifest_path(path: str | os.PathLike) -> Path:
    return Path(str(path) + ".manifest.json")


def _write_once(path: Path, data: bytes) -> None:
    if path.exists():
        if path.read_bytes() == data:
            return
        raise BundleError(f"{path} exists with different contents; bundles are immutable")
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def save(bundle: EquationBundle, path: str | os.PathLike, manifest: dict | None = None) -> Path:
    """Write the bundle (and optionally its manifest).  Existing files are never altered."""
    path = Path(path)
    _write_once(path, bundle.to_bytes())
    if manifest is not None:
        m = dict(manifest, content_hash=bundle.content_hash)
        _write_once(manifest_path(path), (_dumps(m) + "\n").encode("utf-8"))
    return path


def load(path: str | os.PathLike) -> EquationBundle:
    return EquationBundle.from_bytes(Path(path).read_bytes())


def load_manifest(path: str | os.PathLike) -> dict | None:
    mp = manifest_path(path)
    if not mp.exists():
        return None
    return json.loads(mp.read_text("utf-8"))


def kernel_bundle(kern, seed: int | None = None) -> tuple[EquationBundle, dict]:
    """Bundle and manifest for a KernelBasis."""
    prov = {"strategy": kern.strategy, "primes": [str(p) for p in kern.primes],
            "verified": kern.verified, "domain": kern.domain.tag}
    if seed is not None:
        prov["seed"] = seed
    if kern.caveat:
        prov["caveat"] = kern.caveat
    b = EquationBundle("kernel", kern.genus, tuple(kern.basis),
                       labels=tuple(f"R{i}" for i in range(kern.dimension)),
                       degree=kern.degree, provenance=prov)
    manifest = {
        "genus": kern.genus,
        "degree": kern.degree,
        "dimension": kern.dimension,
        "strategy": kern.strategy,
        "primes": [str(p) for p in kern.primes],
        "verified": kern.verified,
    }
    return b, manifest


def schottky_json(data) -> bytes:
    """Dedicated serialization of SchottkyData."""
    from .f2lin import characteristic_label

    obj = {
        "characteristics": [characteristic_label(e, f, 3) for e, f in data.characteristics],
        "q_vars": list(data.q_vars),
        "labels": list(data.labels),
        "quadratic_expressions": [json.loads(canonical_serialize(q)) for q in data.quadratic_expressions],
        "fbar8": json.loads(canonical_serialize(data.fbar8)),
    }
    body = _dumps(obj)
    h = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return (body[:-1] + f',"content_hash":"{h}"}}\n').encode("utf-8")


# ---------------------------------------------------------------------------
# verification reports
# ---------------------------------------------------------------------------


@dataclass
class VerificationReport:
    suite: str
    entries: list[dict] = field(default_factory=list)

    def add(self, check: str, passed: bool, genus: int | None = None, residual: float | None = None,
            tolerance: float | None = None, **params) -> dict:
        entry = {"check": check, "genus": genus, "residual": residual, "tolerance": tolerance,
                 "pass": bool(passed)}
        entry.update(params)
        self.entries.append(entry)
        return entry

    def add_residual(self, check: str, residual: float, tolerance: float, genus: int | None = None,
                     **params) -> dict:
        return self.add(check, residual < tolerance, genus, residual, tolerance, **params)

    @property
    def passed(self) -> bool:
        return all(e["pass"] for e in self.entries)

    def summary(self) -> dict:
        n = sum(e["pass"] for e in self.entries)
        return {"suite": self.suite, "total": len(self.entries), "passed": n,
                "failed": len(self.entries) - n, "pass": self.passed}

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.entries)
