"""Ring JSON ingestion and the bundled example rings."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import RingValidationError
from .liering import LieRingData, check_valid, uniformity

__all__ = ["load_schema", "parse_ring", "parse_ring_text", "corpus", "corpus_ring", "CorpusEntry", "ParsedRing"]

_PKG = resources.files("lazard") / "corpus"


def load_schema() -> dict:
    return json.loads((_PKG / "ring.schema.json").read_text())


@dataclass(frozen=True)
class ParsedRing:
    data: LieRingData
    digest: str


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def parse_ring_text(text: str) -> ParsedRing:
    """Schema check, then structural and Jacobi checks; digest is sha256 of the bytes."""
    digest = hashlib.sha256(text.encode()).hexdigest()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RingValidationError(f"not JSON: {exc}", pointer="/") from exc
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = list(err.absolute_path)
        if err.validator == "required":
            missing = err.message.split("'")[1]
            where = where + [missing]
        raise RingValidationError(f"schema: {err.message}", pointer=_pointer(where))
    for n, entry in enumerate(obj["brackets"]):
        if not entry["i"] < entry["j"] <= obj["rank"]:
            raise RingValidationError("need 1 <= i < j <= rank", pointer=f"/brackets/{n}")
        if len(entry["coeffs"]) != obj["rank"]:
            raise RingValidationError("coeffs must have rank entries", pointer=f"/brackets/{n}/coeffs")
    data = check_valid(LieRingData.from_json(obj))
    return ParsedRing(data, digest)


def parse_ring(path) -> ParsedRing:
    return parse_ring_text(Path(path).read_text())


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    ring: ParsedRing
    uniform: bool
    s: float
    note: str


def corpus() -> list[CorpusEntry]:
    index = json.loads((_PKG / "index.json").read_text())
    out = []
    for e in index["rings"]:
        parsed = parse_ring_text((_PKG / e["file"]).read_text())
        s = float("inf") if e["s"] is None else e["s"]
        out.append(CorpusEntry(e["file"].removesuffix(".json"), parsed, e["uniform"], s, e["note"]))
    return out


def corpus_slots() -> list[dict]:
    return json.loads((_PKG / "index.json").read_text())["slots"]


def corpus_ring(name: str) -> LieRingData:
    return parse_ring_text((_PKG / f"{name}.json").read_text()).data


def corpus_path(name: str) -> Path:
    return Path(str(_PKG / f"{name}.json"))


def documented_uniformity_matches(entry: CorpusEntry) -> bool:
    s, ok = uniformity(entry.ring.data)
    return ok == entry.uniform and s == entry.s
