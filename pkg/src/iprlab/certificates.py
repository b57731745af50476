"""Self-contained, re-verifiable search and construction certificates."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any

from . import __version__
from .colorings import Coloring
from .errors import MalformedCertificate
from .matrix import SparseMatrix

KINDS = ("witness", "refutation", "bound")


@dataclass
class Certificate:
    kind: str
    matrix: SparseMatrix
    coloring: Coloring | None
    payload: dict
    epsilon: str | None = None
    exhausted: bool = True
    seed: int = 0
    engine: dict = field(default_factory=lambda: {"version": __version__})

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MalformedCertificate(f"unknown certificate kind {self.kind!r}")

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "kind": self.kind,
            "matrix": self.matrix.to_json(),
            "coloring": self.coloring.to_json() if self.coloring is not None else None,
            "truncation": self.matrix.truncation,
            "payload": self.payload,
            "exhausted": self.exhausted,
            "engine": {**self.engine, "seed": self.seed},
        }
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Certificate":
        try:
            return cls(
                kind=data["kind"],
                matrix=SparseMatrix.from_json(data["matrix"]),
                coloring=Coloring.from_json(data["coloring"]) if data.get("coloring") else None,
                payload=data["payload"],
                epsilon=data.get("epsilon"),
                exhausted=bool(data.get("exhausted", True)),
                seed=int(data.get("engine", {}).get("seed", 0)),
                engine={k: v for k, v in data.get("engine", {}).items() if k != "seed"},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedCertificate(f"malformed certificate: {exc}") from None

    def dumps(self) -> str:
        return dumps(self.to_json())


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, separators=(",", ": ")) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write-then-rename so an interrupted run never leaves a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
