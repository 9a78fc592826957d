"""JSON reports with exact numbers and a digest of the inputs."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any

from motivix.exact import ExactMatrix, QuadInt


def to_jsonable(value: Any) -> Any:
    """Fractions become [num, den]; nothing is ever written as a float."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return [value.numerator, value.denominator]
    if isinstance(value, (QuadInt, ExactMatrix)):
        return value.to_json()
    if isinstance(value, Enum):
        return value.value
    if hasattr(value, "to_json"):
        return to_jsonable(value.to_json())
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(item) for item in items]
    if isinstance(value, float):
        raise TypeError("floats are not allowed in reports")
    return str(value)


def canonical_json(data: Any) -> str:
    return json.dumps(to_jsonable(data), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def stable_digest(data: Any) -> str:
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


@dataclass
class Report:
    command: str
    inputs: dict[str, Any]
    results: Any
    version: str
    timing: float | None = None

    def to_json(self) -> dict:
        payload = {
            "command": self.command,
            "inputs": to_jsonable(self.inputs),
            "inputs_digest": stable_digest(self.inputs),
            "results": to_jsonable(self.results),
            "version": self.version,
        }
        if self.timing is not None:
            # milliseconds, integral so reports stay float-free
            payload["timing_ms"] = int(self.timing * 1000)
        return payload

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
