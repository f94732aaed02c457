#!/usr/bin/env python3
"""
Run reports: check accumulation, fingerprinting, JSON/CSV serialization
and validation against the published JSON schema.
"""

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema
import numpy as np

from . import __version__
from .error_handling import ArgumentError, InvariantError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
SCHEMA_PATH = Path(__file__).parent / "schemas" / "run_report.schema.json"
CSV_COLUMNS = ["name", "expected", "observed", "deviation", "passed", "detail"]


def to_jsonable(value: Any) -> Any:
    """
    Convert report payloads into strict-JSON values.

    Enums become their value, dataclasses dicts, tuples lists, numpy scalars
    Python numbers, and non-finite floats the strings "inf", "-inf", "nan".
    """
    if isinstance(value, Enum):
        return value.value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, complex):
        return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
    if isinstance(value, Path):
        return str(value)
    return value


def _compute_hash(content: str) -> str:
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


def _canonical(value: Any) -> str:
    return json.dumps(to_jsonable(value), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass
class CheckResult:
    """Outcome of one named check."""
    name: str
    expected: Any
    observed: Any
    deviation: Optional[float]
    passed: bool
    detail: str = ""


@dataclass
class RunReport:
    """Everything one CLI command produced."""
    command: str
    config: Dict[str, Any]
    checks: List[CheckResult] = field(default_factory=list)
    results: Dict[str, Any] = field(default_factory=dict)
    started_at: Optional[str] = None
    finished_at: Optional[str] = None
    library_version: str = __version__

    def add_check(
        self,
        name: str,
        expected: Any,
        observed: Any,
        passed: bool,
        deviation: Optional[float] = None,
        detail: str = "",
    ) -> CheckResult:
        """Record a check; failures are logged immediately."""
        check = CheckResult(name, expected, observed, deviation, bool(passed), detail)
        self.checks.append(check)
        if not check.passed:
            logger.error(f"Check failed: {name} (expected {expected}, observed {observed})")
        else:
            logger.debug(f"Check passed: {name}")
        return check

    def check_close(self, name: str, expected: float, observed: float, tol: float, detail: str = "") -> CheckResult:
        """Record |observed - expected| <= tol."""
        deviation = abs(observed - expected)
        return self.add_check(name, expected, observed, deviation <= tol, deviation, detail)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_checks(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def mark_started(self, record: bool = True) -> None:
        self.started_at = _now() if record else None

    def mark_finished(self, record: bool = True) -> None:
        self.finished_at = _now() if record else None

    @property
    def fingerprint(self) -> str:
        """SHA-256 of command, config, checks and results (timestamps excluded)."""
        return _compute_hash(_canonical({
            "command": self.command,
            "config": self.config,
            "checks": self.checks,
            "results": self.results,
        }))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "library_version": self.library_version,
            "passed": self.passed,
            "config": to_jsonable(self.config),
            "checks": to_jsonable(self.checks),
            "results": to_jsonable(self.results),
            "timestamps": {"started_at": self.started_at, "finished_at": self.finished_at},
            "fingerprint": self.fingerprint,
        }

    def to_json(self) -> str:
        document = self.to_dict()
        validate_document(document)
        return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for check in self.checks:
            row = to_jsonable(check)
            writer.writerow([_csv_cell(row[column]) for column in CSV_COLUMNS])
        return buffer.getvalue()

    def render(self, output_format: str) -> str:
        if output_format == "json":
            return self.to_json()
        if output_format == "csv":
            return self.to_csv()
        raise ArgumentError(f"Unknown output format: {output_format}")

    def write(self, output_format: str, output_path: Optional[str] = None, stream: Optional[Any] = None) -> str:
        """
        Serialize and write the report.

        Args:
            output_format: "json" or "csv"
            output_path: File to write; stdout-like ``stream`` otherwise
            stream: Text stream used when no path is given

        Returns:
            The serialized text
        """
        text = self.render(output_format)
        if output_path:
            path = Path(output_path)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            logger.info(f"Report written to {path}")
        elif stream is not None:
            stream.write(text)
        return text


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True, ensure_ascii=False)
    return str(value)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


_SCHEMA_CACHE: Dict[str, Any] = {}


def load_schema() -> Dict[str, Any]:
    if "schema" not in _SCHEMA_CACHE:
        with open(SCHEMA_PATH, "r", encoding="utf-8") as f:
            _SCHEMA_CACHE["schema"] = json.load(f)
    return _SCHEMA_CACHE["schema"]


def validate_document(document: Dict[str, Any]) -> None:
    """
    Validate a report document against the published schema.

    Raises:
        InvariantError: if the document does not conform
    """
    try:
        jsonschema.validate(instance=document, schema=load_schema())
    except jsonschema.ValidationError as e:
        raise InvariantError(f"Report does not match schema: {e.message}") from e
