"""JSON matrix files and problem files.

A matrix file is ``{"name", "rows", "cols", "data"}`` with ``data`` a
row-major nested list whose entries are real numbers or ``[re, im]`` pairs.
A problem file is ``{"kind", "matrices": [matrix files], "options": {...}}``.
Writing is canonical (sorted option keys, fixed indentation, shortest
round-trip float text) so ``save(load(f))`` reproduces ``f`` byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ._config import DEFAULT_TOLERANCES, Tolerances
from .block1x2 import Partition1x2
from .block2x2 import Partition2x2
from .exceptions import ValidationError
from .linalg import as_weight

KINDS = ("plain", "weighted", "part1x2", "part2x2")

REQUIRED = {
    "plain": ("A",),
    "weighted": ("A", "M", "N"),
    "part1x2": ("A", "B"),
    "part2x2": ("A11", "A12", "A21", "A22"),
}

OPTIONAL = {
    "plain": (),
    "weighted": (),
    "part1x2": ("M", "N1", "L", "N2", "N3"),
    "part2x2": ("M", "N", "M11", "M12", "M22", "N11", "N12", "N22"),
}

OPTION_KEYS = ("rank_rtol", "num_tol", "cmp_tol", "method")

_BLOCKS = {"M": ("M11", "M12", "M22"), "N": ("N11", "N12", "N22")}


# ----------------------------------------------------------------------------
# numbers and matrices

def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _parse_entry(x, where):
    if _is_number(x):
        value = complex(float(x), 0.0)
    elif isinstance(x, list) and len(x) == 2 and all(_is_number(v) for v in x):
        value = complex(float(x[0]), float(x[1]))
    else:
        raise ValidationError(f"{where}: entry must be a number or an [re, im] pair, got {x!r}",
                              field=where)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValidationError(f"{where}: entry is not finite", field=where)
    return value


def _render_entry(z: complex):
    re, im = float(z.real), float(z.imag)
    if im == 0.0 and not math.copysign(1.0, im) < 0:
        return re
    return [re, im]


def matrix_from_json(obj: Any, where="matrix") -> tuple[str, np.ndarray]:
    """Parse one matrix file object; returns ``(name, array)``."""
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object", field=where)
    missing = [k for k in ("name", "rows", "cols", "data") if k not in obj]
    if missing:
        raise ValidationError(f"{where}: missing {', '.join(missing)}", field=where)
    name, rows, cols, data = obj["name"], obj["rows"], obj["cols"], obj["data"]
    if not isinstance(name, str) or not name:
        raise ValidationError(f"{where}.name: must be a non-empty string", field=f"{where}.name")
    where = f"matrices.{name}"
    for key, val in (("rows", rows), ("cols", cols)):
        if not isinstance(val, int) or isinstance(val, bool) or val < 0:
            raise ValidationError(f"{where}.{key}: must be a non-negative integer", field=f"{where}.{key}")
    if not isinstance(data, list) or len(data) != rows:
        raise ValidationError(f"{where}.data: expected {rows} rows", field=f"{where}.data")
    out = np.zeros((rows, cols), dtype=np.complex128)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise ValidationError(f"{where}.data[{i}]: expected {cols} entries", field=f"{where}.data[{i}]")
        for j, x in enumerate(row):
            out[i, j] = _parse_entry(x, f"{where}.data[{i}][{j}]")
    return name, out


def matrix_to_json(name: str, A) -> dict:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise ValidationError(f"{name}: expected a 2-D array", field=name)
    return {
        "name": name,
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "data": [[_render_entry(z) for z in row] for row in A.tolist()],
    }


def dumps(obj) -> str:
    """Canonical JSON text (floats use Python's shortest round-trip repr)."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror or exc}", field="path") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})", field="json") from exc


def load_matrix(path) -> tuple[str, np.ndarray]:
    """Read a matrix file, or the ``result`` of a CLI report."""
    obj = _read_json(path)
    if isinstance(obj, dict) and "data" not in obj and isinstance(obj.get("result"), dict):
        obj = obj["result"]
    return matrix_from_json(obj)


def save_matrix(path, name: str, A) -> None:
    Path(path).write_text(dumps(matrix_to_json(name, A)), encoding="utf-8")


# ----------------------------------------------------------------------------
# problems

@dataclass
class ProblemFile:
    """A validated problem: its kind, named matrices and options."""

    kind: str
    matrices: dict[str, np.ndarray]
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        validate_problem(self)

    def tolerances(self, base: Tolerances = DEFAULT_TOLERANCES) -> Tolerances:
        """``base`` overridden by the numeric options of the file."""
        return base.with_overrides(**{k: self.options.get(k) for k in ("rank_rtol", "num_tol", "cmp_tol")})

    def weight(self, which: str) -> np.ndarray | None:
        """Full ``M`` or ``N``, assembled from blocks when given that way."""
        mats = self.matrices
        if which in mats:
            return mats[which]
        names = _BLOCKS.get(which, ())
        if names and all(n in mats for n in names):
            W11, W12, W22 = (mats[n] for n in names)
            return np.block([[W11, W12], [W12.conj().T, W22]])
        if self.kind == "part1x2" and which == "N":
            return self.partition1x2().N.value
        return None

    def assembled(self) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
        """``(A, M, N)`` for the whole operator; missing weights are ``None``."""
        mats = self.matrices
        if self.kind in ("plain", "weighted"):
            A = mats["A"]
        elif self.kind == "part1x2":
            A = np.hstack([mats["A"], mats["B"]])
        else:
            A = np.block([[mats["A11"], mats["A12"]], [mats["A21"], mats["A22"]]])
        N = self.weight("N")
        if self.kind == "part1x2" and all(k not in mats for k in ("N1", "L", "N2")):
            N = None
        return A, self.weight("M"), N

    def partition1x2(self, tols: Tolerances | None = None) -> Partition1x2:
        if self.kind != "part1x2":
            raise ValidationError(f"a {self.kind!r} problem has no 1x2 partition", field="kind")
        mats = self.matrices
        return Partition1x2(mats["A"], mats["B"], mats.get("M"), mats.get("N1"), mats.get("L"),
                            mats.get("N2"), tols=tols or self.tolerances())

    def partition2x2(self, tols: Tolerances | None = None) -> Partition2x2:
        if self.kind != "part2x2":
            raise ValidationError(f"a {self.kind!r} problem has no 2x2 partition", field="kind")
        mats = self.matrices
        return Partition2x2(mats["A11"], mats["A12"], mats["A21"], mats["A22"],
                            self.weight("M"), self.weight("N"), tols=tols or self.tolerances())

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "matrices": [matrix_to_json(name, A) for name, A in self.matrices.items()],
            "options": {k: self.options[k] for k in sorted(self.options)},
        }


def _check_options(options):
    if not isinstance(options, dict):
        raise ValidationError("options: expected an object", field="options")
    for key, value in options.items():
        if key not in OPTION_KEYS:
            raise ValidationError(f"options.{key}: unknown option", field=f"options.{key}")
        if key == "method":
            if not isinstance(value, str):
                raise ValidationError("options.method: must be a string", field="options.method")
        elif value is not None and (not _is_number(value) or not value > 0 or not math.isfinite(value)):
            raise ValidationError(f"options.{key}: must be a positive number", field=f"options.{key}")


def validate_problem(problem: ProblemFile) -> None:
    """Check kind, required matrices, shapes and weights; raise ValidationError."""
    kind, mats = problem.kind, problem.matrices
    if kind not in KINDS:
        raise ValidationError(f"kind: must be one of {', '.join(KINDS)}, got {kind!r}", field="kind")
    _check_options(problem.options)
    missing = [n for n in REQUIRED[kind] if n not in mats]
    if missing:
        raise ValidationError(f"matrices: {kind} problem needs {', '.join(missing)}",
                              field=f"matrices.{missing[0]}")
    allowed = set(REQUIRED[kind]) | set(OPTIONAL[kind])
    extra = sorted(set(mats) - allowed)
    if extra:
        raise ValidationError(f"matrices.{extra[0]}: not used by a {kind} problem", field=f"matrices.{extra[0]}")
    tols = problem.tolerances()
    if kind == "part2x2":
        for w, names in _BLOCKS.items():
            given = [n for n in names if n in mats]
            if given and w in mats:
                raise ValidationError(f"matrices.{w}: give either {w} or its blocks, not both", field=f"matrices.{w}")
            if given and len(given) != 3:
                lacking = [n for n in names if n not in mats][0]
                raise ValidationError(f"matrices.{lacking}: block weight incomplete", field=f"matrices.{lacking}")
    try:
        if kind == "weighted":
            A = mats["A"]
            as_weight(mats["M"], A.shape[0], "M", tols)
            as_weight(mats["N"], A.shape[1], "N", tols)
        elif kind == "part1x2":
            part = problem.partition1x2(tols)
            if "N3" in mats:
                as_weight(mats["N3"], part.q, "N3", tols)
        elif kind == "part2x2":
            problem.partition2x2(tols)
    except ValidationError as exc:
        name = exc.field or "matrices"
        raise ValidationError(str(exc), field=name if name.startswith("matrices.") else f"matrices.{name}") from exc


def problem_from_json(obj: Any) -> ProblemFile:
    if not isinstance(obj, dict):
        raise ValidationError("problem: expected a JSON object", field="problem")
    if "kind" not in obj:
        raise ValidationError("kind: missing", field="kind")
    raw = obj.get("matrices", [])
    if not isinstance(raw, list):
        raise ValidationError("matrices: expected a list of matrix objects", field="matrices")
    mats: dict[str, np.ndarray] = {}
    for i, item in enumerate(raw):
        name, value = matrix_from_json(item, f"matrices[{i}]")
        if name in mats:
            raise ValidationError(f"matrices.{name}: duplicated", field=f"matrices.{name}")
        mats[name] = value
    return ProblemFile(obj["kind"], mats, dict(obj.get("options", {}) or {}))


def load_problem(path) -> ProblemFile:
    """Read and eagerly validate a problem file."""
    return problem_from_json(_read_json(path))


def save_problem(path, problem: ProblemFile) -> None:
    Path(path).write_text(dumps(problem.to_json()), encoding="utf-8")
