"""Congruence spec files, reports, and CSV / OBJ export.

A spec is a JSON object with a ``family`` key::

    {"family": "mobius", "a": [0.2, 0], "b": "1j", "c": -0.1}
    {"family": "point_sphere", "p": [1, 2, 3]}
    {"family": "tangent_field", "field": [{"y": -1}, {"x": 1}, {}]}
    {"family": "tangent_field", "preset": "perturbed_rotation", "eps": 0.3}
    {"family": "custom", "custom": {"north": "1 + conj(xi)", "south": "auto"}}
    {"family": "random", "kind": "mobius"}

Complex numbers may be JSON numbers, ``[re, im]`` pairs or strings such as
``"0.3-2j"``.  An optional ``"translate": [x, y, z]`` moves every line by
that vector.  Command-specific blocks (``"sachs"``, ``"surface"``) are passed
through untouched.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from . import congruence as cg
from .errors import ClabError, SpecError

SCHEMA = 1
FAMILIES = ("mobius", "point_sphere", "tangent_field", "custom", "random")
RANDOM_KINDS = ("mobius", "point_sphere", "tangent_field")


@dataclass
class RunConfig:
    spec: Dict[str, Any]
    grid: Optional[int] = None
    tol: Optional[float] = None
    r: Optional[float] = None
    out: Optional[str] = None
    threads: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.grid is not None and self.grid < 8:
            raise SpecError("grid must be >= 8")
        if self.tol is not None and not self.tol > 0:
            raise SpecError("tol must be > 0")
        if self.threads < 1:
            raise SpecError("threads must be >= 1")

    def echo(self) -> Dict[str, Any]:
        return {"spec": self.spec, "grid": self.grid, "tol": self.tol, "r": self.r,
                "threads": self.threads, "seed": self.seed}


@dataclass
class Report:
    command: str
    config: Dict[str, Any]
    results: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    warnings: List[Dict[str, str]] = field(default_factory=list)
    wall_time: float = 0.0
    exit_code: int = 0

    def warn(self, exc: BaseException) -> None:
        """Record a library error condition (warnings are always named errors)."""
        if not isinstance(exc, ClabError):
            raise TypeError("warnings must be library error conditions")
        self.warnings.append({"error": type(exc).__name__, "detail": str(exc)})

    def to_dict(self) -> Dict[str, Any]:
        return {"schema": SCHEMA, "command": self.command, "config": self.config,
                "results": self.results, "tables": self.tables,
                "warnings": self.warnings, "wall_time": self.wall_time,
                "exit_code": self.exit_code}

    def to_json(self) -> str:
        return json.dumps(jsonable(self.to_dict()), sort_keys=True, indent=2,
                          allow_nan=True) + "\n"


def jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers to JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


# ---------------------------------------------------------------------------
# spec parsing

def read_spec(source) -> Dict[str, Any]:
    """Parse a spec from a path, a JSON string, or pass a dict through.

    Raises :class:`SpecError` with line/column for malformed JSON.
    """
    if isinstance(source, dict):
        return source
    text = str(source)
    if not text.lstrip().startswith("{"):
        try:
            text = Path(text).read_text()
        except OSError as exc:
            raise SpecError(f"cannot read spec file {source!r}: {exc.strerror}") from None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON at line {exc.lineno} column {exc.colno} "
                        f"(char {exc.pos}): {exc.msg}") from None
    if not isinstance(spec, dict):
        raise SpecError("spec must be a JSON object")
    return spec


def parse_complex(value, name: str = "value") -> complex:
    try:
        if isinstance(value, bool):
            raise TypeError
        if isinstance(value, (int, float)):
            return complex(value)
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, str):
            return complex(value.replace(" ", "").replace("i", "j"))
    except (TypeError, ValueError):
        pass
    raise SpecError(f"{name}: cannot read {value!r} as a complex number")


def parse_vector(value, name: str = "vector") -> np.ndarray:
    try:
        v = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        v = None
    if v is None or v.shape != (3,):
        raise SpecError(f"{name}: expected three numbers, got {value!r}")
    return v


def _require(spec, key):
    if key not in spec:
        raise SpecError(f"family {spec.get('family')!r} requires key {key!r}")
    return spec[key]


def _random_spec(kind: str, seed: int) -> Dict[str, Any]:
    rng = np.random.default_rng(seed)
    if kind == "mobius":
        a, b, c = rng.normal(size=3) + 1j * rng.normal(size=3)
        return {"family": "mobius", "a": [a.real, a.imag], "b": [b.real, b.imag],
                "c": [c.real, c.imag]}
    if kind == "point_sphere":
        return {"family": "point_sphere", "p": rng.normal(size=3).tolist()}
    if kind == "tangent_field":
        monos = ["x^2", "y^2", "z^2", "x*y", "x*z", "y*z"]
        field_ = [{"y": -1.0}, {"x": 1.0}, {}]
        for comp in field_:
            for m in monos:
                comp[m] = comp.get(m, 0.0) + 0.3 * float(rng.normal())
        return {"family": "tangent_field", "field": field_}
    raise SpecError(f"unknown random kind {kind!r}; expected one of {RANDOM_KINDS}")


def build_section(spec: Dict[str, Any], seed: int = 0) -> cg.GlobalSection:
    """Construct the global section described by ``spec``.

    Raises
    ------
    SpecError, ExprSyntaxError
        Malformed specs or expressions.
    NonGlobalSection
        Custom chart pairs that fail the transition rule.
    """
    family = spec.get("family")
    if family not in FAMILIES:
        raise SpecError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if family == "random":
        sec = build_section(_random_spec(spec.get("kind", "mobius"), seed))
    elif family == "mobius":
        a, b, c = (parse_complex(_require(spec, k), k) for k in "abc")
        sec = cg.family_mobius(a, b, c)
    elif family == "point_sphere":
        sec = cg.point_sphere(parse_vector(_require(spec, "p"), "p"))
    elif family == "tangent_field":
        if "preset" in spec:
            preset = spec["preset"]
            if preset == "perturbed_rotation":
                eps = spec.get("eps", 0.3)
                if isinstance(eps, bool) or not isinstance(eps, (int, float)):
                    raise SpecError(f"eps must be a number, got {eps!r}")
                sec = cg.perturbed_rotation(float(eps))
            elif preset == "rotation":
                sec = cg.family_tangent_field(cg.rotation_field(), name="rotation")
            else:
                raise SpecError(f"unknown tangent_field preset {preset!r}")
        else:
            try:
                poly = cg.poly_from_json(_require(spec, "field"))
                if cg.poly_degree(poly) > 3:
                    raise ValueError("tangent-field polynomials are limited to degree 3")
            except (TypeError, ValueError, AttributeError) as exc:
                raise SpecError(f"field: {exc}") from None
            sec = cg.family_tangent_field(poly)
    else:
        custom = _require(spec, "custom")
        if not isinstance(custom, dict) or "north" not in custom:
            raise SpecError("custom requires {'north': <expr>, 'south': <expr or 'auto'>}")
        sec = cg.section_from_exprs(custom["north"], custom.get("south", "auto"))
        cg.check_global(sec)
    if "translate" in spec:
        t = parse_vector(spec["translate"], "translate")
        sec = cg.translate(sec, cg.Translation.from_vector(t))
    return sec


# ---------------------------------------------------------------------------
# writers

def write_csv(path, rows: List[Dict[str, Any]]) -> None:
    rows = [jsonable(r) for r in rows]
    cols = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def write_obj(path, vertices, faces, comment: str = "") -> None:
    """Wavefront OBJ with 1-based face indices."""
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for v in vertices:
            fh.write("v {!r} {!r} {!r}\n".format(*map(float, v)))
        for f in faces:
            fh.write("f {} {} {}\n".format(*(int(i) + 1 for i in f)))


def read_obj(path):
    """Vertices and zero-based faces of an OBJ written by :func:`write_obj`."""
    verts, faces = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return np.array(verts), np.array(faces, dtype=int)
