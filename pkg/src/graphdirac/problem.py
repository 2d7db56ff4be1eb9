"""JSON problem files and the bundled presets."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import DimensionMismatch, SchemaError
from .graph import Graph, build_graph
from .metric import CASES, MetricProblem, SecularSolverConfig
from .vertex_space import KINDS, VertexSpace, make_space

_number = {"type": "number"}
_complex = {
    "oneOf": [
        _number,
        {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
    ]
}
_matrix = {"type": "array", "items": {"type": "array", "items": _complex}}
_vertex_id = {"type": ["integer", "string"]}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["graph", "space"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "graph": {
            "type": "object",
            "required": ["vertices", "edges"],
            "additionalProperties": False,
            "properties": {
                "vertices": {"type": "array", "items": _vertex_id, "minItems": 1},
                "edges": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["src", "dst"],
                        "additionalProperties": False,
                        "properties": {
                            "src": _vertex_id,
                            "dst": _vertex_id,
                            "length": {
                                "oneOf": [
                                    {"type": "number", "exclusiveMinimum": 0},
                                    {"type": "string", "pattern": r"^\s*\d+(\s*/\s*\d+)?\s*$"},
                                ]
                            },
                        },
                    },
                },
            },
        },
        "space": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(KINDS)},
                "alpha": {
                    "oneOf": [
                        {"type": "array", "items": _number},
                        {"type": "object", "additionalProperties": _number},
                    ]
                },
                "custom": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "matrices": {"type": "object", "additionalProperties": _matrix},
                        "bases": {"type": "object", "additionalProperties": _matrix},
                    },
                },
            },
        },
        "L": {
            "oneOf": [
                {"type": "number", "minimum": 0},
                {"type": "object", "additionalProperties": _matrix},
            ]
        },
        "case": {"enum": list(CASES)},
        "dims": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mu_min": {"type": "number", "exclusiveMinimum": 0},
                "mu_max": {"type": "number", "exclusiveMinimum": 0},
                "grid_points": {"type": "integer", "minimum": 2},
                "refine_tol": {"type": "number", "exclusiveMinimum": 0},
                "multiplicity_tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}


@dataclass(frozen=True, eq=False)
class ProblemFile:
    name: str
    raw: dict
    graph: Graph
    space: VertexSpace
    L: np.ndarray
    case: str
    dims: dict
    solver: dict

    def metric_problem(self, case: str = None) -> MetricProblem:
        return MetricProblem(self.graph, self.space, self.L, case or self.case)

    def solver_config(self, **overrides) -> SecularSolverConfig:
        kw = dict(self.solver)
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return SecularSolverConfig(**kw)


def _to_complex(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def complex_matrix(rows) -> np.ndarray:
    if not rows:
        return np.zeros((0, 0), complex)
    return np.array([[_to_complex(x) for x in row] for row in rows], complex)


def _path(err) -> str:
    out = ""
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def validate(doc: dict, source: str = "<problem>") -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(f"{source}: {_path(err)}: {err.message}")


def _lookup(mapping, v):
    if v in mapping:
        return mapping[v]
    return mapping.get(str(v))


def problem_from_dict(doc: dict, source: str = "<problem>") -> ProblemFile:
    validate(doc, source)
    gdoc = doc["graph"]
    specs = [(e["src"], e["dst"], e.get("length", 1)) for e in gdoc["edges"]]
    g = build_graph(gdoc["vertices"], specs)

    sdoc = doc["space"]
    kind = sdoc["kind"]
    params = {}
    if kind == "magnetic":
        if "alpha" not in sdoc:
            raise SchemaError(f"{source}: space.alpha is required for a magnetic space")
        params["alpha"] = sdoc["alpha"]
    if kind == "custom":
        custom = sdoc.get("custom") or {}
        if "matrices" in custom:
            params["matrices"] = {k: complex_matrix(m) for k, m in custom["matrices"].items()}
        elif "bases" in custom:
            params["bases"] = {k: complex_matrix(b) for k, b in custom["bases"].items()}
        else:
            raise SchemaError(f"{source}: space.custom needs 'matrices' or 'bases'")
    s = make_space(g, kind, params)

    L = _read_L(doc.get("L"), g, s, source)
    dims = {}
    if "dims" in doc:
        for v in g.vertices:
            k = _lookup(doc["dims"], v)
            if k is None:
                raise SchemaError(f"{source}: dims has no entry for vertex {v!r}")
            if k > g.deg(v):
                raise DimensionMismatch(f"{source}: dims[{v!r}] = {k} exceeds degree {g.deg(v)}")
            dims[v] = int(k)
    else:
        dims = s.dims()
    return ProblemFile(
        name=doc.get("name", source),
        raw=doc,
        graph=g,
        space=s,
        L=L,
        case=doc.get("case", "simple"),
        dims=dims,
        solver=dict(doc.get("solver", {})),
    )


def _read_L(spec, g: Graph, s: VertexSpace, source: str) -> np.ndarray:
    n = s.dim
    if spec is None:
        return np.zeros((n, n), complex)
    if not isinstance(spec, dict):
        return float(spec) * np.eye(n, dtype=complex)
    L = np.zeros((n, n), complex)
    o = 0
    for v in g.vertices:
        k = s.dim_at(v)
        block = _lookup(spec, v)
        if block is not None:
            b = complex_matrix(block)
            if b.shape != (k, k):
                raise DimensionMismatch(
                    f"{source}: L[{v!r}] has shape {b.shape}, dim G_v is {k}"
                )
            L[o:o + k, o:o + k] = b
        o += k
    return L


def load_problem(path) -> ProblemFile:
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return problem_from_dict(doc, str(path))


def preset_names() -> list:
    root = resources.files("graphdirac") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def preset_document(name: str) -> dict:
    root = resources.files("graphdirac") / "presets"
    target = root / f"{name}.json"
    if not target.is_file():
        raise SchemaError(f"no problem file or preset named {name!r}; presets: {', '.join(preset_names())}")
    return json.loads(target.read_text())


def resolve_problem(arg: str) -> ProblemFile:
    """A path to a problem file, or the name of a bundled preset."""
    if Path(arg).is_file():
        return load_problem(arg)
    return problem_from_dict(preset_document(arg), f"preset:{arg}")
