"""JSON graph configs, builtin presets and content hashing."""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .graph_model import (
    CompactGraph,
    Edge,
    VertexCondition,
    build_gamma1,
    build_gamma2,
    floquet_loop,
    neumann_interval,
)

SCHEMA_VERSION = "qgband-config-1"

_number = {"type": "number"}
_condition = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["Dirichlet", "DeltaType", "QuasiNK"]},
        "gamma": _number,
        "phases": {
            "type": "array",
            "items": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
        },
    },
}

SCHEMA = {
    "type": "object",
    "required": ["schema", "vertices", "edges"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "floquet_vertex": {"type": "string"},
        "reference_vertex": {"type": "string"},
        "vertices": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "condition"],
                "additionalProperties": False,
                "properties": {"id": {"type": "string"}, "condition": _condition},
            },
        },
        "edges": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "from", "to", "length"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string"},
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "length": _number,
                    "potential": {
                        "type": "array",
                        "items": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                    },
                },
            },
        },
    },
}


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def validate(doc: dict) -> None:
    """Schema check; the error names the offending field path."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(f"config field {_path(err.absolute_path)}: {err.message}")


def graph_from_config(doc: dict) -> CompactGraph:
    validate(doc)
    verts = []
    for i, v in enumerate(doc["vertices"]):
        c = v["condition"]
        try:
            if c["kind"] == "Dirichlet":
                cond = VertexCondition.dirichlet()
            elif c["kind"] == "DeltaType":
                cond = VertexCondition.delta(c.get("gamma", 0.0))
            else:
                phases = [complex(re, im) for re, im in c.get("phases", [])]
                cond = VertexCondition.quasi_nk(phases, c.get("gamma", 0.0))
        except ConfigError as err:
            raise ConfigError(f"config field vertices[{i}].condition: {err}") from err
        verts.append((v["id"], cond))
    edges = []
    for i, e in enumerate(doc["edges"]):
        potential = e.get("potential")
        try:
            edges.append(Edge(e["id"], e["from"], e["to"], e["length"],
                              tuple(tuple(p) for p in potential) if potential else ()))
        except ConfigError as err:
            raise ConfigError(f"config field edges[{i}]: {err}") from err
    return CompactGraph(tuple(verts), tuple(edges), name=doc.get("name", ""))


def config_from_graph(g: CompactGraph, **extra) -> dict:
    verts = []
    for v, c in g.vertices:
        cond = {"kind": c.kind.value}
        if not c.is_dirichlet:
            cond["gamma"] = c.gamma
        if c.phases:
            cond["phases"] = [[z.real, z.imag] for z in c.phases]
        verts.append({"id": v, "condition": cond})
    edges = [{"id": e.id, "from": e.tail, "to": e.head, "length": e.length,
              "potential": [list(p) for p in e.potential]} for e in g.edges]
    doc = {"schema": SCHEMA_VERSION, "name": g.name, "vertices": verts, "edges": edges}
    doc.update(extra)
    return doc


def config_hash(doc: dict) -> str:
    """SHA-256 of the canonical JSON form."""
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def load_config(path) -> dict:
    """Read and validate a config file; JSON syntax errors report line and column."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from err
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from err
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    graph_from_config(doc)
    return doc


def _gamma1_doc():
    return config_from_graph(build_gamma1([1, 1, 1, 1], 0.0, 1.0), name="gamma1-equilateral",
                             floquet_vertex="B", reference_vertex="A")


def _gamma2_doc():
    return config_from_graph(build_gamma2([1, 1, 1, 1, 1]), name="gamma2-equilateral",
                             floquet_vertex="B", reference_vertex="A")


def _interval_doc():
    return config_from_graph(neumann_interval(1.0), name="neumann-interval")


def _loop_doc():
    return config_from_graph(floquet_loop(1.0), name="floquet-loop", floquet_vertex="V")


GRAPH_PRESETS = {
    "gamma1-equilateral": _gamma1_doc,
    "gamma2-equilateral": _gamma2_doc,
    "neumann-interval": _interval_doc,
    "floquet-loop": _loop_doc,
}
POLYGON_PRESETS = {"fig5-polygon": (1.1, 0.95, 0.9, 1.0)}
ALIASES = {"preset-gamma1": "gamma1-equilateral", "gamma1": "gamma1-equilateral",
           "preset-gamma2": "gamma2-equilateral", "gamma2": "gamma2-equilateral",
           "preset-fig5": "fig5-polygon", "fig5": "fig5-polygon",
           "smooth-quadrangle": "fig5-polygon"}


def preset_names() -> list[str]:
    return sorted([*GRAPH_PRESETS, *POLYGON_PRESETS])


def resolve_preset(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in GRAPH_PRESETS and name not in POLYGON_PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(preset_names())}")
    return name


def preset_config(name: str) -> dict:
    name = resolve_preset(name)
    if name not in GRAPH_PRESETS:
        raise ConfigError(f"preset {name!r} describes a polygon, not a graph")
    return copy.deepcopy(GRAPH_PRESETS[name]())
