"""Model files (JSON) and deterministic result documents.

Model file keys::

  q, vertices, edges        graph ([tail, head] pairs)
  kind                      ising | potts | clock | custom-difference |
                            custom-pairwise | custom-kbody
  couplings                 scalar, per-edge list of scalars, or per-edge tables
  fields                    optional; scalar, per-vertex list, or mapping
  kbody                     optional list of {"sites": [...], "table": [...]}
  embedding                 optional rotation system ([[edge, end], ...] per
                            vertex) or {"coordinates": [[x, y], ...]}
  beta                      inverse temperature
  name                      optional label

Complex table entries are written as ``{"re": x, "im": y}``; infinite
energies (forbidden states) as the strings ``"inf"`` / ``"-inf"``.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .model import Hamiltonian, ModelError, SpinGraph, make_model
from .numerics import ScaledComplex
from .transforms import RotationSystem

MODEL_KEYS = {"q", "vertices", "edges", "kind", "couplings", "fields", "kbody",
              "embedding", "beta", "name"}
Z_PRINT_LIMIT = 700.0


class ParseError(ValueError):
  """The model file is unreadable or does not describe a valid model."""


@dataclass(frozen=True, eq=False)
class ModelFile:
  """A parsed model file."""

  hamiltonian: Hamiltonian
  beta: float
  embedding: RotationSystem | None = None
  source: dict = field(default_factory=dict)


def _num(x, what: str) -> complex:
  if isinstance(x, dict):
    if set(x) - {"re", "im"}:
      raise ParseError(f"{what}: complex entries need only 're' and 'im'")
    return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
  if x in ("inf", "-inf"):
    return complex(float(x))
  if isinstance(x, bool) or not isinstance(x, (int, float)):
    raise ParseError(f"{what}: expected a number, got {x!r}")
  return complex(x)


def _table(x, what: str) -> np.ndarray:
  if isinstance(x, list):
    return np.array([_table(v, f"{what}[{i}]") for i, v in enumerate(x)])
  return np.asarray(_num(x, what))


def _items(x, n: int, what: str, tables: bool):
  """Scalar / list / mapping of scalars or tables."""
  conv = (lambda v, w: _table(v, w)) if tables else (lambda v, w: _num(v, w))
  if isinstance(x, dict) and not ({"re", "im"} >= set(x) and x):
    out = {}
    for k, v in x.items():
      try:
        i = int(k)
      except ValueError:
        raise ParseError(f"{what}: key {k!r} is not an integer id") from None
      out[i] = conv(v, f"{what}[{k}]")
    return out
  if isinstance(x, list):
    if len(x) != n:
      raise ParseError(f"{what}: expected {n} entries, got {len(x)}")
    return [conv(v, f"{what}[{i}]") for i, v in enumerate(x)]
  if tables:
    raise ParseError(f"{what}: expected per-item tables")
  return _num(x, what)


def parse_model(doc: dict, strict: bool = True) -> ModelFile:
  """Validate and build a model from a decoded JSON document.

  Raises:
    ParseError: unknown keys (strict), missing keys or invalid content.
  """
  if not isinstance(doc, dict):
    raise ParseError("model file must be a JSON object")
  unknown = sorted(set(doc) - MODEL_KEYS)
  if unknown:
    if strict:
      raise ParseError(f"unknown keys: {', '.join(unknown)}")
    warnings.warn(f"ignoring unknown keys: {', '.join(unknown)}", stacklevel=2)
  for k in ("q", "vertices", "edges", "kind"):
    if k not in doc:
      raise ParseError(f"missing key {k!r}")
  try:
    q, nv = int(doc["q"]), int(doc["vertices"])
    edges = [tuple(int(v) for v in e) for e in doc["edges"]]
    graph = SpinGraph(q, nv, edges)
  except (TypeError, ValueError) as ex:
    raise ParseError(f"graph: {ex}") from None
  kind = doc["kind"]
  ne = graph.num_edges
  custom = kind.startswith("custom-") if isinstance(kind, str) else False
  params: dict[str, Any] = {}
  try:
    if "couplings" in doc:
      if custom:
        params["tables"] = _items(doc["couplings"], ne, "couplings", tables=True)
      else:
        key = "J" if kind == "ising" else "epsilon"
        params[key] = _items(doc["couplings"], ne, "couplings", tables=False)
    elif kind != "custom-kbody":
      raise ParseError("missing key 'couplings'")
    if doc.get("fields") is not None:
      if custom:
        params["field_tables"] = _items(doc["fields"], nv, "fields", tables=True)
      else:
        params["B"] = _items(doc["fields"], nv, "fields", tables=False)
    if doc.get("kbody") is not None:
      if kind != "custom-kbody":
        raise ParseError("'kbody' terms require kind custom-kbody")
      terms = []
      for i, t in enumerate(doc["kbody"]):
        if not isinstance(t, dict) or set(t) != {"sites", "table"}:
          raise ParseError(f"kbody[{i}] must have exactly 'sites' and 'table'")
        terms.append(([int(s) for s in t["sites"]], _table(t["table"], f"kbody[{i}].table")))
      params["kbody"] = terms
    h = make_model(kind, graph, **params)
  except ModelError as ex:
    raise ParseError(str(ex)) from None
  if doc.get("name"):
    h = Hamiltonian(h.graph, h.kind, h.edge_terms, h.vertex_terms, h.kbody_terms,
                    name=str(doc["name"]))
  beta = doc.get("beta", 1.0)
  if isinstance(beta, bool) or not isinstance(beta, (int, float)) or not math.isfinite(beta):
    raise ParseError(f"beta must be a finite number, got {beta!r}")
  emb = None
  if doc.get("embedding") is not None:
    e = doc["embedding"]
    try:
      if isinstance(e, dict):
        if set(e) != {"coordinates"}:
          raise ParseError("embedding object must have only 'coordinates'")
        emb = RotationSystem.from_coordinates(graph, e["coordinates"])
      else:
        emb = RotationSystem(tuple(tuple(tuple(x) for x in r) for r in e))
      emb.validate(graph)
    except (TypeError, ValueError, IndexError) as ex:
      raise ParseError(f"embedding: {ex}") from None
  return ModelFile(h, float(beta), emb, doc)


def load_model(path: str, strict: bool = True) -> ModelFile:
  try:
    with open(path, encoding="utf-8") as f:
      doc = json.load(f)
  except OSError as ex:
    raise ParseError(f"cannot read {path}: {ex.strerror}") from None
  except json.JSONDecodeError as ex:
    raise ParseError(f"{path}: invalid JSON at line {ex.lineno}: {ex.msg}") from None
  return parse_model(doc, strict)


def _enc_num(z: complex):
  z = complex(z)
  if math.isinf(z.real) and z.imag == 0:
    return "inf" if z.real > 0 else "-inf"
  if z.imag == 0:
    return float(z.real)
  return {"re": float(z.real), "im": float(z.imag)}


def _enc_table(a: np.ndarray):
  a = np.asarray(a)
  if a.ndim == 0:
    return _enc_num(a.item())
  return [_enc_table(x) for x in a]


def model_to_doc(h: Hamiltonian, beta: float, embedding: RotationSystem | None = None) -> dict:
  """Explicit-table model document (custom kinds) for any Hamiltonian."""
  g = h.graph
  kind = {"difference": "custom-difference", "pairwise": "custom-pairwise",
          "kbody": "custom-kbody"}[h.kind]
  doc: dict[str, Any] = {"q": g.q, "vertices": g.num_vertices,
                         "edges": [list(e) for e in g.edges], "kind": kind,
                         "beta": float(beta)}
  if h.kind != "kbody" or (h.edge_terms and len(h.edge_terms) == g.num_edges):
    doc["couplings"] = [_enc_table(h.edge_terms[e].values) for e in range(g.num_edges)]
  elif h.edge_terms:
    doc["couplings"] = {str(e): _enc_table(t.values) for e, t in sorted(h.edge_terms.items())}
  if h.vertex_terms:
    doc["fields"] = {str(v): _enc_table(t.values) for v, t in sorted(h.vertex_terms.items())}
  if h.kbody_terms:
    doc["kbody"] = [{"sites": list(t.sites), "table": _enc_table(t.values)}
                    for t in h.kbody_terms]
  if embedding is not None:
    doc["embedding"] = embedding.to_lists()
  if h.name:
    doc["name"] = h.name
  return doc


def canonical_json(doc) -> str:
  return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def model_digest(h: Hamiltonian) -> str:
  """Content hash of the model (graph and every table), independent of file layout."""
  d = model_to_doc(h, 0.0)
  d.pop("beta")
  d.pop("name", None)
  return hashlib.sha256(canonical_json(d).encode()).hexdigest()[:16]


def encode_log(z: ScaledComplex) -> dict:
  """``log Z`` (and ``Z`` when representable) as JSON-ready fields."""
  if z.is_zero():
    return {"log_z": None, "z": {"re": 0.0, "im": 0.0}}
  lz = z.log()
  out = {"log_z": {"re": float(lz.real), "im": float(lz.imag)}}
  if abs(lz) < Z_PRINT_LIMIT:
    v = z.value()
    out["z"] = {"re": float(v.real), "im": float(v.imag)}
  return out


def result_document(command: str, **fields) -> dict:
  """Result document with a content digest over all other fields."""
  doc = {"command": command}
  doc.update({k: v for k, v in fields.items() if v is not None})
  doc["digest"] = hashlib.sha256(canonical_json(doc).encode()).hexdigest()[:16]
  return doc


def dump_document(doc: dict) -> str:
  """Deterministic text form (sorted keys, fixed indentation, trailing newline)."""
  return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
