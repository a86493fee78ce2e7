"""Interaction graphs, Hamiltonian tables and Boltzmann weight vectors.

A model is described by an oriented multigraph over ``num_vertices`` spins
taking values in ``Z_q`` and a set of energy tables. Three model kinds exist:

* ``difference``: one table per edge indexed by ``(s_head - s_tail) mod q``,
  plus optional per-vertex field tables.
* ``pairwise``: one ``q x q`` table per edge indexed by ``(s_tail, s_head)``,
  plus optional per-vertex field tables.
* ``kbody``: arbitrary k-body terms (and optionally edge/field tables).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

KINDS = ("ising", "potts", "clock", "custom-difference", "custom-pairwise",
         "custom-kbody")


class ModelError(ValueError):
  """Raised for malformed graphs, tables or model parameters."""


def _frozen(a: np.ndarray) -> np.ndarray:
  a.setflags(write=False)
  return a


@dataclass(frozen=True, eq=False)
class SpinGraph:
  """Oriented multigraph with spin dimension ``q``.

  Attributes:
    q: Number of spin states per vertex.
    num_vertices: Number of vertices, ids ``0..num_vertices-1``.
    edges: Tuple of ``(tail, head)`` pairs. The edge id is the list index.
  """

  q: int
  num_vertices: int
  edges: tuple = ()

  def __post_init__(self):
    if int(self.q) != self.q or self.q < 2:
      raise ModelError(f"q must be an integer >= 2, got {self.q}")
    if int(self.num_vertices) != self.num_vertices or self.num_vertices < 1:
      raise ModelError(f"num_vertices must be >= 1, got {self.num_vertices}")
    nv = int(self.num_vertices)
    raw = list(self.edges)
    try:
      arr = np.array(raw, dtype=np.int64).reshape(len(raw), 2)
    except (ValueError, TypeError):
      for e, pair in enumerate(raw):
        if len(pair) != 2:
          raise ModelError(f"edge {e} is not a (tail, head) pair")
      raise ModelError("edge endpoints must be integers")
    if not np.array_equal(arr, np.array(raw, dtype=float).reshape(arr.shape)):
      raise ModelError("edge endpoints must be integers")
    bad = np.flatnonzero(((arr < 0) | (arr >= nv)).any(axis=1))
    if bad.size:
      e = int(bad[0])
      v = next(int(x) for x in arr[e] if not 0 <= x < nv)
      raise ModelError(f"edge {e} references unknown vertex {v}")
    loops = np.flatnonzero(arr[:, 0] == arr[:, 1])
    if loops.size:
      e = int(loops[0])
      raise ModelError(f"edge {e} is a self-loop at vertex {int(arr[e, 0])}")
    object.__setattr__(self, "q", int(self.q))
    object.__setattr__(self, "num_vertices", nv)
    object.__setattr__(self, "edges", tuple(map(tuple, arr.tolist())))
    object.__setattr__(self, "_arr", _frozen(arr))

  @property
  def edge_array(self) -> np.ndarray:
    """Read-only ``(num_edges, 2)`` array of (tail, head)."""
    return self._arr

  @property
  def num_edges(self) -> int:
    return len(self.edges)

  def degrees(self) -> np.ndarray:
    deg = np.zeros(self.num_vertices, dtype=np.int64)
    for t, h in self.edges:
      deg[t] += 1
      deg[h] += 1
    return deg

  def incident_edges(self, v: int) -> list[int]:
    return [e for e, (t, h) in enumerate(self.edges) if v in (t, h)]

  def with_q(self, q: int) -> "SpinGraph":
    return SpinGraph(q, self.num_vertices, self.edges)

  def __eq__(self, other):
    if not isinstance(other, SpinGraph):
      return NotImplemented
    return (self.q, self.num_vertices, self.edges) == (
        other.q, other.num_vertices, other.edges)

  def __hash__(self):
    return hash((self.q, self.num_vertices, self.edges))


def _as_table(values, shape: tuple, what: str) -> np.ndarray:
  a = np.asarray(values, dtype=np.complex128)
  if a.size != math.prod(shape):
    raise ModelError(f"{what}: expected {math.prod(shape)} entries, got {a.size}")
  return _frozen(a.reshape(shape).copy())


@dataclass(frozen=True, eq=False)
class EdgeEnergyTable:
  """Difference-form edge energy ``h_e(j)``, ``j = (s_head - s_tail) mod q``."""

  values: np.ndarray

  def __post_init__(self):
    a = np.asarray(self.values, dtype=np.complex128)
    if a.ndim != 1:
      raise ModelError("edge energy table must be one-dimensional")
    object.__setattr__(self, "values", _frozen(a.copy()))

  @property
  def q(self) -> int:
    return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class VertexFieldTable:
  """Local field energy ``b_v(j)``."""

  values: np.ndarray

  def __post_init__(self):
    a = np.asarray(self.values, dtype=np.complex128)
    if a.ndim != 1:
      raise ModelError("vertex field table must be one-dimensional")
    object.__setattr__(self, "values", _frozen(a.copy()))

  @property
  def q(self) -> int:
    return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class PairwiseTable:
  """General two-body energy ``h(s_tail, s_head)`` as a ``q x q`` table."""

  values: np.ndarray

  def __post_init__(self):
    a = np.asarray(self.values, dtype=np.complex128)
    if a.ndim == 1:
      n = math.isqrt(a.size)
      if n * n != a.size:
        raise ModelError("pairwise table must have q*q entries")
      a = a.reshape(n, n)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
      raise ModelError("pairwise table must be square")
    object.__setattr__(self, "values", _frozen(a.copy()))

  @property
  def q(self) -> int:
    return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class KBodyTerm:
  """Energy term ``h(s_1, ..., s_k)`` on an ordered tuple of distinct sites.

  ``values`` is stored with shape ``(q,) * k``; axis ``i`` is ``sites[i]``.
  """

  sites: tuple
  values: np.ndarray
  q: int = 0

  def __post_init__(self):
    sites = tuple(int(s) for s in self.sites)
    if len(sites) < 1:
      raise ModelError("k-body term needs at least one site")
    if len(set(sites)) != len(sites):
      raise ModelError(f"k-body term sites must be distinct, got {sites}")
    a = np.asarray(self.values, dtype=np.complex128)
    k = len(sites)
    q = self.q or (a.shape[0] if a.ndim == k else round(a.size ** (1.0 / k)))
    if q < 2 or a.size != q ** k:
      raise ModelError(f"k-body table on {k} sites must have q^{k} entries")
    object.__setattr__(self, "sites", sites)
    object.__setattr__(self, "q", int(q))
    object.__setattr__(self, "values", _frozen(a.reshape((q,) * k).copy()))

  @property
  def k(self) -> int:
    return len(self.sites)


@dataclass(frozen=True, eq=False)
class Hamiltonian:
  """A spin model: graph plus energy tables of one declared kind.

  Attributes:
    graph: Interaction pattern.
    kind: ``"difference"``, ``"pairwise"`` or ``"kbody"``.
    edge_terms: Mapping edge id -> table. Difference and pairwise models
      carry a table for every edge; kbody models may carry any subset.
    vertex_terms: Mapping vertex id -> VertexFieldTable.
    kbody_terms: Tuple of KBodyTerm.
    name: Informational label of the generating family (``"ising"`` ...).
  """

  graph: SpinGraph
  kind: str
  edge_terms: Mapping = field(default_factory=dict)
  vertex_terms: Mapping = field(default_factory=dict)
  kbody_terms: tuple = ()
  name: str = ""

  def __post_init__(self):
    g = self.graph
    if self.kind not in ("difference", "pairwise", "kbody"):
      raise ModelError(f"unknown model kind {self.kind!r}")
    et = {int(e): t for e, t in dict(self.edge_terms).items()}
    if et and (min(et) < 0 or max(et) >= g.num_edges):
      e = min(et) if min(et) < 0 else max(et)
      raise ModelError(f"edge term references unknown edge {e}")
    uniq = {id(t): (e, t) for e, t in et.items()}
    for e, t in uniq.values():
      if t.q != g.q:
        raise ModelError(f"edge {e}: table is for q={t.q}, graph has q={g.q}")
    types = {type(t) for _, t in uniq.values()}
    if len(types) > 1:
      raise ModelError("edge tables must be of one kind per model")
    if self.kind == "difference":
      if types - {EdgeEnergyTable}:
        raise ModelError("difference-form model needs EdgeEnergyTable entries")
    if self.kind == "pairwise":
      if types - {PairwiseTable}:
        raise ModelError("pairwise model needs PairwiseTable entries")
    if self.kind in ("difference", "pairwise"):
      missing = [] if len(et) == g.num_edges else \
          [e for e in range(g.num_edges) if e not in et]
      if missing:
        raise ModelError(f"missing edge table for edge {missing[0]}")
      if self.kbody_terms:
        raise ModelError(f"{self.kind} model cannot carry k-body terms")
    vt = {int(v): t for v, t in dict(self.vertex_terms).items()}
    if vt and (min(vt) < 0 or max(vt) >= g.num_vertices):
      v = min(vt) if min(vt) < 0 else max(vt)
      raise ModelError(f"field references unknown vertex {v}")
    for v, t in {id(t): (v, t) for v, t in vt.items()}.values():
      if not isinstance(t, VertexFieldTable) or t.q != g.q:
        raise ModelError(f"vertex {v}: field table must have length {g.q}")
    kb = tuple(self.kbody_terms)
    for term in kb:
      if term.q != g.q:
        raise ModelError(f"k-body term on {term.sites} has wrong q")
      for s in term.sites:
        if not 0 <= s < g.num_vertices:
          raise ModelError(f"k-body term references unknown vertex {s}")
    object.__setattr__(self, "edge_terms", et)
    object.__setattr__(self, "vertex_terms", vt)
    object.__setattr__(self, "kbody_terms", kb)

  @property
  def q(self) -> int:
    return self.graph.q

  @property
  def has_fields(self) -> bool:
    return bool(self.vertex_terms)

  def pairwise_tables(self) -> dict[int, np.ndarray]:
    """Edge tables as ``q x q`` arrays indexed by ``(s_tail, s_head)``."""
    q = self.q
    out = {}
    for e, t in self.edge_terms.items():
      if isinstance(t, PairwiseTable):
        out[e] = np.array(t.values)
      else:
        j = (np.arange(q)[None, :] - np.arange(q)[:, None]) % q
        out[e] = t.values[j]
    return out


@dataclass(frozen=True, eq=False)
class WeightVector:
  """Amplitudes with a shared real log scale.

  The represented vector is ``amplitudes * exp(log_scale)``. Entries may be
  complex, zero or negative.
  """

  amplitudes: np.ndarray
  log_scale: float = 0.0

  def __post_init__(self):
    a = np.asarray(self.amplitudes, dtype=np.complex128)
    object.__setattr__(self, "amplitudes", _frozen(a.copy()))
    object.__setattr__(self, "log_scale", float(self.log_scale))

  def __len__(self):
    return self.amplitudes.size

  def dense(self) -> np.ndarray:
    """Amplitudes with the scale applied (may overflow for extreme scales)."""
    return self.amplitudes * math.exp(self.log_scale)

  def normalized(self) -> "WeightVector":
    """Rescale so the largest magnitude equals one."""
    m = float(np.max(np.abs(self.amplitudes))) if self.amplitudes.size else 0.0
    if m == 0.0 or not math.isfinite(m):
      return self
    return WeightVector(self.amplitudes / m, self.log_scale + math.log(m))


def _per_item(value, n: int, what: str, optional: bool = False):
  """Expand a scalar / sequence / mapping parameter to a dict over range(n)."""
  if value is None:
    if optional:
      return {}
    raise ModelError(f"missing parameter {what}")
  if isinstance(value, Mapping):
    out = {int(k): v for k, v in value.items()}
    if not optional:
      missing = [i for i in range(n) if i not in out]
      if missing:
        raise ModelError(f"missing {what} for item {missing[0]}")
    return out
  if np.isscalar(value):
    return {i: value for i in range(n)}
  seq = list(value)
  if len(seq) != n:
    raise ModelError(f"{what}: expected {n} values, got {len(seq)}")
  return {i: v for i, v in enumerate(seq)}


def _memo(factory):
  """Share one table object per distinct parameter value."""
  cache = {}

  def get(x):
    t = cache.get(x)
    if t is None:
      t = cache[x] = factory(x)
    return t

  return get


def make_model(kind: str, graph: SpinGraph, **params) -> Hamiltonian:
  """Build a Hamiltonian from a named family or explicit tables.

  Args:
    kind: One of ``ising``, ``potts``, ``clock``, ``custom-difference``,
      ``custom-pairwise``, ``custom-kbody``.
    graph: Interaction graph.
    **params: Family parameters.
      ising: ``J`` (per edge) and optional ``B`` (per vertex);
        ``h_e(j) = J_e j`` and ``b_v(j) = B_v (j - 1/2)``.
      potts / clock: ``epsilon`` (per edge) and optional ``B`` (per vertex)
        with ``b_v(j) = B_v (j - (q-1)/2)``.
      custom-difference: ``tables`` (per edge, length q), optional
        ``field_tables`` (per vertex, length q).
      custom-pairwise: ``tables`` (per edge, q x q), optional
        ``field_tables``.
      custom-kbody: ``kbody`` list of ``(sites, table)``, optional
        ``tables`` (difference form per edge) and ``field_tables``.
      Per-item parameters accept a scalar (uniform), a sequence or a mapping.

  Returns:
    The Hamiltonian.

  Raises:
    ModelError: unknown kind, q mismatch, missing parameters, bad tables.
  """
  q = graph.q
  ne, nv = graph.num_edges, graph.num_vertices
  j = np.arange(q)
  known = {
      "ising": {"J", "B"},
      "potts": {"epsilon", "B"},
      "clock": {"epsilon", "B"},
      "custom-difference": {"tables", "field_tables"},
      "custom-pairwise": {"tables", "field_tables"},
      "custom-kbody": {"kbody", "tables", "field_tables"},
  }
  if kind not in known:
    raise ModelError(f"unknown model kind {kind!r}")
  extra = set(params) - known[kind]
  if extra:
    raise ModelError(f"unexpected parameters for {kind}: {sorted(extra)}")

  fields = {}
  if kind == "ising":
    if q != 2:
      raise ModelError(f"ising requires q=2, graph has q={q}")
    couplings = _per_item(params.get("J"), ne, "J")
    make = _memo(lambda c: EdgeEnergyTable(c * j))
    edges = {e: make(complex(c)) for e, c in couplings.items()}
    bs = _per_item(params.get("B"), nv, "B", optional=True)
    make = _memo(lambda b: VertexFieldTable(b * (j - 0.5)))
    fields = {v: make(complex(b)) for v, b in bs.items()}
    return Hamiltonian(graph, "difference", edges, fields, name=kind)

  if kind in ("potts", "clock"):
    eps = _per_item(params.get("epsilon"), ne, "epsilon")
    if kind == "potts":
      make = _memo(lambda x: EdgeEnergyTable(np.where(j == 0, -x, 0.0)))
    else:
      make = _memo(lambda x: EdgeEnergyTable(-x * np.cos(2 * np.pi * j / q)))
    edges = {e: make(complex(x)) for e, x in eps.items()}
    bs = _per_item(params.get("B"), nv, "B", optional=True)
    make = _memo(lambda b: VertexFieldTable(b * (j - (q - 1) / 2)))
    fields = {v: make(complex(b)) for v, b in bs.items()}
    return Hamiltonian(graph, "difference", edges, fields, name=kind)

  ft = _per_item(params.get("field_tables"), nv, "field_tables", optional=True)
  for v, t in ft.items():
    fields[v] = VertexFieldTable(_as_table(t, (q,), f"field table of vertex {v}"))

  if kind == "custom-difference":
    tabs = _per_item(params.get("tables"), ne, "tables")
    edges = {e: EdgeEnergyTable(_as_table(t, (q,), f"table of edge {e}"))
             for e, t in tabs.items()}
    return Hamiltonian(graph, "difference", edges, fields, name=kind)

  if kind == "custom-pairwise":
    tabs = _per_item(params.get("tables"), ne, "tables")
    edges = {e: PairwiseTable(_as_table(t, (q, q), f"table of edge {e}"))
             for e, t in tabs.items()}
    return Hamiltonian(graph, "pairwise", edges, fields, name=kind)

  tabs = _per_item(params.get("tables"), ne, "tables", optional=True)
  edges = {e: EdgeEnergyTable(_as_table(t, (q,), f"table of edge {e}"))
           for e, t in tabs.items()}
  terms = []
  for sites, table in params.get("kbody") or ():
    sites = tuple(sites)
    terms.append(KBodyTerm(sites, _as_table(table, (q,) * len(sites),
                                            f"k-body table on {sites}"), q))
  return Hamiltonian(graph, "kbody", edges, fields, tuple(terms), name=kind)


def log_weights(energies, beta: float) -> np.ndarray:
  """``-beta * E`` elementwise, with real and imaginary parts scaled separately.

  An infinite energy keeps a zero imaginary part, and ``beta = 0`` acts as the
  limit ``beta -> 0+`` (``+inf`` energy stays forbidden).
  """
  e = np.asarray(energies, dtype=np.complex128)
  with np.errstate(invalid="ignore"):
    re = -beta * e.real
    im = -beta * e.imag
  re = np.where(np.isnan(re), np.where(e.real > 0, -np.inf, np.inf), re)
  im = np.where(np.isfinite(re) & np.isfinite(im), im, 0.0)
  return re + 1j * im


def boltzmann_weights(table, beta: float, cos_multiplicity: int = 0) -> WeightVector:
  """Boltzmann weights ``cos(2 pi j/q)^m exp(-beta table[j])``.

  Args:
    table: Any energy table type. Multi-index tables are flattened in
      row-major order.
    beta: Inverse temperature (finite).
    cos_multiplicity: Power of the cosine factor; vertex tables only.

  Returns:
    WeightVector with the largest magnitude scaled to one (when nonzero).
  """
  if not math.isfinite(beta):
    raise ModelError("beta must be finite")
  if cos_multiplicity and not isinstance(table, VertexFieldTable):
    raise ModelError("cos_multiplicity is only valid for vertex field tables")
  if cos_multiplicity < 0:
    raise ModelError("cos_multiplicity must be >= 0")
  vals = np.asarray(table.values, dtype=np.complex128).ravel()
  expo = log_weights(vals, beta)
  finite = np.isfinite(expo.real)
  shift = float(np.max(expo.real[finite])) if finite.any() else 0.0
  with np.errstate(over="ignore", invalid="ignore"):
    amps = np.where(expo.real == -np.inf, 0.0, np.exp(expo - shift))
  if np.any(expo.real == np.inf):
    raise ModelError("energy table contains -inf (infinite weight)")
  if cos_multiplicity:
    q = vals.size
    amps = amps * np.cos(2 * np.pi * np.arange(q) / q) ** cos_multiplicity
  return WeightVector(amps, shift).normalized()


def energy(h: Hamiltonian, config: Sequence[int]) -> complex:
  """Evaluate ``H(config)`` by summing every declared term."""
  s = np.asarray(config, dtype=np.int64)
  g = h.graph
  if s.shape != (g.num_vertices,):
    raise ModelError(f"config must have length {g.num_vertices}")
  if np.any((s < 0) | (s >= g.q)):
    raise ModelError("config entries must lie in [0, q)")
  total = 0j
  for e, t in h.edge_terms.items():
    a, b = g.edges[e]
    if isinstance(t, PairwiseTable):
      total += t.values[s[a], s[b]]
    else:
      total += t.values[(s[b] - s[a]) % g.q]
  for v, t in h.vertex_terms.items():
    total += t.values[s[v]]
  for term in h.kbody_terms:
    total += term.values[tuple(s[list(term.sites)])]
  return complex(total)


def as_pairwise(h: Hamiltonian) -> Hamiltonian:
  """Rewrite a difference-form model as an equivalent pairwise model."""
  if h.kind == "pairwise":
    return h
  if h.kind != "difference":
    raise ModelError("only difference-form models convert to pairwise form")
  tabs = {e: PairwiseTable(t) for e, t in h.pairwise_tables().items()}
  return Hamiltonian(h.graph, "pairwise", tabs, h.vertex_terms, name=h.name)


def as_kbody(h: Hamiltonian) -> Hamiltonian:
  """Rewrite any model with every interaction as a k-body term."""
  if h.kind == "kbody" and not h.edge_terms:
    return h
  g = h.graph
  terms = list(h.kbody_terms)
  for e, t in sorted(h.pairwise_tables().items()):
    terms.append(KBodyTerm(g.edges[e], t, g.q))
  return Hamiltonian(g, "kbody", {}, h.vertex_terms, tuple(terms), name=h.name)


def interaction_sites(h: Hamiltonian) -> list[tuple]:
  """Site tuples of all multi-site terms (edges and k-body terms)."""
  g = h.graph
  out = [g.edges[e] for e in sorted(h.edge_terms)]
  out.extend(t.sites for t in h.kbody_terms)
  return out


def iter_configs(nv: int, q: int) -> Iterable[tuple]:
  """All configurations in lexicographic order (test helper)."""
  import itertools
  return itertools.product(range(q), repeat=nv)
