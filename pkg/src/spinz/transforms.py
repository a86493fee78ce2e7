"""Fourier duality on planar graphs and stabilizer gauge symmetries.

Duality: with ``w'[j] = q^-1/2 sum_k exp(-2 pi i k j / q) w[k]`` on every
edge, the partition function on a connected planar graph G equals, up to a
coupling-independent power of q, the one on its planar dual D whose
orientation makes every dual incidence row a cycle of G.

Symmetries: a stabilizer word ``omega^0 X(v) Z(u)`` of the encoding state
maps weight vectors to ``w~_c(j) = omega^(u_c j) w_c(j - v_c)`` without
changing the overlap.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import stabilizer as stab
from .model import (EdgeEnergyTable, Hamiltonian, ModelError, SpinGraph,
                    VertexFieldTable, WeightVector)


class DualityError(ValueError):
  """Embedding inconsistent, graph not planar-embedded, or a bridge present."""


class SymmetryError(ValueError):
  """The word is not a symmetry of the encoding state."""


# ---------------------------------------------------------------------------
# Fourier transform of weights


def fourier_weights(w: WeightVector) -> WeightVector:
  """``w'[j] = q^-1/2 sum_k exp(-2 pi i k j / q) w[k]``; log scale carried over."""
  a = np.asarray(w.amplitudes, dtype=np.complex128)
  q = a.size
  out = np.fft.fft(a) / math.sqrt(q)
  return WeightVector(out, w.log_scale).normalized()


def potts_dual_coupling(beta_j: complex, q: int) -> complex:
  """``beta J'`` with ``(e^{beta J'} - 1)(e^{beta J} - 1) = q``.

  Returns a complex value (principal log) when the argument is negative.

  Raises:
    ZeroDivisionError: ``beta J = 0`` has no finite dual.
  """
  x = cmath.exp(beta_j) - 1.0
  if x == 0:
    raise ZeroDivisionError("beta J = 0 maps to infinite dual coupling")
  val = cmath.log(1.0 + q / x)
  return val


# ---------------------------------------------------------------------------
# embeddings and planar duals


@dataclass(frozen=True)
class RotationSystem:
  """Cyclic order of edge-ends around each vertex.

  ``rotation[v]`` lists ``(edge, end)`` pairs with ``end`` 0 for the tail
  and 1 for the head of the edge.
  """

  rotation: tuple

  def __post_init__(self):
    rot = tuple(tuple((int(e), int(s)) for e, s in r) for r in self.rotation)
    object.__setattr__(self, "rotation", rot)

  def validate(self, graph: SpinGraph):
    if len(self.rotation) != graph.num_vertices:
      raise DualityError("rotation system must list every vertex")
    seen = set()
    for v, r in enumerate(self.rotation):
      for e, s in r:
        if not 0 <= e < graph.num_edges or s not in (0, 1):
          raise DualityError(f"bad edge-end ({e}, {s}) at vertex {v}")
        if graph.edges[e][s] != v:
          raise DualityError(f"edge-end ({e}, {s}) does not touch vertex {v}")
        if (e, s) in seen:
          raise DualityError(f"edge-end ({e}, {s}) listed twice")
        seen.add((e, s))
    if len(seen) != 2 * graph.num_edges:
      raise DualityError("rotation system misses edge-ends")

  @classmethod
  def from_coordinates(cls, graph: SpinGraph, xy: Sequence[Sequence[float]]) -> "RotationSystem":
    """Counter-clockwise order by angle of straight-line edges."""
    pts = np.asarray(xy, dtype=float)
    rot = [[] for _ in range(graph.num_vertices)]
    for e, (t, h) in enumerate(graph.edges):
      rot[t].append((e, 0))
      rot[h].append((e, 1))
    out = []
    for v, ends in enumerate(rot):
      def angle(es):
        e, s = es
        other = graph.edges[e][1 - s]
        d = pts[other] - pts[v]
        return (math.atan2(d[1], d[0]), e, s)
      out.append(tuple(sorted(ends, key=angle)))
    return cls(tuple(out))

  def to_lists(self) -> list:
    return [[list(x) for x in r] for r in self.rotation]


def trace_faces(graph: SpinGraph, emb: RotationSystem) -> list[list[tuple[int, int]]]:
  """Faces as closed dart walks; dart ``(e, s)`` leaves the vertex at end ``s``."""
  emb.validate(graph)
  pos = {}
  for v, r in enumerate(emb.rotation):
    for i, d in enumerate(r):
      pos[d] = (v, i)
  faces, used = [], set()
  for start in sorted(pos):
    if start in used:
      continue
    face, d = [], start
    while d not in used:
      used.add(d)
      face.append(d)
      e, s = d
      back = (e, 1 - s)
      v, i = pos[back]
      r = emb.rotation[v]
      d = r[(i + 1) % len(r)]
    faces.append(face)
  return faces


def _connected(graph: SpinGraph) -> bool:
  from .zq import component_count
  return component_count(graph.num_vertices, graph.edges) == 1


@dataclass(frozen=True, eq=False)
class PlanarDual:
  """Dual graph with per-edge correspondence and the face walks."""

  graph: SpinGraph
  edge_map: tuple
  faces: tuple

  @property
  def num_faces(self) -> int:
    return len(self.faces)


def planar_dual(graph: SpinGraph, emb: RotationSystem) -> PlanarDual:
  """Faces become dual vertices; primal edge e maps to dual edge e.

  The dart along the orientation of e lies on face ``f1``, the reverse dart
  on ``f2``; the dual edge runs ``f2 -> f1`` so each dual incidence row is
  the signed boundary walk of its face, a cycle of G.

  Raises:
    DualityError: disconnected graph, Euler check failure or a bridge.
  """
  if not _connected(graph):
    raise DualityError("planar dual requires a connected graph")
  faces = trace_faces(graph, emb)
  nv, ne, nf = graph.num_vertices, graph.num_edges, len(faces)
  if nv - ne + nf != 2:
    raise DualityError(
        f"Euler check failed: |V| - |E| + |F| = {nv - ne + nf}, embedding is not planar")
  face_of = {}
  for f, walk in enumerate(faces):
    for d in walk:
      face_of[d] = f
  edges = []
  for e in range(ne):
    f1, f2 = face_of[(e, 0)], face_of[(e, 1)]
    if f1 == f2:
      raise DualityError(f"edge {e} is a bridge; its dual would be a self-loop")
    edges.append((f2, f1))
  dual = SpinGraph(graph.q, nf, edges)
  return PlanarDual(dual, tuple(range(ne)), tuple(tuple(w) for w in faces))


def dual_log_scalar(graph: SpinGraph, dual: SpinGraph) -> float:
  """``log s`` with ``Z_G = s * Z_D``: ``s = q^(|V_G| - 1 - |E|/2)``."""
  return (graph.num_vertices - 1 - graph.num_edges / 2) * math.log(graph.q)


def dual_weights(weights: Sequence[WeightVector]) -> list[WeightVector]:
  return [fourier_weights(w) for w in weights]


def dual_model(h: Hamiltonian, emb: RotationSystem, beta: float) -> tuple[Hamiltonian, PlanarDual]:
  """Model on the planar dual with Fourier-transformed Boltzmann weights.

  Dual energies are ``-log(w') / beta`` (principal branch; zero weights get
  infinite energy), so evaluating the dual at the same ``beta`` reproduces
  the transformed weights.

  Raises:
    ModelError: fields, k-body terms, non-difference form or ``beta <= 0``.
    DualityError: see :func:`planar_dual`.
  """
  from .contraction import column_weights
  if h.kind != "difference" or h.has_fields or h.kbody_terms:
    raise ModelError("duality needs a difference-form model without fields")
  if not beta > 0:
    raise ModelError("dual energies need beta > 0")
  pd = planar_dual(h.graph, emb)
  amps, logs = column_weights(h, beta, "psi")
  tables = []
  for a, l in zip(amps, logs):
    w = fourier_weights(WeightVector(a, l))
    with np.errstate(divide="ignore"):
      lw = np.where(w.amplitudes != 0, np.log(w.amplitudes.astype(np.complex128)), -np.inf)
    tables.append(-(lw + w.log_scale) / beta)
  dm = Hamiltonian(pd.graph, "difference",
                   {e: EdgeEnergyTable(t) for e, t in enumerate(tables)},
                   name=f"dual-{h.name}" if h.name else "dual")
  return dm, pd


# ---------------------------------------------------------------------------
# symmetries


def _shift_phase(values: np.ndarray, v: int, u: int, q: int) -> np.ndarray:
  j = np.arange(q)
  return np.exp(2j * np.pi * u * j / q) * values[(j - v) % q]


def apply_symmetry(weights: Sequence[WeightVector], word: stab.PauliWord,
                   graph: SpinGraph, encoding: str = "psi") -> list[WeightVector]:
  """Transform per-column weights by a stabilizer word.

  Raises:
    SymmetryError: the word does not stabilize the encoding state.
  """
  if not stab.in_stabilizer(word, graph, encoding):
    raise SymmetryError("word is not in the stabilizer of the encoding state")
  if len(weights) != word.n:
    raise SymmetryError(f"expected {word.n} weight vectors, got {len(weights)}")
  q = word.q
  out = []
  for w, v, u in zip(weights, word.xi, word.zeta):
    out.append(WeightVector(_shift_phase(np.asarray(w.amplitudes), v, u, q), w.log_scale))
  return out


def _energy_shift(values: np.ndarray, v: int) -> np.ndarray:
  q = values.size
  return values[(np.arange(q) - v) % q]


def apply_symmetry_model(h: Hamiltonian, word: stab.PauliWord, encoding: str = "psi") -> Hamiltonian:
  """Model-level version for X-type words (pure table permutations).

  Z components would need complex energies that depend on ``beta``; use
  :func:`apply_symmetry` on weights for those.
  """
  g = h.graph
  if h.kind != "difference":
    raise SymmetryError("symmetries act on difference-form models")
  if any(word.zeta):
    raise SymmetryError("model-level transform handles X-type words only")
  if not stab.in_stabilizer(word, g, encoding):
    raise SymmetryError("word is not in the stabilizer of the encoding state")
  nv = g.num_vertices
  off = 0 if encoding == "psi" else nv
  if encoding == "psi" and h.has_fields:
    raise SymmetryError("psi encoding carries no fields")
  edges = {e: EdgeEnergyTable(_energy_shift(np.asarray(t.values), word.xi[off + e]))
           for e, t in h.edge_terms.items()}
  fields = {}
  for v, t in h.vertex_terms.items():
    fields[v] = VertexFieldTable(_energy_shift(np.asarray(t.values), word.xi[v]))
  return Hamiltonian(g, "difference", edges, fields, name=h.name)


def vertex_flip(h: Hamiltonian, vertex: int) -> Hamiltonian:
  """q = 2 spin flip at ``vertex``: incident edge tables and its field reversed.

  ``h~(j) = h(1 - j)`` on incident edges and on the field; for Ising
  couplings this is ``J -> -J`` up to an additive constant that cancels
  against the reordering, so Z is unchanged.
  """
  g = h.graph
  if g.q != 2:
    raise ModelError(f"vertex_flip is the q = 2 sign flip; graph has q = {g.q}")
  if h.kind != "difference":
    raise ModelError("vertex_flip acts on difference-form models")
  if not 0 <= vertex < g.num_vertices:
    raise ModelError(f"unknown vertex {vertex}")
  edges = {}
  for e, t in h.edge_terms.items():
    if vertex in g.edges[e]:
      t = EdgeEnergyTable(np.asarray(t.values)[::-1])
    edges[e] = t
  fields = dict(h.vertex_terms)
  if vertex in fields:
    fields[vertex] = VertexFieldTable(np.asarray(fields[vertex].values)[::-1])
  return Hamiltonian(g, "difference", edges, fields, name=h.name)


def flip_word(graph: SpinGraph, vertex: int, encoding: str = "psi") -> stab.PauliWord:
  """X word of the incidence row of ``vertex`` (the generator behind a flip)."""
  from .zq import encoding_matrix
  m = encoding_matrix(graph, encoding).entries
  return stab.x_word(m[vertex], graph.q)
