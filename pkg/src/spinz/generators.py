"""Graph families with straight-line embeddings (where planar)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Hamiltonian, ModelError, SpinGraph, make_model
from .transforms import RotationSystem

FAMILIES = ("chain", "cycle", "ladder", "grid", "wheel", "torus")


@dataclass(frozen=True, eq=False)
class Generated:
  """A generated graph, its vertex coordinates and (if planar) embedding."""

  graph: SpinGraph
  coords: tuple
  embedding: RotationSystem | None


def _make(q, nv, edges, coords, planar=True) -> Generated:
  g = SpinGraph(q, nv, edges)
  emb = RotationSystem.from_coordinates(g, coords) if planar else None
  return Generated(g, tuple(coords), emb)


def chain(n: int, q: int = 2) -> Generated:
  """Open path on ``n`` vertices."""
  if n < 1:
    raise ModelError("chain needs at least one vertex")
  return _make(q, n, [(i, i + 1) for i in range(n - 1)], [(i, 0.0) for i in range(n)])


def cycle(n: int, q: int = 2) -> Generated:
  """Cycle on ``n >= 3`` vertices, oriented i -> i+1."""
  if n < 3:
    raise ModelError("cycle needs at least 3 vertices")
  pts = [(math.cos(2 * math.pi * i / n), math.sin(2 * math.pi * i / n)) for i in range(n)]
  return _make(q, n, [(i, (i + 1) % n) for i in range(n)], pts)


def ladder(n: int, q: int = 2) -> Generated:
  """Two rails of ``n`` vertices joined by ``n`` rungs."""
  if n < 1:
    raise ModelError("ladder needs at least one rung")
  edges = []
  for i in range(n):
    edges.append((2 * i, 2 * i + 1))
    if i + 1 < n:
      edges.append((2 * i, 2 * i + 2))
      edges.append((2 * i + 1, 2 * i + 3))
  pts = [(i, r) for i in range(n) for r in (0.0, 1.0)]
  return _make(q, 2 * n, edges, pts)


def grid(rows: int, cols: int | None = None, q: int = 2) -> Generated:
  """Square lattice of ``rows x cols`` vertices (open boundaries)."""
  cols = rows if cols is None else cols
  if rows < 1 or cols < 1:
    raise ModelError("grid dimensions must be positive")
  vid = lambda r, c: r * cols + c
  edges = []
  for r in range(rows):
    for c in range(cols):
      if c + 1 < cols:
        edges.append((vid(r, c), vid(r, c + 1)))
      if r + 1 < rows:
        edges.append((vid(r, c), vid(r + 1, c)))
  pts = [(c, -r) for r in range(rows) for c in range(cols)]
  return _make(q, rows * cols, edges, pts)


def wheel(n: int, q: int = 2) -> Generated:
  """Hub (vertex 0) joined to an ``n``-cycle of rim vertices 1..n."""
  if n < 3:
    raise ModelError("wheel needs at least 3 rim vertices")
  edges = [(0, i) for i in range(1, n + 1)]
  edges += [(i, i % n + 1) for i in range(1, n + 1)]
  pts = [(0.0, 0.0)] + [(math.cos(2 * math.pi * i / n), math.sin(2 * math.pi * i / n))
                        for i in range(n)]
  return _make(q, n + 1, edges, pts)


def torus(rows: int, cols: int | None = None, q: int = 2) -> Generated:
  """Periodic square lattice (not planar; no embedding)."""
  cols = rows if cols is None else cols
  if rows < 3 or cols < 3:
    raise ModelError("torus dimensions must be at least 3")
  vid = lambda r, c: (r % rows) * cols + (c % cols)
  edges = []
  for r in range(rows):
    for c in range(cols):
      edges.append((vid(r, c), vid(r, c + 1)))
      edges.append((vid(r, c), vid(r + 1, c)))
  pts = [(c, -r) for r in range(rows) for c in range(cols)]
  return _make(q, rows * cols, edges, pts, planar=False)


def family(name: str, size: int, q: int = 2) -> Generated:
  """Family member by name; ``size`` is the length (or side) parameter."""
  if name == "grid":
    return grid(size, size, q)
  if name == "torus":
    return torus(size, size, q)
  fn = {"chain": chain, "cycle": cycle, "ladder": ladder, "wheel": wheel}.get(name)
  if fn is None:
    raise ModelError(f"unknown family {name!r}")
  return fn(size, q)


RANDOM_KINDS = ("ising", "potts", "clock", "custom-difference", "custom-pairwise",
                "custom-kbody")


def random_graph(rng: np.random.Generator, q: int, nv: int, ne: int,
                 connected: bool = False) -> SpinGraph:
  """Random oriented multigraph without self-loops.

  With ``connected`` the first ``nv - 1`` edges form a random spanning tree.
  """
  edges = []
  if connected:
    order = rng.permutation(nv)
    for i in range(1, nv):
      a, b = int(order[i]), int(order[rng.integers(0, i)])
      edges.append((a, b) if rng.random() < 0.5 else (b, a))
  while len(edges) < ne and nv > 1:
    a, b = rng.choice(nv, size=2, replace=False)
    edges.append((int(a), int(b)))
  return SpinGraph(q, nv, edges)


def random_model(rng: np.random.Generator, q: int, nv: int, ne: int, kind: str,
                 fields: bool = False, scale: float = 2.0, k_max: int = 3) -> Hamiltonian:
  """Random model with real couplings uniform in ``[-scale, scale]``.

  ``ising`` forces ``q = 2``. ``custom-kbody`` adds up to three k-body terms
  of size 2..``k_max`` on top of difference-form edge tables.
  """
  if kind == "ising":
    q = 2
  g = random_graph(rng, q, nv, ne)
  u = lambda *shape: rng.uniform(-scale, scale, size=shape)
  params = {}
  if kind == "ising":
    params["J"] = list(u(g.num_edges))
  elif kind in ("potts", "clock"):
    params["epsilon"] = list(u(g.num_edges))
  elif kind == "custom-pairwise":
    params["tables"] = [u(q, q) for _ in range(g.num_edges)]
  else:
    params["tables"] = [u(q) for _ in range(g.num_edges)]
  if kind == "custom-kbody":
    terms = []
    for _ in range(int(rng.integers(1, 4))):
      k = int(rng.integers(2, min(k_max, nv) + 1)) if nv >= 2 else 1
      sites = [int(x) for x in rng.choice(nv, size=k, replace=False)]
      terms.append((sites, u(*(q,) * k)))
    params["kbody"] = terms
  if fields:
    if kind in ("ising", "potts", "clock"):
      params["B"] = list(u(nv))
    else:
      params["field_tables"] = [u(q) for _ in range(nv)]
  return make_model(kind, g, **params)
