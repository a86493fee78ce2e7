"""Exact linear algebra over the ring Z_q (q prime or composite).

Submodules of Z_q^n are kept in Howell normal form: a row-echelon basis whose
pivots divide q, with entries above each pivot reduced, and with the extra
property that the rows having zeros in the first j columns span every module
element with zeros there. That property makes membership, cardinality,
kernels and shortened codes all simple reads of the form; Gaussian
elimination would only be valid for prime q.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import SpinGraph


class ZqError(ValueError):
  """Dimension mismatch or invalid module operation."""


@dataclass(frozen=True, eq=False)
class ZqMatrix:
  """Dense matrix with entries reduced mod ``q``."""

  q: int
  entries: np.ndarray

  def __post_init__(self):
    a = np.asarray(self.entries, dtype=np.int64)
    if a.ndim != 2:
      raise ZqError("ZqMatrix entries must be two-dimensional")
    a = a % self.q
    a.setflags(write=False)
    object.__setattr__(self, "entries", a)

  @property
  def rows(self) -> int:
    return self.entries.shape[0]

  @property
  def cols(self) -> int:
    return self.entries.shape[1]

  @property
  def T(self) -> "ZqMatrix":
    return ZqMatrix(self.q, self.entries.T)

  def __matmul__(self, other: "ZqMatrix") -> "ZqMatrix":
    return ZqMatrix(self.q, (self.entries @ other.entries) % self.q)


def incidence(graph: SpinGraph) -> ZqMatrix:
  """|V| x |E| incidence matrix: -1 at the tail, +1 at the head of each edge."""
  b = np.zeros((graph.num_vertices, graph.num_edges), dtype=np.int64)
  for e, (t, h) in enumerate(graph.edges):
    b[t, e] -= 1
    b[h, e] += 1
  return ZqMatrix(graph.q, b)


def encoding_matrix(graph: SpinGraph, encoding: str) -> ZqMatrix:
  """Generator matrix M whose row span is the encoded code.

  ``psi`` uses the incidence matrix; ``phi`` prepends an identity block so
  vertex qudits come first.
  """
  b = incidence(graph).entries
  if encoding == "psi":
    return ZqMatrix(graph.q, b)
  if encoding == "phi":
    return ZqMatrix(graph.q, np.hstack([np.eye(graph.num_vertices, dtype=np.int64), b]))
  raise ZqError(f"unknown encoding {encoding!r}")


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
  """Return ``(g, s, t)`` with ``s*a + t*b = g = gcd(a, b)``."""
  s0, s1, t0, t1 = 1, 0, 0, 1
  while b:
    k = a // b
    a, b = b, a - k * b
    s0, s1 = s1, s0 - k * s1
    t0, t1 = t1, t0 - k * t1
  return a, s0, t0


def _unit_to_gcd(a: int, q: int) -> int:
  """A unit ``u`` of Z_q with ``u*a = gcd(a, q) (mod q)``."""
  g = math.gcd(a, q)
  m = q // g
  base = pow(a // g, -1, m) if m > 1 else 0
  u = base
  while math.gcd(u, q) != 1:
    u += m
  return u % q


def howell_form(rows: Sequence[Sequence[int]], q: int, ncols: int) -> np.ndarray:
  """Howell normal form of the row span of ``rows`` over Z_q.

  Returns:
    int64 array of nonzero rows; each row's leading entry divides q.
  """
  work = [[int(x) % q for x in r] for r in rows]
  for r in work:
    if len(r) != ncols:
      raise ZqError(f"row of length {len(r)} in ambient dimension {ncols}")
  work.extend([0] * ncols for _ in range(max(0, ncols - len(work))))
  r = 0
  for c in range(ncols):
    for i in range(r + 1, len(work)):
      b = work[i][c]
      if b == 0:
        continue
      a = work[r][c]
      g, s, t = _xgcd(a, b)
      u, v = -b // g, a // g
      ra, ri = work[r], work[i]
      work[r] = [(s * x + t * y) % q for x, y in zip(ra, ri)]
      work[i] = [(u * x + v * y) % q for x, y in zip(ra, ri)]
    a = work[r][c]
    if a == 0:
      continue
    unit = _unit_to_gcd(a, q)
    work[r] = [(unit * x) % q for x in work[r]]
    p = work[r][c]
    for i in range(r):
      k = work[i][c] // p
      if k:
        work[i] = [(x - k * y) % q for x, y in zip(work[i], work[r])]
    extra = [((q // p) * x) % q for x in work[r]]
    if any(extra):
      work.append(extra)
    r += 1
  out = np.array(work[:r], dtype=np.int64).reshape(r, ncols)
  return out


def _pivots(form: np.ndarray) -> list[tuple[int, int]]:
  """(column, pivot value) for each row of a Howell form."""
  out = []
  for row in form:
    c = int(np.flatnonzero(row)[0])
    out.append((c, int(row[c])))
  return out


@dataclass(frozen=True, eq=False)
class ZqSubmodule:
  """Submodule of Z_q^n with its Howell canonical form.

  Attributes:
    q: Modulus.
    ambient_dim: n.
    generators: The generating vectors as supplied.
    canonical_form: Howell normal form rows (int64 array).
  """

  q: int
  ambient_dim: int
  generators: tuple
  canonical_form: np.ndarray

  @property
  def pivots(self) -> list[tuple[int, int]]:
    return _pivots(self.canonical_form)

  def reduce(self, v) -> np.ndarray:
    """Reduce ``v`` modulo the module; zero iff ``v`` is a member."""
    w = np.asarray(v, dtype=np.int64) % self.q
    if w.shape != (self.ambient_dim,):
      raise ZqError(f"vector of shape {w.shape} in dimension {self.ambient_dim}")
    for row, (c, p) in zip(self.canonical_form, self.pivots):
      k = w[c] // p
      if k:
        w = (w - k * row) % self.q
    return w

  def elements(self) -> Iterable[np.ndarray]:
    """Every element exactly once (small modules only)."""
    piv = self.pivots
    form = self.canonical_form
    ranges = [range(self.q // p) for _, p in piv]
    for coef in itertools.product(*ranges):
      if form.shape[0]:
        yield (np.asarray(coef, dtype=np.int64) @ form) % self.q
      else:
        yield np.zeros(self.ambient_dim, dtype=np.int64)


def submodule(generators, q: int, ambient_dim: int | None = None) -> ZqSubmodule:
  """Row span of ``generators`` over Z_q."""
  gens = [tuple(int(x) % q for x in g) for g in generators]
  if ambient_dim is None:
    if not gens:
      raise ZqError("ambient_dim is required for an empty generator list")
    ambient_dim = len(gens[0])
  for g in gens:
    if len(g) != ambient_dim:
      raise ZqError(f"generator of length {len(g)} in dimension {ambient_dim}")
  form = howell_form(gens, q, ambient_dim)
  form.setflags(write=False)
  return ZqSubmodule(q, ambient_dim, tuple(gens), form)


def member(sub: ZqSubmodule, v) -> bool:
  return not np.any(sub.reduce(v))


def size(sub: ZqSubmodule) -> int:
  return math.prod(sub.q // p for _, p in sub.pivots)


def row_space(m: ZqMatrix) -> ZqSubmodule:
  return submodule(m.entries.tolist(), m.q, m.cols)


def cut_space(graph: SpinGraph, encoding: str = "psi") -> ZqSubmodule:
  """The code spanned by the rows of the encoding matrix."""
  return row_space(encoding_matrix(graph, encoding))


def orthogonal_complement(sub: ZqSubmodule) -> ZqSubmodule:
  """``{u : u.v = 0 mod q for every v in sub}``."""
  n, q = sub.ambient_dim, sub.q
  g = sub.canonical_form
  k = g.shape[0]
  # Howell form of [G^T | I]; rows vanishing on the first k columns give
  # exactly the solutions of G u = 0.
  aug = np.hstack([g.T.reshape(n, k), np.eye(n, dtype=np.int64)])
  form = howell_form(aug.tolist(), q, k + n)
  kern = [row[k:] for row in form if not np.any(row[:k])]
  return submodule(kern, q, n)


def shortened(sub: ZqSubmodule, coords: Sequence[int]) -> ZqSubmodule:
  """Elements of ``sub`` supported on ``coords``, restricted to ``coords``."""
  coords = list(coords)
  rest = [i for i in range(sub.ambient_dim) if i not in set(coords)]
  order = rest + coords
  g = sub.canonical_form[:, order] if sub.canonical_form.size else \
      np.zeros((0, sub.ambient_dim), dtype=np.int64)
  form = howell_form(g.tolist(), sub.q, sub.ambient_dim)
  r = len(rest)
  kept = [row[r:] for row in form if not np.any(row[:r])]
  return submodule(kept, sub.q, len(coords))


def projected(sub: ZqSubmodule, coords: Sequence[int]) -> ZqSubmodule:
  """Projection of ``sub`` onto ``coords``."""
  coords = list(coords)
  g = sub.canonical_form[:, coords] if sub.canonical_form.size else []
  return submodule([list(r) for r in g], sub.q, len(coords))


def contains(outer: ZqSubmodule, inner: ZqSubmodule) -> bool:
  return all(member(outer, row) for row in inner.canonical_form)


def coset_representatives(outer: ZqSubmodule, inner: ZqSubmodule) -> list[np.ndarray]:
  """Lexicographically smallest element of every coset of ``inner`` in ``outer``.

  Returns:
    One vector per coset, sorted lexicographically.

  Raises:
    ZqError: ``inner`` is not contained in ``outer``.
  """
  if outer.q != inner.q or outer.ambient_dim != inner.ambient_dim:
    raise ZqError("modules live in different ambient spaces")
  if not contains(outer, inner):
    raise ZqError("inner module is not contained in outer module")
  best: dict[tuple, tuple] = {}
  for v in outer.elements():
    key = tuple(inner.reduce(v).tolist())
    t = tuple(v.tolist())
    if key not in best or t < best[key]:
      best[key] = t
  reps = sorted(best.values())
  return [np.array(r, dtype=np.int64) for r in reps]


def component_count(num_vertices: int, edges: Iterable[tuple[int, int]]) -> int:
  """Connected components of a multigraph, isolated vertices included."""
  parent = list(range(num_vertices))

  def find(x):
    while parent[x] != x:
      parent[x] = parent[parent[x]]
      x = parent[x]
    return x

  comps = num_vertices
  for a, b in edges:
    ra, rb = find(a), find(b)
    if ra != rb:
      parent[ra] = rb
      comps -= 1
  return comps


def kernel_size(m: ZqMatrix) -> int:
  """``|ker m|`` for ``m`` the transposed incidence matrix of a graph.

  The kernel consists of spin assignments constant on every connected
  component, so its size is ``q`` to the number of components (isolated
  vertices count as components).
  """
  ent = m.entries
  edges = []
  for row in ent:
    nz = np.flatnonzero(row)
    if len(nz) != 2:
      raise ZqError("kernel_size expects a transposed incidence matrix")
    edges.append((int(nz[0]), int(nz[1])))
  return m.q ** component_count(m.cols, edges)


def kernel_size_enumerated(m: ZqMatrix) -> int:
  """Brute-force ``|{s : m s = 0}|`` (cross-check for small inputs)."""
  count = 0
  for s in itertools.product(range(m.q), repeat=m.cols):
    if not np.any((m.entries @ np.asarray(s, dtype=np.int64)) % m.q):
      count += 1
  return count


def kernel(m: ZqMatrix) -> ZqSubmodule:
  """``{x : m x = 0}`` as a submodule of Z_q^cols."""
  return orthogonal_complement(row_space(m))
