"""Generalized Pauli group over qudits and stabilizer generators of graph codes.

A word is ``omega^phase * prod_i X^{xi_i} Z^{zeta_i}`` with
``omega = exp(2 pi i / q)``, ``X|j> = |j+1>`` and ``Z|j> = omega^j |j>``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import zq
from .model import SpinGraph


class StabilizerError(ValueError):
  """Mismatched sizes or invalid generator input."""


@dataclass(frozen=True, eq=False)
class PauliWord:
  """Pauli word with exponent vectors and a phase exponent mod ``q``."""

  q: int
  xi: tuple
  zeta: tuple
  phase_num: int = 0

  def __post_init__(self):
    q = int(self.q)
    xi = tuple(int(x) % q for x in self.xi)
    zeta = tuple(int(z) % q for z in self.zeta)
    if len(xi) != len(zeta):
      raise StabilizerError("xi and zeta must have equal length")
    object.__setattr__(self, "q", q)
    object.__setattr__(self, "xi", xi)
    object.__setattr__(self, "zeta", zeta)
    object.__setattr__(self, "phase_num", int(self.phase_num) % q)

  @property
  def n(self) -> int:
    return len(self.xi)

  def key(self) -> tuple:
    return (self.xi, self.zeta, self.phase_num)

  def __eq__(self, other):
    if not isinstance(other, PauliWord):
      return NotImplemented
    return self.q == other.q and self.key() == other.key()

  def __hash__(self):
    return hash((self.q, self.key()))

  def __repr__(self):
    return f"PauliWord(q={self.q}, xi={self.xi}, zeta={self.zeta}, phase={self.phase_num})"

  def is_identity(self) -> bool:
    return not any(self.xi) and not any(self.zeta) and self.phase_num == 0


def identity(n: int, q: int) -> PauliWord:
  return PauliWord(q, (0,) * n, (0,) * n, 0)


def x_word(v: Sequence[int], q: int) -> PauliWord:
  return PauliWord(q, tuple(v), (0,) * len(v))


def z_word(u: Sequence[int], q: int) -> PauliWord:
  return PauliWord(q, (0,) * len(u), tuple(u))


def _check(a: PauliWord, b: PauliWord):
  if a.q != b.q or a.n != b.n:
    raise StabilizerError(f"word sizes differ: (n={a.n}, q={a.q}) vs (n={b.n}, q={b.q})")


def symplectic(a: PauliWord, b: PauliWord) -> int:
  """``xi'.zeta - xi.zeta' mod q`` for ``a = (xi, zeta)``, ``b = (xi', zeta')``."""
  _check(a, b)
  q = a.q
  return (np.dot(b.xi, a.zeta) - np.dot(a.xi, b.zeta)) % q


def commutes(a: PauliWord, b: PauliWord) -> bool:
  return symplectic(a, b) == 0


def multiply(a: PauliWord, b: PauliWord) -> PauliWord:
  """Operator product ``a b``; moving ``Z^zeta`` past ``X^xi'`` costs ``omega^{xi'.zeta}``."""
  _check(a, b)
  q = a.q
  xi = [(x + y) % q for x, y in zip(a.xi, b.xi)]
  zeta = [(x + y) % q for x, y in zip(a.zeta, b.zeta)]
  phase = a.phase_num + b.phase_num + int(np.dot(b.xi, a.zeta))
  return PauliWord(q, xi, zeta, phase)


def power(a: PauliWord, k: int) -> PauliWord:
  out = identity(a.n, a.q)
  for _ in range(k % (a.q * a.q) if k >= 0 else 0):
    out = multiply(out, a)
  return out


def apply_word(word: PauliWord, amplitudes: np.ndarray) -> np.ndarray:
  """Apply ``word`` to a dense state on ``word.n`` qudits (row-major order)."""
  q, n = word.q, word.n
  psi = np.asarray(amplitudes, dtype=np.complex128).reshape((q,) * n) if n else \
      np.asarray(amplitudes, dtype=np.complex128)
  if n == 0:
    return psi * np.exp(2j * np.pi * word.phase_num / q)
  idx = np.indices((q,) * n)
  zphase = np.tensordot(np.asarray(word.zeta), idx, axes=1) % q
  out = psi * np.exp(2j * np.pi * (zphase + word.phase_num) / q)
  for axis, s in enumerate(word.xi):
    if s:
      out = np.roll(out, s, axis=axis)
  return out.reshape(-1)


@dataclass(frozen=True, eq=False)
class StabilizerGenSet:
  """Generating set of a stabilizer group."""

  n: int
  q: int
  generators: tuple

  def __iter__(self):
    return iter(self.generators)

  def __len__(self):
    return len(self.generators)

  def pairwise_commuting(self) -> bool:
    g = self.generators
    return all(commutes(g[i], g[j]) for i in range(len(g)) for j in range(i + 1, len(g)))


def enumerate_group(gens: StabilizerGenSet, limit: int = 1 << 20) -> set[PauliWord]:
  """All group elements by closure (small instances only)."""
  start = identity(gens.n, gens.q)
  seen = {start}
  queue = deque([start])
  while queue:
    w = queue.popleft()
    for g in gens.generators:
      nw = multiply(w, g)
      if nw not in seen:
        seen.add(nw)
        if len(seen) > limit:
          raise StabilizerError("group enumeration exceeded limit")
        queue.append(nw)
  return seen


def psi_generators(graph: SpinGraph) -> StabilizerGenSet:
  """X(v) per canonical generator of the cut space, Z(u) per generator of its complement."""
  if graph.num_edges == 0:
    raise StabilizerError("psi encoding needs at least one edge")
  q = graph.q
  code = zq.cut_space(graph, "psi")
  dual = zq.orthogonal_complement(code)
  gens = [x_word(r, q) for r in code.canonical_form]
  gens += [z_word(r, q) for r in dual.canonical_form]
  return StabilizerGenSet(graph.num_edges, q, tuple(gens))


def phi_generators(graph: SpinGraph) -> StabilizerGenSet:
  """The |V| operators K_a and |E| operators K_e (vertex qudits first)."""
  q, nv, ne = graph.q, graph.num_vertices, graph.num_edges
  m = zq.encoding_matrix(graph, "phi").entries
  gens = [x_word(m[a], q) for a in range(nv)]
  for e, (t, h) in enumerate(graph.edges):
    zeta = [0] * (nv + ne)
    zeta[nv + e] = 1
    zeta[t] += 1
    zeta[h] -= 1
    gens.append(z_word(zeta, q))
  return StabilizerGenSet(nv + ne, q, tuple(gens))


def loop_orientation(graph: SpinGraph, loop: Iterable[int]) -> dict[int, int]:
  """Traversal signs (+1 along, -1 against the edge orientation) for a closed loop.

  Raises:
    StabilizerError: a vertex is touched by a number of loop edges other
      than 0 or 2.
  """
  loop = sorted(set(int(e) for e in loop))
  touch: dict[int, list[int]] = {}
  for e in loop:
    if not 0 <= e < graph.num_edges:
      raise StabilizerError(f"loop references unknown edge {e}")
    for v in graph.edges[e]:
      touch.setdefault(v, []).append(e)
  for v, es in touch.items():
    if len(es) != 2:
      raise StabilizerError(f"loop {loop} is not closed at vertex {v}")
  sign: dict[int, int] = {}
  for e0 in loop:
    if e0 in sign:
      continue
    e, v = e0, graph.edges[e0][1]
    sign[e] = 1
    while True:
      a, b = touch[v]
      nxt = b if a == e else a
      if nxt in sign:
        break
      t, h = graph.edges[nxt]
      sign[nxt] = 1 if t == v else -1
      v = h if t == v else t
      e = nxt
  return sign


def kitaev_generators(graph: SpinGraph, loops: Sequence[Iterable[int]]) -> StabilizerGenSet:
  """Plaquette Z-words on the given loops and star X-words on every vertex.

  Edge qudits only. Signs follow the edge orientation so the words commute
  for every q; for q = 2 they reduce to plain products of X and Z.
  """
  q, ne = graph.q, graph.num_edges
  b = zq.incidence(graph).entries
  gens = []
  for loop in loops:
    zeta = [0] * ne
    for e, s in loop_orientation(graph, loop).items():
      zeta[e] = s
    gens.append(z_word(zeta, q))
  for a in range(graph.num_vertices):
    if np.any(b[a]):
      gens.append(x_word(b[a], q))
  return StabilizerGenSet(ne, q, tuple(gens))


def schmidt_rank(graph: SpinGraph, subset: Iterable[int], encoding: str = "psi") -> int:
  """``q^(lambda(A) - 1)`` for the column subset ``A`` of the encoding matrix."""
  from .decomposition import connectivity
  return graph.q ** (connectivity(graph, subset, encoding) - 1)


def in_stabilizer(word: PauliWord, graph: SpinGraph, encoding: str) -> bool:
  """Membership of a word in the stabilizer of the psi or phi state."""
  code = zq.cut_space(graph, encoding)
  if word.q != graph.q or word.n != code.ambient_dim:
    return False
  if word.phase_num:
    return False
  return zq.member(code, word.xi) and zq.member(zq.orthogonal_complement(code), word.zeta)


def sample_stabilizer(gens: StabilizerGenSet, rng: np.random.Generator) -> PauliWord:
  """Random product of generator powers, phase normalized to zero.

  X-type and Z-type generators are multiplied as a separate X block and Z
  block, which is the canonical phase-free element of the group.
  """
  q, n = gens.q, gens.n
  xi = np.zeros(n, dtype=np.int64)
  zeta = np.zeros(n, dtype=np.int64)
  for g in gens.generators:
    k = int(rng.integers(0, q))
    xi = (xi + k * np.asarray(g.xi)) % q
    zeta = (zeta + k * np.asarray(g.zeta)) % q
  return PauliWord(q, xi, zeta, 0)
