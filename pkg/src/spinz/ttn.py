"""Schmidt bases across column cuts and the explicit tree tensor network.

The encoding state ``sum_{c in C} |c>`` (C the cut space) splits across a
column bipartition P | Q as ``sum_i |P_i> |Q_pi(i)>`` where ``|P_i>`` sums a
coset of the shortened code ``C_P^0`` inside the projection ``pi_P(C)``.
There are ``r = q^(lambda(P) - 1)`` terms, all with Schmidt value
``r^-1/2`` after normalization.

The tensor tree here is the reference (slow, dense) path; production
contraction lives in :mod:`spinz.contraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels, zq
from .decomposition import BranchDecomposition, DecompositionError, column_graph
from .model import SpinGraph


@dataclass(frozen=True, eq=False)
class SchmidtBasisSpec:
  """Paired coset representatives for one column cut.

  Attributes:
    cut: sorted columns of side P.
    rest: sorted columns of side Q.
    reps_p: coset representatives of ``C_P^0`` in ``pi_P(C)``.
    reps_q: coset representatives of ``C_Q^0`` in ``pi_Q(C)``.
    pairing: ``reps_p[i]`` pairs with ``reps_q[pairing[i]]``.
    schmidt_value: ``r^-1/2`` with ``r`` the number of terms.
    short_p, short_q: the shortened codes ``C_P^0`` and ``C_Q^0``.
  """

  q: int
  cut: tuple
  rest: tuple
  reps_p: tuple
  reps_q: tuple
  pairing: tuple
  schmidt_value: float
  short_p: zq.ZqSubmodule
  short_q: zq.ZqSubmodule

  @property
  def rank(self) -> int:
    return len(self.reps_p)

  def reconstruct(self) -> np.ndarray:
    """Dense ``sum_i |P_i>|Q_pi(i)>`` in column order (small instances only)."""
    q = self.q
    n = len(self.cut) + len(self.rest)
    out = np.zeros((q,) * n)
    sp = list(self.short_p.elements())
    sq = list(self.short_q.elements())
    for i, j in enumerate(self.pairing):
      for a in sp:
        x = (self.reps_p[i] + a) % q
        for b in sq:
          y = (self.reps_q[j] + b) % q
          idx = [0] * n
          for c, v in zip(self.cut, x):
            idx[c] = int(v)
          for c, v in zip(self.rest, y):
            idx[c] = int(v)
          out[tuple(idx)] += 1.0
    return out.reshape(-1)


def pair_cosets(graph: SpinGraph, cut: Sequence[int], encoding: str = "psi") -> SchmidtBasisSpec:
  """Schmidt basis of the encoding state for the column cut ``cut``.

  Steps: coset representatives ``p_i`` of ``C_P^0`` in ``pi_P(C)``; for
  each, a code word ``(p_i | a_i)`` found by reducing ``(p_i | 0)`` against
  a P-first echelon form of ``C``; the Q-coset of ``a_i`` is matched by its
  canonical reduced form modulo ``C_Q^0`` (exact for any modulus).

  Raises:
    ValueError: cut empty, full or out of range.
    zq.ZqError: no code word extends a representative (internal error).
  """
  code = zq.cut_space(graph, encoding)
  q, n = code.q, code.ambient_dim
  p = sorted(set(int(c) for c in cut))
  if not p or len(p) == n or p[0] < 0 or p[-1] >= n:
    raise ValueError(f"cut must be a proper nonempty subset of 0..{n - 1}")
  rest = [c for c in range(n) if c not in set(p)]
  short_p = zq.shortened(code, p)
  short_q = zq.shortened(code, rest)
  reps_p = zq.coset_representatives(zq.projected(code, p), short_p)
  reps_q = zq.coset_representatives(zq.projected(code, rest), short_q)
  key_q = {tuple(short_q.reduce(r).tolist()): j for j, r in enumerate(reps_q)}
  gens = code.canonical_form[:, p + rest] if code.canonical_form.size else \
      np.zeros((0, n), dtype=np.int64)
  ordered = zq.submodule(gens.tolist(), q, n)
  k = len(p)
  pairing = []
  for rep in reps_p:
    w = ordered.reduce(np.concatenate([rep, np.zeros(n - k, dtype=np.int64)]))
    if np.any(w[:k]):
      raise zq.ZqError("no code word extends a P-coset representative")
    a = (-w[k:]) % q
    j = key_q.get(tuple(short_q.reduce(a).tolist()))
    if j is None:
      raise zq.ZqError("Q-part of an extension is outside the projected code")
    pairing.append(j)
  if sorted(pairing) != list(range(len(reps_q))):
    raise zq.ZqError("coset pairing is not a bijection")
  return SchmidtBasisSpec(q, tuple(p), tuple(rest), tuple(reps_p), tuple(reps_q),
                          tuple(pairing), len(reps_p) ** -0.5, short_p, short_q)


@dataclass(frozen=True, eq=False)
class TensorTree:
  """0/1 tensors on a rooted decomposition.

  Attributes:
    bd: the decomposition.
    leaf: leaf node -> ``(q, D)`` matrix sending a column value to its label.
    internal: internal node -> ``(D_x, D_left, D_right)`` tensor.
    root: ``(D, D)`` pairing across the root edge, scaled by ``D^-1/2``.
    scale: global factor applied by :func:`contract_dense` so the result
      is the dense encoding state including its multiplicity.
  """

  q: int
  ncols: int
  bd: BranchDecomposition
  dims: np.ndarray
  leaf: dict
  internal: dict
  root: np.ndarray
  scale: float


def build_ttn(graph: SpinGraph, bd: BranchDecomposition, encoding: str = "psi") -> TensorTree:
  """Tensor tree whose contraction reproduces the psi or phi state."""
  if encoding not in ("psi", "phi"):
    raise ValueError(f"tensor trees are built for psi/phi, not {encoding!r}")
  nvp, cu, cv = column_graph(graph, encoding)
  ncols = cu.shape[0]
  bd.check_columns(ncols)
  q = graph.q
  comps = int(_kernels.count_components(nvp, cu, cv))
  scale = float(q) ** (comps - (1 if encoding == "phi" else 0))
  if bd.left[bd.root] < 0:
    leaf = {int(bd.root): np.ones((q, 1))}
    return TensorTree(q, ncols, bd, np.zeros(1, np.int64), leaf, {}, np.ones((1, 1)), scale)
  status, bad, dims, leaflab, off, ti, tj, tk = _kernels.structure(
      nvp, cu, cv, bd.left, bd.right, bd.col, bd.root, q, 1 << 40, 1 << 40, True)
  if status:
    raise DecompositionError(f"structure pass failed at node {bad}")
  size = {x: q ** int(dims[x]) for x in range(bd.num_nodes) if x != bd.root}
  leaf, internal = {}, {}
  for x in range(bd.num_nodes):
    if x == bd.root:
      continue
    if bd.left[x] < 0:
      m = np.zeros((q, size[x]))
      m[np.arange(q), leaflab[x]] = 1.0
      leaf[x] = m
    else:
      a, b = int(bd.left[x]), int(bd.right[x])
      t = np.zeros((size[x], size[a], size[b]))
      s, ln = off[2 * x], off[2 * x + 1]
      t[ti[s:s + ln], tj[s:s + ln], tk[s:s + ln]] = 1.0
      internal[x] = t
  d = size[int(bd.left[bd.root])]
  root = np.eye(d) / math.sqrt(d)
  return TensorTree(q, ncols, bd, dims, leaf, internal, root, scale * math.sqrt(d))


def contract_dense(tree: TensorTree) -> np.ndarray:
  """Dense amplitudes over all columns (row-major in column id order)."""
  bd = tree.bd
  if bd.left[bd.root] < 0:
    return tree.leaf[int(bd.root)][:, 0] * tree.scale
  # message at x: tensor (label_x, *columns below x in a recorded order)
  msgs: dict[int, tuple[np.ndarray, list[int]]] = {}
  for x in _kernels.postorder(bd.left, bd.right, bd.root):
    x = int(x)
    if x == bd.root:
      continue
    if bd.left[x] < 0:
      msgs[x] = (tree.leaf[x].T, [int(bd.col[x])])
    else:
      ta, ca = msgs.pop(int(bd.left[x]))
      tb, cb = msgs.pop(int(bd.right[x]))
      t = np.tensordot(tree.internal[x], ta, axes=([1], [0]))
      t = np.tensordot(t, tb, axes=([1], [0]))
      msgs[x] = (t, ca + cb)
  ta, ca = msgs[int(bd.left[bd.root])]
  tb, cb = msgs[int(bd.right[bd.root])]
  t = np.tensordot(tree.root, ta, axes=([0], [0]))
  t = np.tensordot(t, tb, axes=([0], [0]))
  cols = ca + cb
  t = np.transpose(t, np.argsort(cols))
  return (t * tree.scale).reshape(-1)
