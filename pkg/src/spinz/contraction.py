"""Exact overlap contraction along branch decompositions.

Two engines live here:

* the column engine (``psi`` / ``phi``): messages indexed by coset labels of
  the code on each side of a tree edge, of dimension ``q^(lambda-1)``;
  structure and numeric passes are compiled (see ``_kernels``).
* the site engine (``ghz`` / ``kbody``): leaves are vertices (the copy
  clusters of each spin); messages are dense tensors over the boundary
  spins, with multi-site weight tensors absorbed at the lowest common
  ancestor of their sites.

Every result is a :class:`~spinz.numerics.ScaledComplex` equal to the
partition function itself (the kernel multiplicity of the encoding is
reproduced, not divided out of a dense state).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .decomposition import (BranchDecomposition, DecompositionError, TreeBuilder,
                            caterpillar, column_graph, exhaustive_tree,
                            greedy_tree, heuristic_branch_decompose,
                            num_columns)
from .model import (EdgeEnergyTable, Hamiltonian, ModelError,
                    SpinGraph, WeightVector, log_weights)
from .numerics import ScaledComplex

DEFAULT_MAX_LABEL_DIM = 1 << 20
DEFAULT_MAX_TABLE = 1 << 26
ENCODINGS = ("psi", "phi", "ghz", "kbody")


class WidthExceededError(RuntimeError):
  """The decomposition needs messages larger than the configured cap."""

  def __init__(self, msg: str, width: int, label_dim: int):
    super().__init__(msg)
    self.width = width
    self.label_dim = label_dim


class EncodingMismatchError(ValueError):
  """Encoding cannot represent the model (or correlation request)."""


def choose_encoding(h: Hamiltonian, correlation_sites: Sequence[int] | None = None) -> str:
  """``psi`` for plain difference models, ``phi`` with fields or
  correlations, ``ghz`` for pairwise models, ``kbody`` otherwise."""
  if h.kind == "difference":
    if h.has_fields or correlation_sites:
      return "phi"
    return "psi"
  if h.kind == "pairwise":
    return "ghz"
  return "kbody"


def check_encoding(h: Hamiltonian, encoding: str, correlation_sites=None):
  if encoding not in ENCODINGS:
    raise EncodingMismatchError(f"unknown encoding {encoding!r}")
  if encoding == "psi":
    if h.kind != "difference" or h.has_fields:
      raise EncodingMismatchError(
          "psi encoding requires a difference-form model without fields")
    if correlation_sites:
      raise EncodingMismatchError("psi encoding cannot carry correlation weights")
  elif encoding == "phi":
    if h.kind != "difference":
      raise EncodingMismatchError("phi encoding requires a difference-form model")
  elif encoding == "ghz":
    if h.kind == "kbody":
      raise EncodingMismatchError("ghz encoding requires pairwise (or difference) terms")


# ---------------------------------------------------------------------------
# weights


def weights_from_energies(energies: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
  """Row-wise ``exp(-beta E)`` as (mantissas with max magnitude 1, log scales)."""
  expo = log_weights(energies, beta)
  re = expo.real
  if np.any(re == np.inf):
    raise ModelError("energy table with infinite weight")
  fin = np.isfinite(re)
  shift = np.where(fin, re, -np.inf).max(axis=-1)
  shift = np.where(np.isfinite(shift), shift, 0.0)
  with np.errstate(invalid="ignore", over="ignore"):
    amps = np.where(fin, np.exp(expo - shift[..., None]), 0.0)
  return amps, shift


def _renorm_rows(amps: np.ndarray, logs: np.ndarray):
  mx = np.abs(amps).max(axis=-1)
  ok = mx > 0
  amps[ok] /= mx[ok, None]
  logs[ok] += np.log(mx[ok])


def _stack_tables(tables, n: int, shape: tuple) -> np.ndarray:
  """Stack table values over ids 0..n-1, sharing identical table objects."""
  if n == 0:
    return np.zeros((0,) + shape, dtype=np.complex128)
  objs = [tables[i] for i in range(n)]
  ids = np.fromiter(map(id, objs), dtype=np.int64, count=n)
  uniq, first, idx = np.unique(ids, return_index=True, return_inverse=True)
  vals = np.stack([np.asarray(objs[i].values).reshape(shape) for i in first])
  return vals[idx]


def _cos_counts(sites, nv: int) -> np.ndarray:
  m = np.zeros(nv, dtype=np.int64)
  for v in sites or ():
    v = int(v)
    if not 0 <= v < nv:
      raise ModelError(f"correlation site {v} is not a vertex")
    m[v] += 1
  return m


def column_weights(h: Hamiltonian, beta: float, encoding: str,
                   correlation_sites: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
  """Per-column weight mantissas (ncols x q) and log scales for psi/phi."""
  g = h.graph
  q, nv, ne = g.q, g.num_vertices, g.num_edges
  ea, el = weights_from_energies(_stack_tables(h.edge_terms, ne, (q,)), beta)
  if encoding == "psi":
    return ea, el
  vt = h.vertex_terms
  ven = np.zeros((nv, q), dtype=np.complex128)
  if vt:
    zero = EdgeEnergyTable(np.zeros(q))
    full = {v: vt.get(v, zero) for v in range(nv)}
    ven = _stack_tables(full, nv, (q,))
  va, vl = weights_from_energies(ven, beta)
  m = _cos_counts(correlation_sites, nv)
  if m.any():
    cosv = np.cos(2 * np.pi * np.arange(q) / q)
    va = va * cosv[None, :] ** m[:, None]
    _renorm_rows(va, vl)
  return np.vstack([va, ea]), np.concatenate([vl, el])


def _weights_to_arrays(weights: Sequence[WeightVector], q: int):
  amps = np.array([w.amplitudes for w in weights], dtype=np.complex128).reshape(-1, q)
  logs = np.array([w.log_scale for w in weights], dtype=float)
  return amps, logs


# ---------------------------------------------------------------------------
# column engine


@dataclass(frozen=True, eq=False)
class ColumnStructure:
  """Compiled structure of a decomposition; reusable across weight sets."""

  q: int
  encoding: str
  nvp: int
  ncols: int
  components: int
  bd: BranchDecomposition
  dims: np.ndarray
  leaflab: np.ndarray
  tab_off: np.ndarray
  tab_i: np.ndarray
  tab_j: np.ndarray
  tab_k: np.ndarray

  @property
  def width(self) -> int:
    if self.bd.left[self.bd.root] < 0:
      return 1
    d = self.dims[np.arange(self.dims.size) != self.bd.root]
    return int(d.max()) + 1

  @property
  def max_label_dim(self) -> int:
    return self.q ** (self.width - 1)


def prepare(graph: SpinGraph, bd: BranchDecomposition, encoding: str,
            max_label_dim: int = DEFAULT_MAX_LABEL_DIM,
            max_table: int = DEFAULT_MAX_TABLE) -> ColumnStructure:
  """Run the structure pass and check the width cap."""
  if encoding not in ("psi", "phi"):
    raise EncodingMismatchError(f"column engine handles psi/phi, not {encoding!r}")
  nvp, cu, cv = column_graph(graph, encoding)
  ncols = cu.shape[0]
  bd.check_columns(ncols)
  comps = int(_kernels.count_components(nvp, cu, cv))
  e = np.zeros(0, np.int64)
  if bd.left[bd.root] < 0:
    return ColumnStructure(graph.q, encoding, nvp, ncols, comps, bd,
                           np.zeros(1, np.int64), np.zeros((1, graph.q), np.int64),
                           e, e, e, e)
  status, bad, dims, leaflab, off, ti, tj, tk = _kernels.structure(
      nvp, cu, cv, bd.left, bd.right, bd.col, bd.root, graph.q,
      int(max_label_dim), int(max_table), True)
  if status == _kernels.ERR_LABEL_DIM:
    w = int(dims[bad]) + 1
    raise WidthExceededError(
        f"decomposition width {w} needs label dimension {graph.q}^{w - 1} "
        f"above the cap {max_label_dim}", w, graph.q ** (w - 1))
  if status == _kernels.ERR_TABLE:
    w = int(dims[np.arange(dims.size) != bd.root].max()) + 1
    raise WidthExceededError(
        f"combine table at tree node {bad} exceeds {max_table} entries "
        f"(width {w})", w, graph.q ** (w - 1))
  return ColumnStructure(graph.q, encoding, nvp, ncols, comps, bd, dims,
                         leaflab, off, ti, tj, tk)


def contract_structure(st: ColumnStructure, amps: np.ndarray, logs: np.ndarray) -> ScaledComplex:
  """``sum_s prod_columns w_c(s_head - s_tail)`` over vertex spins (ground excluded)."""
  q = st.q
  amps = np.ascontiguousarray(amps, dtype=np.complex128).reshape(st.ncols, q)
  logs = np.ascontiguousarray(logs, dtype=float).reshape(st.ncols)
  # free spins: q per component of the column graph
  extra = st.components * math.log(q)
  if st.encoding == "phi":
    extra -= math.log(q)       # the ground spin is not a model spin
  bd = st.bd
  if bd.left[bd.root] < 0:
    c = int(bd.col[bd.root])
    s = complex(amps[c].sum())
    return ScaledComplex(s, float(logs[c]) + extra).normalized()
  zr, zi, ls = _kernels.contract_messages(
      q, bd.left, bd.right, bd.col, bd.root, st.dims, st.leaflab, st.tab_off,
      st.tab_i, st.tab_j, st.tab_k, np.ascontiguousarray(amps.real),
      np.ascontiguousarray(amps.imag), logs)
  return ScaledComplex(complex(zr, zi), ls + extra).normalized()


def contract_weights(graph: SpinGraph, weights, bd: BranchDecomposition | None = None,
                     encoding: str = "psi", *,
                     strategy: str = "min-degree-elimination",
                     max_label_dim: int = DEFAULT_MAX_LABEL_DIM) -> ScaledComplex:
  """Overlap of the psi/phi state with a product of per-column weight vectors.

  Args:
    graph: Spin graph.
    weights: Sequence of WeightVector (one per column, in column order) or a
      tuple ``(amps, logs)`` of arrays.
    bd: Decomposition of the columns; built with ``strategy`` when absent.
    encoding: ``psi`` or ``phi``.

  Returns:
    ``sum_s prod_c w_c((M^T s)_c)`` as a ScaledComplex. With Boltzmann
    weights this is the partition function.
  """
  if isinstance(weights, tuple) and len(weights) == 2 and isinstance(weights[0], np.ndarray):
    amps, logs = weights
  else:
    amps, logs = _weights_to_arrays(list(weights), graph.q)
  ncols = num_columns(graph, encoding)
  if amps.shape != (ncols, graph.q):
    raise ValueError(f"expected {ncols} weight vectors of length {graph.q}")
  if ncols == 0:
    return ScaledComplex(1.0 + 0j, graph.num_vertices * math.log(graph.q))
  if bd is None:
    bd = heuristic_branch_decompose(graph, encoding, strategy)
  st = prepare(graph, bd, encoding, max_label_dim)
  return contract_structure(st, amps, logs)


# ---------------------------------------------------------------------------
# site engine (ghz / kbody)


@dataclass(frozen=True, eq=False)
class Factor:
  """Weight tensor on an ordered tuple of distinct vertices."""

  sites: tuple
  amps: np.ndarray
  log_scale: float


def site_factors(h: Hamiltonian, beta: float, encoding: str,
                 correlation_sites: Sequence[int] | None = None,
                 max_k: int = 6) -> list[Factor]:
  """Weight tensors of every term (multi-site first, then one per vertex field)."""
  g = h.graph
  q = g.q
  out = []
  for e, tab in sorted(h.pairwise_tables().items()):
    a, l = weights_from_energies(tab.reshape(1, -1), beta)
    out.append(Factor(g.edges[e], a.reshape(q, q), float(l[0])))
  if encoding == "ghz" and h.kbody_terms:
    raise EncodingMismatchError("ghz encoding cannot absorb k-body terms")
  for term in h.kbody_terms:
    if term.k > max_k:
      raise WidthExceededError(
          f"k-body term on {term.k} sites exceeds the cap k <= {max_k}",
          term.k, q ** term.k)
    a, l = weights_from_energies(term.values.reshape(1, -1), beta)
    out.append(Factor(term.sites, a.reshape((q,) * term.k), float(l[0])))
  m = _cos_counts(correlation_sites, g.num_vertices)
  cosv = np.cos(2 * np.pi * np.arange(q) / q)
  for v in range(g.num_vertices):
    t = h.vertex_terms.get(v)
    if t is None and not m[v]:
      continue
    en = t.values if t is not None else np.zeros(q)
    a, l = weights_from_energies(np.asarray(en).reshape(1, q), beta)
    a = a * cosv[None, :] ** m[v]
    _renorm_rows(a, l)
    out.append(Factor((v,), a.reshape(q), float(l[0])))
  return out


def _site_touch(nv: int, factors: Sequence[Factor]) -> list[set]:
  """Per vertex, the indices of multi-site factors containing it."""
  touch = [set() for _ in range(nv)]
  for i, f in enumerate(factors):
    if len(f.sites) > 1:
      for v in f.sites:
        touch[v].add(i)
  return touch


def site_boundary_cost(nv: int, factors: Sequence[Factor]):
  """Boundary size of a vertex set: members sharing a factor with outsiders."""
  scopes = [set(f.sites) for f in factors if len(f.sites) > 1]
  incident = [[] for _ in range(nv)]
  for s in scopes:
    for v in s:
      incident[v].append(s)

  def cost(members) -> int:
    if isinstance(members, int):
      members = {i for i in range(nv) if members >> i & 1}
    return sum(1 for v in members if any(not s <= members for s in incident[v]))

  return cost


def site_decompose(h: Hamiltonian, strategy: str = "greedy-merge",
                   factors: Sequence[Factor] | None = None) -> BranchDecomposition:
  """Decomposition whose leaves are vertices (contraction sites).

  Strategies mirror the column case: ``greedy-merge`` merges adjacent
  clusters minimizing the boundary size, ``min-degree-elimination`` builds
  clusters along a min-degree vertex order, ``exhaustive-small`` searches
  all trees for at most 8 sites.
  """
  nv = h.graph.num_vertices
  if factors is None:
    factors = site_factors(h, 0.0, "kbody")
  if nv == 1:
    return caterpillar([0])
  touch = _site_touch(nv, factors)
  cost = site_boundary_cost(nv, factors)
  if strategy == "exhaustive-small":
    if nv > 8:
      raise DecompositionError(f"exhaustive-small supports at most 8 sites, model has {nv}")
    return exhaustive_tree(nv, cost)
  if strategy == "greedy-merge":
    return greedy_tree(nv, touch, cost)
  if strategy == "min-degree-elimination":
    return _site_elimination(nv, factors)
  raise DecompositionError(f"unknown strategy {strategy!r}")


def _site_elimination(nv: int, factors: Sequence[Factor]) -> BranchDecomposition:
  from .decomposition import _min_degree_order
  pairs = []
  for f in factors:
    s = list(f.sites)
    for i in range(len(s)):
      for j in range(i + 1, len(s)):
        pairs.append((s[i], s[j]))
  order = _min_degree_order(nv, pairs)
  rank = {v: i for i, v in enumerate(order)}
  nbr = [set() for _ in range(nv)]
  for a, b in pairs:
    nbr[a].add(b)
    nbr[b].add(a)
  bld = TreeBuilder()
  buckets: list[list] = [[] for _ in range(nv)]
  for v in range(nv):
    buckets[rank[v]].append((bld.leaf(v), frozenset(nbr[v] | {v})))
  done = []
  for r in range(nv):
    items = buckets[r]
    if not items:
      continue
    v = order[r]
    acc, scope = items[0]
    for node, s in items[1:]:
      acc = bld.join(acc, node)
      scope = scope | s
    rest = scope - {v}
    rest = {u for u in rest if rank[u] > r}
    if rest:
      buckets[min(rank[u] for u in rest)].append((acc, frozenset(rest)))
    else:
      done.append(acc)
  acc = done[0]
  for node in done[1:]:
    acc = bld.join(acc, node)
  return bld.build(acc)


def _einsum_absorb(tensors: list[tuple[np.ndarray, list[int]]], out_axes: list[int]) -> np.ndarray:
  args = []
  for t, ax in tensors:
    args.extend([t, ax])
  args.append(out_axes)
  return np.einsum(*args, optimize=len(tensors) > 2)


def _site_plan(h: Hamiltonian, factors: Sequence[Factor], bd: BranchDecomposition):
  """Postorder, factor placement (at the LCA of their sites) and per-vertex use counts."""
  nv = h.graph.num_vertices
  bd.check_columns(nv)
  n = bd.num_nodes
  parent = bd.parents()
  depth = np.zeros(n, dtype=np.int64)
  order = _kernels.postorder(bd.left, bd.right, bd.root)
  for x in order[::-1]:
    if x != bd.root:
      depth[x] = depth[parent[x]] + 1
  leaf_of = {int(c): x for x, c in enumerate(bd.col) if c >= 0}

  def lca(a, b):
    while depth[a] > depth[b]:
      a = parent[a]
    while depth[b] > depth[a]:
      b = parent[b]
    while a != b:
      a, b = parent[a], parent[b]
    return a

  at: dict[int, list[Factor]] = {}
  total = np.zeros(nv, dtype=np.int64)
  for f in factors:
    node = leaf_of[f.sites[0]]
    for s in f.sites[1:]:
      node = lca(node, leaf_of[s])
    at.setdefault(int(node), []).append(f)
    for s in f.sites:
      total[s] += 1
  return order, at, total


def _site_boundaries(bd: BranchDecomposition, order, at, total) -> Iterator[tuple[int, list, list]]:
  """Per node in postorder: (node, factors placed there, sorted boundary spins)."""
  inside: dict[int, dict[int, int]] = {}
  for x in order:
    x = int(x)
    here = at.get(x, [])
    cnt: dict[int, int] = {}
    if bd.left[x] < 0:
      cnt[int(bd.col[x])] = 0
    else:
      for c in (int(bd.left[x]), int(bd.right[x])):
        for v, k in inside.pop(c).items():
          cnt[v] = cnt.get(v, 0) + k
    for f in here:
      for s in f.sites:
        cnt[s] = cnt.get(s, 0) + 1
    bnd = sorted(v for v, k in cnt.items() if k < total[v])
    keep = set(bnd)
    inside[x] = {v: k for v, k in cnt.items() if v in keep}
    yield x, here, bnd


def site_width(h: Hamiltonian, factors: Sequence[Factor], bd: BranchDecomposition) -> int:
  """Largest message boundary (in spins) plus one, the site analogue of width."""
  order, at, total = _site_plan(h, factors, bd)
  return 1 + max((len(b) for _, _, b in _site_boundaries(bd, order, at, total)), default=0)


def contract_sites(h: Hamiltonian, factors: Sequence[Factor], bd: BranchDecomposition,
                   max_label_dim: int = DEFAULT_MAX_LABEL_DIM) -> ScaledComplex:
  """Sum over all spins of the product of factors, along a site tree."""
  q = h.graph.q
  order, at, total = _site_plan(h, factors, bd)
  msg: dict[int, tuple[np.ndarray, list[int], float]] = {}
  for x, here, bnd in _site_boundaries(bd, order, at, total):
    parts: list[tuple[np.ndarray, list[int]]] = []
    ls = 0.0
    if bd.left[x] < 0:
      parts.append((np.ones(q, dtype=np.complex128), [int(bd.col[x])]))
    else:
      for c in (int(bd.left[x]), int(bd.right[x])):
        t, ax, l = msg.pop(c)
        parts.append((t, ax))
        ls += l
    for f in here:
      parts.append((f.amps, list(f.sites)))
      ls += f.log_scale
    if q ** len(bnd) > max_label_dim:
      raise WidthExceededError(
          f"site boundary of {len(bnd)} spins needs {q}^{len(bnd)} labels, "
          f"above the cap {max_label_dim}", len(bnd) + 1, q ** len(bnd))
    t = _einsum_absorb(parts, bnd)
    t = np.asarray(t, dtype=np.complex128)
    mx = float(np.abs(t).max()) if t.size else 0.0
    if mx > 0:
      t = t / mx
      ls += math.log(mx)
    msg[x] = (t, bnd, ls)
  t, ax, ls = msg[int(bd.root)]
  return ScaledComplex(complex(t), ls).normalized()


# ---------------------------------------------------------------------------
# front door


def contract(graph: SpinGraph | None, h: Hamiltonian, beta: float,
             bd: BranchDecomposition | None = None, encoding: str = "auto",
             correlation_sites: Sequence[int] | None = None, *,
             strategy: str | None = None,
             max_label_dim: int = DEFAULT_MAX_LABEL_DIM,
             max_k: int = 6) -> ScaledComplex:
  """Partition function (or its cos-weighted numerator) by tree contraction.

  Args:
    graph: Spin graph; must equal ``h.graph`` when given.
    h: Model.
    beta: Inverse temperature.
    bd: Decomposition of the encoding's leaves (columns for psi/phi,
      vertices for ghz/kbody); built heuristically when absent.
    encoding: ``auto``, ``psi``, ``phi``, ``ghz`` or ``kbody``.
    correlation_sites: Multiset of vertices whose ``cos(2 pi s/q)`` factors
      are inserted; the caller divides by a plain run.
    strategy: Heuristic used when ``bd`` is absent.
    max_label_dim: Refuse decompositions with larger messages.
    max_k: Largest k-body term accepted.

  Returns:
    ScaledComplex equal to ``Z`` (or the weighted numerator).

  Raises:
    EncodingMismatchError: encoding cannot represent the model.
    WidthExceededError: messages would exceed ``max_label_dim``.
  """
  if graph is not None and graph != h.graph:
    raise ValueError("graph does not match the Hamiltonian's graph")
  g = h.graph
  if encoding == "auto":
    encoding = choose_encoding(h, correlation_sites)
  check_encoding(h, encoding, correlation_sites)
  if encoding in ("psi", "phi"):
    amps, logs = column_weights(h, beta, encoding, correlation_sites)
    return contract_weights(g, (amps, logs), bd, encoding,
                            strategy=strategy or "min-degree-elimination",
                            max_label_dim=max_label_dim)
  factors = site_factors(h, beta, encoding, correlation_sites, max_k)
  if bd is None:
    bd = site_decompose(h, strategy or "greedy-merge", factors)
  return contract_sites(h, factors, bd, max_label_dim)


def correlation(h: Hamiltonian, beta: float, sites: Sequence[int], encoding: str = "auto",
                bd_plain: BranchDecomposition | None = None,
                bd_weighted: BranchDecomposition | None = None, **kw) -> complex:
  """``<cos(theta_i1) ... cos(theta_in)>`` as the ratio of two contractions."""
  if not sites:
    raise ValueError("correlation needs at least one site")
  enc_w = choose_encoding(h, sites) if encoding == "auto" else encoding
  enc_p = enc_w
  z = contract(None, h, beta, bd_plain, enc_p, None, **kw)
  if z.is_zero():
    raise ZeroDivisionError("partition function vanishes")
  num = contract(None, h, beta, bd_weighted, enc_w, list(sites), **kw)
  if num.is_zero():
    return 0j
  return (num / z).value()


@dataclass(frozen=True)
class FreeEnergyReport:
  """Thermodynamic post-processing of ``log Z``."""

  log_z: complex
  beta: float
  num_spins: int
  free_energy_per_spin: complex | None
  beta_free_energy: complex
  mean_energy: float | None = None
  energy_variance: float | None = None


def free_energy_report(z: ScaledComplex, beta: float, num_spins: int,
                       z_plus: ScaledComplex | None = None,
                       z_minus: ScaledComplex | None = None,
                       delta: float | None = None) -> FreeEnergyReport:
  """log Z, free energy per spin and finite-difference energy moments.

  ``<E> = -(log Z(b+d) - log Z(b-d)) / 2d`` and
  ``var E = (log Z(b+d) - 2 log Z(b) + log Z(b-d)) / d^2`` when the caller
  supplies ``Z`` at ``beta +- delta``.
  """
  if z.is_zero():
    raise ZeroDivisionError("free energy of a vanishing partition function")
  lz = z.log()
  f = -lz / (beta * num_spins) if beta > 0 else None
  mean = var = None
  if z_plus is not None and z_minus is not None:
    if not delta:
      raise ValueError("delta is required with z_plus / z_minus")
    lp, lm = z_plus.log().real, z_minus.log().real
    mean = -(lp - lm) / (2 * delta)
    var = (lp - 2 * lz.real + lm) / (delta * delta)
  return FreeEnergyReport(lz, beta, num_spins, f, -lz, mean, var)
