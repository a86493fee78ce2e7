"""Brute-force reference values.

Everything here enumerates configurations or basis states directly and is
meant for desk-scale instances only. It is the trust anchor for every other
module, so it avoids the weight-vector machinery and works from energies.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Hamiltonian, PairwiseTable, SpinGraph, WeightVector
from .numerics import ScaledComplex
from .zq import incidence

DEFAULT_CAP = 1 << 24
_CHUNK = 1 << 16


class OracleCapError(RuntimeError):
  """The requested enumeration exceeds the configured cap."""


@dataclass(frozen=True, eq=False)
class DenseState:
  """Unnormalized state vector over ``num_sites`` qudits (site 0 most significant)."""

  num_sites: int
  q: int
  amplitudes: np.ndarray

  def tensor(self) -> np.ndarray:
    return self.amplitudes.reshape((self.q,) * self.num_sites)


def _check_cap(q: int, n: int, cap: int, what: str):
  if q ** n > cap:
    raise OracleCapError(f"{what}: {q}^{n} states exceed the enumeration cap {cap}")


def _digits(start: int, stop: int, n: int, q: int) -> np.ndarray:
  """Rows of base-q digits (most significant first) for indices in a range."""
  idx = np.arange(start, stop, dtype=np.int64)
  out = np.empty((n, idx.size), dtype=np.int64)
  for i in range(n - 1, -1, -1):
    out[i] = idx % q
    idx //= q
  return out


def _chunk_energy(h: Hamiltonian, s: np.ndarray) -> np.ndarray:
  g = h.graph
  q = g.q
  en = np.zeros(s.shape[1], dtype=np.complex128)
  for e, t in h.edge_terms.items():
    a, b = g.edges[e]
    if isinstance(t, PairwiseTable):
      en += t.values[s[a], s[b]]
    else:
      en += t.values[(s[b] - s[a]) % q]
  for v, t in h.vertex_terms.items():
    en += t.values[s[v]]
  for term in h.kbody_terms:
    en += term.values[tuple(s[list(term.sites)])]
  return en


def _weighted_sum(h: Hamiltonian, beta: float, cos_sites: Sequence[int],
                  cap: int, workers: int) -> ScaledComplex:
  g = h.graph
  q, nv = g.q, g.num_vertices
  _check_cap(q, nv, cap, "partition enumeration")
  total = q ** nv
  counts: dict[int, int] = {}
  for v in cos_sites:
    if not 0 <= int(v) < nv:
      raise ValueError(f"correlation site {v} is not a vertex")
    counts[int(v)] = counts.get(int(v), 0) + 1
  cosv = np.cos(2 * np.pi * np.arange(q) / q)

  def chunk(start):
    s = _digits(start, min(total, start + _CHUNK), nv, q)
    en = _chunk_energy(h, s)
    if np.any(np.isnan(en.real)):
      raise ValueError("configuration mixes +inf and -inf energies")
    with np.errstate(invalid="ignore"):
      re = -beta * en.real
      im = -beta * en.imag
    re = np.where(np.isnan(re), np.where(en.real > 0, -np.inf, np.inf), re)
    expo = re + 1j * np.where(np.isfinite(re) & np.isfinite(im), im, 0.0)
    fin = np.isfinite(expo.real)
    if np.any(expo.real == np.inf):
      raise ValueError("configuration with infinite weight")
    if not fin.any():
      return ScaledComplex(0j, 0.0)
    m = float(expo.real[fin].max())
    with np.errstate(invalid="ignore"):
      w = np.where(fin, np.exp(expo - m), 0.0)
    for v, k in counts.items():
      w = w * cosv[s[v]] ** k
    return ScaledComplex(complex(w.sum()), m)

  starts = list(range(0, total, _CHUNK))
  if workers > 1 and len(starts) > 1:
    with ThreadPoolExecutor(workers) as ex:
      parts = list(ex.map(chunk, starts))
  else:
    parts = [chunk(s) for s in starts]
  # pairwise tree reduction in fixed order
  while len(parts) > 1:
    nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
    if len(parts) % 2:
      nxt.append(parts[-1])
    parts = nxt
  return parts[0].normalized()


def partition_exact(h: Hamiltonian, beta: float, cap: int = DEFAULT_CAP,
                    workers: int = 1) -> ScaledComplex:
  """``Z = sum_s exp(-beta H(s))`` by enumeration of all ``q^|V|`` configurations."""
  return _weighted_sum(h, beta, (), cap, workers)


def correlation_exact(h: Hamiltonian, beta: float, sites: Sequence[int],
                      cap: int = DEFAULT_CAP, workers: int = 1) -> complex:
  """``Z^-1 sum_s prod_k cos(2 pi s_{i_k}/q) exp(-beta H(s))``."""
  if len(sites) == 0:
    raise ValueError("correlation needs at least one site")
  z = partition_exact(h, beta, cap, workers)
  if z.is_zero():
    raise ZeroDivisionError("partition function vanishes")
  num = _weighted_sum(h, beta, sites, cap, workers)
  if num.is_zero():
    return 0j
  return (num / z).value()


def _index(cols: np.ndarray, q: int) -> np.ndarray:
  """Row-major basis index of digit rows (sites x configs)."""
  idx = np.zeros(cols.shape[1], dtype=np.int64)
  for row in cols:
    idx = idx * q + row
  return idx


def _cluster_state(q: int, nv: int, site_vertex: Sequence[int], cap: int) -> DenseState:
  """``sum_s |s_{v(0)} s_{v(1)} ...>``: each site copies the spin of its vertex."""
  n = len(site_vertex)
  _check_cap(q, n, cap, "dense state")
  _check_cap(q, nv, cap, "dense state enumeration")
  amps = np.zeros(q ** n, dtype=np.complex128)
  for start in range(0, q ** nv, _CHUNK):
    s = _digits(start, min(q ** nv, start + _CHUNK), nv, q)
    idx = _index(s[list(site_vertex)], q) if n else np.zeros(s.shape[1], np.int64)
    np.add.at(amps, idx, 1.0)
  return DenseState(n, q, amps)


def dense_state(graph: SpinGraph, encoding: str, cap: int = DEFAULT_CAP,
                vertex_sites: bool = False) -> DenseState:
  """Dense encoding state.

  Args:
    graph: Spin graph.
    encoding: ``psi`` (edge qudits, ``sum_s |B^T s>``), ``phi`` (vertex then
      edge qudits, ``sum_s |s>|B^T s>``) or ``ghz`` (two qudits per edge,
      tail copy then head copy, each a copy of its vertex spin).
    cap: Maximum number of basis states / configurations.
    vertex_sites: For ``ghz``, append one extra copy site per vertex.

  Returns:
    DenseState including the multiplicity of each basis state.
  """
  q, nv, ne = graph.q, graph.num_vertices, graph.num_edges
  if encoding == "ghz":
    sv = [v for e in graph.edges for v in e]
    if vertex_sites:
      sv += list(range(nv))
    return _cluster_state(q, nv, sv, cap)
  if encoding not in ("psi", "phi"):
    raise ValueError(f"unknown encoding {encoding!r}")
  n = ne if encoding == "psi" else nv + ne
  _check_cap(q, n, cap, "dense state")
  _check_cap(q, nv, cap, "dense state enumeration")
  bt = incidence(graph).entries.T
  amps = np.zeros(q ** n, dtype=np.complex128)
  for start in range(0, q ** nv, _CHUNK):
    s = _digits(start, min(q ** nv, start + _CHUNK), nv, q)
    c = (bt @ s) % q
    rows = c if encoding == "psi" else np.vstack([s, c])
    idx = _index(rows, q) if n else np.zeros(s.shape[1], np.int64)
    np.add.at(amps, idx, 1.0)
  return DenseState(n, q, amps)


def kbody_state(h: Hamiltonian, cap: int = DEFAULT_CAP) -> tuple[DenseState, list[tuple]]:
  """Cluster state with one site per (term, position) and the term grouping.

  Multi-site terms come first in :func:`spinz.model.interaction_sites`
  order, then one site per vertex field.
  """
  from .model import interaction_sites
  groups, sv = [], []
  for sites in interaction_sites(h):
    groups.append(tuple(range(len(sv), len(sv) + len(sites))))
    sv.extend(sites)
  for v in sorted(h.vertex_terms):
    groups.append((len(sv),))
    sv.append(v)
  return _cluster_state(h.q, h.graph.num_vertices, sv, cap), groups


def overlap(state: DenseState, weights: Sequence[WeightVector],
            grouping: Sequence[Sequence[int]] | None = None) -> ScaledComplex:
  """``sum_x amp(x) prod_g w_g(x_g)`` without conjugating the weights.

  Args:
    state: Dense state.
    weights: One WeightVector per group, of length ``q^len(group)``.
    grouping: Site groups covering every site exactly once; defaults to
      single sites in order.
  """
  q, n = state.q, state.num_sites
  if grouping is None:
    grouping = [(i,) for i in range(n)]
  grouping = [tuple(int(s) for s in g) for g in grouping]
  flat = sorted(s for g in grouping for s in g)
  if flat != list(range(n)):
    raise ValueError("grouping must cover every site exactly once")
  if len(weights) != len(grouping):
    raise ValueError("one weight vector per group is required")
  t = state.tensor()
  axes = list(range(n))
  log_scale = 0.0
  for g, w in zip(grouping, weights):
    if len(w) != q ** len(g):
      raise ValueError(f"weight vector for group {g} must have length {q ** len(g)}")
    wt = w.amplitudes.reshape((q,) * len(g))
    pos = [axes.index(s) for s in g]
    t = np.tensordot(t, wt, axes=(pos, list(range(len(g)))))
    axes = [a for a in axes if a not in g]
    log_scale += w.log_scale
  return ScaledComplex(complex(t), log_scale).normalized()


def reduced_rank(state: DenseState, subsystem: Sequence[int], tol: float = 1e-9) -> int:
  """Rank of the reduced density operator on ``subsystem`` (Schmidt rank)."""
  q, n = state.q, state.num_sites
  a = sorted(set(int(s) for s in subsystem))
  b = [i for i in range(n) if i not in a]
  m = np.transpose(state.tensor(), a + b).reshape(q ** len(a), q ** len(b))
  sv = np.linalg.svd(m, compute_uv=False)
  if sv.size == 0 or sv[0] == 0:
    return 0
  return int(np.count_nonzero(sv > tol * sv[0]))


def transfer_matrix_chain(q: int, n: int, beta: float, edge: np.ndarray,
                          field: np.ndarray | None = None, periodic: bool = False) -> float:
  """log Z of a uniform open (or periodic) chain by transfer matrices.

  ``edge[j]`` is the difference-form edge energy, ``field[j]`` the uniform
  vertex field. Real energies only; returns the real log Z.
  """
  j = (np.arange(q)[None, :] - np.arange(q)[:, None]) % q
  edge = -beta * np.asarray(edge, dtype=float)
  field = np.zeros(q) if field is None else -beta * np.asarray(field, dtype=float)
  # factor out the largest exponents so large couplings cannot overflow
  ce, cf = edge.max(), field.max()
  t = np.exp(edge - ce)[j]
  f = np.exp(field - cf)
  shift = (n if periodic else n - 1) * ce + n * cf
  if periodic:
    m = np.sqrt(f)[:, None] * t * np.sqrt(f)[None, :]
    ev = np.linalg.eigvals(m)
    lam = ev[np.argmax(np.abs(ev))]
    ratio = ev / lam
    return float(shift + n * np.log(abs(lam)) + np.log(abs(np.sum(ratio ** n))))
  v = f.copy()
  logz = shift
  for _ in range(n - 1):
    v = (v @ t) * f
    s = v.sum()
    logz += math.log(s)
    v /= s
  return logz + math.log(v.sum())
