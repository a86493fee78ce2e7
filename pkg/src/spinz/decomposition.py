"""Branch decompositions of encoding columns, connectivity and width.

A decomposition is stored as a rooted binary tree whose root has degree two;
the unrooted subcubic tree is obtained by suppressing the root, so the two
root children share one tree edge. Leaves carry column ids of the encoding
matrix: edge ids for ``psi``; for ``phi`` vertex columns ``0..|V|-1``
followed by edge columns ``|V| + e``.

Columns are viewed as edges of a "column graph": the spin graph itself for
``psi``, and the spin graph plus a ground vertex joined to every vertex for
``phi``. The connectivity of a column subset A is

  lambda(A) = |V'| + c(E') - c(A) - c(E' - A) + 1,

with component counts taken over all vertices of the column graph.
"""

from __future__ import annotations

import hashlib
import heapq
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .model import SpinGraph
from .zq import component_count

STRATEGIES = ("greedy-merge", "min-degree-elimination", "exhaustive-small")
EXHAUSTIVE_MAX = 8


_TREE_ERRORS = {
    1: "inconsistent tree arrays",
    2: "root out of range",
    3: "internal nodes must have two children",
    4: "leaf_map must label exactly the leaves",
    5: "child index out of range",
    6: "tree arrays do not form a rooted tree",
    7: "leaf_map is not injective",
    8: "tree is not connected",
}


class DecompositionError(ValueError):
  """Invalid tree, leaf map or strategy request."""


def column_graph(graph: SpinGraph, encoding: str) -> tuple[int, np.ndarray, np.ndarray]:
  """Vertex count and (tail, head) arrays of the encoding's columns."""
  nv = graph.num_vertices
  edges = graph.edge_array
  if encoding == "psi":
    return nv, edges[:, 0].copy(), edges[:, 1].copy()
  if encoding == "phi":
    cu = np.concatenate([np.full(nv, nv, dtype=np.int64), edges[:, 0]])
    cv = np.concatenate([np.arange(nv, dtype=np.int64), edges[:, 1]])
    return nv + 1, cu, cv
  raise DecompositionError(f"unknown encoding {encoding!r}")


def num_columns(graph: SpinGraph, encoding: str) -> int:
  return graph.num_edges + (graph.num_vertices if encoding == "phi" else 0)


def connectivity(graph: SpinGraph, subset: Iterable[int], encoding: str = "psi") -> int:
  """Connectivity lambda(A) of a proper nonempty column subset."""
  nvp, cu, cv = column_graph(graph, encoding)
  ncol = cu.shape[0]
  a = sorted(set(int(c) for c in subset))
  if not a or len(a) >= ncol:
    raise DecompositionError("subset must be a proper nonempty column subset")
  if a[0] < 0 or a[-1] >= ncol:
    raise DecompositionError("subset references unknown columns")
  inside = np.zeros(ncol, dtype=bool)
  inside[a] = True
  cols = list(zip(cu.tolist(), cv.tolist()))
  c_all = component_count(nvp, cols)
  c_a = component_count(nvp, [cols[i] for i in range(ncol) if inside[i]])
  c_b = component_count(nvp, [cols[i] for i in range(ncol) if not inside[i]])
  return nvp + c_all - c_a - c_b + 1


@dataclass(frozen=True)
class WidthReport:
  """Connectivity per tree edge and its maximum.

  Attributes:
    per_edge_lambda: maps a tree edge (pair of unrooted node ids, sorted)
      to lambda of the side below it.
    width: maximum over tree edges (1 for a single-leaf tree).
    max_label_exponent: width - 1; the largest message is q**this.
  """

  per_edge_lambda: dict
  width: int

  def __hash__(self):
    return hash((self.width, tuple(sorted(self.per_edge_lambda.items()))))

  @property
  def max_label_exponent(self) -> int:
    return self.width - 1


@dataclass(frozen=True, eq=False)
class BranchDecomposition:
  """Rooted binary tree over column leaves.

  Attributes:
    left, right: child arrays (-1 for leaves).
    col: column id per node (-1 for internal nodes).
    root: root node; for a single leaf the leaf itself.
  """

  left: np.ndarray
  right: np.ndarray
  col: np.ndarray
  root: int

  def __post_init__(self):
    for name in ("left", "right", "col"):
      a = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
      a.setflags(write=False)
      object.__setattr__(self, name, a)
    object.__setattr__(self, "root", int(self.root))
    self._check_tree()

  def _check_tree(self):
    code = _kernels.check_tree(self.left, self.right, self.col, self.root)
    if code:
      raise DecompositionError(_TREE_ERRORS[code])

  @property
  def num_nodes(self) -> int:
    return self.left.shape[0]

  @property
  def num_leaves(self) -> int:
    return int(np.count_nonzero(self.col >= 0))

  def columns(self) -> np.ndarray:
    return np.sort(self.col[self.col >= 0])

  @property
  def leaf_map(self) -> dict[int, int]:
    """Leaf node -> column id."""
    return {int(i): int(c) for i, c in enumerate(self.col) if c >= 0}

  def check_columns(self, ncols: int):
    cols = self.columns()
    if cols.size != ncols or not np.array_equal(cols, np.arange(ncols)):
      raise DecompositionError(
          f"leaf_map covers {cols.size} columns, expected all of 0..{ncols - 1}")

  def tree_adjacency(self) -> dict[int, list[int]]:
    """Unrooted subcubic tree (root suppressed): node -> neighbours."""
    adj: dict[int, list[int]] = {i: [] for i in range(self.num_nodes)}
    for x in range(self.num_nodes):
      if self.left[x] >= 0 and x != self.root:
        for c in (int(self.left[x]), int(self.right[x])):
          adj[x].append(c)
          adj[c].append(x)
    if self.left[self.root] >= 0:
      a, b = int(self.left[self.root]), int(self.right[self.root])
      adj[a].append(b)
      adj[b].append(a)
      del adj[self.root]
    return adj

  def edge_nodes(self) -> list[int]:
    """One representative node per unrooted tree edge (edge above the node)."""
    if self.left[self.root] < 0:
      return []
    rb = int(self.right[self.root])
    return [x for x in range(self.num_nodes) if x != self.root and x != rb]

  def edge_key(self, x: int) -> tuple[int, int]:
    """Unrooted tree edge above node ``x`` as a sorted node pair."""
    parent = self.parents()
    p = int(parent[x])
    if p == self.root:
      a, b = int(self.left[self.root]), int(self.right[self.root])
      return (min(a, b), max(a, b))
    return (min(x, p), max(x, p))

  def parents(self) -> np.ndarray:
    par = np.full(self.num_nodes, -1, dtype=np.int64)
    internal = self.left >= 0
    idx = np.flatnonzero(internal)
    par[self.left[idx]] = idx
    par[self.right[idx]] = idx
    return par

  def leaves_below(self, x: int) -> list[int]:
    out, stack = [], [int(x)]
    while stack:
      y = stack.pop()
      if self.left[y] < 0:
        out.append(int(self.col[y]))
      else:
        stack.extend((int(self.left[y]), int(self.right[y])))
    return sorted(out)

  def to_text(self) -> str:
    """Nested-parentheses text; the top level is the suppressed root edge."""
    out = []
    stack = [("node", self.root)]
    while stack:
      kind, x = stack.pop()
      if kind == "tok":
        out.append(x)
        continue
      if self.left[x] < 0:
        out.append(str(int(self.col[x])))
      else:
        stack.append(("tok", ")"))
        stack.append(("node", int(self.right[x])))
        stack.append(("tok", ","))
        stack.append(("node", int(self.left[x])))
        stack.append(("tok", "("))
    text = "".join(out)
    return text if self.left[self.root] >= 0 else f"({text})"

  @classmethod
  def from_text(cls, text: str) -> "BranchDecomposition":
    """Parse the nested-parentheses format.

    A binary top level ``(A,B)`` names the root edge; a ternary top level
    ``(A,B,C)`` names a degree-3 node. ``(k)`` or ``k`` is a single leaf.
    """
    tokens = re.findall(r"\(|\)|,|-?\d+|\S", text)
    b = TreeBuilder()
    stack: list[list[int]] = []
    result = None
    for i, tok in enumerate(tokens):
      if tok == "(":
        stack.append([])
      elif tok == ")":
        if not stack:
          raise DecompositionError("unbalanced ')' in decomposition text")
        kids = stack.pop()
        top = not stack
        if len(kids) == 1:
          node = kids[0]
        elif len(kids) == 2:
          node = b.join(kids[0], kids[1])
        elif len(kids) == 3 and top:
          node = b.join(kids[0], b.join(kids[1], kids[2]))
        else:
          raise DecompositionError(
              f"node with {len(kids)} children (only the top level may have 3)")
        if top:
          if result is not None:
            raise DecompositionError("trailing input after decomposition")
          result = node
        else:
          stack[-1].append(node)
      elif tok == ",":
        if not stack:
          raise DecompositionError("',' outside parentheses")
      elif re.fullmatch(r"-?\d+", tok):
        c = int(tok)
        if c < 0:
          raise DecompositionError("leaf ids must be non-negative")
        leaf = b.leaf(c)
        if stack:
          stack[-1].append(leaf)
        elif result is None and len(tokens) == 1:
          result = leaf
        else:
          raise DecompositionError("leaf outside parentheses")
      else:
        raise DecompositionError(f"unexpected token {tok!r}")
    if stack or result is None:
      raise DecompositionError("unbalanced parentheses in decomposition text")
    return b.build(result)

  def digest(self) -> str:
    return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


class TreeBuilder:
  """Append-only construction of rooted binary trees."""

  def __init__(self):
    self.left: list[int] = []
    self.right: list[int] = []
    self.col: list[int] = []

  def leaf(self, c: int) -> int:
    self.left.append(-1)
    self.right.append(-1)
    self.col.append(int(c))
    return len(self.col) - 1

  def join(self, a: int, b: int) -> int:
    self.left.append(a)
    self.right.append(b)
    self.col.append(-1)
    return len(self.col) - 1

  def build(self, root: int) -> BranchDecomposition:
    # keep only nodes reachable from root, renumbered in creation order
    return BranchDecomposition(np.array(self.left), np.array(self.right),
                               np.array(self.col), root)


def from_nested(nested) -> BranchDecomposition:
  """Build from nested tuples of column ids, e.g. ``((0, 1), (2, 3))``."""
  b = TreeBuilder()
  if isinstance(nested, (int, np.integer)):
    return b.build(b.leaf(int(nested)))

  def rec(x):
    if isinstance(x, (int, np.integer)):
      return b.leaf(int(x))
    x = tuple(x)
    if len(x) == 1:
      return rec(x[0])
    if len(x) != 2:
      raise DecompositionError("nested decomposition nodes must be pairs")
    return b.join(rec(x[0]), rec(x[1]))

  x = tuple(nested)
  if len(x) == 3:
    return b.build(b.join(rec(x[0]), b.join(rec(x[1]), rec(x[2]))))
  return b.build(rec(x))


def caterpillar(columns: Sequence[int]) -> BranchDecomposition:
  """Linear decomposition ``((((c0, c1), c2), c3), ...)``."""
  b = TreeBuilder()
  cols = list(columns)
  if not cols:
    raise DecompositionError("no columns")
  acc = b.leaf(cols[0])
  for c in cols[1:]:
    acc = b.join(acc, b.leaf(c))
  return b.build(acc)


def _kernel_dims(graph: SpinGraph, bd: BranchDecomposition, encoding: str) -> np.ndarray:

  nvp, cu, cv = column_graph(graph, encoding)
  out = _kernels.structure(nvp, cu, cv, bd.left, bd.right, bd.col, bd.root,
                           graph.q, 1 << 62, 1 << 62, False)
  return out[2]


def width(bd: BranchDecomposition, graph: SpinGraph, encoding: str = "psi") -> WidthReport:
  """Connectivity at every tree edge.

  Uses the compiled boundary/partition pass, which is linear in the tree
  size times the boundary sizes; agreement with :func:`connectivity` is
  covered by the test suite.
  """
  bd.check_columns(num_columns(graph, encoding))
  if bd.left[bd.root] < 0:
    return WidthReport({}, 1)
  dims = _kernel_dims(graph, bd, encoding)
  parent = bd.parents()
  ra, rb = int(bd.left[bd.root]), int(bd.right[bd.root])
  per = {}
  for x in range(bd.num_nodes):
    if x == bd.root or x == rb:
      continue
    p = int(parent[x])
    key = (min(ra, rb), max(ra, rb)) if p == bd.root else (min(x, p), max(x, p))
    per[key] = int(dims[x]) + 1
  return WidthReport(per, max(per.values()))


def width_direct(bd: BranchDecomposition, graph: SpinGraph, encoding: str = "psi") -> WidthReport:
  """Same as :func:`width` by direct component counting (slow reference)."""
  bd.check_columns(num_columns(graph, encoding))
  if bd.left[bd.root] < 0:
    return WidthReport({}, 1)
  per = {}
  for x in bd.edge_nodes():
    per[bd.edge_key(x)] = connectivity(graph, bd.leaves_below(x), encoding)
  return WidthReport(per, max(per.values()))


# ---------------------------------------------------------------------------
# heuristics


class _LambdaOracle:
  """Memoized connectivity over column bitmasks (small column sets)."""

  def __init__(self, nvp: int, cols: list[tuple[int, int]]):
    self.nvp = nvp
    self.cols = cols
    self.full = (1 << len(cols)) - 1
    self.c_all = self._comps(self.full)
    self.memo: dict[int, int] = {}

  def _comps(self, mask: int) -> int:
    return component_count(self.nvp, [c for i, c in enumerate(self.cols) if mask >> i & 1])

  def __call__(self, mask: int) -> int:
    key = min(mask, self.full ^ mask)
    v = self.memo.get(key)
    if v is None:
      v = self.nvp + self.c_all - self._comps(mask) - self._comps(self.full ^ mask) + 1
      self.memo[key] = v
    return v


def exhaustive_tree(n: int, cost: Callable[[int], int]) -> BranchDecomposition:
  """Minimize the maximum ``cost(leaf bitmask)`` over all unrooted binary trees.

  Leaves are ``0..n-1``; trees are generated by inserting leaf k into every
  edge of each tree on leaves ``0..k-1``. Ties keep the first tree found.
  """
  if n <= 2:
    return caterpillar(list(range(n)))
  best = [None, None]

  def evaluate(edges):
    adj: dict[int, list[int]] = {}
    for a, b in edges:
      adj.setdefault(a, []).append(b)
      adj.setdefault(b, []).append(a)
    w = 0
    for a, b in edges:
      mask, stack, seen = 0, [b], {a, b}
      while stack:
        y = stack.pop()
        if y < n:
          mask |= 1 << y
        for z in adj[y]:
          if z not in seen:
            seen.add(z)
            stack.append(z)
      w = max(w, cost(mask))
      if best[1] is not None and w >= best[1]:
        return w
    return w

  def grow(edges, k, nxt):
    if k == n:
      w = evaluate(edges)
      if best[1] is None or w < best[1]:
        best[0], best[1] = list(edges), w
      return
    for i in range(len(edges)):
      a, b = edges[i]
      new = edges[:i] + edges[i + 1:] + [(a, nxt), (nxt, b), (nxt, k)]
      grow(new, k + 1, nxt + 1)

  grow([(0, n), (1, n), (2, n)], 3, n + 1)
  return _unrooted_to_bd(best[0], n)


def _unrooted_to_bd(edges, n: int) -> BranchDecomposition:
  """Root an unrooted tree (leaves 0..n-1) at the edge incident to leaf 0."""
  adj: dict[int, list[int]] = {}
  for a, b in edges:
    adj.setdefault(a, []).append(b)
    adj.setdefault(b, []).append(a)
  for v in adj:
    adj[v].sort()
  bld = TreeBuilder()

  def build(x, parent):
    out = {}
    stack = [(x, parent, False)]
    while stack:
      y, p, done = stack.pop()
      kids = [z for z in adj[y] if z != p]
      if not kids:
        out[y] = bld.leaf(y)
      elif done:
        out[y] = bld.join(out[kids[0]], out[kids[1]])
      else:
        stack.append((y, p, True))
        for z in reversed(kids):
          stack.append((z, y, False))
    return out[x]

  other = adj[0][0]
  a = build(0, other)
  b = build(other, 0)
  return bld.build(bld.join(a, b))


def greedy_tree(n: int, touch: Sequence[set], cost: Callable[[frozenset], int]) -> BranchDecomposition:
  """Repeatedly merge the adjacent cluster pair whose union has the lowest cost.

  Args:
    n: number of leaves ``0..n-1``.
    touch: per leaf, the set of graph vertices it touches; clusters are
      adjacent when these sets intersect.
    cost: cost of a leaf set.

  Ties are broken by the lowest pair of cluster ids (a cluster keeps the
  smallest leaf id it contains).
  """
  bld = TreeBuilder()
  node = {i: bld.leaf(i) for i in range(n)}
  members = {i: frozenset([i]) for i in range(n)}
  verts = {i: set(touch[i]) for i in range(n)}
  by_vertex: dict[int, set] = {}
  for i in range(n):
    for v in verts[i]:
      by_vertex.setdefault(v, set()).add(i)
  alive = set(range(n))
  heap: list = []

  def push(a, b):
    a, b = min(a, b), max(a, b)
    u = members[a] | members[b]
    if len(u) < n:
      heapq.heappush(heap, (cost(u), a, b))

  for i in range(n):
    nbrs = set()
    for v in verts[i]:
      nbrs |= by_vertex[v]
    for j in sorted(nbrs):
      if j > i:
        push(i, j)
  while len(alive) > 2:
    pair = None
    while heap:
      _, a, b = heapq.heappop(heap)
      if a in alive and b in alive:
        pair = (a, b)
        break
    if pair is None:
      s = sorted(alive)
      pair = (s[0], s[1])
    a, b = pair
    node[a] = bld.join(node[a], node[b])
    members[a] = members[a] | members[b]
    for v in verts[b]:
      by_vertex[v].discard(b)
      by_vertex[v].add(a)
    verts[a] |= verts[b]
    alive.discard(b)
    del node[b], members[b], verts[b]
    nbrs = set()
    for v in verts[a]:
      nbrs |= by_vertex[v]
    for j in sorted(nbrs):
      if j != a and j in alive:
        push(a, j)
  s = sorted(alive)
  if len(s) == 1:
    return bld.build(node[s[0]])
  return bld.build(bld.join(node[s[0]], node[s[1]]))


def _min_degree_order(nv: int, cols: list[tuple[int, int]]) -> list[int]:
  """Greedy min-degree elimination order on the simple underlying graph."""
  cu, cv = _col_arrays(cols)
  return [int(v) for v in _kernels.min_degree_order(nv, cu, cv)]


def _col_arrays(cols) -> tuple[np.ndarray, np.ndarray]:
  if isinstance(cols, tuple) and len(cols) == 2 and isinstance(cols[0], np.ndarray):
    return cols
  arr = np.asarray(list(cols), dtype=np.int64).reshape(-1, 2)
  return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def _elimination(nv: int, cols, order=None) -> BranchDecomposition:
  """Bucket elimination along a vertex order, building clusters bottom-up."""
  cu, cv = _col_arrays(cols)
  if order is None:
    order = _kernels.min_degree_order(nv, cu, cv)
  order = np.asarray(order, dtype=np.int64)
  return BranchDecomposition(*_kernels.eliminate(nv, cu, cv, order))


def _attach_vertex_columns(bd: BranchDecomposition, graph: SpinGraph) -> BranchDecomposition:
  """Lift an edge-column decomposition to the phi columns.

  Every vertex column becomes a sibling of the leaf of its lowest incident
  edge; isolated vertices hang off the root.
  """
  eu = np.ascontiguousarray(graph.edge_array[:, 0])
  ev = np.ascontiguousarray(graph.edge_array[:, 1])
  return BranchDecomposition(*_kernels.attach_vertices(
      bd.left, bd.right, bd.col, bd.root, graph.num_vertices, eu, ev))


def heuristic_branch_decompose(graph: SpinGraph, encoding: str = "psi",
                               strategy: str = "min-degree-elimination") -> BranchDecomposition:
  """Build a valid branch decomposition of the encoding's columns.

  Args:
    graph: Spin graph.
    encoding: ``psi`` or ``phi``. For ``phi`` the edge columns are
      decomposed first and vertex columns attached next to an incident edge.
    strategy: ``greedy-merge``, ``min-degree-elimination`` or
      ``exhaustive-small`` (at most 8 edge columns, optimal width).

  Returns:
    BranchDecomposition over all columns of the encoding.
  """
  if strategy not in STRATEGIES:
    raise DecompositionError(f"unknown strategy {strategy!r}")
  if encoding not in ("psi", "phi"):
    raise DecompositionError(f"unknown encoding {encoding!r}")
  ne = graph.num_edges
  if ne == 0:
    if encoding == "psi":
      raise DecompositionError("graph has no edges to decompose")
    return caterpillar(range(graph.num_vertices))
  cols = list(graph.edges)
  if strategy == "exhaustive-small":
    if ne > EXHAUSTIVE_MAX:
      raise DecompositionError(
          f"exhaustive-small supports at most {EXHAUSTIVE_MAX} edges, graph has {ne}")
    bd = exhaustive_tree(ne, _LambdaOracle(graph.num_vertices, cols))
  elif ne == 1:
    bd = caterpillar([0])
  elif strategy == "greedy-merge":
    lam = _LambdaOracle(graph.num_vertices, cols) if ne <= 60 else None
    nv = graph.num_vertices
    c_all = component_count(nv, cols)

    def cost(members):
      if lam is not None:
        return lam(sum(1 << i for i in members))
      a = [cols[i] for i in members]
      b = [cols[i] for i in range(ne) if i not in members]
      return nv + c_all - component_count(nv, a) - component_count(nv, b) + 1

    bd = greedy_tree(ne, [set(c) for c in cols], cost)
  else:
    arr = graph.edge_array
    bd = _elimination(graph.num_vertices, (np.ascontiguousarray(arr[:, 0]),
                                           np.ascontiguousarray(arr[:, 1])))
  if encoding == "phi":
    bd = _attach_vertex_columns(bd, graph)
  return bd
