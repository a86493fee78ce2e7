"""Compiled passes over a rooted branch decomposition of a column graph.

The column graph has one "column" per qudit: a (tail, head) vertex pair.
For a tree edge splitting the columns into a side A and its complement Q,
let D be the set of vertices touched by both sides. A coset label of side A
is the vector s_D modulo shifts that are constant on the connected
components of A and of Q. Its dimension is |D| - nA - nQ + nJ, where nA, nQ
count the components touching D and nJ counts components of the bipartite
block graph; this equals lambda(A) - 1.

Structure pass outputs, for every node, the label dimension, for every leaf
the label of each difference value, and for every internal node the table
of compatible (parent, left, right) label triples.
"""

from __future__ import annotations

import heapq

import numpy as np
from numba import njit

ERR_NONE = 0
ERR_LABEL_DIM = 1
ERR_TABLE = 2


@njit(cache=True)
def postorder(left, right, root):
  """Iterative post-order (children before parents) of a rooted binary tree."""
  n = left.shape[0]
  out = np.empty(n, np.int64)
  stack = np.empty(n, np.int64)
  flag = np.zeros(n, np.uint8)
  top = 0
  stack[0] = root
  k = 0
  while top >= 0:
    x = stack[top]
    if left[x] < 0 or flag[x] == 1:
      out[k] = x
      k += 1
      top -= 1
    else:
      flag[x] = 1
      top += 1
      stack[top] = right[x]
      top += 1
      stack[top] = left[x]
  return out[:k]


@njit(cache=True)
def _find(parent, x):
  while parent[x] != x:
    parent[x] = parent[parent[x]]
    x = parent[x]
  return x


@njit(cache=True)
def _merge_into(a, b, out, pa, pb):
  """Sorted union of two sorted unique arrays into ``out``; returns its length.

  ``pa[k]`` / ``pb[k]`` receive the source positions of ``out[k]`` (or -1).
  """
  na = a.shape[0]
  nb = b.shape[0]
  i = 0
  j = 0
  k = 0
  while i < na or j < nb:
    if j >= nb or (i < na and a[i] < b[j]):
      out[k] = a[i]
      pa[k] = i
      pb[k] = -1
      i += 1
    elif i >= na or b[j] < a[i]:
      out[k] = b[j]
      pa[k] = -1
      pb[k] = j
      j += 1
    else:
      out[k] = a[i]
      pa[k] = i
      pb[k] = j
      i += 1
      j += 1
    k += 1
  return k


@njit(cache=True)
def _join_into(na, blk_a, pos_a, nb, blk_b, pos_b, m, par, out):
  """Join two block partitions defined on overlapping vertex lists.

  ``pos_a[t]`` / ``pos_b[t]`` give the index of merged vertex t in the two
  source lists (or -1); writes union-find roots over na + nb blocks.
  """
  for t in range(na + nb):
    par[t] = t
  for t in range(m):
    if pos_a[t] >= 0 and pos_b[t] >= 0:
      x = _find(par, blk_a[pos_a[t]])
      y = _find(par, na + blk_b[pos_b[t]])
      if x != y:
        par[x] = y
  for t in range(m):
    if pos_a[t] >= 0:
      out[t] = _find(par, blk_a[pos_a[t]])
    else:
      out[t] = _find(par, na + blk_b[pos_b[t]])


@njit(cache=True)
def _canonical_into(raw, keep, m, remap, out):
  """Relabel block ids of kept entries as 0,1,... in order of appearance.

  ``remap`` must hold -1 everywhere and is restored before returning.
  Returns (number kept, number of blocks).
  """
  nb = 0
  k = 0
  for t in range(m):
    if keep[t]:
      r = raw[t]
      if remap[r] < 0:
        remap[r] = nb
        nb += 1
      out[k] = remap[r]
      k += 1
  for t in range(m):
    if keep[t]:
      remap[raw[t]] = -1
  return k, nb


@njit(cache=True)
def _forest_dim(pa, na, pc, nc, par):
  """Boundary size minus forest edges of the bipartite block graph."""
  for t in range(na + nc):
    par[t] = t
  forest = 0
  for t in range(pa.shape[0]):
    x = _find(par, pa[t])
    y = _find(par, na + pc[t])
    if x != y:
      par[x] = y
      forest += 1
  return pa.shape[0] - forest


@njit(cache=True)
def _label_map_into(pa, na, pc, nc, q, lab, s1, s2, s3, s4, s5, s6, s7, s8):
  """Fill ``lab`` (flat d x |D|) with the map sending s_D to its coset label.

  A spanning forest of the bipartite block graph (A-blocks vs Q-blocks,
  one edge per boundary vertex) fixes block potentials; each non-forest
  vertex contributes the residual s_v - a_X - b_Y as one label digit.
  s1..s8 are scratch arrays of length >= 2 |D| + 2.
  """
  b = pa.shape[0]
  nn = na + nc
  par = s1
  intree = s2
  for t in range(nn):
    par[t] = t
  for t in range(b):
    x = _find(par, pa[t])
    y = _find(par, na + pc[t])
    if x != y:
      par[x] = y
      intree[t] = 1
    else:
      intree[t] = 0
  for t in range(lab.shape[0]):
    lab[t] = 0
  if lab.shape[0] == 0:
    return
  # forest adjacency in CSR form
  deg = s3
  for i in range(nn + 1):
    deg[i] = 0
  for t in range(b):
    if intree[t]:
      deg[pa[t] + 1] += 1
      deg[na + pc[t] + 1] += 1
  for i in range(nn):
    deg[i + 1] += deg[i]
  fill = s4
  for i in range(nn):
    fill[i] = deg[i]
  adj_node = s5
  adj_vert = s6
  for t in range(b):
    if intree[t]:
      x = pa[t]
      y = na + pc[t]
      adj_node[fill[x]] = y
      adj_vert[fill[x]] = t
      fill[x] += 1
      adj_node[fill[y]] = x
      adj_vert[fill[y]] = t
      fill[y] += 1
  prev_node = s7
  prev_vert = s8
  queue = s4
  row = 0
  for t in range(b):
    if intree[t]:
      continue
    src = pa[t]
    dst = na + pc[t]
    for i in range(nn):
      prev_node[i] = -2
    prev_node[src] = -1
    head = 0
    tail = 1
    queue[0] = src
    while head < tail:
      x = queue[head]
      head += 1
      if x == dst:
        break
      for p in range(deg[x], deg[x + 1]):
        y = adj_node[p]
        if prev_node[y] == -2:
          prev_node[y] = x
          prev_vert[y] = adj_vert[p]
          queue[tail] = y
          tail += 1
    lab[row * b + t] = 1
    # walk back from dst; path edges alternate sign, the first edge from
    # src (an A-block) enters with coefficient -1
    length = 0
    x = dst
    while x != src:
      length += 1
      x = prev_node[x]
    k = length
    x = dst
    while x != src:
      v = prev_vert[x]
      sign = -1 if (k % 2 == 1) else 1
      lab[row * b + v] = (lab[row * b + v] + sign) % q
      k -= 1
      x = prev_node[x]
    row += 1


@njit(cache=True)
def _grow(arr, need):
  if need <= arr.shape[0]:
    return arr
  cap = arr.shape[0] * 2 + 16
  while cap < need:
    cap *= 2
  out = np.empty(cap, arr.dtype)
  out[:arr.shape[0]] = arr
  return out


@njit(cache=True)
def structure(nvp, cu, cv, left, right, col, root, q, max_dim, max_table,
              want_tables):
  """Boundary, partition, label-map and table construction.

  Per-node arrays live in flat pools indexed by ``boff`` (boundary vertices,
  incidence counts, side and complement partitions share offsets) so the
  pass allocates only scratch buffers of size O(nvp).

  Args:
    nvp: number of vertices of the column graph.
    cu, cv: column endpoints (tail, head).
    left, right, col: rooted binary tree (-1 for absent child / internal).
    root: root node; must be internal with two children.
    q: modulus.
    max_dim: refuse label dimensions above this (q^d > max_dim).
    max_table: refuse combine tables above this size.
    want_tables: skip label maps and tables when false (width only).

  Returns:
    (status, bad_node, dims, leaflab, tab_off, tab_i, tab_j, tab_k)
    dims[n] is the label exponent d of the tree edge above n (-1 at root).
    leaflab[n, x] is the label index of difference value x at leaf n.
    tab_off[2n], tab_off[2n+1] are the offset and length of node n's table.
  """
  n = left.shape[0]
  deg = np.zeros(nvp, np.int64)
  for c in range(cu.shape[0]):
    deg[cu[c]] += 1
    deg[cv[c]] += 1
  order = postorder(left, right, root)
  dims = np.full(n, -1, np.int64)
  leaflab = np.zeros((n, q), np.int64)
  tab_off = np.zeros(2 * n, np.int64)
  ra = left[root]
  rb = right[root]

  boff = np.zeros(n, np.int64)
  blen = np.zeros(n, np.int64)
  npa = np.zeros(n, np.int64)
  npc = np.zeros(n, np.int64)
  cap0 = 4 * n + 16
  bpool = np.empty(cap0, np.int64)
  cpool = np.empty(cap0, np.int64)
  apool = np.empty(cap0, np.int64)
  used = 0

  S = 2 * nvp + 8
  merged = np.empty(S, np.int64)
  pos_a = np.empty(S, np.int64)
  pos_b = np.empty(S, np.int64)
  raw = np.empty(S, np.int64)
  keep = np.zeros(S, np.bool_)
  cc = np.empty(S, np.int64)
  par = np.empty(2 * S, np.int64)
  remap = np.full(2 * S, -1, np.int64)

  # bottom-up: boundary vertices, incidence counts, side partitions
  for idx in range(order.shape[0]):
    x = order[idx]
    if x == root:
      continue
    if left[x] < 0:
      c = col[x]
      u = cu[c]
      v = cv[c]
      if u > v:
        u, v = v, u
      bpool = _grow(bpool, used + 2)
      cpool = _grow(cpool, used + 2)
      apool = _grow(apool, used + 2)
      k = 0
      if deg[u] > 1:
        bpool[used + k] = u
        k += 1
      if deg[v] > 1 and v != u:
        bpool[used + k] = v
        k += 1
      for t in range(k):
        cpool[used + t] = 1
        apool[used + t] = 0
      boff[x] = used
      blen[x] = k
      npa[x] = 1 if k > 0 else 0
      used += k
    else:
      a = left[x]
      b = right[x]
      ba = bpool[boff[a]:boff[a] + blen[a]]
      bb = bpool[boff[b]:boff[b] + blen[b]]
      m = _merge_into(ba, bb, merged, pos_a, pos_b)
      for t in range(m):
        s = 0
        if pos_a[t] >= 0:
          s += cpool[boff[a] + pos_a[t]]
        if pos_b[t] >= 0:
          s += cpool[boff[b] + pos_b[t]]
        cc[t] = s
        keep[t] = s < deg[merged[t]]
      _join_into(npa[a], apool[boff[a]:], pos_a, npa[b], apool[boff[b]:],
                 pos_b, m, par, raw)
      bpool = _grow(bpool, used + m)
      cpool = _grow(cpool, used + m)
      apool = _grow(apool, used + m)
      kc, nb = _canonical_into(raw, keep, m, remap, apool[used:])
      k = 0
      for t in range(m):
        if keep[t]:
          bpool[used + k] = merged[t]
          cpool[used + k] = cc[t]
          k += 1
      boff[x] = used
      blen[x] = kc
      npa[x] = nb
      used += kc

  # top-down: complement partitions, preorder = reversed postorder
  ppool = np.empty(used + 1, np.int64)
  for t in range(blen[ra]):
    ppool[boff[ra] + t] = apool[boff[rb] + t]
  npc[ra] = npa[rb]
  for t in range(blen[rb]):
    ppool[boff[rb] + t] = apool[boff[ra] + t]
  npc[rb] = npa[ra]
  for idx in range(order.shape[0] - 1, -1, -1):
    x = order[idx]
    if x == root or left[x] < 0:
      continue
    bx = bpool[boff[x]:boff[x] + blen[x]]
    for side in range(2):
      c1 = left[x] if side == 0 else right[x]
      c2 = right[x] if side == 0 else left[x]
      b2 = bpool[boff[c2]:boff[c2] + blen[c2]]
      m = _merge_into(b2, bx, merged, pos_a, pos_b)
      _join_into(npa[c2], apool[boff[c2]:], pos_a, npc[x], ppool[boff[x]:],
                 pos_b, m, par, raw)
      # restrict to bnd[c1] (a subset of merged)
      target = bpool[boff[c1]:boff[c1] + blen[c1]]
      i = 0
      for t in range(m):
        while i < target.shape[0] and target[i] < merged[t]:
          i += 1
        keep[t] = i < target.shape[0] and target[i] == merged[t]
      kc, nb = _canonical_into(raw, keep, m, remap, ppool[boff[c1]:])
      npc[c1] = nb

  # label dimensions
  status = ERR_NONE
  bad = -1
  for x in range(n):
    if x == root or x == rb:
      continue
    o = boff[x]
    dims[x] = _forest_dim(apool[o:o + blen[x]], npa[x], ppool[o:o + blen[x]],
                          npc[x], par)
  dims[rb] = dims[ra]
  for x in range(n):
    if x == root:
      continue
    dsz = 1
    for t in range(dims[x]):
      dsz *= q
      if dsz > max_dim:
        break
    if dsz > max_dim:
      if status == ERR_NONE or dims[x] > dims[bad]:
        status = ERR_LABEL_DIM
        bad = x
  tab_i = np.empty(0, np.int64)
  tab_j = np.empty(0, np.int64)
  tab_k = np.empty(0, np.int64)
  if status != ERR_NONE or not want_tables:
    return status, bad, dims, leaflab, tab_off, tab_i, tab_j, tab_k

  # label maps, flat d x |D| per node
  loff = np.zeros(n + 1, np.int64)
  for x in range(n):
    sz = 0
    if x != root:
      sz = dims[x] * blen[x]
    loff[x + 1] = loff[x] + sz
  lpool = np.zeros(loff[n] + 1, np.int64)
  s5 = np.empty(S, np.int64)
  s6 = np.empty(S, np.int64)
  s7 = np.empty(S, np.int64)
  s8 = np.empty(S, np.int64)
  for x in range(n):
    if x == root:
      continue
    o = boff[x]
    lab = lpool[loff[x]:loff[x + 1]]
    if x == rb:
      # the root edge is one cut seen from both sides; copied below
      continue
    _label_map_into(apool[o:o + blen[x]], npa[x], ppool[o:o + blen[x]], npc[x],
                    q, lab, par, merged, pos_a, pos_b, s5, s6, s7, s8)
  for t in range(loff[rb + 1] - loff[rb]):
    lpool[loff[rb] + t] = lpool[loff[ra] + t]

  # leaf labels of each difference value (value at the head vertex)
  for x in range(n):
    if x == root or left[x] >= 0:
      continue
    c = col[x]
    o = boff[x]
    b = blen[x]
    d = dims[x]
    for val in range(q):
      code = 0
      mult = 1
      for r in range(d):
        acc = 0
        for t in range(b):
          if bpool[o + t] == cv[c]:
            acc += lpool[loff[x] + r * b + t] * val
        code += (acc % q) * mult
        mult *= q
      leaflab[x, val] = code

  # combine tables, in post-order
  tab_i = np.empty(16, np.int64)
  tab_j = np.empty(16, np.int64)
  tab_k = np.empty(16, np.int64)
  fillp = 0
  seen = np.full(16, -1, np.int64)
  queue = np.empty(16, np.int64)
  gens = np.empty(16, np.int64)
  cur = np.empty(256, np.int64)
  for idx in range(order.shape[0]):
    x = order[idx]
    if x == root or left[x] < 0:
      continue
    a = left[x]
    b = right[x]
    ba = bpool[boff[a]:boff[a] + blen[a]]
    bb = bpool[boff[b]:boff[b] + blen[b]]
    nu = _merge_into(ba, bb, merged, pos_a, pos_b)
    # position of each union vertex in bnd[x]
    bx = bpool[boff[x]:boff[x] + blen[x]]
    pos_x = raw
    i = 0
    for t in range(nu):
      while i < bx.shape[0] and bx[i] < merged[t]:
        i += 1
      pos_x[t] = i if (i < bx.shape[0] and bx[i] == merged[t]) else -1
    da = dims[a]
    db = dims[b]
    dx = dims[x]
    lna = blen[a]
    lnb = blen[b]
    lnx = blen[x]
    dtot = da + db + dx
    if dtot > cur.shape[0]:
      cur = np.empty(dtot, np.int64)
    gens = _grow(gens, nu * dtot)
    for t in range(nu * dtot):
      gens[t] = 0
    for t in range(nu):
      if pos_a[t] >= 0:
        for r in range(da):
          gens[t * dtot + r] = lpool[loff[a] + r * lna + pos_a[t]]
      if pos_b[t] >= 0:
        for r in range(db):
          gens[t * dtot + da + r] = lpool[loff[b] + r * lnb + pos_b[t]]
      if pos_x[t] >= 0:
        for r in range(dx):
          gens[t * dtot + da + db + r] = lpool[loff[x] + r * lnx + pos_x[t]]
    size_a = 1
    for r in range(da):
      size_a *= q
    size_b = 1
    for r in range(db):
      size_b *= q
    if size_a * size_b > max_table:
      status = ERR_TABLE
      bad = x
      return status, bad, dims, leaflab, tab_off, tab_i, tab_j, tab_k
    tot = size_a * size_b
    if seen.shape[0] < tot:
      seen = np.full(2 * tot, -1, np.int64)
      queue = np.empty(2 * tot, np.int64)
    queue[0] = 0
    seen[0] = 0
    head = 0
    tail = 1
    while head < tail:
      key0 = queue[head]
      code = key0 // size_b
      for r in range(da):
        cur[r] = code % q
        code //= q
      code = key0 % size_b
      for r in range(da, da + db):
        cur[r] = code % q
        code //= q
      code = seen[key0]
      for r in range(da + db, dtot):
        cur[r] = code % q
        code //= q
      for g in range(nu):
        gb = g * dtot
        ka = 0
        mult = 1
        for r in range(da):
          ka += ((cur[r] + gens[gb + r]) % q) * mult
          mult *= q
        kb = 0
        mult = 1
        for r in range(da, da + db):
          kb += ((cur[r] + gens[gb + r]) % q) * mult
          mult *= q
        key = ka * size_b + kb
        if seen[key] < 0:
          kx = 0
          mult = 1
          for r in range(da + db, dtot):
            kx += ((cur[r] + gens[gb + r]) % q) * mult
            mult *= q
          seen[key] = kx
          queue[tail] = key
          tail += 1
      head += 1
    tab_i = _grow(tab_i, fillp + tail)
    tab_j = _grow(tab_j, fillp + tail)
    tab_k = _grow(tab_k, fillp + tail)
    tab_off[2 * x] = fillp
    tab_off[2 * x + 1] = tail
    # emit in key order, then clear the touched entries
    for key in range(tot):
      if seen[key] >= 0:
        tab_i[fillp] = seen[key]
        tab_j[fillp] = key // size_b
        tab_k[fillp] = key % size_b
        fillp += 1
        seen[key] = -1
  return status, bad, dims, leaflab, tab_off, tab_i[:fillp], tab_j[:fillp], tab_k[:fillp]


@njit(cache=True)
def contract_messages(q, left, right, col, root, dims, leaflab, tab_off,
                      tab_i, tab_j, tab_k, wre, wim, wlog):
  """Numeric pass: leaf absorption, combine products, root pairing.

  Args:
    wre, wim: per-column weight mantissas (ncols x q), real and imaginary.
    wlog: per-column log scales.

  Returns:
    (re, im, log_scale) of sum over label pairings at the root edge.
  """
  n = left.shape[0]
  order = postorder(left, right, root)
  off = np.zeros(n + 1, np.int64)
  for x in range(n):
    sz = 1
    if x != root:
      for t in range(dims[x]):
        sz *= q
    else:
      sz = 0
    off[x + 1] = off[x] + sz
  mre = np.zeros(off[n])
  mim = np.zeros(off[n])
  mlog = np.zeros(n)
  for idx in range(order.shape[0]):
    x = order[idx]
    if x == root:
      continue
    base = off[x]
    if left[x] < 0:
      c = col[x]
      for val in range(q):
        p = base + leaflab[x, val]
        mre[p] += wre[c, val]
        mim[p] += wim[c, val]
      mlog[x] = wlog[c]
    else:
      a = left[x]
      b = right[x]
      oa = off[a]
      ob = off[b]
      s = tab_off[2 * x]
      ln = tab_off[2 * x + 1]
      for t in range(s, s + ln):
        ar = mre[oa + tab_j[t]]
        ai = mim[oa + tab_j[t]]
        br = mre[ob + tab_k[t]]
        bi = mim[ob + tab_k[t]]
        p = base + tab_i[t]
        mre[p] += ar * br - ai * bi
        mim[p] += ar * bi + ai * br
      mlog[x] = mlog[a] + mlog[b]
    mx = 0.0
    for p in range(base, off[x + 1]):
      v = abs(mre[p]) + abs(mim[p])
      if v > mx:
        mx = v
    if mx > 0.0:
      inv = 1.0 / mx
      for p in range(base, off[x + 1]):
        mre[p] *= inv
        mim[p] *= inv
      mlog[x] += np.log(mx)
  ra = left[root]
  rb = right[root]
  zr = 0.0
  zi = 0.0
  for t in range(off[ra + 1] - off[ra]):
    ar = mre[off[ra] + t]
    ai = mim[off[ra] + t]
    br = mre[off[rb] + t]
    bi = mim[off[rb] + t]
    zr += ar * br - ai * bi
    zi += ar * bi + ai * br
  return zr, zi, mlog[ra] + mlog[rb]


@njit(cache=True)
def count_components(nvp, cu, cv):
  """Connected components of the column graph (isolated vertices included)."""
  par = np.arange(nvp)
  comps = nvp
  for c in range(cu.shape[0]):
    x = _find(par, cu[c])
    y = _find(par, cv[c])
    if x != y:
      par[x] = y
      comps -= 1
  return comps


@njit(cache=True)
def min_degree_order(nv, cu, cv):
  """Greedy min-degree elimination order (ties by lowest vertex id).

  Works on the simple graph underlying the column list; fill edges are
  added among the neighbours of each eliminated vertex.
  """
  cnt = np.zeros(nv, np.int64)
  for c in range(cu.shape[0]):
    cnt[cu[c]] += 1
    cnt[cv[c]] += 1
  adj = [np.empty(cnt[v] + 2, np.int64) for v in range(nv)]
  sz = np.zeros(nv, np.int64)
  stamp = np.full(nv, -1, np.int64)
  # deduplicated initial adjacency
  for v in range(nv):
    stamp[v] = -1
  for c in range(cu.shape[0]):
    a = cu[c]
    b = cv[c]
    if a == b:
      continue
    dup = False
    for t in range(sz[a]):
      if adj[a][t] == b:
        dup = True
        break
    if not dup:
      adj[a][sz[a]] = b
      sz[a] += 1
      adj[b][sz[b]] = a
      sz[b] += 1
  heap = [np.int64(0)]
  heap.pop()
  for v in range(nv):
    heapq.heappush(heap, sz[v] * nv + v)
  elim = np.zeros(nv, np.bool_)
  order = np.empty(nv, np.int64)
  for k in range(nv):
    v = -1
    while True:
      key = heapq.heappop(heap)
      v = key % nv
      if not elim[v] and key // nv == sz[v]:
        break
    order[k] = v
    elim[v] = True
    nb = adj[v][:sz[v]].copy()
    for i in range(nb.shape[0]):
      u = nb[i]
      au = adj[u]
      for t in range(sz[u]):
        if au[t] == v:
          au[t] = au[sz[u] - 1]
          sz[u] -= 1
          break
    for i in range(nb.shape[0]):
      u = nb[i]
      for t in range(sz[u]):
        stamp[adj[u][t]] = u
      stamp[u] = u
      for j in range(nb.shape[0]):
        w = nb[j]
        if stamp[w] != u:
          if sz[u] == adj[u].shape[0]:
            grown = np.empty(2 * sz[u] + 4, np.int64)
            grown[:sz[u]] = adj[u][:sz[u]]
            adj[u] = grown
          adj[u][sz[u]] = w
          sz[u] += 1
          stamp[w] = u
    for i in range(nb.shape[0]):
      heapq.heappush(heap, sz[nb[i]] * nv + nb[i])
    sz[v] = 0
  return order


@njit(cache=True)
def _union_sorted(a, b):
  out = np.empty(a.shape[0] + b.shape[0], np.int64)
  pa = np.empty(a.shape[0] + b.shape[0], np.int64)
  pb = np.empty(a.shape[0] + b.shape[0], np.int64)
  m = _merge_into(a, b, out, pa, pb)
  return out[:m].copy()


@njit(cache=True)
def eliminate(nv, cu, cv, order):
  """Bucket elimination along a vertex order.

  Each column starts in the bucket of its earliest-eliminated endpoint;
  eliminating a vertex joins its bucket (in arrival order) into one cluster
  that moves to the bucket of its earliest remaining vertex.

  Returns:
    (left, right, col, root) of the rooted tree.
  """
  n = cu.shape[0]
  rank = np.empty(nv, np.int64)
  for i in range(nv):
    rank[order[i]] = i
  tot = 2 * n - 1
  left = np.full(tot, -1, np.int64)
  right = np.full(tot, -1, np.int64)
  col = np.full(tot, -1, np.int64)
  nn = 0
  maxit = n + nv + 1
  it_node = np.empty(maxit, np.int64)
  it_next = np.full(maxit, -1, np.int64)
  it_vs = [np.empty(0, np.int64) for _ in range(maxit)]
  head = np.full(nv, -1, np.int64)
  tail = np.full(nv, -1, np.int64)
  nit = 0
  for i in range(n):
    col[nn] = i
    a = cu[i]
    b = cv[i]
    if rank[b] < rank[a]:
      a, b = b, a
    vs = np.empty(2 if a != b else 1, np.int64)
    vs[0] = min(a, b)
    if a != b:
      vs[1] = max(a, b)
    it_node[nit] = nn
    it_vs[nit] = vs
    r = rank[a]
    if head[r] < 0:
      head[r] = nit
    else:
      it_next[tail[r]] = nit
    tail[r] = nit
    nit += 1
    nn += 1
  done = np.empty(n, np.int64)
  nd = 0
  for r in range(nv):
    it = head[r]
    if it < 0:
      continue
    v = order[r]
    acc = it_node[it]
    vs = it_vs[it]
    it = it_next[it]
    while it >= 0:
      left[nn] = acc
      right[nn] = it_node[it]
      acc = nn
      nn += 1
      vs = _union_sorted(vs, it_vs[it])
      it = it_next[it]
    k = 0
    for t in range(vs.shape[0]):
      if vs[t] != v:
        k += 1
    if k == 0:
      done[nd] = acc
      nd += 1
      continue
    rest = np.empty(k, np.int64)
    k = 0
    best = nv
    for t in range(vs.shape[0]):
      if vs[t] != v:
        rest[k] = vs[t]
        k += 1
        if rank[vs[t]] < best:
          best = rank[vs[t]]
    it_node[nit] = acc
    it_vs[nit] = rest
    if head[best] < 0:
      head[best] = nit
    else:
      it_next[tail[best]] = nit
    tail[best] = nit
    nit += 1
  acc = done[0]
  for i in range(1, nd):
    left[nn] = acc
    right[nn] = done[i]
    acc = nn
    nn += 1
  return left[:nn], right[:nn], col[:nn], acc


@njit(cache=True)
def attach_vertices(left, right, col, root, nv, eu, ev):
  """Lift an edge-column tree to phi columns (vertex ids first, edges shifted).

  Every vertex column becomes a sibling of the leaf of its lowest incident
  edge; isolated vertices hang off the root.
  """
  n = left.shape[0]
  tot = n + 2 * nv
  nl = np.full(tot, -1, np.int64)
  nr = np.full(tot, -1, np.int64)
  nc = np.full(tot, -1, np.int64)
  par = np.full(tot, -1, np.int64)
  nl[:n] = left
  nr[:n] = right
  for x in range(n):
    if col[x] >= 0:
      nc[x] = col[x] + nv
    if left[x] >= 0:
      par[left[x]] = x
      par[right[x]] = x
  leaf_of = np.full(eu.shape[0], -1, np.int64)
  for x in range(n):
    if col[x] >= 0:
      leaf_of[col[x]] = x
  first = np.full(nv, -1, np.int64)
  for e in range(eu.shape[0]):
    if first[eu[e]] < 0:
      first[eu[e]] = e
    if first[ev[e]] < 0:
      first[ev[e]] = e
  nn = n
  for v in range(nv):
    vl = nn
    nc[vl] = v
    nn += 1
    x = nn
    nn += 1
    if first[v] < 0:
      nl[x] = root
      nr[x] = vl
      par[root] = x
      par[vl] = x
      root = x
      continue
    target = leaf_of[first[v]]
    p = par[target]
    nl[x] = target
    nr[x] = vl
    par[target] = x
    par[vl] = x
    if p < 0:
      root = x
    else:
      if nl[p] == target:
        nl[p] = x
      else:
        nr[p] = x
      par[x] = p
  return nl, nr, nc, root


@njit(cache=True)
def check_tree(left, right, col, root):
  """0 when the arrays form a rooted binary tree with injective leaf columns.

  Error codes: 1 sizes, 2 root range, 3 arity, 4 leaf labels, 5 child range,
  6 in-degree, 7 duplicate column, 8 disconnected.
  """
  n = left.shape[0]
  if right.shape[0] != n or col.shape[0] != n or n == 0:
    return 1
  if root < 0 or root >= n:
    return 2
  indeg = np.zeros(n, np.int64)
  mx = 0
  for x in range(n):
    if (left[x] >= 0) != (right[x] >= 0):
      return 3
    if (left[x] >= 0) == (col[x] >= 0):
      return 4
    if left[x] >= 0:
      if left[x] >= n or right[x] >= n:
        return 5
      indeg[left[x]] += 1
      indeg[right[x]] += 1
    elif col[x] > mx:
      mx = col[x]
  for x in range(n):
    if indeg[x] != (0 if x == root else 1):
      return 6
  seen = np.zeros(mx + 1, np.bool_)
  for x in range(n):
    if col[x] >= 0:
      if seen[col[x]]:
        return 7
      seen[col[x]] = True
  # with in-degrees fixed, reaching every node from the root rules out cycles
  if postorder(left, right, root).shape[0] != n:
    return 8
  return 0
