import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinz import zq
from spinz.generators import cycle, grid
from spinz.model import SpinGraph

MODULI = (2, 3, 4, 5, 6, 8, 9, 12)


def span_brute(gens, q, n):
  """Every Z_q combination of the generators."""
  out = {tuple([0] * n)}
  for coef in itertools.product(range(q), repeat=len(gens)):
    v = np.zeros(n, dtype=np.int64)
    for c, g in zip(coef, gens):
      v = v + c * np.asarray(g)
    out.add(tuple((v % q).tolist()))
  return out


@st.composite
def gen_sets(draw, max_n=4, max_k=3):
  q = draw(st.sampled_from(MODULI))
  n = draw(st.integers(1, max_n))
  k = draw(st.integers(0, max_k))
  gens = [draw(st.lists(st.integers(0, q - 1), min_size=n, max_size=n)) for _ in range(k)]
  return q, n, gens


# --- incidence --------------------------------------------------------------

def test_incidence_single_edge_mod2():
  np.testing.assert_array_equal(zq.incidence(SpinGraph(2, 2, [(0, 1)])).entries, [[1], [1]])


def test_incidence_path_q3():
  m = zq.incidence(SpinGraph(3, 3, [(0, 1), (1, 2)])).entries
  np.testing.assert_array_equal(m[:, 0], [2, 1, 0])
  np.testing.assert_array_equal(m[:, 1], [0, 2, 1])


@pytest.mark.parametrize("q", [2, 3, 7])
def test_incidence_columns_sum_to_zero(q):
  m = zq.incidence(cycle(3, q).graph).entries
  assert not np.any(m.sum(axis=0) % q)


def test_phi_encoding_matrix_has_identity_block():
  g = SpinGraph(3, 2, [(0, 1)])
  m = zq.encoding_matrix(g, "phi").entries
  np.testing.assert_array_equal(m, [[1, 0, 2], [0, 1, 1]])
  with pytest.raises(zq.ZqError):
    zq.encoding_matrix(g, "ghz")


# --- kernel -----------------------------------------------------------------

@pytest.mark.parametrize("graph,expected", [
    (SpinGraph(3, 3, [(0, 1), (1, 2), (2, 0)]), 3),
    (SpinGraph(2, 4, [(0, 1), (2, 3)]), 4),
    (SpinGraph(5, 2, [(0, 1)]), 5),
])
def test_kernel_size_examples(graph, expected):
  assert zq.kernel_size(zq.incidence(graph).T) == expected


def test_kernel_size_counts_isolated_vertices():
  g = SpinGraph(2, 3, [(0, 1)])
  bt = zq.incidence(g).T
  assert zq.kernel_size(bt) == zq.kernel_size_enumerated(bt) == 4


@given(st.sampled_from(MODULI), st.integers(1, 4), st.lists(st.tuples(st.integers(0, 3),
                                                                       st.integers(0, 3)),
                                                             max_size=5))
def test_kernel_size_matches_enumeration(q, nv, raw):
  edges = [(a % nv, b % nv) for a, b in raw if a % nv != b % nv]
  if not edges:
    return
  bt = zq.incidence(SpinGraph(q, nv, edges)).T
  assert zq.kernel_size(bt) == zq.kernel_size_enumerated(bt)
  assert zq.size(zq.kernel(bt)) == zq.kernel_size(bt)


# --- submodules -------------------------------------------------------------

def test_submodule_examples():
  s = zq.submodule([[1, 1]], 2)
  assert zq.size(s) == 2 and zq.member(s, [0, 0]) and not zq.member(s, [1, 0])
  assert zq.size(zq.submodule([[2]], 4)) == 2


def test_triangle_cut_space_mod2():
  g = SpinGraph(2, 3, [(0, 1), (1, 2), (2, 0)])
  code = zq.cut_space(g)
  images = {tuple((zq.incidence(g).entries.T @ np.array(s)) % 2)
            for s in itertools.product(range(2), repeat=3)}
  assert zq.size(code) == len(images) == 4


def test_howell_rows_have_divisor_pivots():
  form = zq.howell_form([[4, 2, 6], [6, 3, 0]], 12, 3)
  for row in form:
    lead = row[np.flatnonzero(row)[0]]
    assert 12 % lead == 0


@given(gen_sets())
def test_span_size_and_membership(args):
  q, n, gens = args
  sub = zq.submodule(gens, q, n)
  brute = span_brute(gens, q, n)
  assert zq.size(sub) == len(brute)
  for v in itertools.islice(itertools.product(range(q), repeat=n), 200):
    assert zq.member(sub, v) == (v in brute)
  assert {tuple(e.tolist()) for e in sub.elements()} == brute


@given(gen_sets())
def test_canonical_form_is_generator_independent(args):
  q, n, gens = args
  sub = zq.submodule(gens, q, n)
  again = zq.submodule(list(reversed(gens)) + [list(r) for r in sub.canonical_form], q, n)
  np.testing.assert_array_equal(sub.canonical_form.reshape(-1, n),
                                again.canonical_form.reshape(-1, n))


# --- orthogonal complement --------------------------------------------------

def test_cycle_complement_is_all_ones():
  code = zq.cut_space(cycle(5, 3).graph)
  perp = zq.orthogonal_complement(code)
  assert zq.size(perp) == 3 and zq.member(perp, [1] * 5)
  assert zq.size(zq.orthogonal_complement(perp)) == zq.size(code)


def test_complement_of_full_and_zero():
  full = zq.submodule(np.eye(3, dtype=int).tolist(), 4)
  assert zq.size(zq.orthogonal_complement(full)) == 1
  zero = zq.submodule([], 3, 2)
  assert zq.size(zq.orthogonal_complement(zero)) == 9


@given(gen_sets())
def test_complement_properties(args):
  q, n, gens = args
  sub = zq.submodule(gens, q, n)
  perp = zq.orthogonal_complement(sub)
  assert zq.size(sub) * zq.size(perp) == q ** n
  for u in perp.canonical_form:
    for v in sub.canonical_form:
      assert int(np.dot(u, v)) % q == 0
  back = zq.orthogonal_complement(perp)
  assert zq.contains(back, sub) and zq.contains(sub, back)


# --- shortening, projection, cosets -----------------------------------------

def test_coset_examples():
  full = zq.submodule([[1, 0], [0, 1]], 2)
  reps = zq.coset_representatives(full, zq.submodule([[1, 1]], 2))
  assert [r.tolist() for r in reps] == [[0, 0], [0, 1]]
  assert [r.tolist() for r in zq.coset_representatives(full, full)] == [[0, 0]]
  with pytest.raises(zq.ZqError, match="not contained"):
    zq.coset_representatives(zq.submodule([[1, 1]], 2), full)


def test_arc_of_four_cycle_has_two_cosets():
  code = zq.cut_space(cycle(4, 2).graph)
  arc = [0, 1]
  outer = zq.orthogonal_complement(zq.shortened(zq.orthogonal_complement(code), arc))
  inner = zq.shortened(code, arc)
  assert len(zq.coset_representatives(outer, inner)) == 2


@given(gen_sets(max_n=4), st.data())
def test_shortened_and_projected_match_brute_force(args, data):
  q, n, gens = args
  coords = sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=1)))
  sub = zq.submodule(gens, q, n)
  brute = span_brute(gens, q, n)
  rest = [i for i in range(n) if i not in coords]
  short = {tuple(v[i] for i in coords) for v in brute if not any(v[i] for i in rest)}
  proj = {tuple(v[i] for i in coords) for v in brute}
  assert {tuple(e.tolist()) for e in zq.shortened(sub, coords).elements()} == short
  assert {tuple(e.tolist()) for e in zq.projected(sub, coords).elements()} == proj
  # projection is the complement of the shortened complement
  dual_short = zq.shortened(zq.orthogonal_complement(sub), coords)
  assert zq.size(zq.orthogonal_complement(dual_short)) == len(proj)
  reps = zq.coset_representatives(zq.projected(sub, coords), zq.shortened(sub, coords))
  assert len(reps) * len(short) == len(proj)


@pytest.mark.parametrize("q", [2, 3, 4, 6])
def test_cut_space_size_counts_components(q):
  g = grid(2, 3, q).graph
  assert zq.size(zq.cut_space(g)) == q ** (g.num_vertices - 1)
  assert zq.size(zq.cut_space(g, "phi")) == q ** g.num_vertices
