import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinz import oracle
from spinz.decomposition import caterpillar, connectivity, heuristic_branch_decompose, num_columns
from spinz.generators import chain, cycle, grid, random_graph
from spinz.model import SpinGraph
from spinz.ttn import build_ttn, contract_dense, pair_cosets


def scale_free_err(a, b):
  """Amplitude error after fixing the global scale by least squares."""
  a, b = np.asarray(a), np.asarray(b)
  c = np.vdot(a, b) / np.vdot(a, a)
  return float(np.max(np.abs(c * a - b)) / np.max(np.abs(b)))


# --- Schmidt bases ----------------------------------------------------------

def test_four_cycle_arc_has_two_terms():
  spec = pair_cosets(cycle(4, 2).graph, [0, 1])
  assert spec.rank == 2
  assert spec.schmidt_value == pytest.approx(1 / math.sqrt(2))


def test_tree_cut_single_term():
  spec = pair_cosets(chain(5, 3).graph, [0, 2])
  assert spec.rank == 1 and spec.pairing == (0,)


def test_grid_cut_reconstructs_state():
  g = grid(2, 2, 2).graph
  spec = pair_cosets(g, [0, 1])
  dense = oracle.dense_state(g, "psi").amplitudes.real
  rec = spec.reconstruct()
  np.testing.assert_allclose(rec * (dense.max() / rec.max()), dense, atol=1e-12)


def test_pair_cosets_input_checks():
  g = cycle(4, 2).graph
  for cut in ([], [0, 1, 2, 3], [7]):
    with pytest.raises(ValueError):
      pair_cosets(g, cut)


@given(st.integers(0, 2 ** 31), st.sampled_from([2, 3]), st.integers(2, 4), st.integers(2, 6),
       st.sampled_from(["psi", "phi"]), st.data())
def test_schmidt_rank_formula(seed, q, nv, ne, enc, data):
  g = random_graph(np.random.default_rng(seed), q, nv, ne)
  n = num_columns(g, enc)
  cut = sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n - 1)))
  spec = pair_cosets(g, cut, enc)
  lam = connectivity(g, cut, enc)
  st_ = oracle.dense_state(g, enc)
  assert spec.rank == q ** (lam - 1) == oracle.reduced_rank(st_, cut)
  assert spec.schmidt_value == spec.rank ** -0.5
  rec = spec.reconstruct()
  mult = st_.amplitudes.real.max() / rec.max()
  np.testing.assert_allclose(rec * mult, st_.amplitudes.real, atol=1e-12)


@pytest.mark.parametrize("q", [4, 6])
def test_composite_modulus_pairing(q):
  g = cycle(4, q).graph
  spec = pair_cosets(g, [0, 1])
  assert sorted(spec.pairing) == list(range(spec.rank)) and spec.rank == q


# --- tensor trees -----------------------------------------------------------

def test_path_tree_is_product_state():
  g = chain(5, 3).graph
  tree = build_ttn(g, caterpillar(range(4)))
  assert all(t.shape[0] == 1 for t in tree.internal.values())
  dense = contract_dense(tree)
  np.testing.assert_allclose(dense, oracle.dense_state(g, "psi").amplitudes.real, atol=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
@pytest.mark.parametrize("q", [2, 3])
def test_cycle_tree_is_diagonal(n, q):
  g = cycle(n, q).graph
  tree = build_ttn(g, caterpillar(range(n)))
  for t in tree.internal.values():
    assert set(np.unique(t)) <= {0.0, 1.0}
    # each (left, right) label pair fuses to exactly one parent label
    assert np.all(t.sum(axis=0) <= 1)
  assert tree.root.shape == (q, q)
  np.testing.assert_allclose(tree.root, np.eye(q) / math.sqrt(q))
  np.testing.assert_allclose(contract_dense(tree), oracle.dense_state(g, "psi").amplitudes.real,
                             atol=1e-12)


@pytest.mark.parametrize("enc", ["psi", "phi"])
def test_grid_tree_matches_dense(enc):
  g = grid(3, 3, 2).graph
  bd = heuristic_branch_decompose(g, enc)
  dense = oracle.dense_state(g, enc).amplitudes.real
  assert scale_free_err(contract_dense(build_ttn(g, bd, enc)), dense) <= 1e-10


@given(st.integers(0, 2 ** 31), st.sampled_from([2, 3]), st.integers(2, 5), st.integers(1, 6),
       st.sampled_from(["psi", "phi"]))
def test_tree_matches_dense_state(seed, q, nv, ne, enc):
  rng = np.random.default_rng(seed)
  g = random_graph(rng, q, nv, ne)
  n = num_columns(g, enc)
  bd = caterpillar(rng.permutation(n))
  got = contract_dense(build_ttn(g, bd, enc))
  np.testing.assert_allclose(got, oracle.dense_state(g, enc).amplitudes.real, atol=1e-10)


def test_single_column_tree():
  g = SpinGraph(3, 2, [(0, 1)])
  got = contract_dense(build_ttn(g, caterpillar([0])))
  np.testing.assert_allclose(got, oracle.dense_state(g, "psi").amplitudes.real)


def test_unsupported_encoding():
  with pytest.raises(ValueError):
    build_ttn(cycle(3).graph, caterpillar(range(3)), "ghz")
