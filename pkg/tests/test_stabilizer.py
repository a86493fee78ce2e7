import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinz import oracle, stabilizer as stab
from spinz.generators import chain, cycle, random_graph, torus
from spinz.model import SpinGraph


def torus2x2(q):
  """2x2 periodic lattice (a multigraph): horizontal edge 2i, vertical edge 2i+1 at vertex i."""
  vid = lambda r, c: (r % 2) * 2 + c % 2
  edges = []
  for r in range(2):
    for c in range(2):
      edges += [(vid(r, c), vid(r, c + 1)), (vid(r, c), vid(r + 1, c))]
  return SpinGraph(q, 4, edges)


def plaquettes(rows, cols):
  h = lambda r, c: 2 * ((r % rows) * cols + c % cols)
  v = lambda r, c: h(r, c) + 1
  return [[h(r, c), v(r, c + 1), h(r + 1, c), v(r, c)] for r in range(rows) for c in range(cols)]


# --- word arithmetic --------------------------------------------------------

def test_commutes_examples():
  assert stab.commutes(stab.x_word([1, 1], 2), stab.z_word([1, 1], 2))
  assert not stab.commutes(stab.x_word([1], 2), stab.z_word([1], 2))
  assert not stab.commutes(stab.x_word([1], 3), stab.z_word([1], 3))


def test_multiply_examples():
  zx = stab.multiply(stab.z_word([1], 2), stab.x_word([1], 2))
  assert (zx.xi, zx.zeta, zx.phase_num) == ((1,), (1,), 1)
  a = stab.PauliWord(3, (1, 2), (0, 1), 2)
  assert stab.multiply(a, stab.identity(2, 3)) == a
  xx = stab.multiply(stab.x_word([1], 3), stab.x_word([1], 3))
  assert (xx.xi, xx.phase_num) == ((2,), 0)


words = st.integers(2, 5).flatmap(lambda q: st.integers(1, 3).flatmap(lambda n: st.tuples(
    *[st.builds(stab.PauliWord, st.just(q), st.lists(st.integers(0, q - 1), min_size=n,
                                                     max_size=n),
                st.lists(st.integers(0, q - 1), min_size=n, max_size=n),
                st.integers(0, q - 1)) for _ in range(3)])))


def _dense(word):
  q, n = word.q, word.n
  return np.stack([stab.apply_word(word, e) for e in np.eye(q ** n)], axis=1)


@given(words)
def test_multiply_matches_operator_product(abc):
  a, b, _ = abc
  np.testing.assert_allclose(_dense(stab.multiply(a, b)), _dense(a) @ _dense(b), atol=1e-12)


@given(words)
def test_multiply_associative_and_commutation_consistent(abc):
  a, b, c = abc
  assert stab.multiply(stab.multiply(a, b), c) == stab.multiply(a, stab.multiply(b, c))
  ab, ba = _dense(a) @ _dense(b), _dense(b) @ _dense(a)
  assert stab.commutes(a, b) == np.allclose(ab, ba)


def test_power_is_repeated_multiplication():
  a = stab.PauliWord(3, (1, 2), (2, 1), 1)
  assert stab.power(a, 3) == stab.multiply(stab.multiply(a, a), a)


# --- psi / phi generators ---------------------------------------------------

@pytest.mark.parametrize("q", [2, 3, 4])
def test_cycle_generators_equivalent_to_textbook_set(q):
  n = 5
  g = cycle(n, q).graph
  book = [stab.z_word([1] * n, q)]
  for i in range(n - 1):
    xi = [0] * n
    xi[i], xi[i + 1] = 1, q - 1
    book.append(stab.x_word(xi, q))
  ours = stab.enumerate_group(stab.psi_generators(g))
  theirs = stab.enumerate_group(stab.StabilizerGenSet(n, q, tuple(book)))
  assert ours == theirs


def test_tree_state_is_product():
  g = chain(4, 3).graph
  amps = oracle.dense_state(g, "psi").amplitudes
  assert np.allclose(amps, amps[0])
  assert all(not any(w.zeta) for w in stab.psi_generators(g))


def test_single_edge_q2():
  gens = stab.psi_generators(SpinGraph(2, 2, [(0, 1)]))
  assert [(w.xi, w.zeta) for w in gens] == [((1,), (0,))]
  assert len(stab.enumerate_group(gens)) == 2


def test_phi_single_edge_generators():
  gens = stab.phi_generators(SpinGraph(2, 2, [(0, 1)])).generators
  assert [(w.xi, w.zeta) for w in gens] == [((1, 0, 1), (0, 0, 0)), ((0, 1, 1), (0, 0, 0)),
                                            ((0, 0, 0), (1, 1, 1))]


@given(st.integers(0, 2 ** 31), st.sampled_from([2, 3]), st.integers(1, 4), st.integers(1, 5))
def test_generators_fix_dense_state(seed, q, nv, ne):
  g = random_graph(np.random.default_rng(seed), q, max(nv, 2), ne)
  for enc, gens in (("psi", stab.psi_generators(g)), ("phi", stab.phi_generators(g))):
    st_ = oracle.dense_state(g, enc).amplitudes
    assert gens.pairwise_commuting()
    for w in gens:
      np.testing.assert_allclose(stab.apply_word(w, st_), st_, atol=1e-12)
    if enc == "phi":
      assert len(gens) == g.num_vertices + g.num_edges


@given(st.integers(0, 2 ** 31), st.sampled_from([2, 3]), st.integers(1, 4))
def test_group_order_is_q_to_n(seed, q, ne):
  g = random_graph(np.random.default_rng(seed), q, 3, ne)
  assert len(stab.enumerate_group(stab.psi_generators(g))) == q ** g.num_edges
  if g.num_vertices + g.num_edges <= 6:
    assert len(stab.enumerate_group(stab.phi_generators(g))) == q ** (g.num_vertices +
                                                                      g.num_edges)


@given(st.integers(0, 2 ** 31), st.sampled_from([2, 3, 4]))
def test_sampled_words_are_members_and_fix_state(seed, q):
  rng = np.random.default_rng(seed)
  g = random_graph(rng, q, 3, 4)
  for enc, gens in (("psi", stab.psi_generators(g)), ("phi", stab.phi_generators(g))):
    w = stab.sample_stabilizer(gens, rng)
    assert stab.in_stabilizer(w, g, enc)
    amps = oracle.dense_state(g, enc).amplitudes
    np.testing.assert_allclose(stab.apply_word(w, amps), amps, atol=1e-12)


def test_non_member_detected():
  g = cycle(3, 3).graph
  assert not stab.in_stabilizer(stab.x_word([1, 0, 0], 3), g, "psi")
  assert not stab.in_stabilizer(stab.z_word([1, 0, 0], 3), g, "psi")
  assert stab.in_stabilizer(stab.z_word([1, 1, 1], 3), g, "psi")


# --- toric code -------------------------------------------------------------

@pytest.mark.parametrize("q", [2, 3, 5])
def test_toric_generators_commute(q):
  g = torus2x2(q)
  gens = stab.kitaev_generators(g, plaquettes(2, 2))
  assert gens.pairwise_commuting()
  g3 = torus(3, 3, q).graph
  assert stab.kitaev_generators(g3, plaquettes(3, 3)).pairwise_commuting()


def test_single_loop_as_plaquette_and_star():
  g = cycle(4, 2).graph
  gens = stab.kitaev_generators(g, [[0, 1, 2, 3]])
  assert gens.pairwise_commuting()


@pytest.mark.parametrize("q", [2, 3])
def test_toric_dependencies(q):
  g = torus(3, 3, q).graph
  gens = stab.kitaev_generators(g, plaquettes(3, 3)).generators
  stars = [w for w in gens if any(w.xi)]
  prod = stab.identity(g.num_edges, q)
  for w in stars:
    prod = stab.multiply(prod, w)
  assert prod.is_identity()
  if q == 2:
    prod = stab.identity(g.num_edges, q)
    for w in gens:
      if any(w.zeta):
        prod = stab.multiply(prod, w)
    assert prod.is_identity()


def test_open_loop_rejected():
  with pytest.raises(stab.StabilizerError, match="not closed"):
    stab.loop_orientation(chain(3).graph, [0, 1])


# --- Schmidt rank -----------------------------------------------------------

def test_schmidt_rank_tree_and_cycle():
  g = chain(5, 3).graph
  assert all(stab.schmidt_rank(g, {e}) == 1 for e in range(4))
  c = cycle(4, 3).graph
  assert stab.schmidt_rank(c, {0, 1}) == 3
  assert oracle.reduced_rank(oracle.dense_state(c, "psi"), [0, 1]) == 3


@pytest.mark.parametrize("length", [2, 3])
def test_schmidt_rank_non_contractible_cut(length):
  g = torus(3, length, 2).graph if length == 3 else torus2x2(2)
  cols = 3 if length == 3 else 2
  # vertical edges of one row: a line crossing every column once
  cut = [2 * c + 1 for c in range(cols)]
  st_ = oracle.dense_state(g, "psi")
  assert stab.schmidt_rank(g, cut) == oracle.reduced_rank(st_, cut)
