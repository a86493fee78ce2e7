"""One pass/fail test per acceptance criterion, at the stated tolerances."""

import itertools
import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from spinz import oracle, stabilizer as stab
from spinz.bench import warmup
from spinz.cli import main
from spinz.contraction import column_weights, contract, contract_weights
from spinz.decomposition import caterpillar, connectivity, heuristic_branch_decompose, num_columns
from spinz.generators import chain, cycle, grid, ladder, random_model, wheel
from spinz.io import model_to_doc
from spinz.model import SpinGraph, WeightVector, make_model
from spinz.numerics import scaled_rel_err
from spinz.transforms import (apply_symmetry, dual_log_scalar, dual_model, fourier_weights,
                              planar_dual, potts_dual_coupling, vertex_flip)
from spinz.ttn import build_ttn, contract_dense, pair_cosets
from conftest import fixture_path

# (kind, encoding, fields) combinations: every encoding on each kind it applies to
CASES = [
    ("ising", "psi", False), ("potts", "psi", False), ("clock", "psi", False),
    ("custom-difference", "psi", False),
    ("ising", "phi", True), ("potts", "phi", True), ("clock", "phi", True),
    ("custom-difference", "phi", True),
    ("potts", "ghz", True), ("custom-pairwise", "ghz", True),
    ("clock", "kbody", True), ("custom-pairwise", "kbody", True),
    ("custom-kbody", "kbody", True), ("custom-kbody", "kbody", False),
]


def write(path, h, beta, embedding=None):
  path.write_text(json.dumps(model_to_doc(h, beta, embedding)))
  return str(path)


def graphs_up_to_iso(nv, max_e, multi):
  """Connected-or-not graphs with at least one edge, one per isomorphism class."""
  pairs = list(itertools.combinations(range(nv), 2))
  pick = itertools.combinations_with_replacement if multi else itertools.combinations
  seen, out = set(), []
  for k in range(1, max_e + 1):
    for es in pick(pairs, k):
      key = min(tuple(sorted(tuple(sorted((p[a], p[b]))) for a, b in es))
                for p in itertools.permutations(range(nv)))
      if key not in seen:
        seen.add(key)
        out.append(list(es))
  return out


def oriented(edges, rng):
  return [(a, b) if rng.random() < 0.5 else (b, a) for a, b in edges]


# 1 ---------------------------------------------------------------------------

def test_oracle_equivalence_200_models():
  rng = np.random.default_rng(1001)
  t0 = time.perf_counter()
  for i in range(200):
    kind, enc, fields = CASES[i % len(CASES)]
    q = int(rng.integers(2, 6))
    nv = int(rng.integers(2, 9))
    while q ** nv > 200_000:
      nv -= 1
    h = random_model(rng, q, nv, int(rng.integers(1, 11)), kind, fields=fields)
    beta = float(rng.uniform(1e-3, 2.0))
    err = scaled_rel_err(contract(None, h, beta, encoding=enc), oracle.partition_exact(h, beta))
    assert err <= 1e-10, (i, kind, enc, err)
  assert time.perf_counter() - t0 < 60


# 2 ---------------------------------------------------------------------------

def test_correlation_equivalence_50_models(tmp_path, capsys):
  rng = np.random.default_rng(2002)
  t0 = time.perf_counter()
  kinds = ("ising", "potts", "clock", "custom-difference", "custom-pairwise", "custom-kbody")
  for i in range(50):
    kind = kinds[i % len(kinds)]
    h = random_model(rng, int(rng.integers(2, 5)), int(rng.integers(3, 7)),
                     int(rng.integers(2, 9)), kind, fields=True)
    beta = float(rng.uniform(0.05, 2.0))
    path = write(tmp_path / f"m{i}.json", h, beta)
    for k in (1, 2, 3):
      sites = [int(s) for s in rng.integers(0, h.graph.num_vertices, size=k)]
      assert main(["correlate", path, "--sites", ",".join(map(str, sites))]) == 0
      doc = json.loads(capsys.readouterr().out)
      got = complex(doc["correlation"]["re"], doc["correlation"]["im"])
      expect = oracle.correlation_exact(h, beta, sites)
      assert abs(got - expect) <= 1e-10 * max(1.0, abs(expect)), (i, sites)
  assert time.perf_counter() - t0 < 30


# 3 ---------------------------------------------------------------------------

def test_stabilizer_fixed_point_commutation_and_order():
  rng = np.random.default_rng(3003)
  graphs = []
  for nv in (2, 3, 4):
    graphs += [(nv, es) for es in graphs_up_to_iso(nv, 10 - nv, multi=nv < 4)]
  checked = 0
  for q in (2, 3):
    for nv, es in graphs:
      g = SpinGraph(q, nv, oriented(es, rng))
      for enc, gens in (("psi", stab.psi_generators(g)), ("phi", stab.phi_generators(g))):
        amps = oracle.dense_state(g, enc).amplitudes
        for w in gens:
          assert np.max(np.abs(stab.apply_word(w, amps) - amps)) <= 1e-12
        for a, b in itertools.combinations(gens, 2):
          assert stab.commutes(a, b)
        n = num_columns(g, enc)
        if g.num_edges <= 4 and (enc == "psi" or q ** n <= 3 ** 8):
          assert len(stab.enumerate_group(gens)) == q ** n
        checked += 1
  assert checked > 100


# 4 ---------------------------------------------------------------------------

def test_schmidt_rank_formula_every_bipartition():
  rng = np.random.default_rng(4004)
  t0 = time.perf_counter()
  graphs = graphs_up_to_iso(4, 6, multi=False) + graphs_up_to_iso(3, 6, multi=True)
  for q in (2, 3):
    for es in graphs:
      nv = 1 + max(max(e) for e in es)
      g = SpinGraph(q, nv, oriented(es, rng))
      for enc in ("psi", "phi"):
        n = num_columns(g, enc)
        if n < 2:
          continue
        st_ = oracle.dense_state(g, enc)
        rest = range(1, n)
        for k in range(0, n - 1):
          for extra in itertools.combinations(rest, k):
            cut = (0,) + extra
            lam = connectivity(g, cut, enc)
            assert q ** (lam - 1) == oracle.reduced_rank(st_, cut), (es, enc, cut)
  assert time.perf_counter() - t0 < 60


# 5 ---------------------------------------------------------------------------

def _cut_singular_values(amps, q, n, cut):
  rest = [i for i in range(n) if i not in cut]
  m = amps.reshape([q] * n).transpose(list(cut) + rest).reshape(q ** len(cut), -1)
  s = np.linalg.svd(m / np.linalg.norm(amps), compute_uv=False)
  return s[s > 1e-12]


def test_ttn_reconstruction():
  graphs = [chain(n).graph for n in (2, 4, 6)]
  graphs.append(SpinGraph(2, 6, [(0, 1), (0, 2), (0, 3), (3, 4), (3, 5)]))
  graphs += [cycle(n).graph for n in (3, 4, 5, 6)]
  graphs.append(grid(3, 3).graph)
  for g in graphs:
    for enc in ("psi", "phi"):
      n = num_columns(g, enc)
      bd = heuristic_branch_decompose(g, enc) if n > 1 else caterpillar([0])
      dense = oracle.dense_state(g, enc).amplitudes.real
      got = contract_dense(build_ttn(g, bd, enc))
      c = np.dot(got, dense) / np.dot(got, got)
      assert np.max(np.abs(c * got - dense)) / np.max(np.abs(dense)) <= 1e-10
      if n > 1 and n <= 12:
        cut = list(range(n // 2))
        spec = pair_cosets(g, cut, enc)
        sv = _cut_singular_values(dense, 2, n, cut)
        assert len(sv) == spec.rank
        np.testing.assert_allclose(sv, spec.schmidt_value, rtol=1e-12)
        assert spec.schmidt_value == spec.rank ** -0.5


# 6 ---------------------------------------------------------------------------

def test_potts_dual_coupling_relation_100_cases():
  rng = np.random.default_rng(6006)
  for _ in range(100):
    q = int(rng.integers(2, 9))
    bj = float(rng.uniform(0.0, 2.0) * rng.uniform(0.05, 3.0)) + 1e-3
    bjd = potts_dual_coupling(bj, q)
    lhs = (np.exp(bjd) - 1) * (math.exp(bj) - 1)
    assert abs(lhs - q) <= 1e-12 * q


def test_duality_scalar_on_planar_fixtures():
  fixtures = [cycle(3), cycle(5, 3), grid(2, 2, 3), grid(3, 3), wheel(4, 4)]
  rng = np.random.default_rng(6106)
  for gen in fixtures:
    g, q = gen.graph, gen.graph.q
    pd = planar_dual(g, gen.embedding)
    # beta = 0: all weights one on G, their transforms on D
    ones = [WeightVector(np.ones(q))] * g.num_edges
    s0 = (contract_weights(g, ones, encoding="psi").log() -
          contract_weights(pd.graph, [fourier_weights(w) for w in ones], encoding="psi").log()).real
    assert s0 == pytest.approx(dual_log_scalar(g, pd.graph), abs=1e-12)
    for _ in range(10):
      h = make_model("custom-difference", g, tables=rng.uniform(-2, 2, size=(g.num_edges, q)))
      beta = float(rng.uniform(0.05, 2.0))
      dm, _ = dual_model(h, gen.embedding, beta)
      diff = contract(None, h, beta).log() - contract(None, dm, beta).log()
      assert abs(diff.real - s0) <= 1e-9 and abs(diff.imag) <= 1e-9


# 7 ---------------------------------------------------------------------------

def test_symmetries_leave_z_invariant():
  rng = np.random.default_rng(7007)
  for fields in (False, True):
    for _ in range(10):
      h = random_model(rng, 2, 6, 8, "ising", fields=fields)
      beta = float(rng.uniform(0.05, 2.0))
      z = contract(None, h, beta)
      for v in range(h.graph.num_vertices):
        assert scaled_rel_err(contract(None, vertex_flip(h, v), beta), z) <= 1e-10
    enc = "phi" if fields else "psi"
    for i in range(50):
      h = random_model(rng, int(rng.integers(2, 6)), 5, 7, ("potts", "clock",
                       "custom-difference")[i % 3], fields=fields)
      beta = float(rng.uniform(0.05, 2.0))
      gens = stab.phi_generators(h.graph) if fields else stab.psi_generators(h.graph)
      amps, logs = column_weights(h, beta, enc)
      ws = [WeightVector(a, l) for a, l in zip(amps, logs)]
      word = stab.sample_stabilizer(gens, rng)
      z0 = contract_weights(h.graph, ws, encoding=enc)
      z1 = contract_weights(h.graph, apply_symmetry(ws, word, h.graph, enc), encoding=enc)
      assert scaled_rel_err(z1, z0) <= 1e-10
      assert scaled_rel_err(z0, oracle.partition_exact(h, beta)) <= 1e-10


# 8 ---------------------------------------------------------------------------

def _time(h, beta, repeats=3):
  best = float("inf")
  for _ in range(repeats):
    t0 = time.perf_counter()
    z = contract(None, h, beta)
    best = min(best, time.perf_counter() - t0)
  return best, z


def test_performance_chain_ladder_and_scaling():
  warmup()
  beta = 0.7
  ising = lambda n: make_model("ising", chain(n).graph, J=1.0, B=0.5)
  t5, _ = _time(ising(100_000), beta)
  assert t5 < 1.0
  ref = oracle.transfer_matrix_chain(2, 1000, beta, [0.0, 1.0], [-0.25, 0.25])
  _, z3 = _time(ising(1000), beta, 1)
  assert abs(z3.log().real - ref) <= 1e-8 * abs(ref)
  tl, _ = _time(make_model("ising", ladder(10_000).graph, J=1.0, B=0.5), beta, 1)
  assert tl < 10.0
  t4, _ = _time(ising(10_000), beta, 5)
  ratio = (t5 / t4) / 10
  assert 0.5 <= ratio <= 2.0, ratio


# 9 ---------------------------------------------------------------------------

def test_documents_byte_identical_across_thread_counts(tmp_path):
  h = random_model(np.random.default_rng(9009), 3, 6, 8, "clock", fields=True)
  gen = grid(2, 3, 3)
  dh = make_model("potts", gen.graph, epsilon=0.9)
  model = write(tmp_path / "m.json", h, 0.8)
  planar = write(tmp_path / "p.json", dh, 0.8, gen.embedding)
  commands = [
      ["partition", model], ["partition", model, "--oracle"],
      ["partition", fixture_path("potts_cycle.json")],
      ["correlate", model, "--sites", "0,2,5"], ["correlate", model, "--sites", "1", "--oracle"],
      ["dual", planar], ["dual", planar, "--oracle"],
      ["symmetry", model, "--sample", "5", "--seed", "3"], ["symmetry", planar, "--vertex", "1"],
  ]
  for cmd in commands:
    outs = []
    for n in ("1", "4"):
      env = dict(os.environ, SPINZ_THREADS=n)
      r = subprocess.run([sys.executable, "-m", "spinz.cli"] + cmd, env=env,
                         capture_output=True, check=True)
      outs.append(r.stdout)
    assert outs[0] == outs[1], cmd
    assert outs[0].endswith(b"\n")
