import json
import math

import numpy as np
import pytest

from spinz import oracle
from spinz.cli import main, threads
from spinz.generators import chain, cycle, grid, random_model
from spinz.io import ParseError, load_model, model_digest, model_to_doc
from spinz.model import SpinGraph, make_model
from conftest import fixture_path

POTTS = fixture_path("potts_cycle.json")
GRID = fixture_path("ising_grid_field.json")


def run(capsys, *argv):
  code = main([str(a) for a in argv])
  out, err = capsys.readouterr()
  try:
    doc = json.loads(out)
  except ValueError:
    doc = out
  return code, doc, err


def write_model(path, h, beta, embedding=None):
  path.write_text(json.dumps(model_to_doc(h, beta, embedding)))
  return str(path)


def log_re(doc):
  return doc["log_z"]["re"]


# --- partition --------------------------------------------------------------

def test_partition_matches_oracle(capsys):
  c1, a, _ = run(capsys, "partition", POTTS)
  c2, b, _ = run(capsys, "partition", POTTS, "--oracle")
  assert c1 == c2 == 0
  assert a["encoding"] == "psi" and b["encoding"] == "oracle"
  assert abs(log_re(a) - log_re(b)) <= 1e-10 * abs(log_re(b))
  assert a["model_digest"] == b["model_digest"]


def test_partition_with_fields_uses_phi_and_echoes_flags(capsys):
  code, doc, _ = run(capsys, "partition", GRID, "--strategy", "greedy-merge")
  assert code == 0 and doc["encoding"] == "phi"
  assert doc["echo"]["strategy"] == "greedy-merge" and doc["echo"]["encoding"] == "auto"
  assert "threads" not in doc["echo"] and "wall_time" not in doc
  assert doc["width_report"]["max_label_dim"] == 2 ** (doc["width_report"]["width"] - 1)


def test_partition_beta_zero(capsys):
  code, doc, _ = run(capsys, "partition", GRID, "--beta", "0")
  assert code == 0 and log_re(doc) == pytest.approx(9 * math.log(2), rel=1e-14)


def test_partition_timing_flag(capsys):
  _, doc, _ = run(capsys, "partition", POTTS, "--timing")
  assert doc["wall_time"] >= 0


def test_partition_decomposition_file(capsys, tmp_path):
  p = tmp_path / "bd.txt"
  p.write_text("((0,1),(2,3))")
  code, doc, _ = run(capsys, "partition", POTTS, "--decomposition-file", p)
  _, ref, _ = run(capsys, "partition", POTTS, "--oracle")
  assert code == 0 and log_re(doc) == pytest.approx(log_re(ref), rel=1e-12)


def test_large_z_prints_log_only(capsys, tmp_path):
  h = make_model("ising", chain(400).graph, J=-5.0)
  code, doc, _ = run(capsys, "partition", write_model(tmp_path / "m.json", h, 1.0))
  assert code == 0 and "z" not in doc and log_re(doc) > 700


# --- correlate --------------------------------------------------------------

def test_free_spin_correlations(capsys, tmp_path):
  h = make_model("custom-difference", SpinGraph(2, 1), tables={})
  path = write_model(tmp_path / "free.json", h, 1.0)
  _, one, _ = run(capsys, "correlate", path, "--sites", "0")
  _, two, _ = run(capsys, "correlate", path, "--sites", "0,0")
  assert abs(one["correlation"]["re"]) < 1e-15
  assert two["correlation"]["re"] == pytest.approx(1.0)


def test_two_spin_ising_correlation(capsys, tmp_path):
  beta, j = 0.8, 0.6
  h = make_model("ising", SpinGraph(2, 2, [(0, 1)]), J=j)
  _, doc, _ = run(capsys, "correlate", write_model(tmp_path / "m.json", h, beta),
                  "--sites", "0,1")
  x = math.exp(-beta * j)
  assert doc["correlation"]["re"] == pytest.approx((1 - x) / (1 + x), rel=1e-13)


def test_correlate_matches_oracle(capsys):
  _, a, _ = run(capsys, "correlate", GRID, "--sites", "0,4,8")
  _, b, _ = run(capsys, "correlate", GRID, "--sites", "0,4,8", "--oracle")
  assert a["correlation"]["re"] == pytest.approx(b["correlation"]["re"], abs=1e-10)
  assert a["sites"] == [0, 4, 8]


def test_correlate_bad_sites(capsys):
  code, _, err = run(capsys, "correlate", POTTS, "--sites", "0,x")
  assert code == 2 and "comma-separated" in err
  code, _, err = run(capsys, "correlate", POTTS, "--sites", "9")
  assert code == 2 and "unknown vertex 9" in err


# --- dual -------------------------------------------------------------------

@pytest.mark.parametrize("gen", [cycle(3, 2), cycle(4, 3), grid(3, 3, 2)])
def test_dual_scalar(capsys, tmp_path, gen):
  rng = np.random.default_rng(7)
  h = make_model("custom-difference", gen.graph,
                 tables=rng.normal(size=(gen.graph.num_edges, gen.graph.q)))
  out = tmp_path / "dual.json"
  code, doc, _ = run(capsys, "dual", write_model(tmp_path / "m.json", h, 0.8, gen.embedding),
                     "--out", out)
  assert code == 0 and doc["log_scalar_error"] <= 1e-9
  d = load_model(str(out))
  assert model_digest(d.hamiltonian) == doc["dual_digest"]
  assert log_re(doc["dual"]) == pytest.approx(oracle.partition_exact(d.hamiltonian, 0.8)
                                              .log().real, rel=1e-10)


def test_dual_needs_embedding(capsys, tmp_path):
  h = make_model("ising", cycle(4).graph, J=1.0)
  code, _, err = run(capsys, "dual", write_model(tmp_path / "m.json", h, 1.0))
  assert code == 5 and "embedding" in err


def test_dual_bridge(capsys, tmp_path):
  gen = chain(3)
  h = make_model("ising", gen.graph, J=1.0)
  code, _, err = run(capsys, "dual", write_model(tmp_path / "m.json", h, 1.0, gen.embedding))
  assert code == 5 and "bridge" in err


def test_dual_with_fields_refused(capsys):
  code, _, err = run(capsys, "dual", GRID)
  assert code == 1 and "fields" in err


# --- symmetry ---------------------------------------------------------------

def test_symmetry_vertex_flip(capsys, tmp_path):
  h = make_model("ising", cycle(4).graph, J=[1.0, -0.5, 0.3, 0.9])
  code, doc, _ = run(capsys, "symmetry", write_model(tmp_path / "m.json", h, 0.7), "--vertex", 1)
  assert code == 0 and doc["max_rel_change"] <= 1e-10
  # edges 0 and 1 touch vertex 1 and are reversed; the others are untouched
  assert doc["transformed"]["couplings"][0] == [1.0, 0.0]
  assert doc["transformed"]["couplings"][2] == [0.0, 0.3]


def test_symmetry_vertex_q3(capsys):
  code, doc, _ = run(capsys, "symmetry", POTTS, "--vertex", 2)
  assert code == 0 and doc["max_rel_change"] <= 1e-10


def test_symmetry_samples(capsys, tmp_path):
  h = random_model(np.random.default_rng(3), 3, 5, 7, "clock", fields=True)
  path = write_model(tmp_path / "m.json", h, 0.9)
  code, doc, _ = run(capsys, "symmetry", path, "--sample", 20, "--seed", 4)
  assert code == 0 and len(doc["samples"]) == 20 and doc["max_rel_change"] <= 1e-10
  assert doc["encoding"] == "phi"
  _, again, _ = run(capsys, "symmetry", path, "--sample", 20, "--seed", 4)
  assert again == doc


def test_symmetry_flags_exclusive(capsys):
  with pytest.raises(SystemExit) as ex:
    main(["symmetry", POTTS, "--vertex", "0", "--sample", "3"])
  assert ex.value.code == 2


# --- validate and bench -----------------------------------------------------

def test_validate_all_passes(capsys):
  code, out, _ = run(capsys, "validate")
  assert code == 0 and "FAIL" not in out.replace("FAIL:", "")
  assert out.strip().endswith("PASS: 0 failing check(s)")


def test_validate_injected_fault_fails_with_digest(capsys):
  code, out, _ = run(capsys, "validate", "--suite", "contraction", "--inject-fault", "sign")
  assert code == 1
  bad = [l for l in out.splitlines() if l.startswith("FAIL contraction")]
  assert bad and all("model" in l for l in bad)


def test_validate_linalg_suite(capsys):
  code, out, _ = run(capsys, "validate", "--suite", "linalg")
  assert code == 0 and "Z_6" in out


def test_bench_table(capsys):
  code, out, _ = run(capsys, "bench", "--family", "chain", "--sizes", "10,100")
  lines = out.strip().splitlines()
  assert code == 0 and len(lines) >= 3
  assert "chain" in out


def test_bench_bad_sizes(capsys):
  code, _, err = run(capsys, "bench", "--family", "chain", "--sizes", "a,b")
  assert code == 2


# --- exit codes -------------------------------------------------------------

def test_exit_codes(capsys, tmp_path):
  bad = tmp_path / "bad.json"
  bad.write_text("{")
  assert run(capsys, "partition", bad)[0] == 2
  assert run(capsys, "partition", tmp_path / "none.json")[0] == 2
  assert run(capsys, "partition", GRID, "--max-width", 1)[0] == 3
  big = make_model("potts", grid(4, 4, 4).graph, epsilon=1.0)
  assert run(capsys, "partition", write_model(tmp_path / "big.json", big, 1.0), "--oracle")[0] == 4
  assert run(capsys, "partition", GRID, "--encoding", "psi")[0] == 1
  p = tmp_path / "bd.txt"
  p.write_text("((0,1)")
  assert run(capsys, "partition", POTTS, "--decomposition-file", p)[0] == 2
  with pytest.raises(SystemExit) as ex:
    main(["partition"])
  assert ex.value.code == 2


def test_unknown_key_lenient(capsys, tmp_path):
  d = json.loads(open(POTTS).read())
  d["comment"] = "x"
  p = tmp_path / "m.json"
  p.write_text(json.dumps(d))
  assert run(capsys, "partition", p)[0] == 2
  with pytest.warns(UserWarning):
    assert run(capsys, "partition", p, "--lenient")[0] == 0


# --- determinism ------------------------------------------------------------

def test_threads_flag_and_environment(monkeypatch):
  monkeypatch.delenv("SPINZ_THREADS", raising=False)
  assert threads(None) == 1 and threads(3) == 3
  monkeypatch.setenv("SPINZ_THREADS", "4")
  assert threads(None) == 4
  monkeypatch.setenv("SPINZ_THREADS", "many")
  with pytest.raises(ParseError):
    threads(None)


@pytest.mark.parametrize("extra", [[], ["--oracle"]])
def test_output_independent_of_threads(capsys, monkeypatch, extra):
  outs = []
  for n in ("1", "4"):
    monkeypatch.setenv("SPINZ_THREADS", n)
    main(["partition", POTTS] + extra)
    outs.append(capsys.readouterr().out)
  assert outs[0] == outs[1]
