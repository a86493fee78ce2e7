"""Desk-scale self checks behind ``spinz validate``.

Every check compares an engine result against an independent reference
(enumeration, dense states or closed forms) and yields one line.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import oracle, stabilizer as stab, transforms, zq
from .contraction import contract
from .generators import cycle, grid, random_graph, random_model, wheel
from .model import make_model
from .numerics import ScaledComplex, scaled_rel_err

SUITES = ("linalg", "stabilizer", "contraction", "duality", "symmetry")
TOL = 1e-10
FAULTS = ("sign",)


@dataclass(frozen=True)
class Check:
  suite: str
  name: str
  ok: bool
  detail: str = ""

  def line(self) -> str:
    tag = "PASS" if self.ok else "FAIL"
    extra = f" ({self.detail})" if self.detail else ""
    return f"{tag} {self.suite}: {self.name}{extra}"


def _linalg(rng, fault) -> Iterator[Check]:
  for q in (2, 3, 4, 6):
    bad = None
    for trial in range(12):
      g = random_graph(rng, q, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
      bt = zq.incidence(g).T
      if zq.kernel_size(bt) != zq.kernel_size_enumerated(bt):
        bad = f"kernel size, trial {trial}"
        break
      code = zq.cut_space(g)
      brute = {tuple((zq.incidence(g).entries.T @ np.asarray(s)) % q)
               for s in itertools.product(range(q), repeat=g.num_vertices)}
      if zq.size(code) != len(brute) or not all(zq.member(code, c) for c in brute):
        bad = f"cut space, trial {trial}"
        break
      perp = zq.orthogonal_complement(code)
      if zq.size(code) * zq.size(perp) != q ** g.num_edges:
        bad = f"complement size, trial {trial}"
        break
    yield Check("linalg", f"kernel, cut space and complement over Z_{q}", bad is None, bad or "")


def _stabilizer(rng, fault) -> Iterator[Check]:
  for q in (2, 3):
    bad = None
    for trial in range(10):
      g = random_graph(rng, q, int(rng.integers(2, 5)), int(rng.integers(1, 5)))
      for enc, gens in (("psi", stab.psi_generators(g)), ("phi", stab.phi_generators(g))):
        st = oracle.dense_state(g, enc).amplitudes
        if not gens.pairwise_commuting():
          bad = f"{enc} generators do not commute, trial {trial}"
        elif any(np.max(np.abs(stab.apply_word(w, st) - st)) > 1e-12 for w in gens):
          bad = f"{enc} generator moves the state, trial {trial}"
        if bad:
          break
      if bad:
        break
    yield Check("stabilizer", f"fixed point and commutation, q={q}", bad is None, bad or "")
  g = cycle(3, 2).graph
  n = len(stab.enumerate_group(stab.psi_generators(g)))
  yield Check("stabilizer", "group order on a triangle", n == 2 ** 3, f"{n} elements")


def _contraction(rng, fault) -> Iterator[Check]:
  from .io import model_digest
  cases = [("ising", "psi", False), ("potts", "phi", True), ("clock", "phi", True),
           ("custom-pairwise", "ghz", True), ("custom-kbody", "kbody", True)]
  for kind, enc, fields in cases:
    bad = None
    for trial in range(8):
      q = int(rng.integers(2, 5))
      h = random_model(rng, q, int(rng.integers(2, 7)), int(rng.integers(1, 8)), kind, fields)
      beta = float(rng.uniform(0.05, 2.0))
      z = contract(None, h, beta, encoding=enc)
      if fault == "sign":
        z = ScaledComplex(-z.mantissa, z.log_scale)
      err = scaled_rel_err(z, oracle.partition_exact(h, beta))
      if not err <= TOL:
        bad = f"model {model_digest(h)} diverges, rel err {err:.3g}"
        break
    yield Check("contraction", f"{kind} via {enc} against enumeration", bad is None, bad or "")


def _duality(rng, fault) -> Iterator[Check]:
  fixtures = [("triangle", cycle(3, 3)), ("4-cycle", cycle(4, 2)), ("3x3 grid", grid(3, 3, 2)),
              ("wheel", wheel(4, 3))]
  for name, gen in fixtures:
    g = gen.graph
    h = make_model("custom-difference", g,
                   tables=[rng.uniform(-1, 1, g.q) for _ in range(g.num_edges)])
    beta = float(rng.uniform(0.2, 1.5))
    dm, pd = transforms.dual_model(h, gen.embedding, beta)
    lz = oracle.partition_exact(h, beta).log()
    ld = oracle.partition_exact(dm, beta).log() + transforms.dual_log_scalar(g, pd.graph)
    err = abs(complex(lz) - complex(ld))
    yield Check("duality", f"Z on {name} equals scaled dual Z", err <= 1e-9, f"|dlog Z| {err:.3g}")
  worst = 0.0
  for _ in range(50):
    q = int(rng.integers(2, 9))
    bj = float(rng.uniform(0.05, 3.0))
    bd = transforms.potts_dual_coupling(bj, q)
    worst = max(worst, abs((math.exp(bj) - 1) * (np.exp(bd) - 1) - q))
  yield Check("duality", "Potts coupling relation", worst <= 1e-12, f"max err {worst:.3g}")


def _symmetry(rng, fault) -> Iterator[Check]:
  from .contraction import column_weights, contract_weights
  from .model import WeightVector
  bad = None
  for trial in range(10):
    h = random_model(rng, 2, int(rng.integers(2, 6)), int(rng.integers(1, 7)), "ising",
                     fields=bool(trial % 2))
    v = int(rng.integers(0, h.graph.num_vertices))
    z0 = oracle.partition_exact(h, 0.7)
    err = scaled_rel_err(oracle.partition_exact(transforms.vertex_flip(h, v), 0.7), z0)
    if not err <= TOL:
      bad = f"trial {trial}, rel err {err:.3g}"
      break
  yield Check("symmetry", "vertex flip leaves Z invariant", bad is None, bad or "")
  bad = None
  for trial in range(10):
    q = int(rng.integers(2, 5))
    h = random_model(rng, q, int(rng.integers(2, 6)), int(rng.integers(1, 7)), "custom-difference",
                     fields=True)
    amps, logs = column_weights(h, 0.9, "phi")
    ws = [WeightVector(a, l) for a, l in zip(amps, logs)]
    z0 = contract_weights(h.graph, ws, encoding="phi")
    word = stab.sample_stabilizer(stab.phi_generators(h.graph), rng)
    z1 = contract_weights(h.graph, transforms.apply_symmetry(ws, word, h.graph, "phi"),
                          encoding="phi")
    err = scaled_rel_err(z1, z0)
    if not err <= TOL:
      bad = f"trial {trial}, rel err {err:.3g}"
      break
  yield Check("symmetry", "sampled stabilizer words leave Z invariant", bad is None, bad or "")


_RUNNERS: dict[str, Callable] = {
    "linalg": _linalg, "stabilizer": _stabilizer, "contraction": _contraction,
    "duality": _duality, "symmetry": _symmetry,
}


def run(suite: str = "all", seed: int = 0, fault: str | None = None) -> Iterator[Check]:
  """Yield checks of one suite (or all) with a fixed seed.

  Args:
    suite: A name from ``SUITES`` or ``all``.
    seed: RNG seed.
    fault: ``sign`` negates contraction results (exercises failure reporting).
  """
  names = SUITES if suite == "all" else (suite,)
  for name in names:
    if name not in _RUNNERS:
      raise ValueError(f"unknown suite {name!r}")
  if fault is not None and fault not in FAULTS:
    raise ValueError(f"unknown fault {fault!r}")
  for i, name in enumerate(names):
    rng = np.random.default_rng([seed, i])
    yield from _RUNNERS[name](rng, fault)
