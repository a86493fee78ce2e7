"""Timing of the contraction engine on generated families."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .contraction import contract
from .decomposition import heuristic_branch_decompose, width
from .generators import family
from .model import Hamiltonian, make_model

BENCH_FAMILIES = ("chain", "ladder", "cycle", "grid")


@dataclass(frozen=True)
class BenchRow:
  family: str
  size: int
  q: int
  num_vertices: int
  num_edges: int
  width: int
  seconds: float
  log_z: float


def bench_model(name: str, size: int, q: int) -> Hamiltonian:
  """Ising with a field for q = 2, Potts with a field otherwise (uniform couplings)."""
  g = family(name, size, q).graph
  if q == 2:
    return make_model("ising", g, J=1.0, B=0.5)
  return make_model("potts", g, epsilon=1.0, B=0.5)


def warmup():
  """Compile and load the numeric kernels so timings exclude one-off JIT cost."""
  for q in (2, 3):
    contract(None, bench_model("ladder", 3, q), 0.5)


def run_bench(name: str, sizes, q: int = 2, beta: float = 0.5, repeats: int = 1) -> list[BenchRow]:
  """Best-of-``repeats`` wall time of ``contract`` (decomposition included) per size."""
  if name not in BENCH_FAMILIES:
    raise ValueError(f"unknown family {name!r}; choose from {', '.join(BENCH_FAMILIES)}")
  warmup()
  rows = []
  for n in sizes:
    h = bench_model(name, int(n), q)
    best, z = float("inf"), None
    for _ in range(max(1, repeats)):
      t0 = time.perf_counter()
      z = contract(None, h, beta)
      best = min(best, time.perf_counter() - t0)
    bd = heuristic_branch_decompose(h.graph, "phi")
    w = width(bd, h.graph, "phi").width
    rows.append(BenchRow(name, int(n), q, h.graph.num_vertices, h.graph.num_edges, w, best,
                         float(z.log().real)))
  return rows


def format_table(rows: list[BenchRow]) -> str:
  head = f"{'family':<8}{'size':>9}{'q':>4}{'|V|':>9}{'|E|':>9}{'width':>7}{'seconds':>11}{'log Z':>16}"
  lines = [head]
  for r in rows:
    lines.append(f"{r.family:<8}{r.size:>9}{r.q:>4}{r.num_vertices:>9}{r.num_edges:>9}"
                 f"{r.width:>7}{r.seconds:>11.4f}{r.log_z:>16.6f}")
  return "\n".join(lines) + "\n"
