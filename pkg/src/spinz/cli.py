"""Command-line front end.

Exit codes: 0 success, 1 failed validation or other error, 2 unreadable
input (model file, flags, decomposition file), 3 width cap exceeded,
4 enumeration cap exceeded, 5 graph not planar-embedded or has a bridge.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import oracle, stabilizer as stab, transforms
from .contraction import (ENCODINGS, EncodingMismatchError, WidthExceededError, check_encoding,
                          choose_encoding, column_weights, contract, contract_weights,
                          site_decompose, site_factors, site_width)
from .decomposition import (STRATEGIES, BranchDecomposition, DecompositionError,
                            heuristic_branch_decompose, width)
from .io import (ParseError, dump_document, encode_log, load_model, model_digest, model_to_doc,
                 result_document)
from .model import ModelError, WeightVector
from .numerics import scaled_rel_err
from .oracle import OracleCapError

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_WIDTH, EXIT_ORACLE, EXIT_PLANAR = 0, 1, 2, 3, 4, 5


def threads(flag: int | None) -> int:
  """Worker count: flag, else SPINZ_THREADS, else 1."""
  if flag is not None:
    return max(1, flag)
  env = os.environ.get("SPINZ_THREADS", "").strip()
  if not env:
    return 1
  try:
    return max(1, int(env))
  except ValueError:
    raise ParseError(f"SPINZ_THREADS must be an integer, got {env!r}") from None


def _load(args):
  mf = load_model(args.model, strict=not args.lenient)
  beta = mf.beta if args.beta is None else args.beta
  return mf, beta


def _echo(args, *keys) -> dict:
  """Flags that determine the result (never threads or timing)."""
  out = {"name": args.command}
  for k in keys:
    out[k] = getattr(args, k)
  return out


def _plan(h, args, sites=None):
  """Resolve encoding, decomposition and width; enforce ``--max-width``."""
  enc = choose_encoding(h, sites) if args.encoding == "auto" else args.encoding
  check_encoding(h, enc, sites)
  g = h.graph
  factors = None
  if args.decomposition_file:
    try:
      with open(args.decomposition_file, encoding="utf-8") as f:
        bd = BranchDecomposition.from_text(f.read())
    except OSError as ex:
      raise ParseError(f"cannot read {args.decomposition_file}: {ex.strerror}") from None
  elif enc in ("psi", "phi"):
    bd = heuristic_branch_decompose(g, enc, args.strategy or "min-degree-elimination")
  else:
    factors = site_factors(h, 0.0, enc, sites)
    bd = site_decompose(h, args.strategy or "greedy-merge", factors)
  if enc in ("psi", "phi"):
    w = width(bd, g, enc).width
  else:
    w = site_width(h, factors or site_factors(h, 0.0, enc, sites), bd)
  if args.max_width is not None and w > args.max_width:
    raise WidthExceededError(
        f"decomposition width {w} exceeds --max-width {args.max_width}", w, g.q ** (w - 1))
  report = {"width": w, "max_label_dim": g.q ** (w - 1)}
  return enc, bd, report


def cmd_partition(args) -> dict:
  mf, beta = _load(args)
  h = mf.hamiltonian
  workers = threads(args.threads)
  t0 = time.perf_counter()
  fields = {"model_digest": model_digest(h), "beta": beta}
  if args.oracle:
    z = oracle.partition_exact(h, beta, workers=workers)
    fields["encoding"] = "oracle"
  else:
    enc, bd, report = _plan(h, args)
    z = contract(None, h, beta, bd, enc)
    fields.update(encoding=enc, width_report=report, decomposition_digest=bd.digest())
  fields.update(encode_log(z))
  if args.timing:
    fields["wall_time"] = time.perf_counter() - t0
  echo = _echo(args, "model", "encoding", "strategy", "decomposition_file", "beta", "oracle",
               "max_width")
  return result_document("partition", echo=echo, **fields)


def _sites(text: str) -> list[int]:
  try:
    out = [int(s) for s in text.split(",") if s.strip()]
  except ValueError:
    raise ParseError(f"--sites must be comma-separated vertex ids, got {text!r}") from None
  if not out:
    raise ParseError("--sites needs at least one vertex id")
  return out


def cmd_correlate(args) -> dict:
  mf, beta = _load(args)
  h = mf.hamiltonian
  sites = _sites(args.sites)
  bad = [s for s in sites if not 0 <= s < h.graph.num_vertices]
  if bad:
    raise ParseError(f"--sites references unknown vertex {bad[0]}")
  workers = threads(args.threads)
  t0 = time.perf_counter()
  fields = {"model_digest": model_digest(h), "beta": beta, "sites": sites}
  if args.oracle:
    c = oracle.correlation_exact(h, beta, sites, workers=workers)
    z = oracle.partition_exact(h, beta, workers=workers)
    fields["encoding"] = "oracle"
  else:
    enc, bd_w, report = _plan(h, args, sites)
    bd_p = bd_w if enc in ("psi", "phi") or args.decomposition_file else None
    z = contract(None, h, beta, bd_p, enc)
    if z.is_zero():
      raise ZeroDivisionError("partition function vanishes")
    num = contract(None, h, beta, bd_w, enc, sites)
    c = 0j if num.is_zero() else (num / z).value()
    fields.update(encoding=enc, width_report=report, decomposition_digest=bd_w.digest())
  fields["correlation"] = {"re": float(c.real), "im": float(c.imag)}
  fields.update(encode_log(z))
  if args.timing:
    fields["wall_time"] = time.perf_counter() - t0
  echo = _echo(args, "model", "sites", "encoding", "strategy", "decomposition_file", "beta",
               "oracle", "max_width")
  return result_document("correlate", echo=echo, **fields)


def _z(h, beta, use_oracle, workers):
  if use_oracle:
    return oracle.partition_exact(h, beta, workers=workers)
  return contract(None, h, beta)


def cmd_dual(args) -> dict:
  mf, beta = _load(args)
  h = mf.hamiltonian
  if mf.embedding is None:
    raise transforms.DualityError("model file has no embedding")
  workers = threads(args.threads)
  t0 = time.perf_counter()
  dm, pd = transforms.dual_model(h, mf.embedding, beta)
  zg = _z(h, beta, args.oracle, workers)
  zd = _z(dm, beta, args.oracle, workers)
  predicted = transforms.dual_log_scalar(h.graph, pd.graph)
  measured = zg.log() - zd.log()
  if args.out:
    with open(args.out, "w", encoding="utf-8") as f:
      f.write(dump_document(model_to_doc(dm, beta)))
  fields = {
      "model_digest": model_digest(h), "dual_digest": model_digest(dm), "beta": beta,
      "primal": encode_log(zg), "dual": encode_log(zd),
      "dual_vertices": pd.graph.num_vertices, "dual_edges": [list(e) for e in pd.graph.edges],
      "log_scalar_predicted": predicted,
      "log_scalar_measured": {"re": float(measured.real), "im": float(measured.imag)},
      "log_scalar_error": float(abs(measured - predicted)),
  }
  if args.timing:
    fields["wall_time"] = time.perf_counter() - t0
  return result_document("dual", echo=_echo(args, "model", "out", "beta", "oracle"), **fields)


def _enc_weights(ws):
  return [{"amplitudes": [[float(a.real), float(a.imag)] for a in w.amplitudes],
           "log_scale": w.log_scale} for w in ws]


def cmd_symmetry(args) -> dict:
  mf, beta = _load(args)
  h = mf.hamiltonian
  g = h.graph
  if h.kind != "difference":
    raise ModelError("symmetries act on difference-form models")
  enc = "phi" if h.has_fields else "psi"
  workers = threads(args.threads)
  t0 = time.perf_counter()
  z0 = _z(h, beta, args.oracle, workers)
  fields = {"model_digest": model_digest(h), "beta": beta, "encoding": enc}
  fields.update(encode_log(z0))
  if args.vertex is not None:
    if not 0 <= args.vertex < g.num_vertices:
      raise ParseError(f"--vertex references unknown vertex {args.vertex}")
    if g.q == 2:
      h2 = transforms.vertex_flip(h, args.vertex)
    else:
      h2 = transforms.apply_symmetry_model(h, transforms.flip_word(g, args.vertex, enc), enc)
    z1 = _z(h2, beta, args.oracle, workers)
    doc = model_to_doc(h2, beta)
    fields["transformed"] = {"couplings": doc.get("couplings"), "fields": doc.get("fields"),
                             "model_digest": model_digest(h2)}
    fields["max_rel_change"] = scaled_rel_err(z1, z0)
  else:
    rng = np.random.default_rng(args.seed)
    gens = stab.phi_generators(g) if enc == "phi" else stab.psi_generators(g)
    amps, logs = column_weights(h, beta, enc)
    ws = [WeightVector(a, l) for a, l in zip(amps, logs)]
    base = contract_weights(g, ws, encoding=enc)
    worst, samples = 0.0, []
    for _ in range(args.sample):
      word = stab.sample_stabilizer(gens, rng)
      tw = transforms.apply_symmetry(ws, word, g, enc)
      err = scaled_rel_err(contract_weights(g, tw, encoding=enc), base)
      worst = max(worst, err)
      samples.append({"xi": list(word.xi), "zeta": list(word.zeta), "rel_change": err,
                      "weights": _enc_weights(tw)})
    fields["samples"] = samples
    fields["max_rel_change"] = worst
  if args.timing:
    fields["wall_time"] = time.perf_counter() - t0
  echo = _echo(args, "model", "vertex", "sample", "seed", "beta", "oracle")
  return result_document("symmetry", echo=echo, **fields)


def cmd_validate(args) -> int:
  from .validate import run
  failed = 0
  for check in run(args.suite, args.seed, args.inject_fault):
    print(check.line(), flush=True)
    failed += not check.ok
  print(f"{'FAIL' if failed else 'PASS'}: {failed} failing check(s)")
  return EXIT_FAIL if failed else EXIT_OK


def cmd_bench(args) -> int:
  from .bench import format_table, run_bench
  try:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
  except ValueError:
    raise ParseError(f"--sizes must be comma-separated integers, got {args.sizes!r}") from None
  sys.stdout.write(format_table(run_bench(args.family, sizes, args.q, args.beta or 0.5,
                                          args.repeats)))
  return EXIT_OK


def _model_flags(p, contraction=True):
  p.add_argument("model", help="model file (JSON)")
  p.add_argument("--beta", type=float, help="override the model file's beta")
  p.add_argument("--oracle", action="store_true", help="brute-force enumeration instead")
  p.add_argument("--threads", type=int, help="worker count (default: SPINZ_THREADS or 1)")
  p.add_argument("--timing", action="store_true", help="add wall time to the result")
  p.add_argument("--lenient", action="store_true", help="warn on unknown model keys")
  if contraction:
    p.add_argument("--encoding", choices=("auto",) + ENCODINGS, default="auto")
    p.add_argument("--strategy", choices=STRATEGIES)
    p.add_argument("--decomposition-file", help="nested-parentheses decomposition")
    p.add_argument("--max-width", type=int, help="refuse decompositions wider than this")


def build_parser() -> argparse.ArgumentParser:
  ap = argparse.ArgumentParser(prog="spinz", description="Exact spin-model partition functions "
                               "by stabilizer tensor-tree contraction.")
  sub = ap.add_subparsers(dest="command", required=True)
  _model_flags(sub.add_parser("partition", help="log Z of a model file"))
  p = sub.add_parser("correlate", help="cos-weighted spin correlation")
  _model_flags(p)
  p.add_argument("--sites", required=True, help="comma-separated vertex ids (repeats allowed)")
  p = sub.add_parser("dual", help="planar dual model and Z comparison")
  _model_flags(p, contraction=False)
  p.add_argument("--out", help="write the dual model file here")
  p = sub.add_parser("symmetry", help="gauge-equivalent couplings and Z invariance")
  _model_flags(p, contraction=False)
  grp = p.add_mutually_exclusive_group(required=True)
  grp.add_argument("--vertex", type=int, help="flip (shift) the spin at this vertex")
  grp.add_argument("--sample", type=int, help="number of random stabilizer words")
  p.add_argument("--seed", type=int, default=0)
  p = sub.add_parser("validate", help="built-in self checks")
  p.add_argument("--suite", default="all",
                 choices=("linalg", "stabilizer", "contraction", "duality", "symmetry", "all"))
  p.add_argument("--seed", type=int, default=0)
  p.add_argument("--inject-fault", choices=("sign",), help=argparse.SUPPRESS)
  p = sub.add_parser("bench", help="timing table on a graph family")
  p.add_argument("--family", required=True, choices=("chain", "ladder", "cycle", "grid"))
  p.add_argument("--sizes", required=True, help="comma-separated sizes")
  p.add_argument("--q", type=int, default=2)
  p.add_argument("--beta", type=float)
  p.add_argument("--repeats", type=int, default=1)
  return ap


_COMMANDS = {"partition": cmd_partition, "correlate": cmd_correlate, "dual": cmd_dual,
             "symmetry": cmd_symmetry}


def main(argv=None) -> int:
  args = build_parser().parse_args(argv)
  try:
    if args.command == "validate":
      return cmd_validate(args)
    if args.command == "bench":
      return cmd_bench(args)
    doc = _COMMANDS[args.command](args)
  except (ParseError, DecompositionError) as ex:
    code, msg = EXIT_PARSE, str(ex)
  except WidthExceededError as ex:
    code, msg = EXIT_WIDTH, str(ex)
  except OracleCapError as ex:
    code, msg = EXIT_ORACLE, str(ex)
  except transforms.DualityError as ex:
    code, msg = EXIT_PLANAR, str(ex)
  except (ModelError, EncodingMismatchError, ZeroDivisionError, ValueError) as ex:
    code, msg = EXIT_FAIL, str(ex)
  else:
    sys.stdout.write(dump_document(doc))
    return EXIT_OK
  print(f"spinz: error: {msg}", file=sys.stderr)
  return code


if __name__ == "__main__":
  sys.exit(main())
