"""Command-line front end.

Exit codes of ``check``: 0 isomorphic, 1 not isomorphic, 2 inconclusive,
3 for any error (I/O, parse, size cap, solver failure).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import SolverConfig
from .graphs import (
    Permutation,
    apply_permutation,
    generate,
    graph_names,
    read_graph,
    verify_isomorphism,
    write_graph,
)
from .relaxation import rank_of_h
from .solver import IsoVerdict, Verdict, check
from .spectral import compare_spectra, count_ambiguous, count_unfriendly, decompose

EXIT_ERROR = 3

log = logging.getLogger("isofw")


def format_permutation(p: Permutation) -> str:
    return "π = [" + " ".join(str(v) for v in p.one_based()) + "]"


def _config(args) -> SolverConfig:
    kw = {}
    for name in ("tol_group", "tol_bin", "max_iters", "max_restarts", "seed"):
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    if getattr(args, "trace", None):
        kw["trace_path"] = Path(args.trace)
    if getattr(args, "snapshots", None):
        kw["snapshots"] = True
    return SolverConfig(**kw)


def _spectrum_line(label: str, s) -> str:
    lam = ", ".join(f"{v:.6g}" for v in s.lam)
    mu = ", ".join(str(int(m)) for m in s.mu)
    return (f"{label}: λ = [{lam}]  μ = [{mu}]  "
            f"unfriendly = {count_unfriendly(s)}  ambiguous = {count_ambiguous(s)}")


def report(v: IsoVerdict, cfg: SolverConfig) -> str:
    lines = [f"verdict: {v.kind.value}" + (f" ({v.reason})" if v.reason else "")]
    if v.certificate is not None:
        lines.append(format_permutation(v.certificate))
    if v.spectra is not None:
        lines.append(_spectrum_line("A", v.spectra[0]))
        lines.append(_spectrum_line("B", v.spectra[1]))
    if v.rank_h is not None:
        lines.append(f"rank(H) = {v.rank_h}")
    if v.free_dim is not None:
        lines.append(f"free dimension = {v.free_dim}")
    lines.append(f"stage = {v.stage}  iterations = {v.iterations}  "
                 f"restarts = {v.restarts}  seed = {cfg.seed}")
    if v.kind is Verdict.INCONCLUSIVE and v.best_f is not None:
        lines.append(f"best f = {v.best_f:.6g}")
    return "\n".join(lines)


def cmd_check(args) -> int:
    cfg = _config(args)
    a, b = read_graph(args.a), read_graph(args.b)
    v = check(a, b, cfg)
    print(report(v, cfg))
    if args.snapshots:
        if not v.snapshots:
            log.warning("no iterates recorded; snapshot file not written")
        else:
            np.savez_compressed(args.snapshots, X=np.stack(v.snapshots),
                                f=np.array([r[2] for r in v.trace]))
    return v.exit_code()


def cmd_gen(args) -> int:
    g = generate(args.name, q=args.q, n=args.n, variant=args.variant)
    out = Path(args.out) if args.out else Path(f"{args.name}.g")
    write_graph(g, out)
    print(f"wrote {out}: n = {g.n}, m = {g.num_edges}")
    return 0


def write_permutation(p: Permutation, path) -> None:
    Path(path).write_text(" ".join(str(v) for v in p.one_based()) + "\n")


def read_permutation(path) -> Permutation:
    vals = [int(t) for t in Path(path).read_text().split()]
    return Permutation.from_one_based(vals)


def cmd_permute(args) -> int:
    g = read_graph(args.input)
    p = Permutation.random(g.n, np.random.default_rng(args.seed))
    b = apply_permutation(g, p)
    out = Path(args.out)
    sidecar = Path(args.sidecar) if args.sidecar else out.with_suffix(out.suffix + ".perm")
    write_graph(b, out)
    write_permutation(p, sidecar)
    assert verify_isomorphism(g, b, p)
    print(f"wrote {out} and {sidecar}")
    print(format_permutation(p))
    return 0


def cmd_spectrum(args) -> int:
    graphs = [read_graph(p) for p in args.graphs]
    spectra = [decompose(g, tol_group=args.tol_group) for g in graphs]
    for path, s in zip(args.graphs, spectra):
        print(_spectrum_line(str(path), s))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["graph", "k", "lambda", "mu", "unfriendly", "ambiguous"])
            for path, s in zip(args.graphs, spectra):
                for k in range(s.m):
                    w.writerow([path, k + 1, repr(float(s.lam[k])), int(s.mu[k]),
                                int(np.count_nonzero(~s.friendly[k])),
                                int(np.count_nonzero(s.ambiguous[k]))])
    if args.rank_h:
        if len(spectra) != 2:
            raise ValueError("--rank-h needs exactly two graphs")
        cmp = compare_spectra(spectra[0], spectra[1], args.tol_group)
        if cmp.isospectral:
            print(f"rank(H) = {rank_of_h(spectra[0].mu, spectra[0].n)}")
        else:
            print(f"not isospectral (max eigenvalue gap {cmp.max_eigenvalue_gap:.3g})")
    return 0


def write_pgm(x: np.ndarray, path) -> None:
    """8-bit binary PGM with grey level ``255 · x / max(x)``."""
    x = np.asarray(x, dtype=float)
    top = float(np.max(x))
    scaled = np.zeros_like(x) if top <= 0 else np.clip(x, 0.0, None) * (255.0 / top)
    pix = np.rint(scaled).astype(np.uint8)
    h, w = pix.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + pix.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    magic, dims, maxval, rest = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError(f"{path}: not an 8-bit binary PGM")
    w, h = (int(t) for t in dims.split())
    return np.frombuffer(rest, dtype=np.uint8, count=w * h).reshape(h, w)


def cmd_heatmap(args) -> int:
    with np.load(args.snapshots) as data:
        frames = data["X"] if "X" in data.files else np.zeros((0, 0, 0))
    if frames.shape[0] == 0:
        raise ValueError(f"{args.snapshots}: no snapshots present")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    idx = range(frames.shape[0]) if args.index is None else [args.index]
    for k in idx:
        x = frames[k]
        np.savetxt(out / f"X{k}.csv", x, delimiter=",", fmt="%.17g")
        write_pgm(x, out / f"X{k}.pgm")
    print(f"wrote {len(idx)} frame(s) to {out}")
    return 0


def _bench_one(job):
    a_path, b_path, cfg = job
    t0 = time.perf_counter()
    try:
        v = check(read_graph(a_path), read_graph(b_path), cfg)
    except Exception as exc:  # reported per line, never fatal to the batch
        return a_path, b_path, f"error: {exc}", 0, time.perf_counter() - t0
    return a_path, b_path, v.kind.value, v.iterations, time.perf_counter() - t0


def cmd_bench(args) -> int:
    cfg = _config(args)
    batch = Path(args.batch)
    jobs = []
    for lineno, raw in enumerate(batch.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if len(tok) != 2:
            raise ValueError(f"{batch}:{lineno}: expected two graph paths")
        a, b = (str(batch.parent / t) if not Path(t).is_absolute() else t for t in tok)
        jobs.append((a, b, cfg))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            rows = list(ex.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    failed = False
    for a, b, verdict, iters, secs in rows:
        failed |= verdict.startswith("error")
        print(f"{a}\t{b}\t{verdict}\t{iters}\t{secs:.3f}s")
    return EXIT_ERROR if failed else 0


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol-group", type=float)
    p.add_argument("--tol-bin", type=float)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--max-restarts", type=int)
    p.add_argument("--seed", type=int)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 3; exit code 2 means Inconclusive."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="isofw", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide isomorphism of two graph files")
    p.add_argument("a")
    p.add_argument("b")
    _add_solver_flags(p)
    p.add_argument("--trace", help="write the per-iteration CSV trace here")
    p.add_argument("--snapshots", help="write every iterate X to this .npz file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="write a named graph")
    p.add_argument("name", help=", ".join(graph_names()))
    p.add_argument("--q", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--variant")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("permute", help="randomly relabel a graph")
    p.add_argument("input")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sidecar", help="permutation file (default: OUT.perm)")
    p.set_defaults(func=cmd_permute)

    p = sub.add_parser("spectrum", help="grouped spectrum of one or two graphs")
    p.add_argument("graphs", nargs="+")
    p.add_argument("--tol-group", type=float, default=SolverConfig().tol_group)
    p.add_argument("--rank-h", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("heatmap", help="CSV and PGM images of snapshot iterates")
    p.add_argument("snapshots", help=".npz written by check --snapshots")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--index", type=int)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("bench", help="run a batch file of graph pairs")
    p.add_argument("batch", help="lines of 'a.g b.g', relative to the batch file")
    _add_solver_flags(p)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.verbose:
            raise
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
