"""Command-line front end.

Subcommands: stats, generate, split, embed, eval, compare, grid. Every run
that writes ``--out`` also writes ``<out>.manifest`` (key=value lines with
all parameters, package versions and input digests).

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import platform
import sys
from typing import Sequence

import numpy as np
import scipy

from . import __version__
from .embedding import (DEFAULT_SIGMA, embed, load_embedding, save_embedding)
from .errors import SSNEError, ValidationError
from .evaluation import (DEFAULT_FRACTION, DEFAULT_SAMPLES, DEFAULT_SEEDS, auc, comparison_csv,
                         compare_methods, exact_auc, format_csv, grid_csv, grid_experiment, runs_csv)
from .generators import DEFAULT_P_REWIRE, generate_ba, generate_ws
from .graph_core import (DEFAULT_DISTANCE_SAMPLE, format_edge_list, graph_stats, read_edge_list,
                         read_split, split_train_test, write_split)
from .scoring import (DEFAULT_LHN2_PHI, DEFAULT_RWR_C, DEFAULT_SIMRANK_ITERATIONS,
                      DEFAULT_SIMRANK_LAMBDA, SCORER_NAMES, make_scorer)
from .snham import DEFAULT_ALPHA, DEFAULT_ORDER

log = logging.getLogger("ssne")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
STATS_COLUMNS = ("n", "m", "avg_degree", "edge_sparsity", "avg_distance", "clustering",
                 "heterogeneity", "avg_distance_exact")


def parse_list(text: str, kind=float) -> list:
    """``"2,4,6"``, ``"2..14"`` or ``"0.1..0.9..0.1"`` (inclusive ranges).

    Ranges step by 1 for integers and 0.1 for reals unless a step is given.
    """
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            bits = part.split("..")
            if len(bits) not in (2, 3):
                raise argparse.ArgumentTypeError(f"bad range {part!r}")
            start, stop = kind(bits[0]), kind(bits[1])
            step = kind(bits[2]) if len(bits) == 3 else (1 if kind is int else 0.1)
            if step <= 0:
                raise argparse.ArgumentTypeError("range step must be positive")
            count = int(round((stop - start) / step)) + 1
            out.extend(kind(round(start + i * step, 10)) for i in range(max(0, count)))
        else:
            out.append(kind(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def int_list(text: str) -> list[int]:
    return parse_list(text, int)


def float_list(text: str) -> list[float]:
    return parse_list(text, float)


# ---------------------------------------------------------------------------
# shared plumbing


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class Manifest:
    def __init__(self, args: argparse.Namespace):
        self.items: list[tuple[str, object]] = [
            ("command", args.command),
            ("ssne_version", __version__),
            ("python", platform.python_version()),
            ("numpy", np.__version__),
            ("scipy", scipy.__version__),
        ]
        for key in sorted(vars(args)):
            if key in ("command", "func", "verbose"):
                continue
            self.items.append((f"arg.{key}", getattr(args, key)))
        self.outputs: list[str] = []
        self.status = "complete"
        self.errors: list[str] = []

    def add(self, key: str, value) -> None:
        self.items.append((key, value))

    def add_input(self, path: str) -> None:
        self.items.append((f"input_sha256.{os.path.basename(path)}", _digest(path)))

    def write(self, out: str) -> None:
        lines = [f"{k}={_render(v)}" for k, v in self.items]
        lines += [f"output={p}" for p in self.outputs]
        lines.append(f"status={self.status}")
        lines += [f"error={e}" for e in self.errors]
        with open(out + ".manifest", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def _render(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


def _emit(text: str, out: str | None, manifest: Manifest | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    if manifest is not None:
        manifest.outputs.append(out)


def _load_graph(args, manifest: Manifest | None):
    """Graph from a path, or from ``--model`` generator flags."""
    if getattr(args, "model", None):
        return _generate(args.model, args.n, args.k, args.m_attach, args.p_rewire, args.graph_seed)
    if not args.graph:
        raise ValidationError("give an edge-list path or --model")
    if not os.path.exists(args.graph):
        raise ValidationError(f"no such file: {args.graph}")
    g = read_edge_list(args.graph)
    if manifest is not None:
        manifest.add_input(args.graph)
    return g


def _generate(model: str, n, k, m_attach, p_rewire, seed):
    if n is None:
        raise ValidationError("--n is required")
    if model == "ws":
        if k is None:
            raise ValidationError("ws needs --k (even ring degree)")
        return generate_ws(n, k, p_rewire, seed)
    if m_attach is None:
        if k is None or k % 2:
            raise ValidationError("ba needs --m-attach or an even --k (average degree)")
        m_attach = k // 2
    return generate_ba(n, m_attach, seed)


def _split(args, g, manifest: Manifest | None):
    if getattr(args, "split", None):
        sp = read_split(args.split)
        if manifest is not None:
            for suffix in (".train.edges", ".test.edges", ".nodes"):
                manifest.add_input(args.split + suffix)
        return sp
    return split_train_test(g, args.fraction, args.seed)


def _scorer_params(args, name: str) -> dict:
    if name == "katz":
        return {"beta": args.katz_beta}
    if name == "rwr":
        return {"c": args.rwr_c}
    if name == "lhn2":
        return {"phi": args.lhn2_phi}
    if name == "simrank":
        return {"lam": args.simrank_lambda, "iterations": args.simrank_iterations}
    if name == "ssne":
        params = {"order": args.order, "sigma": args.sigma, "alpha": args.alpha,
                  "method": args.svd_method}
        if args.dim is not None:
            params["dim"] = args.dim
        else:
            params["proportion"] = args.proportion
        return params
    return {}


def _scorer_names(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    if names == ["all"]:
        return list(SCORER_NAMES)
    bad = [s for s in names if s not in SCORER_NAMES]
    if bad:
        raise ValidationError(f"unknown scorer(s) {bad}; choose from {', '.join(SCORER_NAMES)}")
    return names


def _progress(msg: str) -> None:
    log.info(msg)


# ---------------------------------------------------------------------------
# subcommands


def cmd_stats(args) -> int:
    manifest = Manifest(args) if args.out else None
    g = _load_graph(args, manifest)
    sample = None if args.distance_sample <= 0 else args.distance_sample
    st = graph_stats(g, sample, args.seed)
    row = st.as_row()
    print(f"|V|={st.n} |E|={st.m} <k>={st.avg_degree:.2f} ES={st.edge_sparsity:.4f} "
          f"<d>={st.avg_distance:.2f}{'' if st.avg_distance_exact else ' (est.)'} "
          f"C={st.clustering:.3f} H={st.heterogeneity:.2f}", file=sys.stderr)
    _emit(format_csv([row], STATS_COLUMNS), args.out, manifest)
    if manifest:
        manifest.write(args.out)
    return EXIT_OK


def cmd_generate(args) -> int:
    g = _generate(args.model, args.n, args.k, args.m_attach, args.p_rewire, args.seed)
    manifest = Manifest(args) if args.out else None
    if manifest:
        manifest.add("m", g.m)
    _emit(format_edge_list(g), args.out, manifest)
    if manifest:
        manifest.write(args.out)
    return EXIT_OK


def cmd_split(args) -> int:
    manifest = Manifest(args)
    g = _load_graph(args, manifest)
    sp = split_train_test(g, args.fraction, args.seed)
    paths = write_split(sp, args.out)
    manifest.outputs.extend(paths.values())
    for k, v in sp.metadata().items():
        manifest.add(f"split.{k}", v)
    if sp.shortfall:
        log.warning("could hide only %d of %d edges", len(sp.hidden_edges), sp.requested)
    manifest.write(args.out)
    return EXIT_OK


def cmd_embed(args) -> int:
    manifest = Manifest(args)
    g = None if args.split else _load_graph(args, manifest)
    train = g if args.no_split else _split(args, g, manifest).train
    params = _scorer_params(args, "ssne")
    feats = embed(train, seed=args.seed, **params)
    save_embedding(feats, args.out)
    manifest.outputs.append(args.out)
    manifest.add("dim", feats.d)
    manifest.write(args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    manifest = Manifest(args) if args.out else None
    g = None if args.split else _load_graph(args, manifest)
    sp = _split(args, g, manifest)
    name = args.scorer
    if name not in SCORER_NAMES:
        raise ValidationError(f"unknown scorer {name!r}")
    if name == "ssne" and args.embedding:
        feats = load_embedding(args.embedding)
        if manifest:
            manifest.add_input(args.embedding)
        scorer = make_scorer("ssne", sp.train, features=feats)
    else:
        params = _scorer_params(args, name)
        if name == "ssne":
            params["seed"] = args.seed
        scorer = make_scorer(name, sp.train, **params)
    if args.exact:
        value = exact_auc(scorer, sp)
        _emit(format_csv([{"scorer": name, "exact_auc": value}], ("scorer", "exact_auc")), args.out, manifest)
    else:
        res = auc(scorer, sp, args.samples, args.seed, args.threads)
        res = type(res)(res.auc, res.samples, res.wins, res.ties, res.seed, name, res.elapsed)
        _emit(runs_csv([res]), args.out, manifest)
    if manifest:
        manifest.write(args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    manifest = Manifest(args) if args.out else None
    g = _load_graph(args, manifest)
    names = _scorer_names(args.scorers)
    specs = [(n, _scorer_params(args, n)) for n in names]
    cmp = compare_methods(g, specs, args.fraction, args.seeds, args.samples, args.threads,
                          progress=_progress)
    _emit(comparison_csv(cmp), args.out, manifest)
    if args.runs_out:
        allruns = [r for n in names for r in cmp.runs.get(n, [])]
        _emit(runs_csv(allruns), args.runs_out, manifest)
    return _finish(manifest, args.out, cmp.errors)


def cmd_grid(args) -> int:
    manifest = Manifest(args) if args.out else None
    g = _load_graph(args, manifest)
    label = args.graph or f"{args.model}(n={args.n})"
    grid = grid_experiment(g, args.order, args.proportion, args.fraction, args.seeds,
                           args.samples, args.sigma, args.alpha, args.svd_method,
                           dataset=label, threads=args.threads, progress=_progress)
    _emit(grid_csv(grid), args.out, manifest)
    errors = {f"h={h},p={p}": e for (h, p), e in grid.errors.items()}
    return _finish(manifest, args.out, errors)


def _finish(manifest: Manifest | None, out: str | None, errors: dict) -> int:
    lines = [f"{key}: {msg}" for key, msgs in errors.items() for msg in msgs]
    for line in lines:
        print(f"error: {line}", file=sys.stderr)
    if manifest:
        if lines:
            manifest.status = "partial"
            manifest.errors = lines
        manifest.write(out)
    return EXIT_NUMERICAL if lines else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_graph_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("graph", nargs="?", help="edge-list file (one 'u v' pair per line)")
    g = p.add_argument_group("generated input (instead of a file)")
    g.add_argument("--model", choices=("ba", "ws"), help="generate the input graph")
    _add_generator_flags(g)
    g.add_argument("--graph-seed", type=int, default=0, help="generator seed (default 0)")


def _add_generator_flags(p) -> None:
    p.add_argument("--n", type=int, help="number of nodes")
    p.add_argument("--k", type=int, help="ws: even ring degree; ba: average degree (m_attach = k/2)")
    p.add_argument("--m-attach", type=int, help="ba: edges per new node")
    p.add_argument("--p-rewire", type=float, default=DEFAULT_P_REWIRE,
                   help=f"ws rewiring probability (default {DEFAULT_P_REWIRE})")


def _add_split_flags(p, split_file: bool = False) -> None:
    p.add_argument("--fraction", type=float, default=DEFAULT_FRACTION,
                   help=f"share of edges hidden for testing (default {DEFAULT_FRACTION})")
    if split_file:
        p.add_argument("--split", help="read a saved split PREFIX instead of splitting")


def _add_embed_flags(p) -> None:
    p.add_argument("--order", type=int, default=DEFAULT_ORDER, help=f"SNHAM order h (default {DEFAULT_ORDER})")
    p.add_argument("--proportion", type=float, default=0.1, help="embedding dimension as share of n (default 0.1)")
    p.add_argument("--dim", type=int, help="explicit embedding dimension (overrides --proportion)")
    _add_embed_common(p)


def _add_embed_common(p) -> None:
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA, help=f"log shift (default {DEFAULT_SIGMA:g})")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="restart weight (default 0)")
    p.add_argument("--svd-method", choices=("auto", "dense", "iterative"), default="auto")


def _add_scorer_flags(p) -> None:
    p.add_argument("--katz-beta", type=float, default=None,
                   help="Katz damping (default min(0.01, 0.5/lambda_max))")
    p.add_argument("--rwr-c", type=float, default=DEFAULT_RWR_C, help=f"RWR continuation (default {DEFAULT_RWR_C})")
    p.add_argument("--lhn2-phi", type=float, default=DEFAULT_LHN2_PHI, help=f"LHN-II phi (default {DEFAULT_LHN2_PHI})")
    p.add_argument("--simrank-lambda", type=float, default=DEFAULT_SIMRANK_LAMBDA)
    p.add_argument("--simrank-iterations", type=int, default=DEFAULT_SIMRANK_ITERATIONS)


def _add_eval_flags(p) -> None:
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help=f"AUC draws N (default {DEFAULT_SAMPLES})")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads for AUC sampling")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssne", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--version", action="version", version=f"ssne {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="descriptive statistics of a graph")
    _add_graph_source(p)
    p.add_argument("--distance-sample", type=int, default=DEFAULT_DISTANCE_SAMPLE,
                   help="exact <d> up to this many nodes, else this many BFS sources (<=0: always exact)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("generate", help="generate a BA or WS network")
    p.add_argument("model", choices=("ba", "ws"))
    _add_generator_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="edge-list output path (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("split", help="hide a share of edges for testing")
    _add_graph_source(p)
    _add_split_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output PREFIX")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("embed", help="SSNE embedding of the training graph")
    _add_graph_source(p)
    _add_split_flags(p, split_file=True)
    p.add_argument("--no-split", action="store_true", help="embed the whole input graph")
    _add_embed_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="binary embedding output path")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("eval", help="AUC of one scorer")
    _add_graph_source(p)
    _add_split_flags(p, split_file=True)
    p.add_argument("--scorer", default="ssne", help=f"one of {', '.join(SCORER_NAMES)}")
    p.add_argument("--embedding", help="cached embedding for --scorer ssne")
    p.add_argument("--exact", action="store_true", help="enumerate all pairs instead of sampling")
    _add_embed_flags(p)
    _add_scorer_flags(p)
    _add_eval_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="paired AUC comparison of several scorers")
    _add_graph_source(p)
    _add_split_flags(p)
    p.add_argument("--scorers", default="ssne,cn", help="comma-separated names or 'all'")
    _add_embed_flags(p)
    _add_scorer_flags(p)
    _add_eval_flags(p)
    p.add_argument("--seeds", type=int_list, default=list(DEFAULT_SEEDS), help="e.g. 0,1,2 or 0..4")
    p.add_argument("--out", help="summary CSV path (default stdout)")
    p.add_argument("--runs-out", help="per-seed CSV path")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("grid", help="SSNE AUC over an (h, p) grid")
    _add_graph_source(p)
    _add_split_flags(p)
    p.add_argument("--order", type=int_list, default=[DEFAULT_ORDER], help="h values, e.g. 2..14")
    p.add_argument("--proportion", type=float_list, default=[0.1], help="p values, e.g. 0.1..0.9")
    _add_embed_common(p)
    _add_eval_flags(p)
    p.add_argument("--seeds", type=int_list, default=list(DEFAULT_SEEDS))
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_grid)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except SSNEError as exc:
        print(f"ssne {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code if exc.exit_code in (EXIT_USAGE, EXIT_NUMERICAL) else EXIT_NUMERICAL
    except FileNotFoundError as exc:
        print(f"ssne {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ssne {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except MemoryError as exc:
        print(f"ssne {args.command}: out of memory: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
