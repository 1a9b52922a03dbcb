"""Command-line surface: gen, compile, check, run, bisim, report.

Exit codes: 0 success, 1 usage error, 2 data error.  Every output starts with
echoed `# key=value` lines so identical invocations are byte-identical and
self-describing.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .bisim import color_refine
from .compiler import compile_formula, explain, net_to_text
from .engine import forward, init_features, readout
from .errors import KGLogicError
from .evalrank import run_dataset
from .formulas import FormulaArena, parse
from .labeling import Labeling, el_label, query_label
from .store import TripleStore, load_store
from .synthgen import SynthConfig, gen_dataset, load_dataset, write_dataset


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _echo_header(args: argparse.Namespace, skip: tuple[str, ...] = ()) -> str:
    lines = []
    for key in sorted(vars(args)):
        if key in ("func",) or key in skip:
            continue
        lines.append(f"# {key}={getattr(args, key)}")
    return "\n".join(lines) + "\n"


def _write_output(text: str, out: Optional[str], filename: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / filename).write_text(text)


def _load_kg(args: argparse.Namespace) -> TripleStore:
    triples_text = Path(args.kg).read_text()
    preds_text = Path(args.preds).read_text() if args.preds else None
    return load_store(triples_text, preds_text)


def _parse_bind(store: TripleStore, text: Optional[str]) -> dict[str, int]:
    bindings: dict[str, int] = {}
    if not text:
        return bindings
    for piece in text.split(","):
        name, sep, entity = piece.partition("=")
        if not sep or not name or not entity:
            raise KGLogicError(f"malformed binding {piece!r}, expected name=entity")
        bindings[name] = store.entity_id(entity)
    return bindings


def _labeling_for(
    args: argparse.Namespace, store: TripleStore, bindings: dict[str, int]
) -> Labeling:
    mode = args.labeling
    if mode == "none":
        return Labeling(dict(bindings), {name: "manual" for name in bindings})
    if "h" not in bindings:
        raise KGLogicError(f"labeling {mode!r} needs --bind h=<entity>")
    h = bindings["h"]
    lab = query_label(h) if mode == "query" else el_label(store, args.degree, h)
    for name, v in bindings.items():
        if name not in lab.bindings:
            lab.bindings[name] = v
            lab.origin[name] = "manual"
    return lab


def _cmd_gen(args: argparse.Namespace) -> int:
    split = tuple(float(x) for x in args.split.split(","))
    if len(split) != 3:
        raise KGLogicError("--split needs three comma-separated fractions")
    cfg = SynthConfig(
        relation_kind=args.relation,
        n_instances=args.instances,
        noise_triples=args.noise,
        seed=args.seed,
        split=split,  # type: ignore[arg-type]
        decoys=args.decoys,
    )
    dataset = gen_dataset(cfg)
    write_dataset(dataset, args.out)
    sys.stdout.write(
        f"wrote {len(dataset.store.triples)} triples, "
        f"{len(dataset.targets)} targets to {args.out}\n"
    )
    return 0


def _cmd_compile(args: argparse.Namespace) -> int:
    arena = FormulaArena()
    root = parse(Path(args.formula).read_text().strip(), arena)
    net = compile_formula(arena, root)
    text = _echo_header(args) + net_to_text(net)
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        sys.stdout.write(explain(net))
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    from .checker import model_check

    store = _load_kg(args)
    arena = FormulaArena()
    root = parse(Path(args.formula).read_text().strip(), arena)
    bindings = _parse_bind(store, args.bind)
    table = model_check(store, arena, root, bindings)
    row = table.row_set(root)
    lines = [_echo_header(args, skip=("out",)).rstrip("\n")]
    for v in range(store.n_entities):
        lines.append(f"{store.entity_name(v)}\t{1 if v in row else 0}")
    _write_output("\n".join(lines) + "\n", args.out, "check.tsv")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    if (args.data is None) == (args.kg is None):
        raise KGLogicError("run needs exactly one of --data or --kg")
    if args.data is not None:
        dataset = load_dataset(args.data)
        mode = {"none": "era", "query": "ql", "el": "el"}[args.labeling]
        era_pair = (args.era_g1, args.era_g2, args.era_comb)
        report = run_dataset(
            dataset, mode, args.degree, era_pair if mode == "era" else None,
            label=str(args.data),
        )
        text = _echo_header(args, skip=("out",)) + report.to_text()
        _write_output(text, args.out, "report.txt")
        return 0
    store = _load_kg(args)
    arena = FormulaArena()
    root = parse(Path(args.formula).read_text().strip(), arena)
    bindings = _parse_bind(store, args.bind)
    lab = _labeling_for(args, store, bindings)
    net = compile_formula(arena, root)
    bits = readout(forward(store, net, init_features(store, net, lab)), net)
    lines = [_echo_header(args, skip=("out",)).rstrip("\n")]
    for v in range(store.n_entities):
        lines.append(f"{store.entity_name(v)}\t{bits[v]}")
    _write_output("\n".join(lines) + "\n", args.out, "run.tsv")
    return 0


def _cmd_bisim(args: argparse.Namespace) -> int:
    store = _load_kg(args)
    bindings = _parse_bind(store, args.bind)
    lab = _labeling_for(args, store, bindings)
    colors = color_refine(store, lab, rounds=args.rounds)
    lines = [_echo_header(args, skip=("out",)).rstrip("\n")]
    for rnd in range(len(colors.rounds)):
        row = colors.colors(rnd)
        for v in range(store.n_entities):
            lines.append(f"{rnd}\t{store.entity_name(v)}\t{row[v]}")
    _write_output("\n".join(lines) + "\n", args.out, "bisim.tsv")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    lines = [_echo_header(args, skip=("out",)).rstrip("\n")]
    lines.append("relation\tera\tql\tel")
    for datadir in args.data:
        dataset = load_dataset(datadir)
        cells = []
        for mode in ("era", "ql", "el"):
            report = run_dataset(dataset, mode, args.degree, label=str(datadir))
            cells.append(repr(report.hit_at(1)))
        lines.append(dataset.config["relation"] + "\t" + "\t".join(cells))
    _write_output("\n".join(lines) + "\n", args.out, "report.txt")
    return 0


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="kglogic",
        description="Exact knowledge-graph logic engine: compile counting-modal "
        "rules to integer message-passing networks and evaluate them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[], help="generate a synthetic dataset")
    p.add_argument("--relation", required=True, choices=("C", "I", "U"))
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--noise", type=int, default=None,
                   help="noise triple count (default: twice the support count)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", default="0.8,0.1,0.1")
    p.add_argument("--decoys", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("compile", help="compile a formula file to a network")
    p.add_argument("--formula", required=True)
    p.add_argument("--out", default=None, help="network file (stdout if omitted)")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("check", help="model-check a formula over a KG")
    p.add_argument("--kg", required=True)
    p.add_argument("--preds", default=None)
    p.add_argument("--formula", required=True)
    p.add_argument("--bind", default=None, help="constant bindings name=entity,...")
    p.add_argument("--out", default=None, help="output directory (stdout if omitted)")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("run", help="run the engine: dataset ranking or one formula")
    p.add_argument("--data", default=None, help="dataset directory from gen")
    p.add_argument("--kg", default=None)
    p.add_argument("--preds", default=None)
    p.add_argument("--formula", default=None)
    p.add_argument("--bind", default=None)
    p.add_argument("--labeling", choices=("none", "query", "el"), default="query")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--era-g1", default="top")
    p.add_argument("--era-g2", default="top")
    p.add_argument("--era-comb", choices=("and", "or", "not-left"), default="and")
    p.add_argument("--out", default=None, help="output directory (stdout if omitted)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("bisim", help="emit per-round color classes")
    p.add_argument("--kg", required=True)
    p.add_argument("--preds", default=None)
    p.add_argument("--labeling", choices=("none", "query", "el"), default="none")
    p.add_argument("--bind", default=None)
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--rounds", type=int, default=10)
    p.add_argument("--out", default=None, help="output directory (stdout if omitted)")
    p.set_defaults(func=_cmd_bisim)

    p = sub.add_parser("report", help="hit@1 comparison table across modes")
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory (stdout if omitted)")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (KGLogicError, OSError) as exc:
        sys.stderr.write(f"kglogic {args.command}: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
