"""Ranking harness: engine-backed scoring under labeling modes, filtered metrics.

Scores are binary, so ties are pervasive; ranks use the expected-rank
convention (uniform tie-breaking), which makes hit@k the probability that the
target lands within the top k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .checker import model_check
from .compiler import compile_formula
from .engine import forward, init_features, readout
from .errors import EvaluationError
from .formulas import (
    FormulaArena,
    canonical_formula,
    constants_in,
    diamond_depth,
    format_formula,
    parse,
)
from .labeling import QUERY_CONSTANT, el_label, ground_constants, query_label
from .store import TripleStore
from .synthgen import SUPPORT_RELATIONS, U_QUERY_ONLY_TEXT, SynthDataset, load_dataset

LABELING_MODES = ("none", "query", "el")
DEFAULT_ERA_PAIR = ("top", "top", "and")


def _combine(combinator: str, b1: int, b2: int) -> int:
    if combinator == "and":
        return b1 & b2
    if combinator == "not-left":
        return 1 - b1
    if combinator == "or":
        return b1 | b2
    raise EvaluationError(f"unknown combinator {combinator!r}")


def score_query(
    store: TripleStore,
    arena: FormulaArena,
    formula: Optional[int],
    labeling_mode: str,
    d: int,
    query: tuple[int, str],
    era_pair: Optional[tuple[int, int, str]] = None,
) -> list[int]:
    """Score every entity as a candidate tail for the query (h, relation).

    none:  combine constant-free head/tail formulas per the era pair.
    query: bind the query constant to h and read the compiled network out.
    el:    additionally bind out-degree-labeled constants; abstract constants
           range over the labeled entities and the readouts are OR-ed.
    """
    if labeling_mode not in LABELING_MODES:
        raise EvaluationError(f"unknown labeling mode {labeling_mode!r}")
    h, _rel = query
    store._check_entity(h)

    if labeling_mode == "none":
        if formula is not None and constants_in(arena, formula):
            raise EvaluationError(
                "constant-bearing formula requires query or el labeling"
            )
        if era_pair is None:
            g1 = parse(DEFAULT_ERA_PAIR[0], arena)
            g2 = parse(DEFAULT_ERA_PAIR[1], arena)
            combinator = DEFAULT_ERA_PAIR[2]
        else:
            g1, g2, combinator = era_pair
        for name, g in (("g1", g1), ("g2", g2)):
            consts = constants_in(arena, g)
            if consts:
                raise EvaluationError(
                    f"{name} must be constant-free, found @{sorted(consts)[0]}"
                )
        b1 = model_check(store, arena, g1).bit(g1, h)
        g2_row = model_check(store, arena, g2).row_set(g2)
        return [
            _combine(combinator, b1, 1 if t in g2_row else 0)
            for t in range(store.n_entities)
        ]

    if formula is None:
        raise EvaluationError(f"labeling mode {labeling_mode!r} needs a formula")
    consts = constants_in(arena, formula)
    net = compile_formula(arena, formula)

    if labeling_mode == "query":
        if consts - {QUERY_CONSTANT}:
            extra = sorted(consts - {QUERY_CONSTANT})[0]
            raise EvaluationError(
                f"formula uses @{extra}; query labeling only binds @{QUERY_CONSTANT}"
            )
        lab = query_label(h)
        return readout(forward(store, net, init_features(store, net, lab)), net)

    lab = el_label(store, d, h)
    depth = diamond_depth(arena, formula)
    groundings = ground_constants(consts, lab, store, within_depth_of=(h, depth))
    scores = [0] * store.n_entities
    for binding in groundings:
        bits = readout(forward(store, net, init_features(store, net, binding)), net)
        scores = [a | b for a, b in zip(scores, bits)]
    return scores


def rank_metrics(
    scores: Sequence,
    target: int,
    known_true: set[int],
    k_list: Sequence[int] = (1, 10),
) -> dict:
    """Filtered expected-rank metrics for one query.

    Known-true tails other than the target are dropped from the candidate
    list.  With b candidates scoring strictly higher and a tie group of size
    g (target included), the target occupies positions b+1..b+g uniformly:
    rank is the mean position, hit@k the probability of landing within k, and
    the reciprocal rank is averaged over the group.
    """
    n = len(scores)
    if not 0 <= target < n:
        raise EvaluationError(f"target {target} outside the score vector")
    candidates = [v for v in range(n) if v == target or v not in known_true]
    if target not in candidates:
        raise EvaluationError("target was filtered out of the candidate set")
    s = scores[target]
    better = sum(1 for v in candidates if scores[v] > s)
    tied = sum(1 for v in candidates if scores[v] == s)  # includes the target
    rank = better + (tied + 1) / 2
    hits = {}
    for k in k_list:
        hits[k] = 0.0 if better >= k else min(k - better, tied) / tied
    rr = sum(1.0 / (better + i) for i in range(1, tied + 1)) / tied
    return {
        "rank": rank,
        "hits": hits,
        "rr": rr,
        "better": better,
        "tied": tied,
        "n_candidates": len(candidates),
    }


@dataclass
class RankReport:
    """Per-query records plus aggregate filtered metrics."""

    mode: str
    degree: int
    formula_text: str
    k_list: tuple[int, ...]
    queries: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def hit_at(self, k: int) -> float:
        if not self.queries:
            return 0.0
        return sum(q["hits"][k] for q in self.queries) / len(self.queries)

    def mrr(self) -> float:
        if not self.queries:
            return 0.0
        return sum(q["rr"] for q in self.queries) / len(self.queries)

    def to_text(self) -> str:
        lines = [f"# mode={self.mode} degree={self.degree} formula={self.formula_text}"]
        for key in sorted(self.metadata):
            lines.append(f"# {key}={self.metadata[key]}")
        for k in self.k_list:
            lines.append(f"metric\thit@{k}\t{self.hit_at(k)!r}")
        lines.append(f"metric\tmrr\t{self.mrr()!r}")
        lines.append(f"metric\tqueries\t{len(self.queries)}")
        for q in self.queries:
            hit_cells = "\t".join(f"{q['hits'][k]!r}" for k in self.k_list)
            lines.append(
                f"query\t{q['h']}\t{q['rel']}\t{q['t']}\t{q['rank']!r}\t"
                f"{hit_cells}\t{q['rr']!r}"
            )
        return "\n".join(lines) + "\n"


MODE_TO_LABELING = {"era": "none", "ql": "query", "el": "el"}


def _formula_for(arena: FormulaArena, kind: str, mode: str) -> Optional[int]:
    if mode == "era":
        return None
    if kind in ("C", "I"):
        return canonical_formula(arena, kind)
    if mode == "ql":
        return parse(U_QUERY_ONLY_TEXT, arena)
    return canonical_formula(arena, "Uprime")


def evaluate_queries(
    store: TripleStore,
    arena: FormulaArena,
    formula: Optional[int],
    mode: str,
    d: int,
    test_targets: Sequence[tuple[str, str, str]],
    all_targets: Sequence[tuple[str, str, str]],
    era_pair: Optional[tuple[int, int, str]] = None,
    k_list: tuple[int, ...] = (1, 10),
) -> RankReport:
    """Rank the test targets with the filtered protocol."""
    if mode not in MODE_TO_LABELING:
        raise EvaluationError(f"unknown mode {mode!r}")
    labeling_mode = MODE_TO_LABELING[mode]
    known: dict[tuple[str, str], set[int]] = {}
    for h, r, t in all_targets:
        known.setdefault((h, r), set()).add(store.entity_id(t))
    formula_text = format_formula(arena, formula) if formula is not None else "-"
    report = RankReport(mode=mode, degree=d, formula_text=formula_text, k_list=k_list)
    for h, r, t in test_targets:
        hid = store.entity_id(h)
        tid = store.entity_id(t)
        scores = score_query(
            store, arena, formula, labeling_mode, d, (hid, r), era_pair=era_pair
        )
        entry = rank_metrics(scores, tid, known[(h, r)], k_list)
        entry.update({"h": h, "rel": r, "t": t})
        report.queries.append(entry)
    return report


def table2_run(
    dataset_dir,
    mode: str,
    d: int = 1,
    era_pair_texts: Optional[tuple[str, str, str]] = None,
) -> RankReport:
    """Evaluate a generated dataset's test split under one mode."""
    dataset = load_dataset(dataset_dir)
    return run_dataset(dataset, mode, d, era_pair_texts, label=str(dataset_dir))


def run_dataset(
    dataset: SynthDataset,
    mode: str,
    d: int = 1,
    era_pair_texts: Optional[tuple[str, str, str]] = None,
    label: str = "-",
) -> RankReport:
    kind = dataset.config.get("relation")
    if kind not in SUPPORT_RELATIONS:
        raise EvaluationError(f"dataset has unknown relation kind {kind!r}")
    rels = {r for _, r, _, _ in dataset.targets}
    if rels and rels != {kind}:
        raise EvaluationError(
            f"dataset/relation mismatch: config says {kind!r}, targets use "
            f"{sorted(rels)}"
        )
    arena = FormulaArena()
    formula = _formula_for(arena, kind, mode)
    era_pair = None
    if mode == "era":
        texts = era_pair_texts or DEFAULT_ERA_PAIR
        era_pair = (parse(texts[0], arena), parse(texts[1], arena), texts[2])
    all_targets = [(h, r, t) for h, r, t, _ in dataset.targets]
    report = evaluate_queries(
        dataset.store,
        arena,
        formula,
        mode,
        d,
        dataset.targets_for("test"),
        all_targets,
        era_pair=era_pair,
    )
    report.metadata.update({"dataset": label})
    for key in sorted(dataset.config):
        report.metadata[f"config.{key}"] = dataset.config[key]
    if mode == "era":
        texts = era_pair_texts or DEFAULT_ERA_PAIR
        report.metadata["era_pair"] = f"{texts[0]} | {texts[1]} | {texts[2]}"
    return report
