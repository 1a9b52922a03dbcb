"""Knowledge-graph triple store: interning, adjacency indices, TSV ingestion.

Entities and relations are interned to dense integer ids in first-seen order.
The store is immutable after construction and safe to share between workers.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from .errors import EvaluationError, TripleFileError

# Suffix appended to a relation name by augment_inverses.
INVERSE_SUFFIX = "⁻¹"


class TripleStore:
    """A deduplicated set of (head, relation, tail) triples plus unary facts.

    `in_index` maps (relation id, tail id) to the sorted head ids pointing at
    the tail; this incoming direction is the neighbor convention used by every
    evaluator in the package.  `out_degree[v]` counts outgoing triples of `v`
    over the original (non-inverse) relations only.
    """

    def __init__(
        self,
        triples: Iterable[tuple[str, str, str]],
        preds: Iterable[tuple[str, str]] = (),
        entity_order: Optional[Sequence[str]] = None,
        relation_order: Optional[Sequence[str]] = None,
        _out_degree: Optional[dict[int, int]] = None,
    ):
        self._entity_names: list[str] = []
        self._entity_ids: dict[str, int] = {}
        self._relation_names: list[str] = []
        self._relation_ids: dict[str, int] = {}
        for name in entity_order or ():
            self._intern_entity(name)
        for name in relation_order or ():
            self._intern_relation(name)

        self.triples: set[tuple[int, int, int]] = set()
        for head, rel, tail in triples:
            h = self._intern_entity(head)
            r = self._intern_relation(rel)
            t = self._intern_entity(tail)
            self.triples.add((h, r, t))

        self.preds: dict[str, set[int]] = {}
        for pred, entity in preds:
            eid = self._entity_ids.get(entity)
            if eid is None:
                raise TripleFileError(
                    f"predicate {pred!r} references unknown entity {entity!r}"
                )
            self.preds.setdefault(pred, set()).add(eid)

        self.in_index: dict[tuple[int, int], list[int]] = {}
        self._succ: dict[int, dict[int, list[int]]] = {}
        out_counts = [0] * len(self._entity_names)
        for h, r, t in sorted(self.triples):
            self.in_index.setdefault((r, t), []).append(h)
            self._succ.setdefault(r, {}).setdefault(h, []).append(t)
            out_counts[h] += 1
        if _out_degree is None:
            self.out_degree = {v: out_counts[v] for v in range(len(out_counts))}
        else:
            self.out_degree = {
                v: _out_degree.get(v, 0) for v in range(len(self._entity_names))
            }

    def _intern_entity(self, name: str) -> int:
        eid = self._entity_ids.get(name)
        if eid is None:
            eid = len(self._entity_names)
            self._entity_names.append(name)
            self._entity_ids[name] = eid
        return eid

    def _intern_relation(self, name: str) -> int:
        rid = self._relation_ids.get(name)
        if rid is None:
            rid = len(self._relation_names)
            self._relation_names.append(name)
            self._relation_ids[name] = rid
        return rid

    @property
    def n_entities(self) -> int:
        return len(self._entity_names)

    @property
    def n_relations(self) -> int:
        return len(self._relation_names)

    @property
    def entity_names(self) -> list[str]:
        return list(self._entity_names)

    @property
    def relation_names(self) -> list[str]:
        return list(self._relation_names)

    def entity_id(self, name: str) -> int:
        eid = self._entity_ids.get(name)
        if eid is None:
            raise EvaluationError(f"unknown entity {name!r}")
        return eid

    def entity_name(self, eid: int) -> str:
        self._check_entity(eid)
        return self._entity_names[eid]

    def relation_id(self, name: str) -> int:
        rid = self._relation_ids.get(name)
        if rid is None:
            raise EvaluationError(f"unknown relation {name!r}")
        return rid

    def relation_name(self, rid: int) -> str:
        self._check_relation(rid)
        return self._relation_names[rid]

    def has_entity(self, name: str) -> bool:
        return name in self._entity_ids

    def has_relation(self, name: str) -> bool:
        return name in self._relation_ids

    def _check_entity(self, eid: int) -> None:
        if not isinstance(eid, int) or not 0 <= eid < len(self._entity_names):
            raise EvaluationError(f"invalid entity id {eid!r}")

    def _check_relation(self, rid: int) -> None:
        if not isinstance(rid, int) or not 0 <= rid < len(self._relation_names):
            raise EvaluationError(f"invalid relation id {rid!r}")

    def neighbors(self, v: int, rel: int) -> set[int]:
        """Heads u with (u, rel, v) in the store (incoming direction)."""
        self._check_entity(v)
        self._check_relation(rel)
        return set(self.in_index.get((rel, v), ()))

    def successors(self, rel: int, v: int) -> list[int]:
        """Tails t with (v, rel, t) in the store."""
        return self._succ.get(rel, {}).get(v, [])

    def to_triples_text(self) -> str:
        # name-sorted, so the text is canonical under id renumbering
        lines = sorted(
            f"{self._entity_names[h]}\t{self._relation_names[r]}\t{self._entity_names[t]}"
            for h, r, t in self.triples
        )
        return "\n".join(lines) + ("\n" if lines else "")

    def to_preds_text(self) -> str:
        lines = sorted(
            f"{pred}\t{self._entity_names[eid]}"
            for pred in self.preds
            for eid in self.preds[pred]
        )
        return "\n".join(lines) + ("\n" if lines else "")


def _parse_tsv(text: str, n_fields: int, what: str) -> list[tuple[str, ...]]:
    rows = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != n_fields:
            raise TripleFileError(
                f"{what} line {lineno}: expected {n_fields} tab-separated fields, "
                f"got {len(fields)}"
            )
        rows.append(tuple(fields))
    return rows


def load_store(triples_text: str, preds_text: Optional[str] = None) -> TripleStore:
    """Build a store from TSV text: `head<TAB>relation<TAB>tail` per line.

    Duplicate triple lines collapse to one triple.  Predicate lines are
    `predicate<TAB>entity` and must reference entities present in the triples.
    """
    triples = _parse_tsv(triples_text, 3, "triples")
    preds: list[tuple[str, str]] = []
    if preds_text is not None:
        known = {h for h, _, _ in triples} | {t for _, _, t in triples}
        for lineno, line in enumerate(preds_text.split("\n"), start=1):
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise TripleFileError(
                    f"predicates line {lineno}: expected 2 tab-separated fields, "
                    f"got {len(fields)}"
                )
            pred, entity = fields
            if entity not in known:
                raise TripleFileError(
                    f"predicates line {lineno}: unknown entity {entity!r}"
                )
            preds.append((pred, entity))
    return TripleStore(triples, preds)


def augment_inverses(store: TripleStore) -> TripleStore:
    """Return a new store with a fresh inverse relation per original relation.

    Each triple (h, R, t) gains a mirror (t, R⁻¹, h).  Out-degrees are carried
    over unchanged from the input store.  Re-augmenting an already augmented
    store is rejected because the inverse names would collide.
    """
    existing = set(store.relation_names)
    inverse_of: dict[int, str] = {}
    for rid, name in enumerate(store.relation_names):
        inv = name + INVERSE_SUFFIX
        if inv in existing:
            raise TripleFileError(
                f"relation name {inv!r} already exists; cannot augment"
            )
        inverse_of[rid] = inv

    entity_names = store.entity_names
    relation_names = store.relation_names + [
        inverse_of[rid] for rid in range(store.n_relations)
    ]
    triples: list[tuple[str, str, str]] = []
    for h, r, t in sorted(store.triples):
        triples.append((entity_names[h], store.relation_name(r), entity_names[t]))
    for h, r, t in sorted(store.triples):
        triples.append((entity_names[t], inverse_of[r], entity_names[h]))
    preds = [
        (pred, entity_names[eid])
        for pred in sorted(store.preds)
        for eid in sorted(store.preds[pred])
    ]
    return TripleStore(
        triples,
        preds,
        entity_order=entity_names,
        relation_order=relation_names,
        _out_degree=store.out_degree,
    )
