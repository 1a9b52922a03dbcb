"""Relational color refinement, unraveling trees, and tree isomorphism.

These are the indistinguishability tools: two entities that keep equal colors
(equivalently, have isomorphic bounded-depth unraveling trees) cannot be told
apart by any counting-modal formula of matching depth over the same labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable

from .checker import BindingLike, resolve_bindings
from .errors import EvaluationError
from .store import TripleStore


@dataclass
class ColorMap:
    """Per-round color assignment; colors are dense ids stable across runs."""

    rounds: list[list[int]]

    def colors(self, rnd: int) -> list[int]:
        return self.rounds[rnd]

    def n_rounds(self) -> int:
        return len(self.rounds) - 1

    def partition(self, rnd: int) -> dict[int, tuple[int, ...]]:
        groups: dict[int, list[int]] = {}
        for v, c in enumerate(self.rounds[rnd]):
            groups.setdefault(c, []).append(v)
        return {c: tuple(vs) for c, vs in groups.items()}


@dataclass
class UnravelNode:
    """One node of an unraveling tree; children follow incoming edges."""

    entity: int
    props: tuple
    children: tuple[tuple[str, "UnravelNode"], ...]

    def depth(self) -> int:
        if not self.children:
            return 0
        return 1 + max(child.depth() for _, child in self.children)


def _entity_props(
    store: TripleStore, bindings: dict[str, int]
) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    preds_at: list[list[str]] = [[] for _ in range(store.n_entities)]
    for pred in sorted(store.preds):
        for v in store.preds[pred]:
            preds_at[v].append(pred)
    consts_at: list[list[str]] = [[] for _ in range(store.n_entities)]
    for name in sorted(bindings):
        v = bindings[name]
        store._check_entity(v)
        consts_at[v].append(name)
    return [
        (tuple(preds_at[v]), tuple(consts_at[v])) for v in range(store.n_entities)
    ]


def _in_edges(store: TripleStore) -> list[list[tuple[str, int]]]:
    edges: list[list[tuple[str, int]]] = [[] for _ in range(store.n_entities)]
    for (rid, tail), heads in store.in_index.items():
        name = store.relation_name(rid)
        for h in heads:
            edges[tail].append((name, h))
    return edges


def _dense(signatures: list[Hashable]) -> list[int]:
    ids: dict[Hashable, int] = {}
    return [ids.setdefault(sig, len(ids)) for sig in signatures]


def color_refine(
    store: TripleStore, init: BindingLike = None, rounds: int = 0
) -> ColorMap:
    """Refine colors for `rounds` steps; round 0 is the initial coloring.

    Initial colors come from each entity's predicates plus any constants the
    labeling binds to it (uniform when both are absent).  Each step recolors
    an entity by its previous color together with the multiset of
    (neighbor color, relation) pairs over its incoming edges.  Dense ids are
    assigned in first-seen order over the fixed entity ordering, so repeated
    runs produce identical maps.
    """
    if rounds < 0:
        raise EvaluationError(f"rounds must be >= 0, got {rounds}")
    bindings = resolve_bindings(init)
    props = _entity_props(store, bindings)
    in_edges = _in_edges(store)

    colors = _dense(list(props))
    history = [colors]
    for _ in range(rounds):
        prev = history[-1]
        signatures = [
            (
                prev[v],
                tuple(sorted((prev[u], rel) for rel, u in in_edges[v])),
            )
            for v in range(store.n_entities)
        ]
        history.append(_dense(signatures))
    return ColorMap(history)


def unravel(
    store: TripleStore, v: int, depth: int, labeling: BindingLike = None
) -> UnravelNode:
    """Tree of all incoming-edge paths of length <= depth ending at v.

    Node properties are copied from the source entities (predicates plus any
    constants bound by the labeling); edges carry relation names.  Cycles in
    the store unroll into repeated subtrees.
    """
    if depth < 0:
        raise EvaluationError(f"depth must be >= 0, got {depth}")
    store._check_entity(v)
    bindings = resolve_bindings(labeling)
    props = _entity_props(store, bindings)
    in_edges = _in_edges(store)

    def build(entity: int, remaining: int) -> UnravelNode:
        children: tuple[tuple[str, UnravelNode], ...] = ()
        if remaining > 0:
            children = tuple(
                (rel, build(head, remaining - 1))
                for rel, head in sorted(in_edges[entity])
            )
        return UnravelNode(entity, props[entity], children)

    return build(v, depth)


def canonical_form(tree: UnravelNode) -> tuple:
    """Order-independent encoding; equal forms mean isomorphic trees."""
    return (
        tree.props,
        tuple(sorted((rel, canonical_form(child)) for rel, child in tree.children)),
    )


def trees_isomorphic(t1: UnravelNode, t2: UnravelNode) -> bool:
    """Property- and edge-label-respecting isomorphism of rooted trees."""
    return canonical_form(t1) == canonical_form(t2)
