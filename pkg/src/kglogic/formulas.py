"""Counting-modal formulas: hash-consed arena, text grammar, canonical rules.

Grammar:

    formula := "top"
             | "P(" name ")"            unary predicate
             | "@" name                 constant predicate
             | "!" formula              negation
             | "(" formula "&" formula ")"
             | "(" formula "|" formula ")"   sugar for !(!a & !b)
             | "<" relation ">=" N formula   at least N incoming witnesses

`!` and the diamond apply to the formula immediately following them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EvaluationError, FormulaSyntaxError


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Pred:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Not:
    sub: int


@dataclass(frozen=True)
class And:
    left: int
    right: int


@dataclass(frozen=True)
class Diamond:
    count: int
    relation: str
    sub: int


Node = Top | Pred | Const | Not | And | Diamond

_NAME_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"
)


class FormulaArena:
    """Append-only node store; structurally equal subtrees share one id.

    Children always carry smaller ids than their parents, so ascending id
    order is a topological order.
    """

    def __init__(self):
        self._nodes: list[Node] = []
        self._ids: dict[Node, int] = {}

    def __len__(self) -> int:
        return len(self._nodes)

    def _intern(self, node: Node) -> int:
        fid = self._ids.get(node)
        if fid is None:
            fid = len(self._nodes)
            self._nodes.append(node)
            self._ids[node] = fid
        return fid

    def _check(self, fid: int) -> None:
        if not isinstance(fid, int) or not 0 <= fid < len(self._nodes):
            raise EvaluationError(f"invalid formula id {fid!r}")

    def node(self, fid: int) -> Node:
        self._check(fid)
        return self._nodes[fid]

    def top(self) -> int:
        return self._intern(Top())

    def pred(self, name: str) -> int:
        return self._intern(Pred(name))

    def const(self, name: str) -> int:
        return self._intern(Const(name))

    def neg(self, sub: int) -> int:
        self._check(sub)
        return self._intern(Not(sub))

    def conj(self, left: int, right: int) -> int:
        self._check(left)
        self._check(right)
        return self._intern(And(left, right))

    def diamond(self, count: int, relation: str, sub: int) -> int:
        if count < 1:
            raise EvaluationError(f"diamond count must be at least 1, got {count}")
        self._check(sub)
        return self._intern(Diamond(count, relation, sub))


class _Parser:
    def __init__(self, text: str, arena: FormulaArena):
        self.text = text
        self.pos = 0
        self.arena = arena

    def parse(self) -> int:
        fid = self._formula()
        self._ws()
        if self.pos != len(self.text):
            raise FormulaSyntaxError("unexpected trailing input", self.pos)
        return fid

    def _ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _formula(self) -> int:
        self._ws()
        text, pos = self.text, self.pos
        if pos >= len(text):
            raise FormulaSyntaxError("unexpected end of input", pos)
        c = text[pos]
        if c == "!":
            self.pos += 1
            return self.arena.neg(self._formula())
        if c == "@":
            self.pos += 1
            return self.arena.const(self._name("constant"))
        if c == "<":
            return self._diamond()
        if c == "(":
            return self._group()
        if text.startswith("P(", pos):
            self.pos += 2
            end = text.find(")", self.pos)
            if end < 0:
                raise FormulaSyntaxError("unterminated predicate name", pos)
            name = text[self.pos : end]
            if not name:
                raise FormulaSyntaxError("empty predicate name", self.pos)
            self.pos = end + 1
            return self.arena.pred(name)
        if text.startswith("top", pos) and (
            pos + 3 == len(text) or text[pos + 3] not in _NAME_CHARS
        ):
            self.pos += 3
            return self.arena.top()
        raise FormulaSyntaxError(f"unexpected character {c!r}", pos)

    def _name(self, what: str) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in _NAME_CHARS:
            self.pos += 1
        if self.pos == start:
            raise FormulaSyntaxError(f"expected {what} name", start)
        return self.text[start : self.pos]

    def _diamond(self) -> int:
        start = self.pos
        self.pos += 1
        end = self.text.find(">", self.pos)
        if end < 0:
            raise FormulaSyntaxError("unterminated relation name", start)
        relation = self.text[self.pos : end]
        if not relation:
            raise FormulaSyntaxError("empty relation name", self.pos)
        self.pos = end + 1
        if self.pos >= len(self.text) or self.text[self.pos] != "=":
            raise FormulaSyntaxError("expected '=' after relation", self.pos)
        self.pos += 1
        numstart = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == numstart:
            raise FormulaSyntaxError("expected count after '='", numstart)
        count = int(self.text[numstart : self.pos])
        if count < 1:
            raise FormulaSyntaxError("count must be at least 1", numstart)
        return self.arena.diamond(count, relation, self._formula())

    def _group(self) -> int:
        self.pos += 1
        left = self._formula()
        self._ws()
        if self.pos >= len(self.text) or self.text[self.pos] not in "&|":
            raise FormulaSyntaxError("expected '&' or '|'", self.pos)
        op = self.text[self.pos]
        self.pos += 1
        right = self._formula()
        self._ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ")":
            raise FormulaSyntaxError("expected ')'", self.pos)
        self.pos += 1
        if op == "&":
            return self.arena.conj(left, right)
        arena = self.arena
        return arena.neg(arena.conj(arena.neg(left), arena.neg(right)))


def parse(text: str, arena: FormulaArena) -> int:
    """Parse formula text into `arena`, returning the hash-consed root id."""
    return _Parser(text, arena).parse()


def format_formula(arena: FormulaArena, fid: int) -> str:
    """Deterministic printer; `parse(format_formula(a, f), a) == f`."""
    node = arena.node(fid)
    if isinstance(node, Top):
        return "top"
    if isinstance(node, Pred):
        return f"P({node.name})"
    if isinstance(node, Const):
        return f"@{node.name}"
    if isinstance(node, Not):
        return "!" + format_formula(arena, node.sub)
    if isinstance(node, And):
        left = format_formula(arena, node.left)
        right = format_formula(arena, node.right)
        return f"({left} & {right})"
    return f"<{node.relation}>={node.count} " + format_formula(arena, node.sub)


def _children(node: Node) -> tuple[int, ...]:
    if isinstance(node, Not):
        return (node.sub,)
    if isinstance(node, And):
        return (node.left, node.right)
    if isinstance(node, Diamond):
        return (node.sub,)
    return ()


def enumerate_subformulas(arena: FormulaArena, root: int) -> list[int]:
    """Distinct subformula ids in topological order, children first, root last."""
    arena._check(root)
    seen: set[int] = set()
    stack = [root]
    while stack:
        fid = stack.pop()
        if fid in seen:
            continue
        seen.add(fid)
        stack.extend(_children(arena.node(fid)))
    return sorted(seen)


def diamond_depth(arena: FormulaArena, root: int) -> int:
    """Maximum nesting depth of diamonds in the formula."""
    depth: dict[int, int] = {}
    for fid in enumerate_subformulas(arena, root):
        node = arena.node(fid)
        kids = _children(node)
        inner = max((depth[k] for k in kids), default=0)
        depth[fid] = inner + 1 if isinstance(node, Diamond) else inner
    return depth[root]


def constants_in(arena: FormulaArena, root: int) -> set[str]:
    return {
        arena.node(fid).name
        for fid in enumerate_subformulas(arena, root)
        if isinstance(arena.node(fid), Const)
    }


def predicates_in(arena: FormulaArena, root: int) -> set[str]:
    return {
        arena.node(fid).name
        for fid in enumerate_subformulas(arena, root)
        if isinstance(arena.node(fid), Pred)
    }


def relations_in(arena: FormulaArena, root: int) -> set[str]:
    return {
        arena.node(fid).relation
        for fid in enumerate_subformulas(arena, root)
        if isinstance(arena.node(fid), Diamond)
    }


def is_negation_free(arena: FormulaArena, root: int) -> bool:
    return not any(
        isinstance(arena.node(fid), Not)
        for fid in enumerate_subformulas(arena, root)
    )


# Canonical rule texts over relations R1..R5.  C is a three-hop chain from the
# query constant; I additionally requires two incoming R4 witnesses at the
# second chain entity; Uprime is the fork-join rule with the fork pinned by the
# abstract constant @c.
CHAIN_TEXT = "<R3>=1 <R2>=1 <R1>=1 @h"
I_TEXT = "<R3>=1 (<R4>=2 top & <R2>=1 <R1>=1 @h)"
UPRIME_TEXT = (
    "(<R4>=1 <R2>=1 (<R1>=1 @h & @c)"
    " & <R5>=1 <R3>=1 (<R1>=1 @h & @c))"
)

_CANONICAL_TEXTS = {"C": CHAIN_TEXT, "I": I_TEXT, "Uprime": UPRIME_TEXT}


def canonical_formula(arena: FormulaArena, kind: str) -> int:
    """Build one of the canonical rules: kind in {"C", "I", "Uprime"}."""
    text = _CANONICAL_TEXTS.get(kind)
    if text is None:
        raise EvaluationError(f"unknown canonical formula kind {kind!r}")
    return parse(text, arena)
