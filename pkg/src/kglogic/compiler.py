"""Compile formulas into explicit integer message-passing networks.

Each distinct subformula owns one coordinate (column).  A column is wired by
case: atoms copy themselves through the diagonal of the combination matrix,
conjunctions sum their two inputs with bias -1, negations flip one input with
bias +1, and a diamond over relation R with threshold N sums the incoming
R-neighbors' input coordinate with bias -N+1.  Running the clamp activation
min(max(0, x), 1) for as many rounds as there are columns makes every
coordinate equal its subformula's truth bit at every entity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import EvaluationError
from .formulas import (
    And,
    Const,
    Diamond,
    FormulaArena,
    Not,
    Pred,
    Top,
    enumerate_subformulas,
    format_formula,
)


@dataclass
class CompiledNet:
    """Integer network over the subformula dimension.

    comb is the dim x dim combination matrix (row = input coordinate,
    column = output coordinate), agg maps relation name to a dim x dim
    aggregation matrix, bias is a dim-vector, and out_index is the root
    subformula's column.  atoms records how each atomic column is initialized:
    ("top", None), ("pred", name), or ("const", name).
    """

    dim: int
    comb: list[list[int]]
    agg: dict[str, list[list[int]]]
    bias: list[int]
    out_index: int
    atoms: dict[int, tuple[str, Optional[str]]]
    layers: int
    column_formulas: list[str] = field(default_factory=list)
    column_cases: list[int] = field(default_factory=list)


def compile_formula(arena: FormulaArena, root: int) -> CompiledNet:
    """Build the network for `root`; a pure function of the hash-consed arena."""
    order = enumerate_subformulas(arena, root)
    dim = len(order)
    col_of = {fid: i for i, fid in enumerate(order)}
    comb = [[0] * dim for _ in range(dim)]
    agg: dict[str, list[list[int]]] = {}
    bias = [0] * dim
    atoms: dict[int, tuple[str, Optional[str]]] = {}
    column_formulas = [format_formula(arena, fid) for fid in order]
    column_cases = [0] * dim

    for col, fid in enumerate(order):
        node = arena.node(fid)
        if isinstance(node, Top):
            comb[col][col] = 1
            atoms[col] = ("top", None)
            column_cases[col] = 0
        elif isinstance(node, Pred):
            comb[col][col] = 1
            atoms[col] = ("pred", node.name)
            column_cases[col] = 0
        elif isinstance(node, Const):
            comb[col][col] = 1
            atoms[col] = ("const", node.name)
            column_cases[col] = 0
        elif isinstance(node, And):
            j, k = col_of[node.left], col_of[node.right]
            if j == k:
                # f & f collapses to one shared input; pass it through.
                comb[j][col] = 1
            else:
                comb[j][col] = 1
                comb[k][col] = 1
                bias[col] = -1
            column_cases[col] = 1
        elif isinstance(node, Not):
            comb[col_of[node.sub]][col] = -1
            bias[col] = 1
            column_cases[col] = 2
        elif isinstance(node, Diamond):
            matrix = agg.get(node.relation)
            if matrix is None:
                matrix = [[0] * dim for _ in range(dim)]
                agg[node.relation] = matrix
            matrix[col_of[node.sub]][col] = 1
            bias[col] = -node.count + 1
            column_cases[col] = 3
        else:  # pragma: no cover - exhaustive over the AST
            raise EvaluationError(f"cannot compile node {node!r}")

    return CompiledNet(
        dim=dim,
        comb=comb,
        agg=agg,
        bias=bias,
        out_index=dim - 1,
        atoms=atoms,
        layers=dim,
        column_formulas=column_formulas,
        column_cases=column_cases,
    )


def explain(net: CompiledNet) -> str:
    """Human-readable per-column wiring report."""
    lines = []
    for col in range(net.dim):
        entries = []
        for row in range(net.dim):
            if net.comb[row][col]:
                entries.append(f"comb[{row},{col}]={net.comb[row][col]}")
        for rel in sorted(net.agg):
            matrix = net.agg[rel]
            for row in range(net.dim):
                if matrix[row][col]:
                    entries.append(f"agg[{rel}][{row},{col}]={matrix[row][col]}")
        if net.bias[col]:
            entries.append(f"bias[{col}]={net.bias[col]}")
        atom = net.atoms.get(col)
        if atom is not None:
            kind, name = atom
            entries.append(f"atom={kind}" + (f":{name}" if name else ""))
        formula = net.column_formulas[col] if net.column_formulas else ""
        lines.append(
            f"col {col}: Case {net.column_cases[col]}; {formula}; "
            + ", ".join(entries)
        )
    return "\n".join(lines) + "\n"


def net_to_text(net: CompiledNet) -> str:
    """Serialize with a fixed section and key order."""
    lines = [
        f"dim\t{net.dim}",
        f"layers\t{net.layers}",
        f"out_index\t{net.out_index}",
        "bias\t" + " ".join(str(b) for b in net.bias),
    ]
    for col in sorted(net.atoms):
        kind, name = net.atoms[col]
        if name is None:
            lines.append(f"atom\t{col}\t{kind}")
        else:
            lines.append(f"atom\t{col}\t{kind}\t{name}")
    for col, case in enumerate(net.column_cases):
        lines.append(f"case\t{col}\t{case}")
    for col, text in enumerate(net.column_formulas):
        lines.append(f"formula\t{col}\t{text}")
    for row in range(net.dim):
        for col in range(net.dim):
            if net.comb[row][col]:
                lines.append(f"comb\t{row}\t{col}\t{net.comb[row][col]}")
    for rel in sorted(net.agg):
        matrix = net.agg[rel]
        for row in range(net.dim):
            for col in range(net.dim):
                if matrix[row][col]:
                    lines.append(f"agg\t{rel}\t{row}\t{col}\t{matrix[row][col]}")
    return "\n".join(lines) + "\n"


def net_from_text(text: str) -> CompiledNet:
    """Inverse of net_to_text."""
    header: dict[str, int] = {}
    bias: list[int] = []
    atoms: dict[int, tuple[str, Optional[str]]] = {}
    cases: dict[int, int] = {}
    formulas: dict[int, str] = {}
    comb_entries: list[tuple[int, int, int]] = []
    agg_entries: list[tuple[str, int, int, int]] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        fields = line.split("\t")
        key = fields[0]
        try:
            if key in ("dim", "layers", "out_index"):
                header[key] = int(fields[1])
            elif key == "bias":
                bias = [int(x) for x in fields[1].split(" ")] if fields[1] else []
            elif key == "atom":
                col = int(fields[1])
                atoms[col] = (fields[2], fields[3] if len(fields) > 3 else None)
            elif key == "case":
                cases[int(fields[1])] = int(fields[2])
            elif key == "formula":
                formulas[int(fields[1])] = fields[2]
            elif key == "comb":
                comb_entries.append((int(fields[1]), int(fields[2]), int(fields[3])))
            elif key == "agg":
                agg_entries.append(
                    (fields[1], int(fields[2]), int(fields[3]), int(fields[4]))
                )
            else:
                raise EvaluationError(f"line {lineno}: unknown section {key!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, EvaluationError):
                raise
            raise EvaluationError(f"line {lineno}: malformed {key!r} entry") from exc
    for required in ("dim", "layers", "out_index"):
        if required not in header:
            raise EvaluationError(f"missing {required!r} header")
    dim = header["dim"]
    if len(bias) != dim:
        raise EvaluationError("bias length does not match dim")
    comb = [[0] * dim for _ in range(dim)]
    for row, col, val in comb_entries:
        comb[row][col] = val
    agg: dict[str, list[list[int]]] = {}
    for rel, row, col, val in agg_entries:
        agg.setdefault(rel, [[0] * dim for _ in range(dim)])[row][col] = val
    return CompiledNet(
        dim=dim,
        comb=comb,
        agg=agg,
        bias=bias,
        out_index=header["out_index"],
        atoms=atoms,
        layers=header["layers"],
        column_formulas=[formulas.get(i, "") for i in range(dim)],
        column_cases=[cases.get(i, 0) for i in range(dim)],
    )
