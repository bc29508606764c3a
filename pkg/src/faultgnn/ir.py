"""Bit-level dataflow IR for seed circuits and their structural variants.

Nodes form a single-assignment DAG (argument ids always precede the node's
own id).  The IR is purely combinational; `registered` marks are annotations
consumed when the design is lowered to a netlist, and never change the
steady-state function.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence


class IRError(Exception):
    pass


class InputSpaceTooLarge(IRError):
    pass


OPS = {"input", "const0", "const1", "buf", "not", "xor", "and", "or", "nand", "nor", "mux", "table"}
COMMUTATIVE = {"xor", "and", "or", "nand", "nor"}
ASSOCIATIVE = {"xor", "and", "or"}

_ARITY = {"buf": 1, "not": 1, "xor": 2, "and": 2, "or": 2, "nand": 2, "nor": 2, "mux": 3}


@dataclass(frozen=True)
class IRNode:
    op: str
    args: tuple[int, ...] = ()
    aux: Optional[int] = None  # input bit index, or table truth mask
    region: str = ""
    registered: bool = False


@dataclass(frozen=True)
class IRDesign:
    name: str
    width_in: int
    width_out: int
    nodes: tuple[IRNode, ...]
    outputs: tuple[int, ...]

    def __post_init__(self):
        for i, n in enumerate(self.nodes):
            if n.op not in OPS:
                raise IRError(f"node {i}: unknown op {n.op!r}")
            if any(a >= i or a < 0 for a in n.args):
                raise IRError(f"node {i}: argument ids must precede the node")
            if n.op in _ARITY and len(n.args) != _ARITY[n.op]:
                raise IRError(f"node {i}: {n.op} takes {_ARITY[n.op]} args")
            if n.op == "input" and not (n.aux is not None and 0 <= n.aux < self.width_in):
                raise IRError(f"node {i}: input index out of range")
            if n.op == "table":
                k = len(n.args)
                if not 2 <= k <= 6:
                    raise IRError(f"node {i}: table arity {k} outside 2..6")
                if n.aux is None or not 0 <= n.aux < (1 << (1 << k)):
                    raise IRError(f"node {i}: table mask out of range")
        if len(self.outputs) != self.width_out:
            raise IRError("output count does not match width_out")
        if any(o >= len(self.nodes) for o in self.outputs):
            raise IRError("output references missing node")
        # every output must sit in the input cone
        depends = [False] * len(self.nodes)
        for i, n in enumerate(self.nodes):
            depends[i] = n.op == "input" or any(depends[a] for a in n.args)
        for o in self.outputs:
            if not depends[o]:
                raise IRError(f"output node {o} does not depend on any input")

    @property
    def regions(self) -> tuple[str, ...]:
        return tuple(sorted({n.region for n in self.nodes if n.region}))

    def levels(self) -> list[int]:
        """Topological depth per node; inputs and constants sit at level 0."""
        lv = [0] * len(self.nodes)
        for i, n in enumerate(self.nodes):
            lv[i] = 1 + max((lv[a] for a in n.args), default=-1) if n.args else 0
        return lv


class IRBuilder:
    """Appends nodes with light constant folding; returns node ids."""

    def __init__(self, name: str, width_in: int):
        self.name = name
        self.width_in = width_in
        self._nodes: list[IRNode] = []
        self._inputs: list[int] = []
        self._const: dict[str, int] = {}
        for i in range(width_in):
            self._inputs.append(self._emit(IRNode("input", aux=i)))

    def _emit(self, node: IRNode) -> int:
        self._nodes.append(node)
        return len(self._nodes) - 1

    def _is(self, i: int, op: str) -> bool:
        return self._nodes[i].op == op

    def inp(self, i: int) -> int:
        return self._inputs[i]

    def const(self, v: int, region: str = "") -> int:
        op = "const1" if v else "const0"
        if op not in self._const:
            self._const[op] = self._emit(IRNode(op, region=region))
        return self._const[op]

    def xor(self, a: int, b: int, region: str = "") -> int:
        if self._is(a, "const0"):
            return b
        if self._is(b, "const0"):
            return a
        return self._emit(IRNode("xor", (a, b), region=region))

    def and_(self, a: int, b: int, region: str = "") -> int:
        if self._is(a, "const0") or self._is(b, "const0"):
            return self.const(0, region)
        if self._is(a, "const1"):
            return b
        if self._is(b, "const1"):
            return a
        return self._emit(IRNode("and", (a, b), region=region))

    def or_(self, a: int, b: int, region: str = "") -> int:
        if self._is(a, "const1") or self._is(b, "const1"):
            return self.const(1, region)
        if self._is(a, "const0"):
            return b
        if self._is(b, "const0"):
            return a
        return self._emit(IRNode("or", (a, b), region=region))

    def not_(self, a: int, region: str = "") -> int:
        return self._emit(IRNode("not", (a,), region=region))

    def mux(self, i0: int, i1: int, sel: int, region: str = "") -> int:
        """sel == 1 picks i1."""
        return self._emit(IRNode("mux", (i0, i1, sel), region=region))

    def table(self, args: Sequence[int], mask: int, region: str = "") -> int:
        return self._emit(IRNode("table", tuple(args), aux=mask, region=region))

    def xor_reduce(self, ids: Sequence[int], region: str = "") -> int:
        acc = ids[0]
        for x in ids[1:]:
            acc = self.xor(acc, x, region)
        return acc

    def finish(self, outputs: Sequence[int]) -> IRDesign:
        return IRDesign(self.name, self.width_in, len(outputs), tuple(self._nodes), tuple(outputs))


def eval_ir(design: IRDesign, x: int) -> int:
    """Evaluate the combinational function on an input word. LSB = input 0."""
    vals = [0] * len(design.nodes)
    for i, n in enumerate(design.nodes):
        op = n.op
        if op == "input":
            vals[i] = (x >> n.aux) & 1
        elif op == "const0":
            vals[i] = 0
        elif op == "const1":
            vals[i] = 1
        elif op == "buf":
            vals[i] = vals[n.args[0]]
        elif op == "not":
            vals[i] = 1 - vals[n.args[0]]
        elif op == "xor":
            vals[i] = vals[n.args[0]] ^ vals[n.args[1]]
        elif op == "and":
            vals[i] = vals[n.args[0]] & vals[n.args[1]]
        elif op == "or":
            vals[i] = vals[n.args[0]] | vals[n.args[1]]
        elif op == "nand":
            vals[i] = 1 - (vals[n.args[0]] & vals[n.args[1]])
        elif op == "nor":
            vals[i] = 1 - (vals[n.args[0]] | vals[n.args[1]])
        elif op == "mux":
            a, b, s = n.args
            vals[i] = vals[b] if vals[s] else vals[a]
        else:  # table
            idx = 0
            for k, a in enumerate(n.args):
                idx |= vals[a] << k
            vals[i] = (n.aux >> idx) & 1
    y = 0
    for j, o in enumerate(design.outputs):
        y |= vals[o] << j
    return y


def find_mismatch(design: IRDesign, reference: IRDesign) -> Optional[int]:
    """First input where the two designs disagree, or None."""
    if design.width_in != reference.width_in or design.width_out != reference.width_out:
        raise IRError("interface mismatch between design and reference")
    if design.width_in > 16:
        raise InputSpaceTooLarge(f"{design.width_in}-bit input space is not sweepable")
    for x in range(1 << design.width_in):
        if eval_ir(design, x) != eval_ir(reference, x):
            return x
    return None


def check_equivalence(design: IRDesign, reference: IRDesign) -> bool:
    """Exhaustive input sweep; True iff steady-state outputs always match."""
    return find_mismatch(design, reference) is None


def compacted(design: IRDesign) -> IRDesign:
    """Drop nodes unreachable from the outputs, keeping relative order."""
    keep = [False] * len(design.nodes)
    stack = list(design.outputs)
    while stack:
        i = stack.pop()
        if keep[i]:
            continue
        keep[i] = True
        stack.extend(design.nodes[i].args)
    # inputs always survive so the interface stays intact
    for i, n in enumerate(design.nodes):
        if n.op == "input":
            keep[i] = True
    remap: dict[int, int] = {}
    nodes: list[IRNode] = []
    for i, n in enumerate(design.nodes):
        if not keep[i]:
            continue
        remap[i] = len(nodes)
        nodes.append(replace(n, args=tuple(remap[a] for a in n.args)))
    return IRDesign(
        design.name,
        design.width_in,
        design.width_out,
        tuple(nodes),
        tuple(remap[o] for o in design.outputs),
    )
