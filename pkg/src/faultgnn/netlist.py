"""Gate-level netlist data model plus a small EDIF subset reader/writer.

The netlist is the exchange format between the design generator, the fault
simulator and the graph extractor.  A design is a flat list of primitive
cell instances wired by single-bit, single-driver nets, with one designated
1-bit `done` output that signals completion.  Netlist objects are validated
on construction and immutable afterwards, so they can be shared freely.
"""

from __future__ import annotations

import hashlib
import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence


class NetlistError(Exception):
    """Base class for netlist construction/parsing failures."""


class LexError(NetlistError):
    pass


class UnknownPrimitive(NetlistError):
    pass


class MultiDriver(NetlistError):
    pass


class DanglingNet(NetlistError):
    pass


class MissingDonePort(NetlistError):
    pass


class UnmatchedInstance(NetlistError):
    pass


class CombinationalCycle(NetlistError):
    """Raised when the DFF-free subgraph contains a cycle.

    `witness` lists instance names forming one cycle.
    """

    def __init__(self, message: str, witness: Sequence[str]):
        super().__init__(message)
        self.witness = list(witness)


class EdifWarning(UserWarning):
    """Non-fatal oddity in an accepted EDIF document (ignored property etc.)."""


class Replica(Enum):
    A = "A"
    B = "B"
    SHARED = "Shared"


class PrimitiveKind(Enum):
    CONST0 = "CONST0"
    CONST1 = "CONST1"
    BUF = "BUF"
    NOT = "NOT"
    AND2 = "AND2"
    OR2 = "OR2"
    NAND2 = "NAND2"
    NOR2 = "NOR2"
    XOR2 = "XOR2"
    XNOR2 = "XNOR2"
    MUX2 = "MUX2"
    LUT2 = "LUT2"
    LUT3 = "LUT3"
    LUT4 = "LUT4"
    LUT5 = "LUT5"
    LUT6 = "LUT6"
    DFF = "DFF"


_ONE_IN = ("I",)
_TWO_IN = ("I0", "I1")

# input pin names, output pin name
PIN_SIGNATURES: dict[PrimitiveKind, tuple[tuple[str, ...], str]] = {
    PrimitiveKind.CONST0: ((), "O"),
    PrimitiveKind.CONST1: ((), "O"),
    PrimitiveKind.BUF: (_ONE_IN, "O"),
    PrimitiveKind.NOT: (_ONE_IN, "O"),
    PrimitiveKind.AND2: (_TWO_IN, "O"),
    PrimitiveKind.OR2: (_TWO_IN, "O"),
    PrimitiveKind.NAND2: (_TWO_IN, "O"),
    PrimitiveKind.NOR2: (_TWO_IN, "O"),
    PrimitiveKind.XOR2: (_TWO_IN, "O"),
    PrimitiveKind.XNOR2: (_TWO_IN, "O"),
    PrimitiveKind.MUX2: (("I0", "I1", "S"), "O"),
    PrimitiveKind.LUT2: (("I0", "I1"), "O"),
    PrimitiveKind.LUT3: (("I0", "I1", "I2"), "O"),
    PrimitiveKind.LUT4: (("I0", "I1", "I2", "I3"), "O"),
    PrimitiveKind.LUT5: (("I0", "I1", "I2", "I3", "I4"), "O"),
    PrimitiveKind.LUT6: (("I0", "I1", "I2", "I3", "I4", "I5"), "O"),
    PrimitiveKind.DFF: (("D",), "Q"),
}

LUT_KINDS = {
    PrimitiveKind.LUT2: 2,
    PrimitiveKind.LUT3: 3,
    PrimitiveKind.LUT4: 4,
    PrimitiveKind.LUT5: 5,
    PrimitiveKind.LUT6: 6,
}

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_/]*\Z")


def is_identifier(s: str) -> bool:
    return bool(_IDENT_RE.match(s))


@dataclass(frozen=True)
class Port:
    """Primary input or output of the design. Always 1 bit wide."""

    name: str
    direction: str  # "input" | "output"
    net: str = ""  # net this port joins; defaults to the port name


@dataclass(frozen=True)
class CellInstance:
    """One primitive instance. `pins` maps pin name to net name."""

    name: str
    kind: PrimitiveKind
    pins: Mapping[str, str]
    init_mask: Optional[int] = None
    replica: Replica = Replica.SHARED

    @property
    def output_pin(self) -> str:
        return PIN_SIGNATURES[self.kind][1]

    @property
    def output_net(self) -> str:
        return self.pins[self.output_pin]

    def input_nets(self) -> tuple[str, ...]:
        return tuple(self.pins[p] for p in PIN_SIGNATURES[self.kind][0])


@dataclass(frozen=True)
class Endpoint:
    """One connection point of a net: a cell pin, or a primary port."""

    pin: str
    instance: Optional[str] = None  # None => primary port named `pin`


@dataclass(frozen=True)
class Net:
    name: str
    driver: Endpoint
    sinks: tuple[Endpoint, ...]


@dataclass(frozen=True)
class ModuleMap:
    """Replica membership of the DFFs, derived from instance-name prefixes."""

    rules: tuple[tuple[str, Replica], ...]
    ffs_a: tuple[str, ...]
    ffs_b: tuple[str, ...]
    ffs_shared: tuple[str, ...]

    def replica_of(self, ff_name: str) -> Replica:
        if ff_name in self._lookup():
            return self._lookup()[ff_name]
        raise KeyError(ff_name)

    def _lookup(self) -> dict[str, Replica]:
        cached = getattr(self, "_cache", None)
        if cached is None:
            cached = {}
            for n in self.ffs_a:
                cached[n] = Replica.A
            for n in self.ffs_b:
                cached[n] = Replica.B
            for n in self.ffs_shared:
                cached[n] = Replica.SHARED
            object.__setattr__(self, "_cache", cached)
        return cached


class Netlist:
    """Validated, immutable design.

    Construction checks every invariant: pin signatures, LUT mask widths,
    single-driver nets, fully connected pins, combinational acyclicity and
    the presence of a 1-bit `done` output.
    """

    def __init__(
        self,
        name: str,
        ports: Sequence[Port],
        cells: Sequence[CellInstance],
        done_name: str = "done",
    ):
        self.name = name
        self.ports = tuple(ports)
        self.cells = tuple(cells)
        self._validate_names()
        self._cell_by_name = {c.name: c for c in self.cells}
        self._port_by_name = {p.name: p for p in self.ports}
        self.nets = self._resolve_nets()
        self._net_by_name = {n.name: n for n in self.nets}
        self.done_port = self._find_done(done_name)
        self._check_acyclic()

    # -- derived views -------------------------------------------------

    def cell(self, name: str) -> CellInstance:
        return self._cell_by_name[name]

    def port(self, name: str) -> Port:
        return self._port_by_name[name]

    def net(self, name: str) -> Net:
        return self._net_by_name[name]

    @property
    def input_ports(self) -> tuple[Port, ...]:
        return tuple(p for p in self.ports if p.direction == "input")

    @property
    def output_ports(self) -> tuple[Port, ...]:
        return tuple(p for p in self.ports if p.direction == "output")

    @property
    def dffs(self) -> tuple[CellInstance, ...]:
        return tuple(c for c in self.cells if c.kind is PrimitiveKind.DFF)

    @property
    def comb_cells(self) -> tuple[CellInstance, ...]:
        return tuple(c for c in self.cells if c.kind is not PrimitiveKind.DFF)

    # -- validation ----------------------------------------------------

    def _validate_names(self):
        seen: set[str] = set()
        for c in self.cells:
            if not is_identifier(c.name):
                raise NetlistError(f"bad instance name {c.name!r}")
            if c.name in seen:
                raise NetlistError(f"duplicate instance name {c.name!r}")
            seen.add(c.name)
            ins, out = PIN_SIGNATURES[c.kind]
            expected = set(ins) | {out}
            if set(c.pins) != expected:
                raise NetlistError(
                    f"{c.name}: pins {sorted(c.pins)} do not match "
                    f"{c.kind.value} signature {sorted(expected)}"
                )
            if c.kind in LUT_KINDS:
                k = LUT_KINDS[c.kind]
                if c.init_mask is None:
                    raise NetlistError(f"{c.name}: {c.kind.value} needs an INIT mask")
                if not 0 <= c.init_mask < (1 << (1 << k)):
                    raise NetlistError(f"{c.name}: INIT mask out of range for {c.kind.value}")
            elif c.init_mask is not None:
                raise NetlistError(f"{c.name}: INIT mask only allowed on LUT kinds")
        pseen: set[str] = set()
        for p in self.ports:
            if p.direction not in ("input", "output"):
                raise NetlistError(f"port {p.name}: bad direction {p.direction!r}")
            if p.name in pseen:
                raise NetlistError(f"duplicate port name {p.name!r}")
            pseen.add(p.name)

    def _resolve_nets(self) -> tuple[Net, ...]:
        drivers: dict[str, Endpoint] = {}
        sinks: dict[str, list[Endpoint]] = {}
        order: list[str] = []

        def touch(net: str):
            if net not in sinks:
                sinks[net] = []
                order.append(net)

        for p in self.ports:
            net = p.net or p.name
            touch(net)
            ep = Endpoint(p.name, None)
            if p.direction == "input":
                if net in drivers:
                    raise MultiDriver(f"net {net!r} driven by {drivers[net]} and port {p.name}")
                drivers[net] = ep
            else:
                sinks[net].append(ep)
        for c in self.cells:
            out_pin = c.output_pin
            for pin, net in c.pins.items():
                touch(net)
                ep = Endpoint(pin, c.name)
                if pin == out_pin:
                    if net in drivers:
                        raise MultiDriver(
                            f"net {net!r} driven by {drivers[net]} and {c.name}.{pin}"
                        )
                    drivers[net] = ep
                else:
                    sinks[net].append(ep)

        nets = []
        for net in order:
            if net not in drivers:
                raise DanglingNet(f"net {net!r} has no driver")
            nets.append(Net(net, drivers[net], tuple(sinks[net])))
        return tuple(nets)

    def _find_done(self, done_name: str) -> Port:
        p = self._port_by_name.get(done_name)
        if p is None or p.direction != "output":
            raise MissingDonePort(f"no 1-bit output port named {done_name!r}")
        return p

    def _check_acyclic(self):
        order, leftover = _topo_comb_cells(self)
        if leftover:
            raise CombinationalCycle(
                f"combinational cycle through {leftover[0]}", _cycle_witness(self, leftover)
            )
        self._comb_order = order


def _topo_comb_cells(nl: Netlist) -> tuple[list[CellInstance], list[str]]:
    """Kahn topological sort of the combinational cells, in stable order.

    Returns (ordered cells, names of cells left in cycles).
    """
    comb = [c for c in nl.cells if c.kind is not PrimitiveKind.DFF]
    producer: dict[str, CellInstance] = {c.output_net: c for c in comb}
    indeg: dict[str, int] = {}
    consumers: dict[str, list[CellInstance]] = {c.name: [] for c in comb}
    for c in comb:
        deg = 0
        for net in c.input_nets():
            src = producer.get(net)
            if src is not None:
                deg += 1
                consumers[src.name].append(c)
        indeg[c.name] = deg
    queue = [c for c in comb if indeg[c.name] == 0]
    order: list[CellInstance] = []
    i = 0
    while i < len(queue):
        c = queue[i]
        i += 1
        order.append(c)
        for nxt in consumers[c.name]:
            indeg[nxt.name] -= 1
            if indeg[nxt.name] == 0:
                queue.append(nxt)
    leftover = [c.name for c in comb if indeg[c.name] > 0]
    return order, leftover


def _cycle_witness(nl: Netlist, leftover: Sequence[str]) -> list[str]:
    """Walk predecessor links inside the cyclic region until a repeat."""
    remaining = set(leftover)
    producer = {c.output_net: c for c in nl.comb_cells}
    start = leftover[0]
    path = [start]
    seen = {start}
    cur = start
    while True:
        cell = nl.cell(cur)
        nxt = None
        for net in cell.input_nets():
            src = producer.get(net)
            if src is not None and src.name in remaining:
                nxt = src.name
                break
        if nxt is None:
            return path
        if nxt in seen:
            return path[path.index(nxt):] if nxt in path else path
        path.append(nxt)
        seen.add(nxt)
        cur = nxt


# ---------------------------------------------------------------------------
# builder


class NetlistBuilder:
    """Incremental construction helper; net names are derived automatically."""

    def __init__(self, name: str):
        self.name = name
        self._ports: list[Port] = []
        self._cells: list[CellInstance] = []
        self._names: set[str] = set()

    def _claim(self, name: str):
        if name in self._names:
            raise NetlistError(f"name {name!r} already used")
        self._names.add(name)

    def input(self, name: str) -> str:
        """Add a primary input; returns the net it drives."""
        self._claim(name)
        self._ports.append(Port(name, "input", name))
        return name

    def output(self, name: str, net: str):
        self._claim(name)
        self._ports.append(Port(name, "output", net))

    def cell(
        self,
        name: str,
        kind: PrimitiveKind,
        init_mask: Optional[int] = None,
        replica: Replica = Replica.SHARED,
        **pins: str,
    ) -> str:
        """Add a cell; input pins given as keywords. Returns the output net."""
        self._claim(name)
        out_net = name + "_o"
        all_pins = dict(pins)
        all_pins[PIN_SIGNATURES[kind][1]] = out_net
        self._cells.append(CellInstance(name, kind, all_pins, init_mask, replica))
        return out_net

    def build(self, done_name: str = "done") -> Netlist:
        return Netlist(self.name, self._ports, self._cells, done_name)


# ---------------------------------------------------------------------------
# EDIF subset


_KEYWORDS = {
    "edif", "library", "cell", "view", "interface", "port", "direction",
    "contents", "instance", "viewref", "cellref", "property", "net",
    "joined", "portref", "instanceref", "string",
}


class _Token:
    __slots__ = ("kind", "text", "line")

    def __init__(self, kind, text, line):
        self.kind = kind  # "(", ")", "atom", "str"
        self.text = text
        self.line = line


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
        elif ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append(_Token(ch, ch, line))
            i += 1
        elif ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise LexError(f"line {line}: unterminated string")
            tokens.append(_Token("str", text[i + 1:j], line))
            line += text.count("\n", i, j)
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()"':
                j += 1
            atom = text[i:j]
            if not re.fullmatch(r"[A-Za-z0-9_/\.\-]+", atom):
                raise LexError(f"line {line}: bad token {atom!r}")
            tokens.append(_Token("atom", atom, line))
            i = j
    return tokens


def _read_sexpr(tokens: list[_Token]):
    """Parse tokens into nested lists; atoms stay as _Token objects."""
    pos = 0

    def read():
        nonlocal pos
        tok = tokens[pos]
        if tok.kind == "(":
            pos += 1
            items = [tok]
            while True:
                if pos >= len(tokens):
                    raise LexError(f"line {tokens[-1].line}: unbalanced parentheses (unexpected end of input)")
                if tokens[pos].kind == ")":
                    pos += 1
                    return items
                items.append(read())
        elif tok.kind == ")":
            raise LexError(f"line {tok.line}: unexpected ')'")
        else:
            pos += 1
            return tok

    if not tokens:
        raise LexError("line 1: empty document")
    expr = read()
    if pos != len(tokens):
        raise LexError(f"line {tokens[pos].line}: trailing content after document")
    return expr


def _head(sx) -> str:
    if not isinstance(sx, list) or len(sx) < 2 or not isinstance(sx[1], _Token):
        return ""
    return sx[1].text.lower()


def _args(sx):
    return sx[2:]


def _sub(sx, key: str):
    return [e for e in _args(sx) if isinstance(e, list) and _head(e) == key]

def _one(sx, key: str, what: str):
    found = _sub(sx, key)
    if len(found) != 1:
        raise LexError(f"line {sx[0].line}: expected one ({key} ...) in {what}, found {len(found)}")
    return found[0]


def _name_of(sx, what: str) -> str:
    if len(sx) < 3 or not isinstance(sx[2], _Token) or sx[2].kind != "atom":
        raise LexError(f"line {sx[0].line}: {what} missing name")
    name = sx[2].text
    if not is_identifier(name):
        raise LexError(f"line {sx[2].line}: bad identifier {name!r}")
    return name


def parse_edif(
    text: str,
    prefix_rules: Sequence[tuple[str, Replica]] = (),
    done_name: str = "done",
) -> Netlist:
    """Parse a document in the supported EDIF subset into a Netlist.

    `prefix_rules` optionally assigns replica tags to instances by name
    prefix (first match wins); untagged instances are Shared.  Unresolved
    references and invariant violations raise, never repair.
    """
    tokens = _tokenize(text)
    root = _read_sexpr(tokens)
    if _head(root) != "edif":
        raise LexError(f"line {root[0].line if isinstance(root, list) else 1}: not an edif document")
    design_name = _name_of(root, "edif")
    library = _one(root, "library", "edif")
    cells_sx = _sub(library, "cell")
    if len(cells_sx) != 1:
        raise LexError(f"line {library[0].line}: exactly one cell per document is supported")
    cell_sx = cells_sx[0]
    view = _one(cell_sx, "view", "cell")
    interface = _one(view, "interface", "view")
    contents = _one(view, "contents", "view")

    ports: list[Port] = []
    for psx in _sub(interface, "port"):
        pname = _name_of(psx, "port")
        dsx = _one(psx, "direction", f"port {pname}")
        if len(dsx) < 3 or not isinstance(dsx[2], _Token):
            raise LexError(f"line {dsx[0].line}: direction missing value")
        d = dsx[2].text.lower()
        if d not in ("input", "output"):
            raise LexError(f"line {dsx[2].line}: bad direction {dsx[2].text!r}")
        ports.append(Port(pname, d, ""))  # net filled in below

    instances: dict[str, tuple[PrimitiveKind, Optional[int], int]] = {}
    inst_order: list[str] = []
    for isx in _sub(contents, "instance"):
        iname = _name_of(isx, "instance")
        vref = _one(isx, "viewref", f"instance {iname}")
        cref = _one(vref, "cellref", f"instance {iname}")
        kind_name = _name_of(cref, "cellRef")
        try:
            kind = PrimitiveKind(kind_name.upper())
        except ValueError:
            raise UnknownPrimitive(
                f"line {cref[0].line}: instance {iname!r} has unknown cell type {kind_name!r}"
            ) from None
        mask = None
        for prop in _sub(isx, "property"):
            prop_name = _name_of(prop, "property")
            if prop_name.upper() == "INIT" and kind in LUT_KINDS:
                ssx = _one(prop, "string", f"property INIT of {iname}")
                if len(ssx) < 3 or not isinstance(ssx[2], _Token) or ssx[2].kind != "str":
                    raise LexError(f"line {ssx[0].line}: INIT needs a quoted hex string")
                try:
                    mask = int(ssx[2].text, 16)
                except ValueError:
                    raise LexError(f"line {ssx[2].line}: bad INIT hex {ssx[2].text!r}") from None
            else:
                warnings.warn(
                    f"ignoring property {prop_name!r} on instance {iname!r}",
                    EdifWarning,
                    stacklevel=2,
                )
        if iname in instances:
            raise NetlistError(f"duplicate instance {iname!r}")
        instances[iname] = (kind, mask, isx[0].line)
        inst_order.append(iname)

    # pin -> net assignments from the net/joined lists
    pin_nets: dict[str, dict[str, str]] = {i: {} for i in instances}
    port_nets: dict[str, str] = {}
    port_names = {p.name for p in ports}
    for nsx in _sub(contents, "net"):
        nname = _name_of(nsx, "net")
        joined = _one(nsx, "joined", f"net {nname}")
        for ref in _sub(joined, "portref"):
            pin = _name_of(ref, "portRef")
            irefs = _sub(ref, "instanceref")
            if irefs:
                iname = _name_of(irefs[0], "instanceRef")
                if iname not in instances:
                    raise DanglingNet(
                        f"line {irefs[0][0].line}: net {nname!r} references unknown instance {iname!r}"
                    )
                kind, _, _ = instances[iname]
                ins, out = PIN_SIGNATURES[kind]
                if pin not in ins and pin != out:
                    raise DanglingNet(
                        f"line {ref[0].line}: {iname!r} ({kind.value}) has no pin {pin!r}"
                    )
                if pin in pin_nets[iname]:
                    raise MultiDriver(f"pin {iname}.{pin} joined to more than one net")
                pin_nets[iname][pin] = nname
            else:
                if pin not in port_names:
                    raise DanglingNet(
                        f"line {ref[0].line}: net {nname!r} references unknown port {pin!r}"
                    )
                if pin in port_nets:
                    raise MultiDriver(f"port {pin} joined to more than one net")
                port_nets[pin] = nname

    cells: list[CellInstance] = []
    for iname in inst_order:
        kind, mask, line = instances[iname]
        ins, out = PIN_SIGNATURES[kind]
        missing = [p for p in (*ins, out) if p not in pin_nets[iname]]
        if missing:
            raise DanglingNet(f"instance {iname!r}: unconnected pin(s) {missing}")
        cells.append(CellInstance(iname, kind, pin_nets[iname], mask, _tag_for(iname, prefix_rules)))

    final_ports = []
    for p in ports:
        if p.name not in port_nets:
            raise DanglingNet(f"port {p.name!r} is not joined to any net")
        final_ports.append(Port(p.name, p.direction, port_nets[p.name]))

    return Netlist(design_name, final_ports, cells, done_name)


def _tag_for(name: str, rules: Sequence[tuple[str, Replica]]) -> Replica:
    for prefix, tag in rules:
        if name.startswith(prefix):
            return tag
    return Replica.SHARED


def _init_hex(kind: PrimitiveKind, mask: int) -> str:
    digits = max(1, (1 << LUT_KINDS[kind]) // 4)
    return format(mask, "0{}X".format(digits))


def emit_edif(nl: Netlist) -> str:
    """Serialize a Netlist; output re-parses to an isomorphic design."""
    out = []
    out.append(f"(edif {nl.name}")
    out.append("  (library work")
    out.append(f"    (cell {nl.name}")
    out.append("      (view netlist")
    out.append("        (interface")
    for p in nl.ports:
        out.append(f"          (port {p.name} (direction {p.direction.upper()}))")
    out.append("        )")
    out.append("        (contents")
    for c in nl.cells:
        prop = ""
        if c.kind in LUT_KINDS:
            prop = f' (property INIT (string "{_init_hex(c.kind, c.init_mask)}"))'
        out.append(
            f"          (instance {c.name} (viewRef netlist (cellRef {c.kind.value})){prop})"
        )
    for net in nl.nets:
        refs = []
        for ep in (net.driver, *net.sinks):
            if ep.instance is None:
                refs.append(f"(portRef {ep.pin})")
            else:
                refs.append(f"(portRef {ep.pin} (instanceRef {ep.instance}))")
        out.append(f"          (net {net.name} (joined {' '.join(refs)}))")
    out.append("        )")
    out.append("      )")
    out.append("    )")
    out.append("  )")
    out.append(")")
    return "\n".join(out) + "\n"


def partition_modules(
    nl: Netlist, prefix_rules: Sequence[tuple[str, Replica]]
) -> ModuleMap:
    """Assign every DFF to a replica via name prefixes.

    Each DFF must match exactly one rule; zero or multiple matches raise
    UnmatchedInstance.
    """
    buckets: dict[Replica, list[str]] = {Replica.A: [], Replica.B: [], Replica.SHARED: []}
    for ff in nl.dffs:
        matches = [tag for prefix, tag in prefix_rules if ff.name.startswith(prefix)]
        if len(matches) != 1:
            raise UnmatchedInstance(
                f"DFF {ff.name!r} matches {len(matches)} prefix rules (need exactly 1)"
            )
        buckets[matches[0]].append(ff.name)
    return ModuleMap(
        tuple((p, t) for p, t in prefix_rules),
        tuple(buckets[Replica.A]),
        tuple(buckets[Replica.B]),
        tuple(buckets[Replica.SHARED]),
    )


def canonical_hash(nl: Netlist) -> str:
    """Name-free structural fingerprint.

    Hashes the sorted multiset of per-cell records (kind, INIT mask, and the
    pin-by-pin kind of each driver), so isomorphic designs hash equal and
    structural edits show up.
    """
    producer_kind: dict[str, str] = {}
    for c in nl.cells:
        producer_kind[c.output_net] = c.kind.value
    for p in nl.input_ports:
        producer_kind[p.net or p.name] = "PI"
    records = []
    for c in nl.cells:
        fanin = tuple(
            (pin, producer_kind.get(c.pins[pin], "?"))
            for pin in PIN_SIGNATURES[c.kind][0]
        )
        records.append((c.kind.value, c.init_mask if c.init_mask is not None else -1, fanin))
    records.sort()
    po_kinds = sorted(
        producer_kind.get(p.net or p.name, "?") for p in nl.output_ports
    )
    blob = repr((len(nl.ports), records, po_kinds)).encode()
    return hashlib.sha256(blob).hexdigest()
