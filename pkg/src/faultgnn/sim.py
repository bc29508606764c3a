"""Cycle-accurate two-value simulation with flip-flop bit-flip injection.

A Netlist is compiled once into a SimProgram (topologically ordered ops over
flat value slots); any number of runs can then execute concurrently against
the same program, each with its own state buffer.  Faults flip a DFF's stored
bit immediately after the clock edge that begins the target cycle, before
the combinational logic of that cycle settles.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, TextIO

from .netlist import (
    CombinationalCycle,
    Netlist,
    PrimitiveKind,
    _cycle_witness,
    _topo_comb_cells,
)


class SimError(Exception):
    pass


class GoldNeverDone(SimError):
    """The fault-free run never asserted done within the cycle horizon."""


class InvalidFault(SimError):
    pass


class BadStimulus(SimError):
    pass


# opcodes
_CONST = 0
_BUF = 1
_NOT = 2
_AND = 3
_OR = 4
_NAND = 5
_NOR = 6
_XOR = 7
_XNOR = 8
_MUX = 9
_LUT = 10

_OPCODE = {
    PrimitiveKind.CONST0: _CONST,
    PrimitiveKind.CONST1: _CONST,
    PrimitiveKind.BUF: _BUF,
    PrimitiveKind.NOT: _NOT,
    PrimitiveKind.AND2: _AND,
    PrimitiveKind.OR2: _OR,
    PrimitiveKind.NAND2: _NAND,
    PrimitiveKind.NOR2: _NOR,
    PrimitiveKind.XOR2: _XOR,
    PrimitiveKind.XNOR2: _XNOR,
    PrimitiveKind.MUX2: _MUX,
    PrimitiveKind.LUT2: _LUT,
    PrimitiveKind.LUT3: _LUT,
    PrimitiveKind.LUT4: _LUT,
    PrimitiveKind.LUT5: _LUT,
    PrimitiveKind.LUT6: _LUT,
}

_A_PORT_RE = re.compile(r"\Aout_a_(\d+)\Z")
_B_PORT_RE = re.compile(r"\Aout_b_(\d+)\Z")


@dataclass(frozen=True)
class WatchSpec:
    """Which outputs form the module-A word, the module-B word and done."""

    a_ports: tuple[str, ...]
    b_ports: tuple[str, ...]
    done: str


def infer_watch(nl: Netlist) -> WatchSpec:
    """Group outputs named out_a_<i>/out_b_<i> into words, LSB first.

    Designs without that naming get all non-done outputs as word A.
    """
    a_bits: list[tuple[int, str]] = []
    b_bits: list[tuple[int, str]] = []
    other: list[str] = []
    for p in nl.output_ports:
        if p.name == nl.done_port.name:
            continue
        m = _A_PORT_RE.match(p.name)
        if m:
            a_bits.append((int(m.group(1)), p.name))
            continue
        m = _B_PORT_RE.match(p.name)
        if m:
            b_bits.append((int(m.group(1)), p.name))
            continue
        other.append(p.name)
    if a_bits or b_bits:
        if other:
            raise SimError(f"outputs {other} fit neither out_a_<i> nor out_b_<i>")
        a = tuple(name for _, name in sorted(a_bits))
        b = tuple(name for _, name in sorted(b_bits))
    else:
        a = tuple(other)
        b = ()
    return WatchSpec(a, b, nl.done_port.name)


@dataclass(frozen=True)
class Stimulus:
    """One input vector held constant every cycle, plus the cycle horizon."""

    values: Mapping[str, int]
    max_cycles: int = 64

    def word(self, input_order: Sequence[str]) -> int:
        w = 0
        for i, name in enumerate(input_order):
            w |= (self.values[name] & 1) << i
        return w


def stimulus_from_word(nl_or_prog, word: int, max_cycles: int = 64) -> Stimulus:
    """Spread an integer over the primary inputs, bit i to the i-th input."""
    names = (
        nl_or_prog.input_names
        if isinstance(nl_or_prog, SimProgram)
        else tuple(p.name for p in nl_or_prog.input_ports)
    )
    return Stimulus({n: (word >> i) & 1 for i, n in enumerate(names)}, max_cycles)


@dataclass(frozen=True)
class FaultSpec:
    """Bit flips to inject: (dff name, cycle) pairs. Flips XOR together."""

    injections: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class RunResult:
    done_time: Optional[int]
    done_ok_at_t: bool
    out_a: int
    out_b: int
    # per-cycle DFF state words (cycles 0..done_time), kept for fast faulty
    # replay; not part of the value contract
    states: tuple[int, ...] = field(default=(), repr=False, compare=False)


class SimProgram:
    """Compiled evaluation plan. Immutable; share freely across runs."""

    def __init__(self, nl: Netlist, watch: Optional[WatchSpec] = None):
        order, leftover = _topo_comb_cells(nl)
        if leftover:
            raise CombinationalCycle(
                f"combinational cycle through {leftover[0]}", _cycle_witness(nl, leftover)
            )
        slot: dict[str, int] = {}

        def slot_of(net: str) -> int:
            if net not in slot:
                slot[net] = len(slot)
            return slot[net]

        self.input_names = tuple(p.name for p in nl.input_ports)
        self._input_slots = tuple(slot_of(p.net or p.name) for p in nl.input_ports)
        self.dff_names = tuple(c.name for c in nl.dffs)
        self._dff_index = {n: i for i, n in enumerate(self.dff_names)}
        self._dff_q = tuple(slot_of(c.output_net) for c in nl.dffs)
        self._dff_d = tuple(slot_of(c.pins["D"]) for c in nl.dffs)

        ops = []
        for c in order:
            code = _OPCODE[c.kind]
            ins = tuple(slot_of(n) for n in c.input_nets())
            out = slot_of(c.output_net)
            if code == _CONST:
                mask = 1 if c.kind is PrimitiveKind.CONST1 else 0
            else:
                mask = c.init_mask if c.init_mask is not None else 0
            ops.append((code, out, ins, mask))
        self._ops = tuple(ops)
        self.eval_order = tuple(c.name for c in order)

        w = watch if watch is not None else infer_watch(nl)
        port_net = {p.name: (p.net or p.name) for p in nl.ports}
        self.watch = w
        self._a_slots = tuple(slot_of(port_net[n]) for n in w.a_ports)
        self._b_slots = tuple(slot_of(port_net[n]) for n in w.b_ports)
        self._done_slot = slot_of(port_net[w.done])
        self.n_slots = len(slot)
        self.width_a = len(w.a_ports)
        self.width_b = len(w.b_ports)

    # -- execution ------------------------------------------------------

    def _check_stim(self, stim: Stimulus):
        got = set(stim.values)
        want = set(self.input_names)
        if got != want:
            raise BadStimulus(
                f"stimulus covers {sorted(got)}, inputs are {sorted(want)}"
            )
        if stim.max_cycles <= 0:
            raise BadStimulus("max_cycles must be positive")

    def _settle(self, v: list[int]):
        for code, out, ins, mask in self._ops:
            if code == _XOR:
                v[out] = v[ins[0]] ^ v[ins[1]]
            elif code == _AND:
                v[out] = v[ins[0]] & v[ins[1]]
            elif code == _NAND:
                v[out] = 1 - (v[ins[0]] & v[ins[1]])
            elif code == _OR:
                v[out] = v[ins[0]] | v[ins[1]]
            elif code == _NOR:
                v[out] = 1 - (v[ins[0]] | v[ins[1]])
            elif code == _XNOR:
                v[out] = 1 - (v[ins[0]] ^ v[ins[1]])
            elif code == _NOT:
                v[out] = 1 - v[ins[0]]
            elif code == _BUF:
                v[out] = v[ins[0]]
            elif code == _MUX:
                v[out] = v[ins[1]] if v[ins[2]] else v[ins[0]]
            elif code == _LUT:
                idx = 0
                for k, s in enumerate(ins):
                    idx |= v[s] << k
                v[out] = (mask >> idx) & 1
            else:  # _CONST
                v[out] = mask

    def _word(self, v: list[int], slots: tuple[int, ...]) -> int:
        w = 0
        for i, s in enumerate(slots):
            w |= v[s] << i
        return w

    def _state_word(self, state: list[int]) -> int:
        w = 0
        for i, b in enumerate(state):
            w |= b << i
        return w

    def _emit_trace(self, trace: TextIO, cycle: int, v: list[int]):
        for name, s in zip(self.watch.a_ports, self._a_slots):
            trace.write(f"{cycle} {name} {v[s]}\n")
        for name, s in zip(self.watch.b_ports, self._b_slots):
            trace.write(f"{cycle} {name} {v[s]}\n")
        trace.write(f"{cycle} {self.watch.done} {v[self._done_slot]}\n")


def compile_netlist(nl: Netlist, watch: Optional[WatchSpec] = None) -> SimProgram:
    """Compile a valid netlist into an executable SimProgram."""
    return SimProgram(nl, watch)


def run_gold(prog: SimProgram, stim: Stimulus, trace: Optional[TextIO] = None) -> RunResult:
    """Fault-free run. done_time is the first cycle with done == 1."""
    prog._check_stim(stim)
    v = [0] * prog.n_slots
    for name, s in zip(prog.input_names, prog._input_slots):
        v[s] = stim.values[name] & 1
    state = [0] * len(prog.dff_names)
    states: list[int] = []
    for cycle in range(stim.max_cycles):
        for i, s in enumerate(prog._dff_q):
            v[s] = state[i]
        prog._settle(v)
        states.append(prog._state_word(state))
        if trace is not None:
            prog._emit_trace(trace, cycle, v)
        if v[prog._done_slot]:
            return RunResult(
                done_time=cycle,
                done_ok_at_t=True,
                out_a=prog._word(v, prog._a_slots),
                out_b=prog._word(v, prog._b_slots),
                states=tuple(states),
            )
        for i, s in enumerate(prog._dff_d):
            state[i] = v[s]
    raise GoldNeverDone(f"done not asserted within {stim.max_cycles} cycles")


def run_with_fault(
    prog: SimProgram,
    stim: Stimulus,
    fault: FaultSpec,
    gold: RunResult,
    trace: Optional[TextIO] = None,
) -> RunResult:
    """Faulty run sampled at the gold completion time.

    Each (ff, cycle) injection inverts that DFF's stored bit right after the
    clock edge starting `cycle`; flips at the same (ff, cycle) cancel.
    """
    prog._check_stim(stim)
    if gold.done_time is None:
        raise InvalidFault("gold run has no completion time")
    t_done = gold.done_time
    flips: dict[int, int] = {}
    for ff, cycle in fault.injections:
        if ff not in prog._dff_index:
            raise InvalidFault(f"unknown DFF {ff!r}")
        if not 0 <= cycle <= t_done:
            raise InvalidFault(f"injection cycle {cycle} outside [0, {t_done}]")
        if cycle >= stim.max_cycles:
            raise InvalidFault(f"injection cycle {cycle} outside stimulus horizon")
        flips[cycle] = flips.get(cycle, 0) ^ (1 << prog._dff_index[ff])

    if not flips:
        return RunResult(gold.done_time, True, gold.out_a, gold.out_b)
    if len(gold.states) != t_done + 1:
        raise SimError("gold result lacks recorded states; pass the result of run_gold")

    n_dff = len(prog.dff_names)
    first = 0 if trace is not None else min(flips)

    v = [0] * prog.n_slots
    for name, s in zip(prog.input_names, prog._input_slots):
        v[s] = stim.values[name] & 1

    # fast-forward using the recorded gold state up to the first injection
    state = [(gold.states[first] >> i) & 1 for i in range(n_dff)]
    last_flip = max(flips)
    for cycle in range(first, t_done + 1):
        word = flips.get(cycle, 0)
        if word:
            for i in range(n_dff):
                if (word >> i) & 1:
                    state[i] ^= 1
        # once every injection is in, a state equal to gold's cannot diverge
        if trace is None and cycle >= last_flip and cycle < t_done:
            if prog._state_word(state) == gold.states[cycle]:
                return RunResult(t_done, True, gold.out_a, gold.out_b)
        for i, s in enumerate(prog._dff_q):
            v[s] = state[i]
        prog._settle(v)
        if trace is not None:
            prog._emit_trace(trace, cycle, v)
        if cycle == t_done:
            return RunResult(
                done_time=t_done,
                done_ok_at_t=bool(v[prog._done_slot]),
                out_a=prog._word(v, prog._a_slots),
                out_b=prog._word(v, prog._b_slots),
            )
        for i, s in enumerate(prog._dff_d):
            state[i] = v[s]
    raise AssertionError("unreachable")
