"""Exhaustive single bit-flip campaigns and double bit-flip rate derivation.

Every injection outcome lands in exactly one of four classes:

  Silent   - done correct, both module output words match the gold run
  Critical - done correct, both modules agree on the same wrong word
  Detected - done correct, the two module words differ
  Hang     - done deviates from the gold run at the gold completion time

Double bit-flip rates (one flip per replica) are derived from the single
bit-flip records by cross-replica composition; `brute_force_dbf` simulates
every pair and serves as the independence-free oracle.  All rates are exact
rationals and only become floats at model-training time.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence, TextIO

from .netlist import ModuleMap, Replica
from .sim import FaultSpec, RunResult, SimProgram, Stimulus, run_gold, run_with_fault


class CampaignError(Exception):
    pass


class EmptyCampaign(CampaignError):
    pass


class SharedStateUnsupported(CampaignError):
    """derive_dbf assumes disjoint replicas; shared DFFs need brute force."""


class OutcomeClass(Enum):
    SILENT = "Silent"
    CRITICAL = "Critical"
    DETECTED = "Detected"
    HANG = "Hang"


@dataclass(frozen=True)
class SbfRecord:
    ff_id: str
    cycle: int
    replica: Replica
    outcome: OutcomeClass
    done_ok: bool
    out_a: int
    out_b: int


@dataclass(frozen=True)
class ErrorRates:
    """The four outcome fractions plus the campaign denominator."""

    cer: Fraction
    der: Fraction
    her: Fraction
    ser: Fraction
    denominator: int

    def __post_init__(self):
        if self.denominator <= 0:
            raise EmptyCampaign("rate denominator must be positive")
        total = self.cer + self.der + self.her + self.ser
        if total != 1:
            raise CampaignError(f"rates sum to {total}, not 1")

    @classmethod
    def from_counts(cls, critical: int, detected: int, hang: int, silent: int) -> "ErrorRates":
        denom = critical + detected + hang + silent
        if denom == 0:
            raise EmptyCampaign("no outcomes to aggregate")
        return cls(
            Fraction(critical, denom),
            Fraction(detected, denom),
            Fraction(hang, denom),
            Fraction(silent, denom),
            denom,
        )

    def as_floats(self) -> dict[str, float]:
        return {
            "cer": float(self.cer),
            "der": float(self.der),
            "her": float(self.her),
            "ser": float(self.ser),
        }

    def rate(self, label: str) -> Fraction:
        return getattr(self, label.lower())


@dataclass(frozen=True)
class CampaignResult:
    """All SBF records of one design plus the gold context they refer to."""

    records: tuple[SbfRecord, ...]
    gold: RunResult
    module_map: ModuleMap

    @property
    def done_time(self) -> int:
        return self.gold.done_time


def classify(run: RunResult, gold: RunResult) -> OutcomeClass:
    """Outcome of one faulty run against the gold reference."""
    if not run.done_ok_at_t:
        return OutcomeClass.HANG
    if run.out_a == gold.out_a and run.out_b == gold.out_b:
        return OutcomeClass.SILENT
    if run.out_a == run.out_b and run.out_a != gold.out_a:
        return OutcomeClass.CRITICAL
    return OutcomeClass.DETECTED


def run_sbf_campaign(
    prog: SimProgram, stim: Stimulus, module_map: ModuleMap
) -> CampaignResult:
    """Inject one flip per (DFF, cycle) pair, cycles 0..T, exhaustively.

    Record order is (DFF order, cycle ascending) regardless of how runs are
    dispatched, so results are reproducible.
    """
    gold = run_gold(prog, stim)
    t_done = gold.done_time
    records = []
    for ff in prog.dff_names:
        replica = module_map.replica_of(ff)
        for cycle in range(t_done + 1):
            run = run_with_fault(prog, stim, FaultSpec(((ff, cycle),)), gold)
            records.append(
                SbfRecord(
                    ff_id=ff,
                    cycle=cycle,
                    replica=replica,
                    outcome=classify(run, gold),
                    done_ok=run.done_ok_at_t,
                    out_a=run.out_a,
                    out_b=run.out_b,
                )
            )
    return CampaignResult(tuple(records), gold, module_map)


def sbf_rates(records: Sequence[SbfRecord] | CampaignResult) -> ErrorRates:
    recs = records.records if isinstance(records, CampaignResult) else tuple(records)
    if not recs:
        raise EmptyCampaign("no SBF records")
    counts = {cls: 0 for cls in OutcomeClass}
    for r in recs:
        counts[r.outcome] += 1
    return ErrorRates.from_counts(
        counts[OutcomeClass.CRITICAL],
        counts[OutcomeClass.DETECTED],
        counts[OutcomeClass.HANG],
        counts[OutcomeClass.SILENT],
    )


def _pair_outcome(r1: SbfRecord, r2: SbfRecord, gold: RunResult) -> OutcomeClass:
    # With disjoint replicas the combined run has word A from the A-side
    # fault, word B from the B-side fault, and hangs iff either side hanged.
    if r1.outcome is OutcomeClass.HANG or r2.outcome is OutcomeClass.HANG:
        return OutcomeClass.HANG
    if r1.out_a == gold.out_a and r2.out_b == gold.out_b:
        return OutcomeClass.SILENT
    if r1.out_a == r2.out_b and r1.out_a != gold.out_a:
        return OutcomeClass.CRITICAL
    return OutcomeClass.DETECTED


def derive_dbf(result: CampaignResult, module_map: Optional[ModuleMap] = None) -> ErrorRates:
    """Double bit-flip rates from SBF records, no extra simulation.

    Composes every A-side record with every B-side record (all cycle
    combinations).  Requires disjoint replicas; designs with shared DFFs
    must use brute_force_dbf instead.
    """
    mm = module_map if module_map is not None else result.module_map
    if mm.ffs_shared:
        raise SharedStateUnsupported(
            f"{len(mm.ffs_shared)} shared DFF(s); cross-replica composition is unsound"
        )
    a_recs = [r for r in result.records if r.replica is Replica.A]
    b_recs = [r for r in result.records if r.replica is Replica.B]
    if not a_recs or not b_recs:
        raise EmptyCampaign("need records in both replicas")
    gold = result.gold
    counts = {cls: 0 for cls in OutcomeClass}
    for r1 in a_recs:
        for r2 in b_recs:
            counts[_pair_outcome(r1, r2, gold)] += 1
    return ErrorRates.from_counts(
        counts[OutcomeClass.CRITICAL],
        counts[OutcomeClass.DETECTED],
        counts[OutcomeClass.HANG],
        counts[OutcomeClass.SILENT],
    )


def brute_force_dbf(
    prog: SimProgram, stim: Stimulus, module_map: ModuleMap, gold: RunResult
) -> ErrorRates:
    """Simulate every cross-replica fault pair and classify each run.

    The independence-free reference for derive_dbf.  Same-module pairs are
    excluded by construction.
    """
    t_done = gold.done_time
    cycles = range(t_done + 1)
    a_faults = [(ff, c) for ff in module_map.ffs_a for c in cycles]
    b_faults = [(ff, c) for ff in module_map.ffs_b for c in cycles]
    if not a_faults or not b_faults:
        raise EmptyCampaign("need DFFs in both replicas")
    counts = {cls: 0 for cls in OutcomeClass}
    for fa in a_faults:
        for fb in b_faults:
            run = run_with_fault(prog, stim, FaultSpec((fa, fb)), gold)
            counts[classify(run, gold)] += 1
    return ErrorRates.from_counts(
        counts[OutcomeClass.CRITICAL],
        counts[OutcomeClass.DETECTED],
        counts[OutcomeClass.HANG],
        counts[OutcomeClass.SILENT],
    )


# ---------------------------------------------------------------------------
# campaign record files


def _rates_line(tag: str, rates: ErrorRates) -> str:
    counts = {k: int(rates.rate(k) * rates.denominator) for k in ("cer", "der", "her", "ser")}
    body = " ".join(f"{k}={counts[k]}/{rates.denominator}" for k in ("cer", "der", "her", "ser"))
    return f"# {tag} {body}"


def write_campaign_file(
    out: TextIO,
    result: CampaignResult,
    sbf: ErrorRates,
    dbf: Optional[ErrorRates] = None,
):
    """One record per line, then a footer with gold output, T and the rates."""
    for r in result.records:
        out.write(
            f"{r.ff_id},{r.cycle},{r.replica.value},{r.outcome.value},"
            f"{int(r.done_ok)},{r.out_a:#x},{r.out_b:#x}\n"
        )
    g = result.gold
    out.write(f"# gold out_a={g.out_a:#x} out_b={g.out_b:#x} T={g.done_time}\n")
    out.write(_rates_line("sbf", sbf) + "\n")
    if dbf is not None:
        out.write(_rates_line("dbf", dbf) + "\n")


def _parse_rates_line(line: str) -> ErrorRates:
    fields = dict(kv.split("=") for kv in line.split()[2:])
    parts = {k: Fraction(*map(int, v.split("/"))) for k, v in fields.items()}
    denom = int(fields["cer"].split("/")[1])
    return ErrorRates(parts["cer"], parts["der"], parts["her"], parts["ser"], denom)


def read_campaign_file(inp: TextIO) -> tuple[list[SbfRecord], dict]:
    """Inverse of write_campaign_file; footer comes back as a dict."""
    records: list[SbfRecord] = []
    footer: dict = {}
    for line in inp:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            tag = line.split()[1]
            if tag == "gold":
                fields = dict(kv.split("=") for kv in line.split()[2:])
                footer["gold"] = {
                    "out_a": int(fields["out_a"], 16),
                    "out_b": int(fields["out_b"], 16),
                    "T": int(fields["T"]),
                }
            else:
                footer[tag] = _parse_rates_line(line)
            continue
        ff, cycle, rep, cls, done_ok, a, b = line.split(",")
        records.append(
            SbfRecord(
                ff_id=ff,
                cycle=int(cycle),
                replica=Replica(rep),
                outcome=OutcomeClass(cls),
                done_ok=bool(int(done_ok)),
                out_a=int(a, 16),
                out_b=int(b, 16),
            )
        )
    return records, footer
