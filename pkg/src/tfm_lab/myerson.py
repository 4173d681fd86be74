"""Monotone-allocation and critical-bid checks for deterministic mechanisms.

For a deterministic monotone allocation, the unique incentive-compatible
payment of a confirmed bid is its critical bid: the minimal bid value at
which it would still be confirmed, holding everyone else fixed.  This module
measures allocations empirically (honest inclusion + evaluation), finds
critical bids by exact binary search on micro-units, and compares them to
the payments actually charged.  It also hosts the miner-revenue scan used to
cross-check that mechanisms passing both the user and the 1-coalition audits
never pay the miner anything.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import BidVector
from .mechanisms import Mechanism
from .money import Money, ZERO, rat_to_str


class NonMonotoneError(ValueError):
    """critical_bid was called on a non-monotone allocation."""


@dataclass(frozen=True)
class AllocationCurve:
    slot: int
    context: BidVector
    points: tuple[tuple[Money, Fraction], ...]  # (bid, confirm probability)

    def __post_init__(self) -> None:
        bids = [b for b, _ in self.points]
        if bids != sorted(set(bids)):
            raise ValueError("grid must be strictly increasing")


def _with_bid(context: BidVector, i: int, bid: Money) -> BidVector:
    """Insert the probed user's bid at slot i; context holds everyone else."""
    slots = context.slots[:i] + (bid,) + context.slots[i:]
    return BidVector(slots)


def confirm_prob(m: Mechanism, context: BidVector, i: int,
                 bid: Money) -> Fraction:
    bids = _with_bid(context, i, bid)
    block = m.include_honest(bids)
    outcome = m.evaluate(block)
    for slot, entry in zip(outcome.per_slot, block.entries):
        if entry.owner == i:
            return slot.confirm_prob
    return Fraction(0)


def allocation_curve(m: Mechanism, context: BidVector, i: int,
                     grid: list[Money]) -> AllocationCurve:
    points = tuple((t, confirm_prob(m, context, i, t)) for t in sorted(set(grid)))
    return AllocationCurve(i, context, points)


def check_monotone(curve: AllocationCurve) -> tuple[Money, Money] | None:
    """First adjacent grid pair where the confirmation probability drops."""
    for (b0, q0), (b1, q1) in zip(curve.points, curve.points[1:]):
        if q1 < q0:
            return (b0, b1)
    return None


def critical_bid(m: Mechanism, context: BidVector, i: int,
                 hi: Money) -> Money | None:
    """Exact minimal bid (in micro-units) at which slot i is confirmed,
    or None if it stays unconfirmed even bidding hi.  Deterministic
    mechanisms only."""
    if not m.is_deterministic:
        raise ValueError("critical_bid requires a deterministic mechanism")

    def confirmed(micro: int) -> bool:
        return confirm_prob(m, context, i, Money(micro)) == 1

    if not confirmed(hi.micro):
        return None
    lo, high = 0, hi.micro
    if confirmed(0):
        return ZERO
    # invariant: lo unconfirmed, high confirmed
    while high - lo > 1:
        mid = (lo + high) // 2
        if confirmed(mid):
            high = mid
        else:
            lo = mid
    if not confirmed(high) or confirmed(lo):  # pragma: no cover
        raise NonMonotoneError("allocation is not monotone around the boundary")
    return Money(high)


@dataclass(frozen=True)
class PaymentMismatch:
    slot: int
    bid: Money
    payment: Money
    critical: Money | None


@dataclass(frozen=True)
class PaymentRuleReport:
    bids: BidVector
    mismatches: tuple[PaymentMismatch, ...]

    @property
    def matches(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {
            "bids": self.bids.to_json(),
            "matches": self.matches,
            "mismatches": [
                {
                    "slot": mm.slot,
                    "bid": str(mm.bid),
                    "payment": str(mm.payment),
                    "critical": None if mm.critical is None else str(mm.critical),
                }
                for mm in self.mismatches
            ],
        }


def check_payment_rule(m: Mechanism, bids: BidVector) -> PaymentRuleReport:
    """Compare each confirmed bid's payment with its critical bid."""
    if not m.is_deterministic:
        raise ValueError("check_payment_rule requires a deterministic mechanism")
    block = m.include_honest(bids)
    outcome = m.evaluate(block)
    by_owner = {e.owner: s for e, s in zip(block.entries, outcome.per_slot)}
    mismatches = []
    for i in range(len(bids)):
        slot = by_owner.get(i)
        if slot is None or slot.confirm_prob != 1:
            continue
        context = BidVector(bids.slots[:i] + bids.slots[i + 1:])
        crit = critical_bid(m, context, i, bids[i])
        if crit != slot.conditional_payment:
            mismatches.append(PaymentMismatch(
                i, bids[i], slot.conditional_payment, crit))
    return PaymentRuleReport(bids, tuple(mismatches))


@dataclass(frozen=True)
class RevenueScanReport:
    max_revenue: Fraction
    attained_on: tuple[BidVector, ...]
    vectors_scanned: int

    def to_json(self) -> dict:
        return {
            "max_revenue": rat_to_str(self.max_revenue),
            "attained_on": [v.to_json() for v in self.attained_on],
            "vectors_scanned": self.vectors_scanned,
        }


def zero_revenue_scan(m: Mechanism, vectors: list[BidVector],
                      max_examples: int = 5) -> RevenueScanReport:
    """Maximum honest miner revenue over the given bid vectors."""
    best = Fraction(0)
    attained: list[BidVector] = []
    for v in vectors:
        mu = m.evaluate(m.include_honest(v)).miner_revenue
        if mu > best:
            best, attained = mu, [v]
        elif mu == best and len(attained) < max_examples:
            attained.append(v)
    return RevenueScanReport(best, tuple(attained[:max_examples]), len(vectors))
