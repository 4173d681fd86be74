"""Bid/scenario data model and outcome records shared by all modules.

Positions (slot indices), not identities, carry outcomes.  All types are
immutable values and safe to share between workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .money import Money, rat_to_str

# Owner of a block entry: a real user slot index, or a fake injected by the
# strategic player.  Fakes get pseudo-indices after the real slots so that
# tie-breaking stays total and deterministic.
FAKE = "fake"


@dataclass(frozen=True)
class BidVector:
    """Ordered positional bids; the slot index is the only user identity."""

    slots: tuple[Money, ...]

    def __post_init__(self) -> None:
        for bid in self.slots:
            if bid.is_negative:
                raise ValueError("bids must be >= 0")

    @staticmethod
    def of(*amounts: int | str | float | Money) -> "BidVector":
        return BidVector(tuple(Money.of(a) for a in amounts))

    def __len__(self) -> int:
        return len(self.slots)

    def __getitem__(self, i: int) -> Money:
        return self.slots[i]

    def to_json(self) -> list[str]:
        return [str(b) for b in self.slots]


@dataclass(frozen=True)
class RankedView:
    """Stable descending order of a bid vector: (bid desc, slot index asc)."""

    permutation: tuple[int, ...]
    padded_zeros: int = 0


def ranked(bids: BidVector) -> RankedView:
    """Stable descending ranking; equal bids keep ascending slot order."""
    order = sorted(range(len(bids)), key=lambda i: (-bids[i].micro, i))
    return RankedView(tuple(order))


def replace_slot(bids: BidVector, i: int, value: Money) -> BidVector:
    """Return a copy of `bids` with slot `i` replaced by `value`."""
    if not 0 <= i < len(bids):
        raise IndexError(f"slot {i} out of range for vector of length {len(bids)}")
    if value.is_negative:
        raise ValueError("bids must be >= 0")
    slots = list(bids.slots)
    slots[i] = value
    return BidVector(tuple(slots))


@dataclass(frozen=True)
class Scenario:
    """True values plus (possibly deviated) bids and the strategic actor.

    The "coalition" encodes any strategic player: a sole user is a coalition
    of one user without the miner, the miner alone is an empty user set with
    miner_in_coalition=True.
    """

    true_values: tuple[Money, ...]
    bids: BidVector
    coalition_users: frozenset[int] = frozenset()
    miner_in_coalition: bool = False

    def __post_init__(self) -> None:
        if len(self.true_values) != len(self.bids):
            raise ValueError("true_values and bids must have equal length")
        for i in self.coalition_users:
            if not 0 <= i < len(self.bids):
                raise ValueError(f"coalition slot {i} out of range")

    @staticmethod
    def truthful(values: Sequence[int | str | float | Money],
                 coalition_users: Sequence[int] = (),
                 miner_in_coalition: bool = False) -> "Scenario":
        vals = tuple(Money.of(v) for v in values)
        return Scenario(vals, BidVector(vals), frozenset(coalition_users),
                        miner_in_coalition)

    def to_json(self) -> dict:
        return {
            "true_values": [str(v) for v in self.true_values],
            "bids": self.bids.to_json(),
            "coalition_users": sorted(self.coalition_users),
            "miner_in_coalition": self.miner_in_coalition,
        }


@dataclass(frozen=True)
class SlotOutcome:
    """Outcome of one included block entry (or padding slot)."""

    included: bool
    confirm_prob: Fraction
    conditional_payment: Money
    is_fake: bool = False
    owner: int | str | None = None  # real slot index, FAKE, or None for padding

    def __post_init__(self) -> None:
        if not 0 <= self.confirm_prob <= 1:
            raise ValueError("confirm_prob must lie in [0, 1]")


@dataclass(frozen=True)
class ExpectedOutcome:
    """Exact distribution summary of a block under a mechanism.

    miner_revenue + burn always equals the total expected payment collected
    from the included bids (total-payment conservation).
    """

    per_slot: tuple[SlotOutcome, ...]
    miner_revenue: Fraction
    burn: Fraction

    def __post_init__(self) -> None:
        if self.miner_revenue < 0 or self.burn < 0:
            raise ValueError("miner_revenue and burn must be >= 0")

    def expected_payment_total(self) -> Fraction:
        return sum((s.confirm_prob * s.conditional_payment.as_fraction()
                    for s in self.per_slot), Fraction(0))

    def to_json(self) -> dict:
        return {
            "miner_revenue": rat_to_str(self.miner_revenue),
            "burn": rat_to_str(self.burn),
            "slots": [
                {
                    "included": s.included,
                    "confirm_prob": rat_to_str(s.confirm_prob),
                    "payment": str(s.conditional_payment),
                    "owner": s.owner,
                    "is_fake": s.is_fake,
                }
                for s in self.per_slot
            ],
        }


@dataclass(frozen=True)
class RealizedOutcome:
    """One sampled confirmation draw; deterministic in (block, seed)."""

    confirmed: frozenset[int]
    payments: Mapping[int, Money] = field(default_factory=dict)
    miner_revenue: Money = Money(0)
    burn: Money = Money(0)
    seed: int = 0
