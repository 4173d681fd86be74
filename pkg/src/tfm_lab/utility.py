"""Exact expected utility of a strategic player under the strictness knob.

A strategic player is modeled as a coalition: a lone user is a coalition of
one user without the miner, the lone miner is an empty user set with the
miner flag set.  The same formula therefore serves the truthful-bidding,
honest-inclusion, and side-contract audits:

    u = [mu if the miner is in the coalition]
      + sum over coalition-owned included entries of
            q * (v - p) - (1 - q) * gamma * max(0, b - v)

where q is the entry's confirmation marginal, p its conditional payment,
b its bid and v its true value (zero for fakes).  Entries left out of the
block contribute nothing, so overbids and fakes that never land in a block
are free at any gamma.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import FAKE, BidVector, ExpectedOutcome, Scenario
from .mechanisms import BlockEntry, IncludedBlock, Mechanism
from .money import Gamma, Money, ZERO

HONEST = "honest"


@dataclass(frozen=True)
class StrategyProfile:
    """What the strategic player actually does.

    Real slots outside the coalition must bid their true value; the auditor
    builds profiles that way and `check_against` enforces it.  Fake bids are
    only representable as placed bids: a fake kept out of the block has no
    effect and no cost, so it is not a strategy dimension.
    """

    bids: BidVector
    fake_bids: tuple[Money, ...] = ()
    miner_inclusion: IncludedBlock | str = HONEST

    def __post_init__(self) -> None:
        for f in self.fake_bids:
            if f.is_negative:
                raise ValueError("fake bids must be >= 0")
        if isinstance(self.miner_inclusion, IncludedBlock):
            in_block = sorted(
                e.bid.micro for e in self.miner_inclusion.entries if e.owner == FAKE
            )
            declared = sorted(f.micro for f in self.fake_bids)
            if in_block != declared:
                raise ValueError(
                    "fake bids in the explicit block must match profile.fake_bids"
                )

    def check_against(self, scenario: Scenario) -> None:
        if len(self.bids) != len(scenario.bids):
            raise ValueError("profile bids do not match the scenario's slots")
        for i, bid in enumerate(self.bids.slots):
            if i not in scenario.coalition_users and bid != scenario.true_values[i]:
                raise ValueError(f"non-coalition slot {i} must bid truthfully")


def honest_profile(scenario: Scenario, m: Mechanism | None = None) -> StrategyProfile:
    """Everyone bids their true value, no fakes, rule-following inclusion."""
    return StrategyProfile(BidVector(scenario.true_values))


def resolve_block(m: Mechanism, profile: StrategyProfile) -> IncludedBlock:
    """The block produced by the profile: explicit, or honest inclusion over
    the mempool of real bids plus the profile's fakes."""
    if isinstance(profile.miner_inclusion, IncludedBlock):
        return profile.miner_inclusion
    mempool = [BlockEntry(b, i) for i, b in enumerate(profile.bids.slots)]
    mempool += [BlockEntry(f, FAKE) for f in profile.fake_bids]
    return m.include_mempool(mempool)


def expected_utility(scenario: Scenario, profile: StrategyProfile,
                     outcome: ExpectedOutcome, gamma: Gamma,
                     block: IncludedBlock) -> Fraction:
    """Exact coalition utility of `outcome`, which must be the evaluation of
    `block`, the block realized by `profile`."""
    if len(outcome.per_slot) != len(block.entries):
        raise ValueError("outcome and block disagree on entry count")
    g = gamma.as_fraction()
    u = outcome.miner_revenue if scenario.miner_in_coalition else Fraction(0)
    for slot, entry in zip(outcome.per_slot, block.entries):
        if entry.is_padding:
            continue
        if entry.owner == FAKE:
            value = ZERO
        elif entry.owner in scenario.coalition_users:
            value = scenario.true_values[entry.owner]
        else:
            continue
        q = slot.confirm_prob
        overbid = entry.bid - value
        penalty = overbid.as_fraction() if overbid.micro > 0 else Fraction(0)
        u += q * (value.as_fraction() - slot.conditional_payment.as_fraction())
        u -= (1 - q) * g * penalty
    return u


def utility_of(m: Mechanism, scenario: Scenario, profile: StrategyProfile,
               gamma: Gamma) -> Fraction:
    """Convenience: resolve the block, evaluate, and score in one step."""
    block = resolve_block(m, profile)
    return expected_utility(scenario, profile, m.evaluate(block), gamma, block)
