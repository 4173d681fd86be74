"""Exact-arithmetic transaction fee mechanisms and incentive audits."""

from .auditor import (AuditConfig, AuditReport, CombinatorialLimitError,
                      Witness, audit_mic, audit_scp, audit_uic,
                      candidate_bids, enumerate_miner_actions)
from .core import (BidVector, ExpectedOutcome, RankedView, RealizedOutcome,
                   Scenario, SlotOutcome, ranked, replace_slot)
from .mechanisms import (BlockEntry, BurningSecondPrice, FirstPrice,
                         FirstPriceOrFree, IncludedBlock, Mechanism,
                         MechanismError, PostedPriceBurnAll,
                         PostedPriceNoBurn, SecondPrice, Solitary,
                         SolitaryOrPostedPrice, Trivial)
from .money import GAMMA_ONE, GAMMA_ZERO, Gamma, Money, ZERO
from .myerson import (allocation_curve, check_monotone, check_payment_rule,
                      critical_bid, zero_revenue_scan)
from .utility import StrategyProfile, expected_utility, honest_profile, utility_of

__all__ = [name for name in dir() if not name.startswith("_")]
