"""Brute-force incentive audits: UIC, MIC, and c-SCP on finite grids.

A PASS verdict is always "pass-on-grid": no profitable deviation exists among
the enumerated candidates, which cover every critical point the known
violations use (existing bids, honest payments, reserve prices, each +- eps).
A FAIL verdict ships a replayable witness and is a proof.

Two engines produce identical verdicts and witnesses: a pure-Fraction exact
engine (this module) and a compiled integer engine (`_fast`).  Every witness,
whichever engine found it, is re-verified through the exact path before it is
emitted.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .core import BidVector, Scenario, replace_slot
from .mechanisms import BlockEntry, IncludedBlock, Mechanism, MechanismError
from .money import Gamma, GAMMA_ZERO, Money, ZERO, rat_to_str
from .utility import (FAKE, HONEST, StrategyProfile, honest_profile,
                      utility_of)

PASS = "pass-on-grid"
FAIL = "fail"


class CombinatorialLimitError(RuntimeError):
    """The requested enumeration exceeds the configured exhaustive limits."""


def _default_grid() -> tuple[Money, ...]:
    return tuple(Money(i * 500_000) for i in range(11))


@dataclass(frozen=True)
class AuditConfig:
    epsilon: Money = Money.of("0.25")
    max_fake_bids: int = 2
    max_vector_len: int = 6
    value_grid: tuple[Money, ...] = field(default_factory=_default_grid)
    gamma: Gamma = GAMMA_ZERO
    exhaustive_inclusion_limit: int = 12
    max_witnesses: int = 3
    engine: str = "auto"  # auto | exact | fast

    def __post_init__(self) -> None:
        if self.epsilon.micro <= 0:
            raise ValueError("epsilon must be > 0")
        if not self.value_grid:
            raise ValueError("value grid must be non-empty")
        if self.engine not in ("auto", "exact", "fast"):
            raise ValueError(f"unknown engine {self.engine!r}")


@dataclass(frozen=True)
class Witness:
    scenario: Scenario
    deviated_profile: StrategyProfile
    honest_utility: Fraction
    deviated_utility: Fraction
    gain: Fraction

    def __post_init__(self) -> None:
        if self.gain != self.deviated_utility - self.honest_utility:
            raise ValueError("gain must equal deviated - honest")
        if self.gain <= 0:
            raise ValueError("witness gain must be strictly positive")

    def to_json(self) -> dict:
        prof = self.deviated_profile
        if isinstance(prof.miner_inclusion, IncludedBlock):
            inclusion = [
                {"bid": str(e.bid), "owner": e.owner}
                for e in prof.miner_inclusion.entries if not e.is_padding
            ]
        else:
            inclusion = HONEST
        return {
            "scenario": self.scenario.to_json(),
            "profile": {
                "bids": prof.bids.to_json(),
                "fake_bids": [str(f) for f in prof.fake_bids],
                "inclusion": inclusion,
            },
            "honest": rat_to_str(self.honest_utility),
            "deviated": rat_to_str(self.deviated_utility),
            "gain": rat_to_str(self.gain),
        }


@dataclass(frozen=True)
class AuditReport:
    prop: str  # "UIC" | "MIC" | "SCP"
    gamma: Gamma
    verdict: str
    witnesses: tuple[Witness, ...]
    scenarios_checked: int
    deviations_checked: int
    c: int | None = None

    def __post_init__(self) -> None:
        if (self.verdict == FAIL) != bool(self.witnesses):
            raise ValueError("FAIL iff at least one witness")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json(self) -> dict:
        out = {
            "property": self.prop,
            "gamma": str(self.gamma),
            "verdict": self.verdict,
            "witnesses": [w.to_json() for w in self.witnesses],
            "scenarios_checked": self.scenarios_checked,
            "deviations_checked": self.deviations_checked,
        }
        if self.c is not None:
            out["c"] = self.c
        return out


# -- candidate grids ------------------------------------------------------

def candidate_bids(bids: BidVector, payments: list[Money],
                   cfg: AuditConfig) -> tuple[Money, ...]:
    """Deviation bid values worth trying: {0}, every bid, every payment,
    each offset by +-epsilon, and just above the maximum bid."""
    eps = cfg.epsilon
    cands = {ZERO}
    for b in bids.slots:
        cands.update((b, b + eps, b - eps))
    for p in payments:
        cands.update((p, p + eps, p - eps))
    if len(bids):
        cands.add(max(bids.slots) + eps)
    return tuple(sorted(c for c in cands if not c.is_negative))


def reference_payments(m: Mechanism, bids: BidVector) -> list[Money]:
    """Payment values the mechanism can charge in this context: honest-outcome
    payments plus any posted reserve price."""
    outcome = m.evaluate(m.include_honest(bids))
    pays = {s.conditional_payment for s in outcome.per_slot}
    reserve = getattr(m, "reserve", None)
    if reserve is not None:
        pays.add(reserve)
    pays.discard(ZERO)
    return sorted(pays)


def scenario_candidates(m: Mechanism, scenario: Scenario,
                        cfg: AuditConfig) -> tuple[Money, ...]:
    return candidate_bids(scenario.bids, reference_payments(m, scenario.bids), cfg)


def _fake_multisets(cands: tuple[Money, ...], max_fakes: int):
    for n in range(max_fakes + 1):
        yield from itertools.combinations_with_replacement(cands, n)


# -- miner action space ---------------------------------------------------

def enumerate_miner_actions(m: Mechanism, bids: BidVector,
                            cfg: AuditConfig,
                            candidates: tuple[Money, ...] | None = None
                            ) -> list[StrategyProfile]:
    """Every block a strategic miner can build from truthful bids: any subset
    of real transactions (up to the block size) plus up to max_fake_bids fake
    bids drawn from the candidate grid.

    Subset size is capped at the block size before fakes are added; blocks
    that end up over capacity are rejected later at evaluation time, keeping
    the advertised action count a simple product.
    """
    if len(bids) > cfg.exhaustive_inclusion_limit:
        raise CombinatorialLimitError(
            f"{len(bids)} mempool bids exceed the exhaustive limit "
            f"{cfg.exhaustive_inclusion_limit}"
        )
    if candidates is None:
        candidates = candidate_bids(bids, reference_payments(m, bids), cfg)
    cap = m.capacity
    max_subset = len(bids) if cap is None else min(len(bids), cap)
    profiles = []
    indices = range(len(bids))
    for size in range(max_subset + 1):
        for subset in itertools.combinations(indices, size):
            for fakes in _fake_multisets(candidates, cfg.max_fake_bids):
                entries = tuple(BlockEntry(bids[i], i) for i in subset)
                entries += tuple(BlockEntry(f, FAKE) for f in fakes)
                profiles.append(StrategyProfile(
                    bids, tuple(fakes), IncludedBlock(entries)))
    return profiles


# -- shared audit plumbing -------------------------------------------------

class _Run:
    """Mutable bookkeeping for one audit pass."""

    def __init__(self, m: Mechanism, cfg: AuditConfig):
        self.m = m
        self.cfg = cfg
        self.witnesses: list[Witness] = []
        self.scenarios_checked = 0
        self.deviations_checked = 0

    @property
    def full(self) -> bool:
        return len(self.witnesses) >= self.cfg.max_witnesses

    def record(self, scenario: Scenario, profile: StrategyProfile,
               honest: Fraction, deviated: Fraction) -> None:
        # replay from scratch so the witness is self-certifying
        h = utility_of(self.m, scenario, honest_profile(scenario), self.cfg.gamma)
        d = utility_of(self.m, scenario, profile, self.cfg.gamma)
        if (h, d) != (honest, deviated):  # pragma: no cover - engine bug guard
            raise AssertionError("witness failed replay verification")
        self.witnesses.append(Witness(scenario, profile, h, d, d - h))

    def report(self, prop: str, c: int | None = None) -> AuditReport:
        verdict = FAIL if self.witnesses else PASS
        return AuditReport(prop, self.cfg.gamma, verdict, tuple(self.witnesses),
                           self.scenarios_checked, self.deviations_checked, c)


def _check_lengths(scenarios: list[Scenario], cfg: AuditConfig) -> None:
    for s in scenarios:
        if len(s.bids) > cfg.max_vector_len:
            raise ValueError(
                f"scenario with {len(s.bids)} slots exceeds max_vector_len "
                f"{cfg.max_vector_len}"
            )


def _use_fast(cfg: AuditConfig, m: Mechanism) -> bool:
    if cfg.engine == "exact":
        return False
    try:
        from . import _fast
    except ImportError:  # pragma: no cover - numba is an install requirement
        if cfg.engine == "fast":
            raise
        return False
    ok = _fast.supports(m, cfg)
    if cfg.engine == "fast" and not ok:
        raise ValueError("fast engine cannot handle this configuration")
    return ok


# -- UIC -------------------------------------------------------------------

def audit_uic(m: Mechanism, scenarios: list[Scenario],
              cfg: AuditConfig) -> AuditReport:
    """Can any single user gain by misreporting (or injecting fakes) while
    the miner follows the rules?"""
    _check_lengths(scenarios, cfg)
    if _use_fast(cfg, m):
        from . import _fast
        return _fast.audit_uic(m, scenarios, cfg)
    run = _Run(m, cfg)
    for base in scenarios:
        if run.full:
            break
        run.scenarios_checked += 1
        cands = scenario_candidates(m, base, cfg)
        truthful = base.bids
        for i in range(len(truthful)):
            sc = replace(base, coalition_users=frozenset({i}),
                         miner_in_coalition=False)
            honest = utility_of(m, sc, honest_profile(sc), cfg.gamma)
            found = False
            for b in cands:
                for fakes in _fake_multisets(cands, cfg.max_fake_bids):
                    profile = StrategyProfile(
                        replace_slot(truthful, i, b), tuple(fakes), HONEST)
                    run.deviations_checked += 1
                    u = utility_of(m, sc, profile, cfg.gamma)
                    if u > honest:
                        run.record(sc, profile, honest, u)
                        found = True
                        break
                if found:
                    break
            if run.full:
                break
    return run.report("UIC")


# -- MIC -------------------------------------------------------------------

def audit_mic(m: Mechanism, scenarios: list[Scenario],
              cfg: AuditConfig) -> AuditReport:
    """Can the miner alone gain over honest inclusion, given truthful users?"""
    _check_lengths(scenarios, cfg)
    if _use_fast(cfg, m):
        from . import _fast
        return _fast.audit_mic(m, scenarios, cfg)
    run = _Run(m, cfg)
    for base in scenarios:
        if run.full:
            break
        run.scenarios_checked += 1
        sc = replace(base, coalition_users=frozenset(), miner_in_coalition=True)
        honest = utility_of(m, sc, honest_profile(sc), cfg.gamma)
        cands = scenario_candidates(m, base, cfg)
        for profile in enumerate_miner_actions(m, base.bids, cfg, cands):
            try:
                u = utility_of(m, sc, profile, cfg.gamma)
            except MechanismError:
                continue  # block over capacity: not a feasible action
            run.deviations_checked += 1
            if u > honest:
                run.record(sc, profile, honest, u)
                break
    return run.report("MIC")


# -- c-SCP -----------------------------------------------------------------

def _coalition_block_deviations(m, truthful: BidVector, coal: tuple[int, ...],
                                cands: tuple[Money, ...], cfg: AuditConfig):
    """All blocks a miner+coalition side contract can realize.

    Coalition members either stay out of the block (contributing nothing) or
    appear with any candidate bid; non-coalition users are truthful and may
    only be excluded.  Fakes come from the candidate grid.  Over-capacity
    blocks are skipped.
    """
    cap = m.capacity
    noncoal = [i for i in range(len(truthful)) if i not in coal]
    member_opts = [(None, *cands)] * len(coal)
    for size in range(len(noncoal) + 1):
        for nc_subset in itertools.combinations(noncoal, size):
            for opts in itertools.product(*member_opts):
                n_members = sum(1 for o in opts if o is not None)
                for fakes in _fake_multisets(cands, cfg.max_fake_bids):
                    total = size + n_members + len(fakes)
                    if cap is not None and total > cap:
                        continue
                    bids = truthful
                    entries = [BlockEntry(truthful[i], i) for i in nc_subset]
                    for member, opt in zip(coal, opts):
                        if opt is not None:
                            bids = replace_slot(bids, member, opt)
                            entries.append(BlockEntry(opt, member))
                    entries += [BlockEntry(f, FAKE) for f in fakes]
                    yield StrategyProfile(bids, tuple(fakes),
                                          IncludedBlock(tuple(entries)))


def audit_scp(m: Mechanism, c: int, scenarios: list[Scenario],
              cfg: AuditConfig) -> AuditReport:
    """Can the miner plus up to c users gain jointly by any side contract?"""
    if c < 1:
        raise ValueError("c must be >= 1")
    _check_lengths(scenarios, cfg)
    if _use_fast(cfg, m):
        from . import _fast
        return _fast.audit_scp(m, c, scenarios, cfg)
    run = _Run(m, cfg)
    for base in scenarios:
        if run.full:
            break
        run.scenarios_checked += 1
        cands = scenario_candidates(m, base, cfg)
        n = len(base.bids)
        for size in range(1, min(c, n) + 1):
            for coal in itertools.combinations(range(n), size):
                sc = replace(base, coalition_users=frozenset(coal),
                             miner_in_coalition=True)
                honest = utility_of(m, sc, honest_profile(sc), cfg.gamma)
                for profile in _coalition_block_deviations(
                        m, base.bids, coal, cands, cfg):
                    run.deviations_checked += 1
                    u = utility_of(m, sc, profile, cfg.gamma)
                    if u > honest:
                        run.record(sc, profile, honest, u)
                        break
                if run.full:
                    break
            if run.full:
                break
    return run.report("SCP", c=c)


def scp_covers(m: Mechanism, witness: Witness, cfg: AuditConfig) -> bool:
    """Whether a UIC witness's deviation lies inside the c-SCP search space
    for the coalition of the miner and that user (honest-inclusion, no-fake
    witnesses only)."""
    prof = witness.deviated_profile
    if prof.fake_bids or isinstance(prof.miner_inclusion, IncludedBlock):
        return False
    (user,) = witness.scenario.coalition_users
    cands = scenario_candidates(
        m, replace(witness.scenario, coalition_users=frozenset()), cfg)
    return prof.bids[user] in cands
