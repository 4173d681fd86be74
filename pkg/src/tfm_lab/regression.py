"""Named regression claims: one canned audit per published incentive result.

Each claim pins a mechanism, a property, a strictness level, and an expected
verdict, so the whole compatibility/impossibility picture is machine-checked
in one run.  FAIL expectations are witness-backed (a strict-gain deviation is
found and replayed); PASS expectations hold over the standard audit grid.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable

from .auditor import (AuditConfig, AuditReport, FAIL, PASS, audit_mic,
                      audit_scp, audit_uic)
from .core import BidVector, Scenario
from .mechanisms import (BlockEntry, BurningSecondPrice, FirstPrice,
                         FirstPriceOrFree, IncludedBlock, Mechanism,
                         PostedPriceBurnAll, PostedPriceNoBurn, SecondPrice,
                         Solitary, SolitaryOrPostedPrice, Trivial)
from .money import GAMMA_ONE, GAMMA_ZERO, Gamma, Money, rat_to_str
from .myerson import zero_revenue_scan
from .scenarios import grid_scenarios
from .utility import StrategyProfile, honest_profile, utility_of

GAMMA_HALF = Gamma(1, 2)
RESERVE = Money.of("2.5")

# The nine standard mechanisms, with parameters sized to the audit grid
# (values 0..5, vectors of length <= 4).
BUILTINS: dict[str, Mechanism] = {
    "first_price": FirstPrice(4),
    "second_price": SecondPrice(3),
    "posted_price_no_burn": PostedPriceNoBurn(RESERVE),
    "posted_price_burn_all": PostedPriceBurnAll(RESERVE),
    "first_price_or_free": FirstPriceOrFree(),
    "burning_second_price": BurningSecondPrice(4, 2, 2, GAMMA_ONE, 1),
    "solitary": Solitary(),
    "solitary_or_posted_price": SolitaryOrPostedPrice(RESERVE),
    "trivial": Trivial(),
}

# Finite-block posted-price variant: two slots, so three grid bids above the
# reserve congest the block.
BURN_ALL_FINITE = PostedPriceBurnAll(RESERVE, 2)

# Burning second-price variants with floor(gamma*k/c) attained exactly.
BURNING_VARIANTS: dict[tuple[str, int], BurningSecondPrice] = {
    ("1/1", 1): BurningSecondPrice(4, 2, 2, GAMMA_ONE, 1),
    ("1/1", 2): BurningSecondPrice(3, 2, 1, GAMMA_ONE, 2),
    ("1/2", 1): BurningSecondPrice(3, 2, 1, GAMMA_HALF, 1),
    ("1/2", 2): BurningSecondPrice(5, 4, 1, GAMMA_HALF, 2),
}


@dataclass(frozen=True)
class CheckResult:
    label: str
    expected: str
    actual: str
    ok: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "expected": self.expected,
            "actual": self.actual,
            "ok": self.ok,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class PaperClaim:
    id: str
    description: str
    run: Callable[[list[Scenario]], list[CheckResult]]


@dataclass(frozen=True)
class SuiteReport:
    results: dict[str, tuple[CheckResult, ...]]

    @property
    def passed(self) -> bool:
        return all(c.ok for checks in self.results.values() for c in checks)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "claims": {
                cid: [c.to_json() for c in checks]
                for cid, checks in self.results.items()
            },
        }


def _audit_check(label: str, m: Mechanism, prop: str, gamma: Gamma,
                 expected: str, scenarios: list[Scenario],
                 c: int = 1) -> CheckResult:
    cfg = AuditConfig(gamma=gamma)
    if prop == "UIC":
        rep = audit_uic(m, scenarios, cfg)
    elif prop == "MIC":
        rep = audit_mic(m, scenarios, cfg)
    else:
        rep = audit_scp(m, c, scenarios, cfg)
    detail = ""
    if rep.witnesses:
        detail = f"first witness gain {rat_to_str(rep.witnesses[0].gain)}"
    return CheckResult(label, expected, rep.verdict, rep.verdict == expected,
                       detail)


def _fig_claim(name: str, m: Mechanism, specs) -> PaperClaim:
    def run(grid: list[Scenario]) -> list[CheckResult]:
        return [
            _audit_check(f"{name}/{prop}{'' if prop != 'SCP' else f'(c={c})'}"
                         f"@gamma={gamma}",
                         m, prop, gamma, expected, grid, c)
            for prop, gamma, c, expected in specs
        ]
    return PaperClaim(name, f"incentive profile of {name}", run)


def _replacement_deviation(m: BurningSecondPrice, values: tuple[int, ...]
                           ) -> tuple[Fraction, Fraction]:
    """Joint honest vs deviated utility when the miner and the top-k users
    replace all price-setting bids with zero-bid fakes."""
    k = m.k
    sc = Scenario.truthful(values, coalition_users=range(k),
                           miner_in_coalition=True)
    honest = utility_of(m, sc, honest_profile(sc), m.gamma)
    entries = tuple(BlockEntry(Money.of(values[i]), i) for i in range(k))
    fakes = tuple(Money(0) for _ in range(m.block_size - k))
    entries += tuple(BlockEntry(f, "fake") for f in fakes[:2])
    profile = StrategyProfile(sc.bids, fakes[:2], IncludedBlock(entries))
    deviated = utility_of(m, sc, profile, m.gamma)
    return honest, deviated


def _claim_r8() -> PaperClaim:
    m = BURNING_VARIANTS[("1/1", 1)]

    def run(grid: list[Scenario]) -> list[CheckResult]:
        honest, deviated = _replacement_deviation(m, (10, 8, 5, 3))
        out = [CheckResult(
            "deterministic-burning/zero-replacement",
            "16 -> 18, gain 2",
            f"{rat_to_str(honest)} -> {rat_to_str(deviated)}",
            (honest, deviated) == (Fraction(16), Fraction(18)))]
        out.append(_audit_check(
            "deterministic-burning/SCP(c=2)@gamma=1/1", m, "SCP", GAMMA_ONE,
            FAIL, [Scenario.truthful((10, 8, 5, 3))], c=2))
        return out

    return PaperClaim("R8", "deterministic burning auction is not 2-weak-SCP",
                      run)


def _claim_r9() -> PaperClaim:
    m = BURNING_VARIANTS[("1/1", 2)]

    def run(grid: list[Scenario]) -> list[CheckResult]:
        honest, deviated = _replacement_deviation(m, (10, 8, 5))
        return [CheckResult(
            "randomized-burning/zero-replacement",
            "9 -> 9, gain 0",
            f"{rat_to_str(honest)} -> {rat_to_str(deviated)}",
            (honest, deviated) == (Fraction(9), Fraction(9)))]

    return PaperClaim("R9", "randomization makes the replacement deviation "
                            "exactly break even", run)


def _claim_r10() -> PaperClaim:
    m = BURNING_VARIANTS[("1/1", 1)]

    def run(grid: list[Scenario]) -> list[CheckResult]:
        # a zero-value coalition user overbids purely to inflate the prices
        # the miner is paid; free of charge when overbids cost nothing
        sc = Scenario.truthful((10, 8, 0, 0), coalition_users=[2],
                               miner_in_coalition=True)
        honest = utility_of(m, sc, honest_profile(sc), GAMMA_ZERO)
        profile = StrategyProfile(BidVector.of(10, 8, "3.5", 0))
        deviated = utility_of(m, sc, profile, GAMMA_ZERO)
        out = [CheckResult(
            "burning@gamma=0/overbid-for-revenue",
            "gain 7/2",
            rat_to_str(deviated - honest),
            deviated - honest == Fraction(7, 2))]
        out.append(_audit_check("burning/SCP(c=1)@gamma=0", m, "SCP",
                                GAMMA_ZERO, FAIL, grid, c=1))
        return out

    return PaperClaim("R10", "burning auction loses 1-SCP at gamma=0", run)


def _claim_r11() -> PaperClaim:
    def run(grid: list[Scenario]) -> list[CheckResult]:
        return [_audit_check(
            "posted-price-burn-all-finite/SCP(c=1)@gamma=0",
            BURN_ALL_FINITE, "SCP", GAMMA_ZERO, FAIL,
            [Scenario.truthful((3, 3, 3))])]

    return PaperClaim("R11", "finite posted-price-burn-all under congestion "
                             "admits an exclusion side contract", run)


def _claim_r12() -> PaperClaim:
    def run(grid: list[Scenario]) -> list[CheckResult]:
        cfg = AuditConfig(gamma=GAMMA_ZERO)
        vectors = [s.bids for s in grid]
        out = []
        for name, m in BUILTINS.items():
            uic = audit_uic(m, grid, cfg)
            scp = audit_scp(m, 1, grid, cfg)
            mu = zero_revenue_scan(m, vectors)
            consistent = not (uic.passed and scp.passed and mu.max_revenue > 0)
            out.append(CheckResult(
                f"zero-revenue/{name}",
                "UIC+1-SCP pass implies max mu = 0",
                f"uic={uic.verdict} scp={scp.verdict} "
                f"max_mu={rat_to_str(mu.max_revenue)}",
                consistent))
            if name in ("trivial", "posted_price_burn_all"):
                out.append(CheckResult(
                    f"zero-revenue/{name}/mu-identically-zero", "max mu = 0",
                    rat_to_str(mu.max_revenue), mu.max_revenue == 0))
        return out

    return PaperClaim("R12", "no mechanism passes UIC and 1-SCP while paying "
                             "the miner", run)


def _claim_r5() -> PaperClaim:
    def run(grid: list[Scenario]) -> list[CheckResult]:
        out = []
        for (gtext, c), m in BURNING_VARIANTS.items():
            gamma = m.gamma
            out.append(_audit_check(f"burning({gtext},c={c})/UIC", m, "UIC",
                                    gamma, PASS, grid))
            out.append(_audit_check(f"burning({gtext},c={c})/MIC", m, "MIC",
                                    gamma, PASS, grid))
            out.append(_audit_check(f"burning({gtext},c={c})/SCP(c={c})", m,
                                    "SCP", gamma, PASS, grid, c=c))
        return out

    return PaperClaim("R5", "burning second price satisfies UIC, MIC and "
                            "c-SCP at its own strictness", run)


def _claims() -> list[PaperClaim]:
    z, one = GAMMA_ZERO, GAMMA_ONE
    return [
        _fig_claim("R1", BUILTINS["second_price"], [
            ("UIC", z, 1, PASS), ("MIC", z, 1, FAIL), ("SCP", z, 1, FAIL)]),
        _fig_claim("R2", BUILTINS["first_price"], [
            ("UIC", z, 1, FAIL), ("MIC", z, 1, PASS),
            ("SCP", z, 1, PASS), ("SCP", z, 2, PASS)]),
        _fig_claim("R3", BUILTINS["posted_price_no_burn"], [
            ("MIC", z, 1, PASS), ("SCP", z, 1, FAIL)]),
        _fig_claim("R4", BUILTINS["first_price_or_free"], [
            ("MIC", z, 1, FAIL), ("SCP", z, 1, PASS), ("SCP", z, 2, PASS)]),
        _claim_r5(),
        _fig_claim("R6", BUILTINS["solitary"], [
            ("UIC", one, 1, PASS), ("MIC", one, 1, PASS),
            ("SCP", one, 1, PASS), ("SCP", one, 2, PASS),
            ("SCP", one, 3, PASS)]),
        _fig_claim("R7", BUILTINS["solitary_or_posted_price"], [
            ("UIC", one, 1, PASS), ("MIC", one, 1, PASS),
            ("SCP", one, 1, PASS), ("SCP", one, 2, PASS)]),
        _claim_r8(),
        _claim_r9(),
        _claim_r10(),
        _claim_r11(),
        _claim_r12(),
    ]


CLAIM_IDS = [c.id for c in _claims()]


def run_paper_suite(selection: list[str] | None = None,
                    grid: list[Scenario] | None = None) -> SuiteReport:
    claims = _claims()
    if selection is not None:
        known = {c.id for c in claims}
        unknown = [cid for cid in selection if cid not in known]
        if unknown:
            raise KeyError(f"unknown claim ids: {', '.join(unknown)}")
        claims = [c for c in claims if c.id in selection]
    if grid is None:
        grid = grid_scenarios()
    return SuiteReport({c.id: tuple(c.run(grid)) for c in claims})
