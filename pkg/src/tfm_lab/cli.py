"""Command line front end: audits, Myerson checks, the claim suite, sampling.

Exit status contract: 0 on success, 1 when a verdict misses an --expect
value (or the claim suite fails, or sampled frequencies leave the 3-sigma
band), 2 on configuration errors and combinatorial refusals.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from .auditor import (AuditConfig, CombinatorialLimitError, audit_mic,
                      audit_scp, audit_uic)
from .core import BidVector, Scenario
from .mechanisms import Mechanism, MechanismError
from .money import Gamma, Money, rat_to_str
from .myerson import check_payment_rule
from .regression import CLAIM_IDS, run_paper_suite
from .scenarios import grid_scenarios, load_scenarios


class ConfigError(Exception):
    pass


def _load_mechanism(spec: str) -> Mechanism:
    text = spec.strip()
    if not text.startswith("{"):
        try:
            with open(text) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"--mechanism: cannot read {spec!r}: {exc}")
    try:
        return Mechanism.from_json(text)
    except (MechanismError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"--mechanism: {exc}")


def _parse_bids(text: str) -> BidVector:
    try:
        return BidVector.of(*[part.strip() for part in text.split(",") if part.strip()])
    except ValueError as exc:
        raise ConfigError(f"--bids: {exc}")


def _scenarios(args) -> list[Scenario]:
    if args.bids and args.scenario_space:
        raise ConfigError("--bids and --scenario-space are mutually exclusive")
    if args.bids:
        return [Scenario.truthful(_parse_bids(args.bids).slots)]
    if args.scenario_space:
        try:
            return load_scenarios(args.scenario_space)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--scenario-space: {exc}")
    return grid_scenarios()


def _worker_cap() -> int:
    raw = os.environ.get("TFM_LAB_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"TFM_LAB_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise ConfigError("TFM_LAB_THREADS must be >= 1")
    return cap


def _write_report(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _parse_expect(text: str | None) -> dict[str, str]:
    if not text:
        return {}
    expectations = {}
    for part in text.split(","):
        prop, _, verdict = part.partition("=")
        prop, verdict = prop.strip().lower(), verdict.strip().lower()
        if prop not in ("uic", "mic", "scp") or verdict not in ("pass", "fail"):
            raise ConfigError(
                f"--expect entries look like uic=pass or scp=fail, got {part!r}")
        expectations[prop] = verdict
    return expectations


def _cmd_audit(args) -> int:
    m = _load_mechanism(args.mechanism)
    _worker_cap()
    try:
        gamma = Gamma.parse(args.gamma)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"--gamma: {exc}")
    cfg = AuditConfig(epsilon=Money.of(args.epsilon),
                      max_fake_bids=args.max_fakes,
                      gamma=gamma,
                      engine=args.engine)
    scenarios = _scenarios(args)
    props = [p.strip().lower() for p in args.properties.split(",") if p.strip()]
    expectations = _parse_expect(args.expect)
    reports = []
    for prop in props:
        if prop == "uic":
            reports.append(audit_uic(m, scenarios, cfg))
        elif prop == "mic":
            reports.append(audit_mic(m, scenarios, cfg))
        elif prop == "scp":
            reports.append(audit_scp(m, args.c, scenarios, cfg))
        else:
            raise ConfigError(f"unknown property {prop!r} (use uic, mic, scp)")
    mismatched = []
    for prop, rep in zip(props, reports):
        tag = f"{rep.prop}" + (f"(c={rep.c})" if rep.c else "")
        print(f"{tag} gamma={rep.gamma}: {rep.verdict} "
              f"({rep.scenarios_checked} scenarios, "
              f"{rep.deviations_checked} deviations)")
        for w in rep.witnesses[:1]:
            print(f"  witness gain {rat_to_str(w.gain)} on values "
                  f"{[str(v) for v in w.scenario.true_values]}")
        want = expectations.get(prop)
        if want and (want == "pass") != rep.passed:
            mismatched.append(prop)
    _write_report(args.report, {
        "tool": "audit",
        "mechanism": m.to_json(),
        "results": [r.to_json() for r in reports],
    })
    if mismatched:
        print(f"expectation mismatch: {', '.join(mismatched)}", file=sys.stderr)
        return 1
    return 0


def _cmd_myerson(args) -> int:
    m = _load_mechanism(args.mechanism)
    if not args.bids:
        raise ConfigError("myerson needs --bids")
    bids = _parse_bids(args.bids)
    try:
        report = check_payment_rule(m, bids)
    except ValueError as exc:
        raise ConfigError(str(exc))
    verdict = "match" if report.matches else "mismatch"
    print(f"payment rule vs critical bids: {verdict}")
    for mm in report.mismatches:
        crit = "unconfirmable" if mm.critical is None else str(mm.critical)
        print(f"  slot {mm.slot}: pays {mm.payment}, critical bid {crit}")
    _write_report(args.report, {
        "tool": "myerson",
        "mechanism": m.to_json(),
        "results": report.to_json(),
    })
    return 0


def _cmd_paper_suite(args) -> int:
    selection = None
    if args.only:
        selection = [s.strip() for s in args.only.split(",") if s.strip()]
    try:
        suite = run_paper_suite(selection)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]))
    total = ok = 0
    for cid, checks in suite.results.items():
        claim_ok = all(c.ok for c in checks)
        total += 1
        ok += claim_ok
        print(f"{cid}: {'ok' if claim_ok else 'MISMATCH'}")
        for c in checks:
            if not c.ok:
                print(f"  {c.label}: expected {c.expected}, got {c.actual}")
    print(f"{ok}/{total} claims match")
    _write_report(args.report, {"tool": "paper-suite",
                                "results": suite.to_json()})
    return 0 if suite.passed else 1


def _cmd_sample(args) -> int:
    m = _load_mechanism(args.mechanism)
    if not args.bids:
        raise ConfigError("sample needs --bids")
    if args.samples < 1:
        raise ConfigError("--samples must be >= 1")
    bids = _parse_bids(args.bids)
    block = m.include_honest(bids)
    outcome = m.evaluate(block)
    counts = [0] * len(block.entries)
    for k in range(args.samples):
        realized = m.sample(block, args.seed + k)
        for idx in realized.confirmed:
            counts[idx] += 1
    from .mechanisms import _canonical_perm
    perm = _canonical_perm(block.entries)
    order = [block.entries[i] for i in perm]
    rows = []
    all_in_band = True
    for rank, entry in enumerate(order):
        q = outcome.per_slot[perm[rank]].confirm_prob
        mean = float(q) * args.samples
        sigma = math.sqrt(args.samples * float(q) * (1 - float(q)))
        in_band = abs(counts[rank] - mean) <= 3 * sigma + 1e-9
        all_in_band = all_in_band and in_band
        rows.append({
            "rank": rank,
            "bid": str(entry.bid),
            "owner": entry.owner,
            "confirmed": counts[rank],
            "samples": args.samples,
            "marginal": rat_to_str(q),
            "within_3_sigma": in_band,
        })
        print(f"rank {rank} bid {entry.bid} owner {entry.owner}: "
              f"{counts[rank]}/{args.samples} confirmed, marginal {q}, "
              f"{'in' if in_band else 'OUT OF'} 3-sigma band")
    _write_report(args.report, {"tool": "sample",
                                "mechanism": m.to_json(),
                                "results": rows})
    return 0 if all_in_band else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfm-lab",
        description="Exact incentive audits of transaction fee mechanisms. "
                    "TFM_LAB_THREADS caps the worker pool.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--mechanism", required=True,
                       help="mechanism spec: a JSON file path or inline JSON")
        p.add_argument("--bids", help="comma-separated bid values")
        p.add_argument("--report", help="write the JSON report here")

    p = sub.add_parser("audit", help="run UIC/MIC/SCP audits")
    common(p)
    p.add_argument("--scenario-space",
                   help="JSON file: list of value vectors (default: full grid)")
    p.add_argument("--gamma", default="0/1", help="strictness, e.g. 1/2")
    p.add_argument("--c", type=int, default=1, help="max coalition users")
    p.add_argument("--properties", default="uic,mic,scp")
    p.add_argument("--epsilon", default="0.25")
    p.add_argument("--max-fakes", type=int, default=2)
    p.add_argument("--engine", default="auto",
                   choices=["auto", "exact", "fast"])
    p.add_argument("--expect", help="e.g. uic=pass,mic=fail,scp=pass")
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("myerson", help="check payments against critical bids")
    common(p)
    p.set_defaults(func=_cmd_myerson)

    p = sub.add_parser("paper-suite", help="run the named claim suite")
    p.add_argument("--only", help=f"claim ids, e.g. R1,R5 (known: "
                                  f"{','.join(CLAIM_IDS)})")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=_cmd_paper_suite)

    p = sub.add_parser("sample", help="draw seeded confirmation samples")
    common(p)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_sample)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CombinatorialLimitError as exc:
        print(f"refusing to enumerate: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
