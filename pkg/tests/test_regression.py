import pytest

from tfm_lab.regression import (BUILTINS, BURNING_VARIANTS, CLAIM_IDS,
                                run_paper_suite)


def test_claim_ids():
    assert CLAIM_IDS == [f"R{i}" for i in range(1, 13)]


def test_nine_builtins():
    assert len(BUILTINS) == 9


def test_burning_variants_confirm_counts():
    # floor(gamma * k / c) is attained exactly by k' in every variant
    for (_, c), m in BURNING_VARIANTS.items():
        assert m.k_prime == m.confirm_count
        assert m.gamma.numerator * m.k == \
            m.gamma.denominator * c * m.confirm_count


def test_full_suite_passes(suite_report):
    failing = [
        f"{cid}:{c.label} expected {c.expected} got {c.actual}"
        for cid, checks in suite_report.results.items()
        for c in checks if not c.ok
    ]
    assert not failing, failing
    assert suite_report.passed
    assert set(suite_report.results) == set(CLAIM_IDS)


def test_selection_api():
    suite = run_paper_suite(["R9"])
    assert list(suite.results) == ["R9"]
    assert suite.passed


def test_unknown_claim_id():
    with pytest.raises(KeyError):
        run_paper_suite(["R99"])


def test_report_json_shape(suite_report):
    data = suite_report.to_json()
    assert data["passed"] is True
    assert set(data["claims"]) == set(CLAIM_IDS)
    entry = data["claims"]["R1"][0]
    assert set(entry) == {"label", "expected", "actual", "ok", "detail"}
