import json
import math

import numpy as np
import pytest

from sieve_spectra.report import CheckReport
from sieve_spectra.sequences import KINDS, XorShift64Star, splitmix64
from sieve_spectra.verify import (
    DEFAULTS,
    SUITES,
    BudgetExceeded,
    SequenceSpec,
    generate_sequence,
    reports_to_json,
    resolve_config,
    run_suite,
)


def xorshift_oracle(seed, count):
    """The published recurrence written with numpy uint64 wrap-around."""
    with np.errstate(over="ignore"):
        x = np.uint64(seed) + np.uint64(0x9E3779B97F4A7C15)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        x = x ^ (x >> np.uint64(31))
        out = []
        for _ in range(count):
            x ^= x >> np.uint64(12)
            x ^= x << np.uint64(25)
            x ^= x >> np.uint64(27)
            out.append(int(x * np.uint64(0x2545F4914F6CDD1D)))
    return out


@pytest.mark.parametrize("seed", [0, 1, 42, 2**63 + 5])
def test_generator_matches_recurrence(seed):
    rng = XorShift64Star(seed)
    assert [rng.next_u64() for _ in range(20)] == xorshift_oracle(seed, 20)


def test_splitmix_reference_value():
    # First splitmix64 output for state 0.
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_sequences_deterministic():
    a = generate_sequence(SequenceSpec("random_signs", 100, 1))
    b = generate_sequence(SequenceSpec("random_signs", 100, 1))
    assert a.values.tobytes() == b.values.tobytes()
    assert set(np.unique(a.values.real)) <= {-1.0, 1.0}
    c = generate_sequence(SequenceSpec("random_signs", 100, 2))
    assert not np.array_equal(a.values, c.values)


def test_spike_and_progression():
    s = generate_sequence(SequenceSpec("spike", 10, extra={"k": 7}))
    assert s.values[6] == 1 and np.count_nonzero(s.values) == 1
    p = generate_sequence(SequenceSpec("progression", 30, extra={"modulus": 7, "residue": 3}))
    assert list(np.nonzero(p.values)[0] + 1) == [3, 10, 17, 24]
    with pytest.raises(ValueError):
        generate_sequence(SequenceSpec("spike", 10, extra={"k": 11}))
    with pytest.raises(ValueError):
        generate_sequence(SequenceSpec("nope", 10))
    with pytest.raises(ValueError):
        generate_sequence(SequenceSpec("random_signs", 0))


def test_prime_indicator_audit():
    phi = generate_sequence(SequenceSpec("prime_indicator", 10**4))
    support = np.nonzero(phi.values)[0] + 1
    for n in support:
        assert all(n % p for p in range(2, 100))
    # every prime in [100, 10^4] is present: pi(10^4) - pi(99) = 1229 - 25
    assert support.size == 1229 - 25


def test_eigen_pullback_kind():
    phi = generate_sequence(SequenceSpec("eigen_pullback", 500, extra={"tau_over_h": 1.0, "h": 1, "M": 128}))
    assert phi.norm2() / 500 == pytest.approx(1.0, abs=0.02)


def test_all_kinds_listed():
    assert set(KINDS) == {"random_signs", "random_complex", "spike", "progression", "prime_indicator",
                          "eigen_pullback"}


def test_check_report_contract():
    r = CheckReport.equality("x", {"a": 1}, 1.0, 1.0 + 1e-10, 1e-9)
    assert r.pass_ and r.residual == pytest.approx(1e-10)
    bad = CheckReport.inequality("y", {}, 2.0, 1.0, 0.5)
    assert not bad.pass_ and bad.residual == 1.0 and "inequality" in bad.notes
    rel = CheckReport.equality("z", {}, 2.0, 1.0, 0.5, relative=True)
    assert "relative" in rel.notes and not rel.pass_
    d = CheckReport("w", {}, float("inf"), 0.0, 0.0, float("inf"), True).to_dict()
    assert list(d) == ["check_id", "params", "lhs", "rhs", "residual", "tolerance", "pass", "notes"]
    assert d["lhs"] == "inf"
    json.dumps(d)


def test_config_resolution():
    assert resolve_config({}) == resolve_config(None) == DEFAULTS
    cfg = resolve_config({"M": "512", "tau_over_h": "0.5,2", "budget": "600s"})
    assert cfg["M"] == 512 and cfg["tau_over_h"] == (0.5, 2.0) and cfg["budget"] == 600.0
    with pytest.raises(ValueError):
        resolve_config({"no_such_key": 1})


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope")


def test_delta_suite_defaults_and_determinism():
    a = reports_to_json(run_suite("delta"))
    b = reports_to_json(run_suite("delta", {}))
    c = reports_to_json(run_suite("delta", dict(DEFAULTS)))
    assert a == b == c
    assert json.loads(a)["all_pass"]


def test_thread_count_does_not_change_output(monkeypatch):
    monkeypatch.setenv("SIEVE_SPECTRA_THREADS", "1")
    one = reports_to_json(run_suite("transforms"))
    monkeypatch.setenv("SIEVE_SPECTRA_THREADS", "4")
    four = reports_to_json(run_suite("transforms"))
    assert one == four


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        run_suite("delta", {"budget": 1e-6})


def test_primes_suite():
    reports = run_suite("primes")
    assert all(r.pass_ for r in reports)


def test_registered_suites():
    assert set(SUITES) == {"transforms", "delta", "precise", "spectrum", "global", "primes"}


def test_reports_json_shape():
    text = reports_to_json([CheckReport.equality("a", {}, 1.0, 1.0, 0.0)])
    body = json.loads(text)
    assert body["count"] == 1 and body["all_pass"] and text.endswith("\n")
    assert not math.isnan(body["reports"][0]["residual"])
