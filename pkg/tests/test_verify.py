import json

import numpy as np
import pytest

from alm_means import io, verify
from alm_means.errors import UnknownCheck


def test_unknown_check():
    with pytest.raises(UnknownCheck):
        verify.select(["no.such.check"])
    with pytest.raises(UnknownCheck):
        verify.run_check("no.such.check")


def test_globs_select_groups():
    names = verify.select(["counterexample.*"])
    assert names and all(n.startswith("counterexample.") for n in names)


def test_seed_determinism():
    a = verify.run_checks(["kubo_ando.monotonicity", "metrics.thompson_axioms"], seed=5, trials=5)
    b = verify.run_checks(["kubo_ando.monotonicity", "metrics.thompson_axioms"], seed=5, trials=5)
    assert [r.worst_margin for r in a.results] == [r.worst_margin for r in b.results]
    c = verify.run_checks(["kubo_ando.monotonicity"], seed=6, trials=5)
    assert c.results[0].worst_margin != a.results[0].worst_margin


def test_report_json():
    report = verify.run_checks(["linalg.*"], seed=1, trials=3)
    doc = json.loads(io.dumps(report.to_dict()))
    assert doc["seed"] == 1 and doc["ok"] is True
    assert {c["name"] for c in doc["checks"]} == set(verify.select(["linalg.*"]))
    assert all(line.startswith("PASS ") for line in report.lines())


def test_failure_carries_witness():
    @verify.register("test.always_fails", "a check that fails on purpose", trials=3)
    def _(rng, dim):
        return {"x": float(rng.random())}, -1.0

    try:
        res = verify.run_check("test.always_fails", seed=2)
        assert res.failures == 3 and not res.passed
        assert res.witness["trial"] == 0 and "x" in res.witness["inputs"]
        # replaying the recorded generator state reproduces the witness input
        rng = np.random.default_rng()
        rng.bit_generator.state = res.witness["generator_state"]
        assert float(rng.random()) == res.witness["inputs"]["x"]
    finally:
        verify.REGISTRY.pop("test.always_fails")


def test_exceptions_become_failures():
    @verify.register("test.raises", "raises a library error", trials=1)
    def _(rng, dim):
        raise UnknownCheck("boom")

    try:
        res = verify.run_check("test.raises")
        assert res.failures == 1 and "UnknownCheck" in res.error
    finally:
        verify.REGISTRY.pop("test.raises")


def test_registry_covers_invariants():
    assert verify.run_check("meta.registry_complete").passed
