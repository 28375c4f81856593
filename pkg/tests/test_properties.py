import random

import pytest

from picon.gen import random_protocol
from picon.properties import (conformance_instance, logic_agreement, strong_matches_bisimulation,
                              weak_matches_simulation)

from propsuite import CHECK_NAMES, run_suite


@pytest.fixture(scope="module")
def suite():
    return run_suite(500)


def test_enough_cases(suite):
    assert suite.systems >= 500
    assert suite.conformance_instances >= 500


def test_every_mutation_kind_exercised(suite):
    assert set(suite.outcomes) == {"identity", "drop", "add", "rename"}


def test_both_verdicts_occur(suite):
    # a suite where conformance always held (or never did) would say little
    strong = {s for s, _ in suite.verdicts}
    weak = {w for _, w in suite.verdicts}
    assert strong == {True, False} and weak == {True, False}


@pytest.mark.parametrize("prop", CHECK_NAMES)
def test_no_counterexamples(suite, prop):
    bad = [f for f in suite.failures if f[0] == prop]
    assert not bad, bad[:3]


def test_suite_runtime(suite):
    assert suite.seconds < 600


def test_single_instance_smoke():
    rng = random.Random(11)
    p = random_protocol(rng)
    assert logic_agreement(p, rng) == []
    inst = conformance_instance(p, rng)
    if inst is not None:
        assert strong_matches_bisimulation(inst) == [] and weak_matches_simulation(inst) == []
