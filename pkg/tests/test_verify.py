import pytest

from gverify.model import guard_matches
from gverify.verify import verify
from mutations import MUTATIONS
from oracles import kb_oracle

IDS = [m.__name__ for m, _, _ in MUTATIONS]


@pytest.fixture(scope="module")
def oracle_vectors(kb):
    return kb_oracle.realistic_vectors(kb)


def test_fresh_tree_has_no_divergence(kb, vectors, factored):
    report = verify(kb, factored)
    assert report.passed
    assert report.checked == len(vectors)
    assert report.witnesses == []


def test_enough_mutations():
    assert len(MUTATIONS) >= 5
    assert len({rule for _, rule, _ in MUTATIONS}) == len(MUTATIONS)


@pytest.mark.parametrize("mutate, rule_name, expected", MUTATIONS, ids=IDS)
def test_expected_counts_agree_with_oracle(kb, oracle_vectors, mutate, rule_name, expected):
    assert kb_oracle.divergence_count(kb, mutate(kb), oracle_vectors) == expected


@pytest.mark.parametrize("mutate, rule_name, expected", MUTATIONS, ids=IDS)
def test_mutation_detected(kb, factored, mutate, rule_name, expected):
    mutant = mutate(kb)
    report = verify(mutant, factored, max_witnesses=expected + 10)
    assert report.divergence_count == expected >= 1
    assert len(report.witnesses) == expected
    guard = mutant.rule(rule_name).guard
    for w in report.witnesses:
        assert guard_matches(guard, w.vector)
        assert w.tree_result != w.dss_result


def test_witness_cap(kb, factored):
    mutate, _, expected = MUTATIONS[1]
    report = verify(mutate(kb), factored, max_witnesses=7)
    assert report.divergence_count == expected
    assert len(report.witnesses) == 7
    indices = [w.index for w in report.witnesses]
    assert indices == sorted(indices)
    assert report.to_dict()["witnesses_shown"] == 7


def test_parallel_matches_sequential(kb, factored):
    mutate, _, _ = MUTATIONS[0]
    mutant = mutate(kb)
    assert verify(mutant, factored, jobs=2) == verify(mutant, factored, jobs=1)


def test_report_has_no_timing(kb, factored):
    assert "elapsed" not in verify(kb, factored).to_dict()
