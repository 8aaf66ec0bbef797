import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gverify.c45 import (
    Dataset,
    DecisionTree,
    Leaf,
    NonFunctionalDataset,
    Split,
    UnseenValue,
    build_tree,
    classify,
    entropy,
    gain_ratio,
    info_gain,
    split_info,
    training_errors,
)
from gverify.dss import label
from oracles import c45_oracle

TOL = 1e-9


def from_oracle(attrs, rows):
    domains = {a: [] for a in attrs}
    for values, _ in rows:
        for a in attrs:
            if values[a] not in domains[a]:
                domains[a].append(values[a])
    return Dataset([(a, tuple(domains[a])) for a in attrs],
                   [(tuple(values[a] for a in attrs), lab) for values, lab in rows])


def table(attrs, *rows):
    """Dataset from rows written as (value, ..., label)."""
    domains = [tuple(dict.fromkeys(r[i] for r in rows)) for i in range(len(attrs))]
    return Dataset(list(zip(attrs, domains)), [(tuple(r[:-1]), r[-1]) for r in rows])


class TestEntropy:
    @pytest.mark.parametrize("dist, expected", [
        ({"A": 8}, 0.0),
        ({"A": 4, "B": 4}, 1.0),
        ({"A": 9, "B": 5}, 0.9402859586706311),
    ])
    def test_values(self, dist, expected):
        assert entropy(dist) == pytest.approx(expected, abs=TOL)
        assert entropy(dist) == pytest.approx(float(c45_oracle.entropy(dist.values())), abs=TOL)

    def test_sequence_input(self):
        assert entropy([9, 5, 0]) == pytest.approx(0.9402859586706311, abs=TOL)

    def test_empty(self):
        with pytest.raises(ValueError):
            entropy({})

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 50), min_size=1, max_size=6).filter(any))
    def test_bounds_and_oracle(self, counts):
        k = sum(1 for c in counts if c)
        h = entropy(counts)
        assert -TOL <= h <= math.log2(k) + TOL
        assert h == pytest.approx(float(c45_oracle.entropy(counts)), abs=TOL)


class TestGainRatio:
    def test_constant_attribute(self):
        ds = table(["a", "b"], ("x", "p", "yes"), ("x", "q", "no"), ("x", "p", "yes"))
        assert gain_ratio(ds, "a") == 0.0
        assert split_info(ds, "a") == 0.0

    def test_perfect_binary_split(self):
        ds = table(["a"], ("x", "yes"), ("x", "yes"), ("y", "no"), ("y", "no"))
        assert info_gain(ds, "a") == pytest.approx(1.0, abs=TOL)
        assert split_info(ds, "a") == pytest.approx(1.0, abs=TOL)
        assert gain_ratio(ds, "a") == pytest.approx(1.0, abs=TOL)

    @pytest.mark.parametrize("fixture", sorted(c45_oracle.FIXTURES))
    def test_fixtures_match_oracle(self, fixture):
        attrs, rows = c45_oracle.FIXTURES[fixture]
        ds = from_oracle(attrs, rows)
        for a in attrs:
            assert info_gain(ds, a) == pytest.approx(float(c45_oracle.info_gain(rows, a)), abs=TOL)
            assert split_info(ds, a) == pytest.approx(float(c45_oracle.split_info(rows, a)), abs=TOL)
            assert gain_ratio(ds, a) == pytest.approx(float(c45_oracle.gain_ratio(rows, a)), abs=TOL)

    def test_unknown_attribute(self):
        ds = table(["a"], ("x", "yes"), ("y", "no"))
        with pytest.raises(KeyError):
            gain_ratio(ds, "nope")


class TestBuild:
    def test_single_label(self):
        ds = table(["a", "b"], ("x", "p", "yes"), ("y", "q", "yes"))
        tree = build_tree(ds)
        assert tree.root == Leaf("yes", 2)
        assert tree.node_count == 1

    def test_depth_one(self):
        ds = table(["noise", "key"],
                   ("n1", "k1", "A"), ("n2", "k1", "A"), ("n1", "k2", "B"),
                   ("n2", "k2", "B"), ("n1", "k3", "C"))
        tree = build_tree(ds)
        assert isinstance(tree.root, Split) and tree.root.attribute == "key"
        assert all(isinstance(c, Leaf) for c in tree.root.branches.values())
        assert tree.node_count == 4
        for key, lab in [("k1", "A"), ("k2", "B"), ("k3", "C")]:
            assert classify(tree, {"noise": "n2", "key": key}) == lab

    def test_unseen_value(self):
        ds = Dataset([("a", ("x", "y", "z"))], [(("x",), "A"), (("y",), "B")])
        tree = build_tree(ds)
        with pytest.raises(UnseenValue) as info:
            classify(tree, {"a": "z"})
        assert info.value.attribute == "a" and info.value.value == "z"
        assert "'z'" in str(info.value)

    def test_non_functional(self):
        ds = table(["a"], ("x", "A"), ("y", "B"), ("x", "C"))
        with pytest.raises(NonFunctionalDataset) as info:
            build_tree(ds)
        assert info.value.values == ("x",)
        assert set(info.value.labels) == {"A", "C"}

    def test_xor_still_fits(self):
        ds = table(["a", "b"], ("0", "0", "F"), ("0", "1", "T"), ("1", "0", "T"), ("1", "1", "F"))
        tree = build_tree(ds)
        assert training_errors(tree, ds) == 0
        assert tree.root.attribute == "a"

    def test_tie_goes_to_first_attribute(self):
        ds = table(["b", "a"], ("x", "x", "A"), ("y", "y", "B"))
        assert build_tree(ds).root.attribute == "b"

    def test_weather_root(self):
        attrs, rows = c45_oracle.WEATHER
        tree = build_tree(from_oracle(attrs, rows))
        ratios = {a: c45_oracle.gain_ratio(rows, a) for a in attrs}
        assert tree.root.attribute == max(attrs, key=lambda a: ratios[a])

    def test_json_round_trip(self, tree):
        assert DecisionTree.from_json(tree.to_json()) == tree

    def test_empty(self):
        with pytest.raises(ValueError):
            build_tree(Dataset([("a", ("x",))], []))


@st.composite
def functional_dataset(draw):
    n_attrs = draw(st.integers(1, 4))
    domains = [tuple(f"v{j}" for j in range(draw(st.integers(2, 3)))) for _ in range(n_attrs)]
    rows = draw(st.lists(st.tuples(*(st.sampled_from(d) for d in domains)), min_size=1, max_size=30,
                         unique=True))
    labels = draw(st.lists(st.sampled_from("ABC"), min_size=len(rows), max_size=len(rows)))
    return Dataset([(f"x{i}", d) for i, d in enumerate(domains)], list(zip(rows, labels)))


def paths(node, seen=()):
    if isinstance(node, Leaf):
        yield seen
        return
    for child in node.branches.values():
        yield from paths(child, seen + (node.attribute,))


@settings(max_examples=150, deadline=None)
@given(functional_dataset())
def test_random_datasets_fit_exactly(ds):
    tree = build_tree(ds)
    assert training_errors(tree, ds) == 0
    for p in paths(tree.root):
        assert len(p) == len(set(p))
    assert build_tree(ds).to_json() == tree.to_json()


class TestSample:
    def test_zero_training_error(self, kb, vectors, tree):
        names = kb.variable_names
        assert all(classify(tree, dict(zip(names, v.values))) == label(kb, v) for v in vectors)

    def test_paths_do_not_repeat(self, tree):
        for p in paths(tree.root):
            assert len(p) == len(set(p))

    def test_proposed_never_split(self, tree):
        assert not any("proposed" in p for p in paths(tree.root))

    def test_deterministic(self, dataset, tree):
        assert build_tree(dataset).to_json() == tree.to_json()

    def test_leaf_support(self, tree, vectors):
        def leaves(n):
            if isinstance(n, Leaf):
                yield n
            else:
                for c in n.branches.values():
                    yield from leaves(c)
        supports = [leaf.support for leaf in leaves(tree.root)]
        assert min(supports) >= 1 and sum(supports) == len(vectors)
