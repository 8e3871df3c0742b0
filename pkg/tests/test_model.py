import json
import random

import pytest
from hypothesis import given, settings

from conftest import DATA, EXAMPLE8, chain_model, random_records, record_lists
from memplan.model import (
    ModelError,
    TensorUsageRecord,
    align_size,
    execution_order,
    load_records,
    operator_profile,
    operator_profiles,
    parse_model,
    parse_records,
    positional_maximums,
    usage_records,
)


def doc(tensors, operators):
    return {
        "tensors": [{"id": t, "size": s, "boundary": b} for t, s, b in tensors],
        "operators": [{"id": o, "inputs": i, "outputs": out} for o, i, out in operators],
    }


class TestParse:
    def test_two_op_chain(self):
        model = parse_model(doc(
            [(0, 10, True), (1, 10, False), (2, 10, True)],
            [(0, [0], [1]), (1, [1], [2])],
        ))
        assert model.intermediate_ids == [1]

    @pytest.mark.parametrize("document, message", [
        (doc([(0, 0, True), (1, 10, True)], [(0, [0], [1])]), "non-positive size"),
        (doc([(0, 10, False), (1, 10, False)], [(0, [1], [0]), (1, [0], [1])]), "cycle detected"),
        (doc([(0, 10, True)], [(0, [0], [5])]), "dangling tensor reference"),
        (doc([(0, 10, True), (0, 10, True)], []), "duplicate id"),
        (doc([(0, 10, True), (1, 8, True)], [(0, [0], [1]), (0, [1], [0])]), "duplicate id"),
        (doc([(0, 10, True), (1, 8, False)], [(0, [0], [1]), (1, [0], [1])]), "multiple producers"),
        (doc([(0, 10, True), (1, 8, False)], [(0, [0], [1]), (1, [1], [1])]), "multiple producers"),
        (doc([(0, 10, False)], [(0, [0], [])]), "no producing operator"),
        (doc([(0, 10, True), (1, 8, False)], [(0, [0, 1], [1])]), "cycle detected"),
    ])
    def test_errors(self, document, message):
        with pytest.raises(ModelError, match=message):
            parse_model(document)

    def test_schema_violation(self):
        with pytest.raises(ModelError, match="schema"):
            parse_model({"tensors": [{"id": "a", "size": 1}], "operators": []})

    def test_raw_records(self):
        records = parse_records({"records": [
            {"id": 3, "first": 1, "last": 2, "size": 7},
            {"id": 1, "first": 0, "last": 1, "size": 9},
        ]})
        assert records == [TensorUsageRecord(1, 0, 1, 9), TensorUsageRecord(3, 1, 2, 7)]

    @pytest.mark.parametrize("entry, message", [
        ({"id": 0, "first": 2, "last": 1, "size": 4}, "bad interval"),
        ({"id": 0, "first": 0, "last": 1, "size": 0}, "non-positive size"),
        ({"id": 0, "first": -1, "last": 1, "size": 4}, "bad interval"),
    ])
    def test_raw_record_errors(self, entry, message):
        with pytest.raises(ModelError, match=message):
            parse_records({"records": [entry]})

    def test_raw_records_keep_size(self):
        # Raw records are taken as already aligned.
        assert load_records({"records": [{"id": 0, "first": 0, "last": 0, "size": 3}]})[0].size == 3


class TestExecutionOrder:
    def test_chain(self):
        assert execution_order(parse_model(chain_model(3, 8))) == [0, 1, 2]

    def test_diamond_tie_by_smallest_id(self):
        model = parse_model(doc(
            [(0, 1, True), (1, 1, False), (2, 1, False), (3, 1, False), (4, 1, True)],
            [(0, [0], [1]), (1, [1], [2]), (2, [1], [3]), (3, [2, 3], [4])],
        ))
        assert execution_order(model) == [0, 1, 2, 3]

    def test_fork_with_reversed_ids(self):
        model = parse_model(doc(
            [(0, 1, True), (1, 1, False), (2, 1, False), (3, 1, False), (4, 1, True)],
            [(9, [0], [1]), (5, [1], [2]), (2, [1], [3]), (0, [2, 3], [4])],
        ))
        order = execution_order(model)
        assert order == [9, 2, 5, 0]


class TestUsageRecords:
    def test_chain_records(self):
        model = parse_model(doc(
            [(0, 10, True), (1, 10, False), (2, 10, False), (3, 10, True)],
            [(0, [0], [1]), (1, [1], [2]), (2, [2], [3])],
        ))
        assert usage_records(model, alignment=1) == [
            TensorUsageRecord(1, 0, 1, 10),
            TensorUsageRecord(2, 1, 2, 10),
        ]

    def test_residual_extends_lifetime(self):
        model = parse_model(doc(
            [(0, 4, True), (1, 4, False), (2, 4, False), (3, 4, False), (4, 4, True)],
            [(0, [0], [1]), (1, [1], [2]), (2, [2], [3]), (3, [3, 1], [4])],
        ))
        rec = {r.tensor_id: r for r in usage_records(model, alignment=1)}
        assert (rec[1].first_op, rec[1].last_op) == (0, 3)

    def test_alignment(self):
        model = parse_model(chain_model(3, 65))
        assert {r.size for r in usage_records(model)} == {128}
        assert align_size(64, 64) == 64 and align_size(1, 64) == 64

    def test_unused_output_warns(self, caplog):
        model = parse_model(doc(
            [(0, 4, True), (1, 4, False), (2, 4, True), (3, 8, False)],
            [(0, [0], [1, 3]), (1, [1], [2])],
        ))
        with caplog.at_level("WARNING"):
            rec = {r.tensor_id: r for r in usage_records(model, alignment=1)}
        assert (rec[3].first_op, rec[3].last_op) == (0, 0)
        assert "never consumed" in caplog.text

    def test_example8_model(self, example_model_doc):
        records = load_records(example_model_doc, alignment=1)
        assert [(r.tensor_id, r.first_op, r.last_op, r.size) for r in records] == EXAMPLE8
        # The two constraints the reconstruction has to satisfy.
        assert operator_profile(records, 3).sizes == [36, 28, 16]
        thirds = [p.sizes[2] for p in operator_profiles(records) if len(p.records) >= 3]
        assert thirds == [16, 16, 16, 10]

    def test_permuting_tensor_list(self, example_model_doc):
        base = load_records(example_model_doc, alignment=1)
        shuffled = dict(example_model_doc)
        tensors = list(example_model_doc["tensors"])
        random.Random(3).shuffle(tensors)
        shuffled["tensors"] = tensors
        assert load_records(shuffled, alignment=1) == base

    def test_rerun_is_identical(self):
        text = (DATA / "example8_model.json").read_text()
        runs = [json.dumps([vars(r) for r in load_records(json.loads(text))]) for _ in range(2)]
        assert runs[0] == runs[1]


class TestProfiles:
    def test_example_operator_3(self, example_records):
        profile = operator_profile(example_records, 3)
        assert profile.sizes == [36, 28, 16]
        assert profile.breadth == 80

    def test_uncovered_operator(self):
        profile = operator_profile([TensorUsageRecord(0, 0, 1, 5)], 4)
        assert profile.records == () and profile.breadth == 0

    def test_membership_brute_force(self, rng):
        for _ in range(20):
            records = random_records(rng, 12)
            for op in range(12):
                expected = {r.tensor_id for r in records if r.first_op <= op <= r.last_op}
                profile = operator_profile(records, op)
                assert {r.tensor_id for r in profile.records} == expected
                assert profile.breadth == sum(r.size for r in records if r.tensor_id in expected)
                assert profile.sizes == sorted(profile.sizes, reverse=True)

    def test_sweep_matches_single(self, example_records):
        for p in operator_profiles(example_records):
            assert p == operator_profile(example_records, p.op_index)


class TestPositionalMaximums:
    def test_example_positional_maximums(self, example_records):
        values = positional_maximums(example_records).values
        assert values[2] == 16
        # Worked by hand from the eight records.
        assert values == (64, 40, 16, 8)

    def test_single(self):
        assert positional_maximums([TensorUsageRecord(0, 2, 4, 17)]).values == (17,)

    def test_empty(self):
        assert positional_maximums([]).values == ()

    def test_column_max_oracle(self, rng):
        for _ in range(30):
            records = random_records(rng, 10)
            n_ops = max(r.last_op for r in records) + 1
            columns = [
                sorted((r.size for r in records if r.first_op <= op <= r.last_op), reverse=True)
                for op in range(n_ops)
            ]
            width = max(len(c) for c in columns)
            expected = tuple(max(c[i] for c in columns if len(c) > i) for i in range(width))
            assert positional_maximums(records).values == expected


@settings(max_examples=200, deadline=None)
@given(record_lists(max_size=10))
def test_profile_properties(records):
    maxima = positional_maximums(records)
    assert list(maxima.values) == sorted(maxima.values, reverse=True)
    profiles = operator_profiles(records)
    assert len(maxima) == max(len(p.records) for p in profiles)
    for p in profiles:
        assert p.breadth <= maxima.total()
        for i, size in enumerate(p.sizes):
            assert size <= maxima[i]
    for r in records:
        for p in profiles:
            assert (r in p.records) == (r.first_op <= p.op_index <= r.last_op)
