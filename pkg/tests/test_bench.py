import json

import pytest

from aiql.bench import SynthParams, bundled_queries, generate_model, run_benchmark
from aiql.evaluator import evaluate
from aiql.modelstore import dump_model
from aiql.parser import parse_query
from aiql.validator import validate_query


def test_element_count():
    m = generate_model(SynthParams(10, 100, 120))
    assert len(m.version(1).elements) == 231
    assert m.count == 1


@pytest.mark.parametrize("total", [3, 4, 100, 1001])
def test_for_size_is_exact(total):
    assert len(generate_model(SynthParams.for_size(total)).version(1).elements) == total


def test_seeded_determinism():
    p = SynthParams(5, 50, 70, seed=9)
    assert dump_model(generate_model(p)) == dump_model(generate_model(p))
    assert dump_model(generate_model(p)) != dump_model(generate_model(SynthParams(5, 50, 70, seed=10)))


def _q3_matches(model, schema):
    text = dict(bundled_queries())["q3"]
    q = validate_query(parse_query(text), schema)
    return evaluate(q, model, schema).ids()[0]["comp"]


def test_handler_fraction(schema):
    assert _q3_matches(generate_model(SynthParams(2, 40, 42, handler_fraction=0.0)), schema) == []
    assert len(_q3_matches(generate_model(SynthParams(2, 40, 42, handler_fraction=0.25)), schema)) == 10


def test_bad_params():
    with pytest.raises(ValueError):
        SynthParams(1, 1, 1, handler_fraction=1.5)
    with pytest.raises(ValueError):
        SynthParams(-1, 1, 1)
    with pytest.raises(ValueError):
        generate_model(SynthParams(0, 0, 2))


def test_report_rows_and_payload_stability(schema):
    models = [(f"s{n}", generate_model(SynthParams.for_size(n))) for n in (60, 120, 200)]
    queries = bundled_queries()
    once = run_benchmark(models, queries, 1, schema)
    five = run_benchmark(models, queries, 5, schema)
    assert len(once.rows) == 21
    assert once.payloads() == five.payloads()
    row = once.row("s60", "q1")
    assert row.elements == 60 and row.templates == 1 and row.outputs == 1
    assert json.loads(once.to_json())["repetitions"] == 1
    assert len(once.table().splitlines()) == 23


def test_repetitions_must_be_positive(schema):
    with pytest.raises(ValueError):
        run_benchmark([], bundled_queries(), 0, schema)
