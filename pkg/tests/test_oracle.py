"""Differential test: the optimized evaluator against the naive oracle."""

import random
import time

from aiql.errors import EmptySelectionError
from aiql.evaluator import evaluate
from aiql.metamodel import default_schema
from aiql.oracle import oracle_evaluate
from aiql.parser import parse_query
from aiql.validator import validate_query

from generators import random_model, random_query, rich_schema

CASES = 1200


def _outcome(fn, q, m, s):
    try:
        return fn(q, m, s).ids()
    except EmptySelectionError:
        return "empty"


def test_evaluator_agrees_with_oracle():
    rich, shipped = rich_schema(), default_schema()
    start = time.perf_counter()
    nonempty = 0
    for seed in range(CASES):
        rng = random.Random(seed)
        s = shipped if seed % 3 == 0 else rich
        m = random_model(rng, s, 120)
        text = random_query(rng, s)
        q = validate_query(parse_query(text), s)
        got, want = _outcome(evaluate, q, m, s), _outcome(oracle_evaluate, q, m, s)
        assert got == want, f"seed {seed}\n{text}"
        if got != "empty" and any(ids for v in got for ids in v.values()):
            nonempty += 1
    assert time.perf_counter() - start < 60
    assert nonempty > CASES // 2  # the generator must produce non-trivial matches
