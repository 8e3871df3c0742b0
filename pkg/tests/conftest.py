import json
import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from memplan.model import TensorUsageRecord, load_records

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"

# Reconstruction of the 8-tensor example network: operator 3 sees sizes
# {36, 28, 16}; the third positional-maximum column is (16, 16, 16, 10).
EXAMPLE8 = [
    (0, 0, 1, 32),
    (1, 1, 4, 28),
    (2, 2, 5, 36),
    (3, 3, 5, 16),
    (4, 4, 5, 8),
    (5, 5, 7, 64),
    (6, 6, 8, 10),
    (7, 7, 8, 40),
]


def recs(*triples):
    """Records from (first, last, size) triples, ids in order."""
    return [TensorUsageRecord(i, f, l, s) for i, (f, l, s) in enumerate(triples)]


def chain(depth, size):
    """Records of a pure chain: tensor i lives across operators i and i+1."""
    return [TensorUsageRecord(i, i, i + 1, size) for i in range(depth)]


def chain_model(n_ops, size):
    tensors = [{"id": i, "size": size, "boundary": i in (0, n_ops)} for i in range(n_ops + 1)]
    ops = [{"id": i, "inputs": [i], "outputs": [i + 1]} for i in range(n_ops)]
    return {"tensors": tensors, "operators": ops}


def random_records(rng, n, n_ops=12, max_size=64):
    out = []
    for i in range(n):
        a = rng.randrange(n_ops)
        b = rng.randrange(a, min(n_ops, a + 1 + rng.randrange(1, n_ops)))
        out.append(TensorUsageRecord(i, a, b, rng.randint(1, max_size)))
    return out


@st.composite
def record_lists(draw, min_size=1, max_size=8, n_ops=10, max_bytes=64):
    n = draw(st.integers(min_size, max_size))
    out = []
    for i in range(n):
        a = draw(st.integers(0, n_ops - 1))
        b = draw(st.integers(a, n_ops - 1))
        s = draw(st.integers(1, max_bytes))
        out.append(TensorUsageRecord(i, a, b, s))
    return out


@pytest.fixture
def example_records():
    return [TensorUsageRecord(*t) for t in EXAMPLE8]


@pytest.fixture
def example_model_doc():
    return json.loads((DATA / "example8_model.json").read_text())


@pytest.fixture
def rng():
    return random.Random(20240611)


def corpus_records(directory, alignment=64):
    for path in sorted(Path(directory).glob("*.json")):
        yield path.stem, load_records(json.loads(path.read_text()), alignment)


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line, then fail the test if needed."""

    def check(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _VERDICTS.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS):
            terminalreporter.write_line(line)
