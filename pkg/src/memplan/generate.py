"""Seeded synthetic model documents and the bundled corpora.

Graphs are built in execution order: operator ``i`` consumes the main-path
tensor of operator ``i - 1``. Extra tensors become side branches produced by
one operator and merged into the next, and with probability
``residual_prob`` an operator additionally reads an older tensor, which
stretches that tensor's lifetime like a skip connection.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Any, Optional

CORPUS_SEEDS = range(1, 501)
SMALL_CORPUS_SEEDS = range(1, 201)
CORPUS_MAX_RECORDS = 64
SMALL_CORPUS_MAX_RECORDS = 8


def generate_model(
    seed: int,
    n_ops: int,
    n_tensors: Optional[int] = None,
    max_size: int = 4096,
    residual_prob: float = 0.0,
) -> dict[str, Any]:
    """Return a model document with ``n_tensors`` intermediate tensors.

    ``n_tensors`` defaults to ``n_ops - 1``, which with ``residual_prob=0``
    gives a pure chain.
    """
    if n_ops < 2:
        raise ValueError("need at least 2 operators")
    if n_tensors is None:
        n_tensors = n_ops - 1
    if n_tensors < n_ops - 1:
        raise ValueError(f"n_tensors must be >= n_ops - 1 = {n_ops - 1}")
    if max_size < 1:
        raise ValueError("max_size must be positive")
    if not 0.0 <= residual_prob <= 1.0:
        raise ValueError("residual_prob must be in [0, 1]")

    rng = random.Random(seed)
    inputs: list[list[int]] = [[] for _ in range(n_ops)]
    outputs: list[list[int]] = [[] for _ in range(n_ops)]
    tensors: list[dict[str, Any]] = []

    def new_tensor(boundary: bool = False) -> int:
        tid = len(tensors)
        tensors.append({"id": tid, "size": rng.randint(1, max_size), "boundary": boundary})
        return tid

    model_input = new_tensor(boundary=True)
    inputs[0].append(model_input)
    main: list[int] = []
    for i in range(n_ops - 1):
        t = new_tensor()
        outputs[i].append(t)
        inputs[i + 1].append(t)
        main.append(t)

    for _ in range(n_tensors - (n_ops - 1)):
        producer = rng.randrange(n_ops - 1)
        t = new_tensor()
        outputs[producer].append(t)
        inputs[producer + 1].append(t)

    for i in range(2, n_ops):
        if rng.random() < residual_prob:
            source = main[rng.randrange(i - 1)]
            if source not in inputs[i]:
                inputs[i].append(source)

    outputs[n_ops - 1].append(new_tensor(boundary=True))
    operators = [
        {"id": i, "inputs": inputs[i], "outputs": outputs[i]} for i in range(n_ops)
    ]
    return {"tensors": tensors, "operators": operators}


def corpus_params(seed: int, max_records: int = CORPUS_MAX_RECORDS) -> dict[str, Any]:
    """Instance shape for one corpus seed, itself drawn from the seed."""
    rng = random.Random(f"corpus-{max_records}-{seed}")
    n_ops = rng.randint(3, max_records + 1)
    n_tensors = rng.randint(n_ops - 1, max_records)
    return {
        "seed": seed,
        "n_ops": n_ops,
        "n_tensors": n_tensors,
        "max_size": rng.choice([256, 1024, 4096, 65536]),
        "residual_prob": 0.3,
    }


def write_corpus(
    directory: Path, seeds=CORPUS_SEEDS, max_records: int = CORPUS_MAX_RECORDS
) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for seed in seeds:
        doc = generate_model(**corpus_params(seed, max_records))
        path = directory / f"seed{seed:04d}.json"
        path.write_text(dump_document(doc))
        paths.append(path)
    return paths


def dump_document(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
