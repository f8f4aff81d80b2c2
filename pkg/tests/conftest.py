import contextlib
import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kgshortcut.datasets import DatasetBundle, InferenceGraph, Task
from kgshortcut.graph import build_graph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

REPO = Path(__file__).resolve().parents[1]
DATA = Path(os.environ.get("KGSHORTCUT_DATA", REPO / "data"))

_criteria: list[tuple[str, bool, str]] = []


@contextlib.contextmanager
def criterion(name: str):
    """Record one acceptance criterion's outcome for the terminal summary."""
    try:
        yield
    except BaseException as exc:
        _criteria.append((name, False, str(exc).splitlines()[0] if str(exc) else type(exc).__name__))
        raise
    _criteria.append((name, True, ""))


@pytest.fixture
def record():
    return criterion


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _criteria:
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        if detail:
            line += f"  -- {detail[:160]}"
        terminalreporter.write_line(line)


def random_labeled(n: int, m: int, relations: int = 3, seed: int = 0, loops: bool = False):
    rng = np.random.default_rng(seed)
    out = []
    for h, t, r in zip(rng.integers(0, n, m), rng.integers(0, n, m), rng.integers(0, relations, m)):
        if h == t and not loops:
            continue
        out.append((f"e{h}", f"r{r}", f"e{t}"))
    return out


def random_graph(n: int, m: int, relations: int = 3, seed: int = 0):
    return build_graph(random_labeled(n, m, relations, seed))


def path_graph(k: int):
    return build_graph([(f"n{i}", "r", f"n{i + 1}") for i in range(k - 1)])


def single_graph_bundle(graph_triples, test_triples, name="tiny", task=Task.E, train_triples=None):
    """Bundle with a throwaway train graph and one inference graph."""
    train = build_graph(train_triples or [("t0", "r", "t1")])
    g = build_graph(graph_triples, vocab_from=test_triples)
    return DatasetBundle(name, task, train, np.zeros((0, 3)), [InferenceGraph(g, g.encode(test_triples))])


def require_dataset(*parts) -> Path:
    path = DATA.joinpath(*parts)
    if not path.is_dir():
        pytest.fail(f"dataset not available at {path} (set KGSHORTCUT_DATA; see README 'Datasets')", pytrace=False)
    return path


def planted_dir(tmp_path: Path):
    """A planted-community parent graph file and a dataset sampled from it."""
    from kgshortcut.datasets import emit_dataset, write_triples
    from kgshortcut.samplers.partition import PartitionConfig, partition_sample
    from kgshortcut.synthetic import planted_partition_kg

    g = planted_partition_kg(blocks=4, block_size=60, p_in=0.15, p_out=0.002, relations=3, seed=0)
    graph_file = tmp_path / "parent.txt"
    write_triples(graph_file, g.labeled())
    bundle, _ = partition_sample(g, PartitionConfig(k=3, min_edges=100, rng_seed=0), name="planted")
    return graph_file, emit_dataset(bundle, tmp_path / "planted")
