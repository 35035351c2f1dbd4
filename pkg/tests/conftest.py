import random

import pytest
from hypothesis import settings

from graphpir.graphcore import Graph, build_family, random_graph

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

FAMILY_SPECS = [
    "star:3", "star:4", "star:5", "star:6",
    "cycle:3", "cycle:4", "cycle:5", "cycle:6",
    "complete:2", "complete:3", "complete:4", "complete:5",
    "kbipartite:2,3", "kbipartite:3,3", "kbipartite:3,4",
    "wheel:6", "wheel:8",
]


def corpus_random_graphs(count: int = 20, seed: int = 2024) -> list[Graph]:
    """Random graphs with 3..7 vertices and at least one edge."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        g = random_graph(rng.randint(3, 7), rng.uniform(0.3, 0.8), rng)
        if g.n_edges:
            out.append(g)
    return out


def corpus() -> list[Graph]:
    return [build_family(s) for s in FAMILY_SPECS] + corpus_random_graphs()


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
