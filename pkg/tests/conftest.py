import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from propspan.spans import Fragment  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_annotations(rng: random.Random, max_frags=20, max_len=200, labels=("A", "B", "C", "D", "E"), articles=("a1", "a2")):
    frags = []
    for _ in range(rng.randint(0, max_frags)):
        begin = rng.randrange(0, max_len - 1)
        end = rng.randint(begin + 1, min(max_len, begin + rng.randint(1, 60)))
        frags.append(Fragment(rng.choice(articles), rng.choice(labels), begin, end))
    return frags


@pytest.fixture
def frag():
    def make(begin, end, label="Loaded_Language", article="a1"):
        return Fragment(article, label, begin, end)

    return make
