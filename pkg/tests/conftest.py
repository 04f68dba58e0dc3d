from pathlib import Path

import pytest

CORPUS_DIR = Path(__file__).parent / "corpus"
GOLDEN_DIR = Path(__file__).parent / "goldens"

CORPUS_NAMES = ("two_hop", "message_passing", "distances", "win_move",
                "earliest_arrival", "transitive_reduction", "condensation",
                "taxonomy")


def corpus_text(name: str) -> str:
    return (CORPUS_DIR / f"{name}.gtl").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def corpus():
    return {name: corpus_text(name) for name in CORPUS_NAMES}
