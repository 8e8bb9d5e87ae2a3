import json
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def root():
    return ROOT


@pytest.fixture(scope="session")
def schemas():
    return {p.stem: json.loads(p.read_text()) for p in (ROOT / "schemas").glob("*.json")}


@pytest.fixture(scope="session")
def engine():
    import slotforge

    return slotforge.Engine(ROOT / "data" / "movies.jsonl", ROOT / "data" / "lexicons")


@pytest.fixture()
def service():
    import slotforge

    return slotforge.Service({"movies": "data/movies.jsonl", "lexicons": "data/lexicons"}, ROOT)
