"""Adaptive slot-filling movie search bot (native core bindings)."""

import json
from pathlib import Path

from . import _core
from ._core import IngestError, ProviderError, intra_type, metaphone_word, orders_set, person_key

ENTITY_TYPES = ("AudienceAge", "Genre", "Keyword", "CountryOrContinent", "Person", "ReleaseYear")

__all__ = [
    "ENTITY_TYPES",
    "Engine",
    "IngestError",
    "ProviderError",
    "Service",
    "estimate",
    "intra_type",
    "metaphone_word",
    "orders_set",
    "person_key",
]


def estimate(model, i, history, assumed, **params):
    """Skip probability of type index `i` under `model`.

    history: newest-first list of (skips[6], orders[6]); assumed: {index: (skipped, order)}.
    """
    return _core.estimate(model, i, [(list(s), list(o)) for s, o in history], dict(assumed), **params)


class Engine:
    def __init__(self, movies, lexicons):
        self._e = _core.Engine(Path(movies), Path(lexicons))

    @property
    def movie_count(self):
        return self._e.movie_count

    def parse(self, text):
        return json.loads(self._e.parse(text))

    def query(self, clauses, limit=10):
        return [json.loads(row) for row in self._e.query(json.dumps(clauses), limit)]

    def simulate(self, preset, seed=None, conversations=None):
        return json.loads(self._e.simulate(preset, seed, conversations))


class Service:
    """In-process /v1 API. Each call returns (status, body)."""

    def __init__(self, config=None, base="."):
        self._s = _core.Service(json.dumps(config or {}), Path(base))

    @staticmethod
    def _decode(reply):
        status, body = reply
        return status, json.loads(body)

    def create_session(self, body=None):
        return self._decode(self._s.create_session("" if body is None else json.dumps(body)))

    def post_message(self, session_id, text):
        return self._decode(self._s.post_message(session_id, json.dumps({"text": text})))

    def post_raw(self, session_id, raw):
        return self._decode(self._s.post_message(session_id, raw))

    def get_state(self, session_id):
        return self._decode(self._s.get_state(session_id))

    def health(self):
        return self._decode(self._s.health())
