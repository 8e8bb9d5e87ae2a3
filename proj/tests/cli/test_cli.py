import json
import os
import socket
import subprocess
import time
import urllib.request
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]
CLI = os.environ.get("SLOTFORGE_CLI", str(ROOT / "build" / "slotforge"))
DATA = ["--movies", str(ROOT / "data" / "movies.jsonl"), "--lexicons", str(ROOT / "data" / "lexicons")]


def run(*args, stdin=None, timeout=60):
    return subprocess.run([CLI, *args], input=stdin, capture_output=True, text=True, timeout=timeout)


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_chat_transcript_reaches_results():
    script = "I want a comedy with Nataly Portman\n" + "that's all\n" * 6 + "quit\n"
    out = run("chat", *DATA, stdin=script)
    assert out.returncode == 0, out.stderr
    assert out.stdout.startswith("bot> Hi!")
    assert "The Violet Canyon" in out.stdout
    assert out.stdout.rstrip().endswith("bye")


def test_query_prints_ranked_rows():
    out = run("query", *DATA, "--person", "Nataly Portman", "--genre", "comedy")
    assert out.returncode == 0, out.stderr
    rows = [json.loads(line) for line in out.stdout.splitlines()]
    assert [r["id"] for r in rows] == ["m0001", "m0003", "m0002"]


def test_ingest_round_trip(tmp_path):
    store = tmp_path / "store"
    out = run("ingest", "--input", str(ROOT / "data" / "movies.jsonl"), "--out", str(store))
    assert out.returncode == 0, out.stderr
    assert "200" in out.stdout
    a = run("query", *DATA, "--genre", "drama", "--limit", "0").stdout
    b = run("query", "--movies", str(store), "--lexicons", str(ROOT / "data" / "lexicons"),
            "--genre", "drama", "--limit", "0").stdout
    assert a and a == b


def test_ingest_rejects_bad_records(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "x"}\n')
    out = run("ingest", "--input", str(bad), "--out", str(tmp_path / "s"))
    assert out.returncode != 0
    assert "line 1" in out.stderr


def test_bad_arguments_fail():
    assert run().returncode != 0
    assert run("simulate", "--preset", "nope").returncode != 0
    assert run("query", "--movies", "/does/not/exist").returncode != 0


def test_simulate_is_bit_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        out = run("simulate", *DATA, "--preset", "convergence", "--conversations", "10", "--seed", "3",
                  "--out", str(path))
        assert out.returncode == 0, out.stderr
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(a.read_text())
    assert report["seed"] == 3 and report["conversations"] == 10


def test_simulate_accepts_persona_file(tmp_path):
    out = run("simulate", *DATA, "--personas", str(ROOT / "data" / "personas.json"), "--conversations", "3",
              "--out", str(tmp_path / "r.json"))
    assert out.returncode == 0, out.stderr
    names = [p["name"] for p in json.loads((tmp_path / "r.json").read_text())["personas"]]
    assert names == ["family-evening", "cinephile"]


def test_serve_answers_health():
    port = free_port()
    proc = subprocess.Popen([CLI, "serve", *DATA, "--host", "127.0.0.1", "--port", str(port)],
                            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    try:
        body = None
        deadline = time.time() + 20
        while time.time() < deadline:
            try:
                with urllib.request.urlopen(f"http://127.0.0.1:{port}/v1/health", timeout=2) as r:
                    body = json.loads(r.read())
                break
            except OSError:
                time.sleep(0.1)
        assert body == {"status": "ok", "movie_count": 200, "history_count": 0}
    finally:
        proc.terminate()
        proc.wait(timeout=10)
