import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line for an acceptance criterion."""

    def emit(number, ok, detail):
        line = f"[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def full_atlas(tmp_path_factory):
    """Manifest path for a 146-symbol pool in the five-family layout.

    Arabic and Cyrillic glyphs are random block patterns written as PGM
    files; only their count and position matter to the tests that use them.
    """
    import json

    import numpy as np

    from glyphassign.corpus import ARABIC, BULGARIAN
    from glyphassign.pgm import write_pgm

    root = tmp_path_factory.mktemp("atlas")
    rng = np.random.default_rng(42)

    def files(family, letters):
        entries = []
        for k, ch in enumerate(letters):
            img = np.kron(rng.random((8, 8)) > 0.6, np.ones((8, 8))).astype(float)
            name = f"{family}_{k:02d}.pgm"
            write_pgm(root / name, img, binary=k % 2 == 0)
            entries.append({"name": ch, "path": name})
        return {"family": family, "source": "files", "entries": entries}

    manifest = {"size": 64, "families": [
        {"family": "latin", "source": "dotmatrix_latin"},
        {"family": "braille", "source": "braille"},
        files("arabic", ARABIC.letters),
        {"family": "dct", "source": "dct", "order": 6},
        files("cyrillic", BULGARIAN.letters),
    ]}
    path = root / "atlas.json"
    path.write_text(json.dumps(manifest, ensure_ascii=False), encoding="utf-8")
    return str(path)
