import numpy as np
import pytest

from clwe_align.synthetic import ambiguity_fixture


def write_vec(path, words, matrix):
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{len(words)} {matrix.shape[1]}\n")
        for w, row in zip(words, matrix):
            f.write(w + " " + " ".join(repr(float(x)) for x in row) + "\n")
    return str(path)


@pytest.fixture
def fixture10():
    return ambiguity_fixture(n_pairs=10, seed=0)


@pytest.fixture
def fixture_files(tmp_path, fixture10):
    """The 10-pair ambiguity fixture written out as CLI input files."""
    fx = fixture10
    paths = {}
    for lang in ("src", "tgt"):
        items = list(fx.store.items(lang))
        paths[lang] = write_vec(tmp_path / f"{lang}.vec", [w for w, _ in items], [v for _, v in items])
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("".join(" ".join(p.source) + " ||| " + " ".join(p.target) + "\n" for p in fx.corpus))
    gold = tmp_path / "gold.txt"
    gold.write_text("".join(" ".join(f"{i}-{j}" for i, j in sorted(g.sure)) + "\n" for g in fx.gold))
    paths["corpus"] = str(corpus)
    paths["gold"] = str(gold)
    paths["dir"] = tmp_path
    return paths


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
