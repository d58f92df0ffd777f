import pytest

from annotalign.pipeline import train
from annotalign.synthetic import split_sports


@pytest.fixture(scope="session")
def sports():
    """Bundled-style train/test split and a model trained on it with defaults."""
    train_docs, test_docs = split_sports()
    return train_docs, test_docs, train(train_docs)


@pytest.fixture(scope="session")
def bundle():
    """Paths of the packaged train, test and lookup files."""
    from importlib.resources import files

    root = files("annotalign") / "data"
    return {name: str(root / f"sports_{name}") for name in ("train.conll", "test.conll", "lookups.tsv")}


# criterion number -> list of (check, passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[number]
        verdict = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        detail = "; ".join(f"{name}: {'ok' if ok else 'FAILED'} ({info})" for name, ok, info in checks)
        terminalreporter.write_line(f"criterion {number} {verdict}  {detail}")
