import os
from datetime import date
from pathlib import Path

import pytest

from dissent.corpus import CorpusRecord
from dissent.lexicon import WordScore, WordScoreTable

# Environment variables naming user-supplied datasets.  Tests that need
# them skip cleanly when unset.
ENV_SENTIWORDNET = "DISSENT_SENTIWORDNET"
ENV_IMDB = "DISSENT_IMDB"
ENV_UKP = "DISSENT_UKP"
ENV_NYT_CORPUS = "DISSENT_NYT_CORPUS"
ENV_CONSPIRACY_SERIES = "DISSENT_CONSPIRACY_SERIES"


def data_path(var: str) -> Path:
    value = os.environ.get(var)
    if not value:
        pytest.skip(f"set {var} to run this data-dependent test")
    path = Path(value)
    if not path.exists():
        pytest.skip(f"{var}={value} does not exist")
    return path


def make_table(neg_by_word: dict[str, float]) -> WordScoreTable:
    return WordScoreTable({w: WordScore(neg=neg, pos=0.0, synset_count=1)
                           for w, neg in neg_by_word.items()})


def make_record(rec_id: str, day: date, text: str, label: str | None = None) -> CorpusRecord:
    return CorpusRecord(id=rec_id, timestamp=day, text=text, gold_label=label)


@pytest.fixture
def tiny_table() -> WordScoreTable:
    return make_table({"bleak": 0.2, "grim": 0.4})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance" in getattr(report, "nodeid", ""):
                lines.append((report.nodeid, status.upper()))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for nodeid, status in sorted(lines):
            terminalreporter.write_line(f"{status:8s} {nodeid.split('::')[-1]}")
