from pathlib import Path

import pytest

from rotprobe import corpus
from rotprobe.config import DEMO_CONFIG

DEMO = DEMO_CONFIG.parent

THALIA_REVIEW = b"""<Reviews><Review rid="404464">
<sentences>
<sentence id="404464:0">
<text>Thalia is a beautiful restaurant with beautiful people serving you, but the food doesn't quite match up.</text>
<Opinions>
<Opinion target="people" category="SERVICE#GENERAL" polarity="positive" from="48" to="54"/>
<Opinion target="food" category="FOOD#QUALITY" polarity="negative" from="76" to="80"/>
<Opinion target="Thalia" category="AMBIENCE#GENERAL" polarity="positive" from="0" to="6"/>
</Opinions>
</sentence>
</sentences>
</Review></Reviews>
"""


@pytest.fixture(scope="session")
def demo_dir() -> Path:
    return DEMO


@pytest.fixture(scope="session")
def demo_annotations():
    return corpus.read_annotations(DEMO / "annotations.tsv")


@pytest.fixture(scope="session")
def demo_train(demo_annotations):
    return corpus.build_instances(corpus.parse_semeval(DEMO / "train.xml"), demo_annotations)


@pytest.fixture(scope="session")
def demo_test(demo_annotations):
    return corpus.build_instances(corpus.parse_semeval(DEMO / "test.xml"), demo_annotations)


@pytest.fixture(scope="session")
def demo_table():
    return corpus.EmbeddingTable.load(DEMO / "embeddings.txt", seed=7)


# ---------------------------------------------------------------- acceptance summary
# Tests marked ``criterion(n, title)`` are folded into one line per criterion:
# FAIL if any part failed, PASS if at least one part passed, otherwise SKIP.

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or (rep.when == "setup" and not rep.passed)):
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "passed": [], "failed": [], "skipped": []})
    if rep.skipped:
        reason = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else str(rep.longrepr)
        entry["skipped"].append(f"{item.name} ({reason.removeprefix('Skipped: ')})")
    elif rep.failed:
        entry["failed"].append(item.name)
    else:
        entry["passed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        status = "FAIL" if e["failed"] else "PASS" if e["passed"] else "SKIP"
        tr.write_line(f"criterion {number:>2} {status}  {e['title']}")
        for name in e["failed"]:
            tr.write_line(f"              failed: {name}")
        for note in e["skipped"]:
            tr.write_line(f"              skipped: {note}")
