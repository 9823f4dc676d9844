"""Prints one PASS/FAIL line per acceptance criterion after the run."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            cid, title = mark.args
            _criteria.setdefault(cid, {"title": title, "nodes": set(), "failed": False,
                                       "seen": set(), "seconds": 0.0})
            _criteria[cid]["nodes"].add(item.nodeid)


def pytest_runtest_logreport(report):
    for c in _criteria.values():
        if report.nodeid in c["nodes"]:
            c["seen"].add(report.nodeid)
            c["seconds"] += report.duration
            if report.failed:
                c["failed"] = True


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_criteria, key=lambda c: int(c[2:])):
        c = _criteria[cid]
        if c["failed"]:
            verdict = "FAIL"
        elif c["seen"] == c["nodes"]:
            verdict = "PASS"
        else:
            verdict = "NOT RUN"
        terminalreporter.write_line(f"{verdict} {cid:<5} {c['title']} ({c['seconds']:.1f}s)")
