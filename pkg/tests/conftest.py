"""Shared pytest configuration.

Prints a one-line verdict per acceptance criterion after the run, derived
from the outcomes of the test_criterion_* functions in test_acceptance.py.
"""

CRITERIA = {
    1: "engine arithmetic and partitioned marginals match plaintext exactly",
    2: "comparison counts match the closed form; aggregation linear in n",
    3: "weighted selection reproduces exponential-mechanism probabilities",
    4: "shared noise samplers have the pinned statistics",
    5: "mpc and cdp backends yield identical pipeline runs",
    6: "synthetic data beats the uniform baseline and improves with budget",
    7: "share views uniform, transcript index-blind, ledger exact, "
       "generator isolated",
}

_RANK = {"passed": 0, "skipped": 1, "failed": 2}
_WORD = {"passed": "PASS", "skipped": "SKIP", "failed": "FAIL",
         None: "NOT RUN"}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for key in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(key, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid:
                continue
            num = int(nodeid.split("test_criterion_")[1].split("_")[0])
            outcome = "failed" if key == "error" else rep.outcome
            prev = outcomes.get(num)
            if prev is None or _RANK[outcome] > _RANK[prev]:
                outcomes[num] = outcome
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num, label in sorted(CRITERIA.items()):
        word = _WORD[outcomes.get(num)]
        terminalreporter.write_line(f"criterion {num}: {word} - {label}")
