from __future__ import annotations

import itertools
from pathlib import Path


from jbtk.factors import CartanFactor, Kind, canonicalize, is_principal_kind

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

PRINCIPAL_DIAGRAMS = ("p1", "rect-chain", "herm-chain", "alternating", "sympl-doubling", "finite-mixing")
CANONICAL_DIAGRAMS = PRINCIPAL_DIAGRAMS + (
    "p1-telescoped",
    "rect-swapped",
    "sympl-chain",
    "mixed",
    "hilbert-tree",
    "spin-growth",
)


def principal_factors(bound: int) -> list[CartanFactor]:
    """Principal factors in canonical presentation with all params <= bound."""
    out = []
    for m, n in itertools.product(range(1, bound + 1), repeat=2):
        out.append(CartanFactor(Kind.I, (m, n)))
    for n in range(2, bound + 1):
        out += [CartanFactor(Kind.II, (n,)), CartanFactor(Kind.III, (n,))]
    return [f for f in out if canonicalize(f) == f and is_principal_kind(f)]


_results: dict[int, list[bool]] = {}
_titles: dict[int, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for key, value in report.user_properties:
        if key == "criterion":
            n, title = value
            _titles[n] = title
            _results.setdefault(n, []).append(report.outcome == "passed")


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        item.user_properties.append(("criterion", (marker.args[0], marker.args[1])))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        status = "PASS" if all(_results[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {_titles[n]}")
