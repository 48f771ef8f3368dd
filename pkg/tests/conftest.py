import pytest

from resonator_lab.arith import build_tables

LARGE_LIMIT = 4_000_000


@pytest.fixture(scope="session")
def tables():
    """Sieve large enough for every ladder in the suite (about 2 s to build)."""
    return build_tables(LARGE_LIMIT)


@pytest.fixture(scope="session")
def small_tables():
    return build_tables(200_000)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", "call") != "call" and key != "error":
                continue
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props:
                lines.append((props["criterion"], "PASS" if rep.passed else "FAIL", props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for n, status, detail in sorted(lines):
            terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
