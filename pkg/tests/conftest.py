import numpy as np
import pytest

from fourier_pade.measures import AngelescoSystem, MeasureSpec, reference_system


@pytest.fixture(scope="session")
def ref():
    return reference_system()


@pytest.fixture(scope="session")
def single():
    """m = 1: Chebyshev sigma0 on [-1, 1], Lebesgue sigma1 on [2, 3]."""
    return AngelescoSystem(MeasureSpec.chebyshev(), (MeasureSpec.jacobi(2.0, 3.0),))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list = []


@pytest.fixture
def verdict(capsys):
    """Record one ``criterion N: PASS|FAIL`` line; printed again in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
