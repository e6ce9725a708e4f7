import itertools

import numpy as np
import pytest


def all_bits(n: int) -> np.ndarray:
    """Every assignment of n bits, row r holding the binary digits of r (bit 0 first)."""
    return np.array(list(itertools.product((0, 1), repeat=n)))[:, ::-1].astype(np.int8)


def naive_objective(coeffs: dict, offset: float, x) -> float:
    total = offset
    for (i, j), v in coeffs.items():
        total += v * x[i] * x[j]
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    """Append one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
