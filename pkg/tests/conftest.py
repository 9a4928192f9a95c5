import numpy as np
import pytest

from coupled_msr import derive_params, encode

ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number: int, ok: bool, title: str, detail: str = "") -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture(scope="session")
def p22():
    return derive_params(2, 2)


@pytest.fixture(scope="session")
def p23():
    return derive_params(2, 3)


@pytest.fixture(scope="session")
def p32():
    return derive_params(3, 2)


def random_cube(params, seed=0, batch=()):
    rng = np.random.default_rng(seed)
    return encode(params.field.random((params.k * params.alpha,) + tuple(batch), rng), params)


@pytest.fixture(scope="session")
def cube22(p22):
    return random_cube(p22, 1)


@pytest.fixture(scope="session")
def cube23(p23):
    return random_cube(p23, 2)
