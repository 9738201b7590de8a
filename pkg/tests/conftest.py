from pathlib import Path

import pytest

from thetahecke.lattice import IntegralLattice, read_matrix_file

LATTICE_DIR = Path(__file__).resolve().parent.parent / "lattices"


def load(name: str) -> IntegralLattice:
    return IntegralLattice(read_matrix_file(LATTICE_DIR / f"{name}.txt"), name=name)


@pytest.fixture(scope="session")
def E8():
    return load("e8")


@pytest.fixture(scope="session")
def D4():
    return load("d4")


@pytest.fixture(scope="session")
def A2():
    return load("a2")


@pytest.fixture(scope="session")
def A1A1():
    return load("a1a1")


@pytest.fixture(scope="session")
def A1A1A2():
    return load("a1a1a2")


@pytest.fixture(scope="session")
def lattice_dir():
    return LATTICE_DIR


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
