"""Shared geometries, potentials and (cached) forward spectra."""
from functools import lru_cache

import numpy as np
import pytest

from frozen_spectrum import Geometry, Potential, compute_spectrum


def unit_geometry():
    return Geometry(1.0, 1.0, 1.0, l_over_gamma=1)


def smooth_pair(geom):
    """cos(pi t / l) on the first segment, t - a on the second (t - 2 for the unit geometry)."""
    l, a = geom.l, geom.a
    return Potential.from_callables(lambda t: np.cos(np.pi * t / l), lambda t: t - a, geom,
                                    dleft=lambda t: -np.pi / l * np.sin(np.pi * t / l))


def damped_pair(geom):
    """exp(-t) sin 3t + 1/2 on the first segment, cos 2(t-a) + 0.3 (t-a)^2 on the second."""
    a = geom.a
    return Potential.from_callables(lambda t: np.exp(-t) * np.sin(3 * t) + 0.5,
                                    lambda t: np.cos(2 * (t - a)) + 0.3 * (t - a) ** 2, geom,
                                    dleft=lambda t: np.exp(-t) * (3 * np.cos(3 * t) - np.sin(3 * t)))


# admissible equal-length geometries used by the characterization checks
EQUAL_GEOMETRIES = {"unit": (1.0, 1.0, 1.0), "narrow": (1.0, 0.5, 1.0), "wide": (2.0, 1.5, 2.0)}
POTENTIALS = {"smooth": smooth_pair, "damped": damped_pair, "zero": lambda g: Potential.zero()}


@lru_cache(maxsize=None)
def case(geom_name, pot_name):
    gamma, d, l = EQUAL_GEOMETRIES[geom_name]
    geom = Geometry(gamma, d, l, l_over_gamma=1)
    return geom, POTENTIALS[pot_name](geom)


@lru_cache(maxsize=None)
def spectrum(geom_name, pot_name, N):
    geom, q = case(geom_name, pot_name)
    return compute_spectrum(q, geom, N)


@pytest.fixture(scope="session")
def geom():
    return unit_geometry()


@pytest.fixture(scope="session")
def q_smooth(geom):
    return smooth_pair(geom)


@pytest.fixture(scope="session")
def q_damped(geom):
    return damped_pair(geom)


@pytest.fixture(scope="session")
def spec_smooth_400():
    return spectrum("unit", "smooth", 400)


@pytest.fixture(scope="session")
def spec_smooth_200():
    return spectrum("unit", "smooth", 200)


@pytest.fixture(scope="session")
def spec_zero_400():
    return spectrum("unit", "zero", 400)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def report_criterion(number, title, passed, detail):
    line = f"ACCEPTANCE {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
