import numpy as np
import pytest

from brstlab import ConstraintSystem, build_berezin, build_ghost_rep

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def levi_civita():
    eps = np.zeros((3, 3, 3))
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[a, b, c] = 1.0
        eps[a, c, b] = -1.0
    return eps


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def projection():
    return np.diag([0.0, 1.0]).astype(complex)


@pytest.fixture(scope="session")
def single_projection(projection):
    return ConstraintSystem([projection])


@pytest.fixture(scope="session")
def su2():
    return ConstraintSystem([p / 2 for p in PAULI], levi_civita())


@pytest.fixture(scope="session")
def berezin1():
    return build_berezin(1)


@pytest.fixture(scope="session")
def berezin3():
    return build_berezin(3)


@pytest.fixture(scope="session")
def ghosts1():
    return build_ghost_rep(1)


class Charge:
    """A nilpotent charge with its grading and fundamental symmetry."""

    def __init__(self, name, Q, grading, J, labels=None):
        self.name, self.Q, self.grading, self.J, self.labels = name, Q, grading, J, labels

    def __repr__(self):
        return f"Charge({self.name})"


def _zoo():
    from brstlab import build_bosonic_sector, build_hamiltonian_Q, build_ko_abelian_Q

    swap = np.array([[0, 1], [1, 0]], dtype=complex)
    flip = np.diag([1.0, -1.0]).astype(complex)
    P = np.diag([0.0, 1.0]).astype(complex)
    out = [
        Charge("zero", np.zeros((2, 2), dtype=complex), flip, np.eye(2)),
        Charge("raising", np.array([[0, 1], [0, 0]], dtype=complex), flip, swap),
    ]
    for name, sys, ghosts in (
        ("projection_berezin", ConstraintSystem([P]), build_berezin(1)),
        ("projection_full", ConstraintSystem([P]), build_ghost_rep(1)),
        ("su2_berezin", ConstraintSystem([p / 2 for p in PAULI], levi_civita()), build_berezin(3)),
    ):
        c = build_hamiltonian_Q(sys, ghosts)
        out.append(Charge(name, c.Q, c.grading, c.J_T))
    ko = build_ko_abelian_Q(build_bosonic_sector(0, 1, 3), build_ghost_rep(1))
    sc = ko.sector_complex()
    out.append(Charge("ko_vacuum_sector", sc.Q, sc.grading, sc.J_T, ko.sector_labels))
    return out


ZOO = _zoo()


# acceptance summary: one line per criterion at the end of the run
_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    tag = getattr(item.function, "criterion", None)
    if tag is None:
        return
    number, title = tag
    failed = rep.failed
    if rep.when == "call" or failed:
        previous = _CRITERIA.get(number, (title, True))[1]
        _CRITERIA[number] = (title, previous and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")
