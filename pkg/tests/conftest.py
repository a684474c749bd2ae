import itertools

import numpy as np
import pytest

from pasf_lab.frames import PASF, make_pasf

ACCEPTANCE_LINES: list[str] = []


def record_line(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def signed_perm_pair(Q: np.ndarray, p: float) -> PASF:
    """Image of the standard pair under the isometry Q: tau = Q e_j, f = e_j^T Q^{-1}."""
    return PASF(Q.T.copy(), Q.copy(), p, p, "signed-permutation image")


def small_corpus() -> list[PASF]:
    """Frames with n <= 8 used by the partition oracle tests (r = p = 2)."""
    out = [
        make_pasf("duplicated-standard", d=2, k=2),
        make_pasf("duplicated-standard", d=2, k=3),
        make_pasf("duplicated-standard", d=3, k=2),
        make_pasf("standard", d=3),
    ]
    for d, n, seed in [(2, 4, 1), (2, 5, 2), (3, 5, 3), (3, 6, 4), (2, 6, 5), (3, 7, 6), (2, 8, 7), (4, 8, 8)]:
        rng = np.random.default_rng(seed)
        T = rng.standard_normal((d, n))
        T /= np.linalg.norm(T, axis=0)
        out.append(PASF(T.T.copy(), T, 2.0, 2.0, f"unit random d={d} n={n} seed={seed}"))
    # nearly repeated vectors force extra parts
    rng = np.random.default_rng(11)
    base = rng.standard_normal((2, 3))
    T = np.repeat(base, 2, axis=1) + 1e-2 * rng.standard_normal((2, 6))
    out.append(PASF(T.T.copy(), T, 2.0, 2.0, "near-repeated d=2 n=6"))
    return out


@pytest.fixture
def corpus():
    return small_corpus()


def all_signed_perms(d):
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1.0, -1.0), repeat=d):
            Q = np.zeros((d, d))
            Q[list(perm), range(d)] = signs
            yield Q
