import numpy as np
import pytest
from scipy.linalg import expm


def dense_propagator(H: np.ndarray, t: float) -> np.ndarray:
    """Independent oracle: Pade scaling-and-squaring exp(-iHt) on the dense matrix."""
    return expm(-1j * t * np.asarray(H, dtype=complex))


def brute_force_quantum(gaps, tol, max_integer):
    """Largest E0 = g_min / m (m = 1..max_integer) with every gap a multiple within tol*E0."""
    g = np.asarray(gaps, dtype=float)
    m = np.arange(1, max_integer + 1, dtype=float)
    E0 = g.min() / m
    ok = np.ones(m.size, dtype=bool)
    for x in g:
        q = np.rint(x / E0)
        ok &= (np.abs(x - q * E0) <= tol * E0) & (q <= max_integer)
    hits = np.flatnonzero(ok)
    return None if hits.size == 0 else float(E0[hits[0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(label, ok, detail)."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        _CRITERIA.append((label, bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
