"""
Eigendecomposition, mirror-parity labels and the spectrum-parity matching test.

A mirror-symmetric chain transfers every state to its mirror image at
t = pi / E0 when its levels sit on an affine integer lattice
``eps_n = c + N_n * E0`` and each level's parity equals ``sign * (-1)**N_n``.
:func:`check_spmc` certifies exactly that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .chains import EngineeredChainSpec, TridiagonalOperator, build_engineered_couplings

EVEN, ODD, NONE = "even", "odd", "none"

DEFAULT_COMMENSURABILITY_TOL = 1e-9
DEFAULT_PARITY_TOL = 1e-8
DEFAULT_MAX_INTEGER = 10**6
DEGENERACY_RTOL = 1e-9
_SIGN_CUTOFF = 1e-12


class SpectralError(RuntimeError):
    """Eigensolver failure or an eigensystem that violates its accuracy contract."""


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues with eigenvectors stored as columns of ``vectors``."""

    values: np.ndarray
    vectors: np.ndarray
    parities: Optional[tuple[str, ...]] = None

    @property
    def size(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class SpmcReport:
    passes: bool
    E0: float
    offset: float
    level_integers: tuple[int, ...]
    sign: int
    max_commensurability_residual: float
    max_parity_mismatch_count: int
    predicted_transfer_time: float
    tol: float
    max_integer: int
    parities: tuple[str, ...] = ()
    diagnostic: str = ""
    values: tuple[float, ...] = field(default=(), repr=False)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    V = np.array(V, dtype=float, copy=True)
    for j in range(V.shape[1]):
        col = V[:, j]
        idx = np.flatnonzero(np.abs(col) > _SIGN_CUTOFF)
        if idx.size and col[idx[0]] < 0:
            V[:, j] = -col
    return V


def diagonalize(op: TridiagonalOperator) -> EigenSystem:
    """Full spectrum of ``op`` (LAPACK tridiagonal solver), signs fixed, residual checked."""
    d, e = op.diagonal, op.offdiagonal
    if op.size == 1:
        w, V = d.copy(), np.ones((1, 1))
    else:
        try:
            w, V = eigh_tridiagonal(d, e, lapack_driver="stemr")
        except (LinAlgError, ValueError) as exc:
            raise SpectralError(f"tridiagonal eigensolver failed for size {op.size}: {exc}") from exc
    order = np.argsort(w, kind="stable")
    w, V = w[order], _fix_signs(V[:, order])

    HV = d[:, None] * V
    HV[:-1] += e[:, None] * V[1:]
    HV[1:] += e[:, None] * V[:-1]
    resid = np.linalg.norm(HV - V * w, axis=0)
    bound = 1e-9 * np.maximum(1.0, np.abs(w))
    if np.any(resid > bound):
        j = int(np.argmax(resid / bound))
        raise SpectralError(f"eigenpair {j} residual {resid[j]:.3e} exceeds {bound[j]:.3e}")
    w.setflags(write=False)
    V.setflags(write=False)
    return EigenSystem(w, V)


def degenerate_clusters(values: np.ndarray, rtol: float = DEGENERACY_RTOL) -> list[range]:
    """Index ranges of consecutive eigenvalues equal within ``rtol * max(1, |eps|)``."""
    clusters, start = [], 0
    for j in range(1, len(values) + 1):
        if j == len(values) or values[j] - values[j - 1] > rtol * max(1.0, abs(values[j])):
            clusters.append(range(start, j))
            start = j
    return clusters


def _orthonormal_columns(A: np.ndarray, tol: float) -> np.ndarray:
    if A.shape[1] == 0:
        return A
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    return U[:, s > tol]


def classify_parities(sys: EigenSystem, tol: float = DEFAULT_PARITY_TOL) -> EigenSystem:
    """Label each eigenvector even/odd/none under site reversal.

    Inside a degenerate cluster the vectors are first rotated onto parity
    eigenvectors, because labels of individual degenerate vectors depend on
    the basis the solver happened to return.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    V = np.array(sys.vectors, copy=True)
    for cl in degenerate_clusters(sys.values):
        if len(cl) < 2:
            continue
        block = V[:, cl.start:cl.stop]
        mirrored = block[::-1]
        even = _orthonormal_columns(0.5 * (block + mirrored), tol)
        odd = _orthonormal_columns(0.5 * (block - mirrored), tol)
        if even.shape[1] + odd.shape[1] == len(cl):
            V[:, cl.start:cl.stop] = np.hstack([even, odd])
    V = _fix_signs(V)

    labels = []
    for j in range(V.shape[1]):
        v = V[:, j]
        if np.linalg.norm(v - v[::-1]) <= tol:
            labels.append(EVEN)
        elif np.linalg.norm(v + v[::-1]) <= tol:
            labels.append(ODD)
        else:
            labels.append(NONE)
    V.setflags(write=False)
    return replace(sys, vectors=V, parities=tuple(labels))


def approximate_gap_gcd(
    gaps: Sequence[float],
    tol: float = DEFAULT_COMMENSURABILITY_TOL,
    max_integer: int = DEFAULT_MAX_INTEGER,
) -> Optional[float]:
    """Largest quantum E0 of which every gap is an integer multiple within ``tol * E0``.

    Runs a nearest-remainder Euclid reduction over the gaps, stopping once the
    candidate would need a multiplier above ``max_integer``, then refits E0 by
    least squares and verifies every gap. Returns None when no such quantum
    exists; an incommensurate spectrum is a normal outcome here.
    """
    g = np.sort(np.asarray(gaps, dtype=float))[::-1]
    if g.size == 0:
        raise ValueError("need at least one gap")
    if not np.all(g > tol):
        raise ValueError("all gaps must exceed tol")
    floor = g[0] / max_integer

    cand = g[-1]
    for a in g:
        x, y = max(a, cand), min(a, cand)
        while True:
            if y < floor:
                return None
            r = math.fmod(x, y)
            r = min(r, y - r)
            if r <= tol * y:
                break
            x, y = y, r
        cand = y

    m = np.rint(g / cand)
    if np.any(m < 1) or np.any(m > max_integer):
        return None
    E0 = float(np.dot(m, g) / np.dot(m, m))
    if np.all(np.abs(g - m * E0) <= tol * E0):
        return E0
    return None


def _failed(sys: EigenSystem, tol: float, max_integer: int, diagnostic: str, **kw) -> SpmcReport:
    fields = dict(
        passes=False,
        E0=math.nan,
        offset=float(sys.values[0]),
        level_integers=(),
        sign=1,
        max_commensurability_residual=math.nan,
        max_parity_mismatch_count=0,
        predicted_transfer_time=math.nan,
        tol=tol,
        max_integer=max_integer,
        parities=tuple(sys.parities or ()),
        diagnostic=diagnostic,
        values=tuple(float(v) for v in sys.values),
    )
    fields.update(kw)
    return SpmcReport(**fields)


def check_spmc(
    sys: EigenSystem,
    tol: float = DEFAULT_COMMENSURABILITY_TOL,
    max_integer: int = DEFAULT_MAX_INTEGER,
) -> SpmcReport:
    """Certify ``eps_n = c + N_n E0`` with parities ``sign * (-1)**N_n``."""
    if sys.parities is None:
        raise ValueError("classify_parities must run before check_spmc")
    if not tol > 0:
        raise ValueError("tol must be positive")
    w = sys.values
    clusters = degenerate_clusters(w)
    if len(clusters) < 2:
        return _failed(sys, tol, max_integer, "single-level or fully degenerate spectrum")
    if NONE in sys.parities:
        bad = [j for j, p in enumerate(sys.parities) if p == NONE]
        return _failed(sys, tol, max_integer, f"no definite mirror parity for levels {bad}")

    levels = np.array([w[cl.start] for cl in clusters])
    E0 = approximate_gap_gcd(np.diff(levels), tol, max_integer)
    if E0 is None:
        return _failed(sys, tol, max_integer, "incommensurate spectrum: no common energy quantum")

    offset = float(w[0])
    N = np.rint((w - offset) / E0).astype(np.int64)
    resid = float(np.max(np.abs(w - offset - N * E0)) / E0)
    p = np.array([1 if lab == EVEN else -1 for lab in sys.parities])
    sign = int(p[0] * (-1) ** int(N[0]))
    mismatches = int(np.count_nonzero(p != sign * (-1) ** (N % 2)))

    passes = resid <= tol and mismatches == 0
    if not passes:
        diagnostic = (
            f"commensurability residual {resid:.3e} exceeds tol {tol:.1e}"
            if resid > tol
            else f"{mismatches} level(s) violate parity = {sign:+d}*(-1)^N_n"
        )
    else:
        diagnostic = "ok"
    return SpmcReport(
        passes=passes,
        E0=E0,
        offset=offset,
        level_integers=tuple(int(n) for n in N),
        sign=sign,
        max_commensurability_residual=resid,
        max_parity_mismatch_count=mismatches,
        predicted_transfer_time=math.pi / E0,
        tol=tol,
        max_integer=max_integer,
        parities=tuple(sys.parities),
        diagnostic=diagnostic,
        values=tuple(float(v) for v in w),
    )


def certify(op: TridiagonalOperator, tol: float = DEFAULT_COMMENSURABILITY_TOL,
            max_integer: int = DEFAULT_MAX_INTEGER,
            parity_tol: float = DEFAULT_PARITY_TOL) -> tuple[EigenSystem, SpmcReport]:
    sys = classify_parities(diagonalize(op), parity_tol)
    return sys, check_spmc(sys, tol, max_integer)


def eigenvector_by_recursion(spec: EngineeredChainSpec, eigenvalue: float) -> np.ndarray:
    """Engineered-chain eigenvector from the three-term coefficient recursion.

    Seeded with c_1 = 1; the interior rows fix c_2 .. c_{N-1} and the last
    row gives c_N = J_{N-1} c_{N-1} / eps, so eps = 0 is rejected.
    """
    if eigenvalue == 0:
        raise ValueError("recursion is singular at a zero eigenvalue")
    J = build_engineered_couplings(spec)
    N = spec.N
    c = np.zeros(N)
    c[0] = 1.0
    c[1] = eigenvalue * c[0] / J[0]
    for i in range(1, N - 2):
        c[i + 1] = (eigenvalue * c[i] - J[i - 1] * c[i - 1]) / J[i]
    if N > 2:
        c[N - 1] = J[N - 2] * c[N - 2] / eigenvalue
    c /= np.linalg.norm(c)
    return c
