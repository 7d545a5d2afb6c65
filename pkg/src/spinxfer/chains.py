"""
Chain Hamiltonians in the single-excitation site basis.

Every model is stored as a real symmetric tridiagonal matrix: the diagonal
holds on-site energies and the off-diagonal holds the hopping amplitudes
between neighbouring sites. Energies and times use hbar = 1.

Two families are provided:

* the engineered XY chain with couplings
      J_i = sqrt(i (N - i))                 (i even)
      J_i = sqrt((i + 2k) (N - i + 2k))     (i odd)
  whose spectrum is a shifted odd-integer lattice with a gap of 2k quanta
  opened in the middle;
* the uniform ferromagnetic Heisenberg chain of 2M+1 sites in the parabolic
  field B(i) = 2 B0 (i - M - 1)^2, which maps to hopping -J/2 and on-site
  energy B(i)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class TridiagonalOperator:
    """Real symmetric tridiagonal matrix (1-based site labels in docs, 0-based arrays)."""

    diagonal: np.ndarray
    offdiagonal: np.ndarray

    def __post_init__(self) -> None:
        d = np.array(self.diagonal, dtype=float).reshape(-1)
        e = np.array(self.offdiagonal, dtype=float).reshape(-1)
        if d.size < 1:
            raise ValueError("operator needs at least one site")
        if e.size != d.size - 1:
            raise ValueError(
                f"offdiagonal length {e.size} does not match size {d.size} (expected {d.size - 1})"
            )
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("operator entries must be finite")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "offdiagonal", e)

    @property
    def size(self) -> int:
        return int(self.diagonal.size)

    def to_dense(self) -> np.ndarray:
        H = np.diag(self.diagonal)
        if self.size > 1:
            H += np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)
        return H

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        out = self.diagonal * v
        out[:-1] += self.offdiagonal * v[1:]
        out[1:] += self.offdiagonal * v[:-1]
        return out

    def shifted(self, c: float) -> "TridiagonalOperator":
        """Same hopping, diagonal moved by a constant ``c``."""
        return TridiagonalOperator(self.diagonal + c, self.offdiagonal)


@dataclass(frozen=True)
class EngineeredChainSpec:
    N: int
    k: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be a positive even integer, got {self.N!r}")
        if self.N % 2:
            raise ValueError(f"N must be even for a mirror-symmetric engineered chain, got {self.N}")
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 0:
            raise ValueError(f"k must be a nonnegative integer, got {self.k!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "k", int(self.k))


def field_strength_from_lambda(width: float, lam: float) -> float:
    """B0 = 8 (ln 2 / width^2)^2 * lam."""
    if width <= 0:
        raise ValueError("packet width must be positive")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return 8.0 * (math.log(2.0) / width**2) ** 2 * lam


@dataclass(frozen=True)
class ParabolicChainSpec:
    """Uniform Heisenberg chain of ``2 * half_length + 1`` sites in a parabolic field.

    The field curvature is either given directly as ``B0`` or derived from a
    packet width and the dimensionless factor ``lam``.
    """

    half_length: int
    J: float = 1.0
    B0: Optional[float] = None
    packet_width: Optional[float] = None
    lam: Optional[float] = None

    def __post_init__(self) -> None:
        if isinstance(self.half_length, bool) or int(self.half_length) != self.half_length or self.half_length < 1:
            raise ValueError(f"half_length must be a positive integer, got {self.half_length!r}")
        object.__setattr__(self, "half_length", int(self.half_length))
        if not self.J > 0:
            raise ValueError("coupling J must be positive")
        explicit = self.B0 is not None
        derived = self.packet_width is not None and self.lam is not None
        if explicit == derived:
            raise ValueError("give exactly one of B0 or the (packet_width, lam) pair")
        if explicit and not (math.isfinite(self.B0) and self.B0 >= 0):
            raise ValueError("B0 must be a finite nonnegative number")
        if derived:
            if not self.packet_width > 0:
                raise ValueError("packet_width must be positive")
            if not self.lam >= 0:
                raise ValueError("lambda must be nonnegative")

    @property
    def size(self) -> int:
        return 2 * self.half_length + 1

    @property
    def center_site(self) -> int:
        return self.half_length + 1

    @property
    def field_strength(self) -> float:
        if self.B0 is not None:
            return float(self.B0)
        return field_strength_from_lambda(self.packet_width, self.lam)


def build_engineered_couplings(spec: EngineeredChainSpec) -> np.ndarray:
    N, k = spec.N, spec.k
    i = np.arange(1, N, dtype=float)
    even = np.sqrt(i * (N - i))
    odd = np.sqrt((i + 2 * k) * (N - i + 2 * k))
    return np.where(np.arange(1, N) % 2 == 0, even, odd)


def build_engineered_hamiltonian(spec: EngineeredChainSpec) -> TridiagonalOperator:
    return TridiagonalOperator(np.zeros(spec.N), build_engineered_couplings(spec))


def engineered_spectrum_formula(spec: EngineeredChainSpec) -> np.ndarray:
    """Closed-form eigenvalues of the engineered chain, ascending."""
    N, k = spec.N, spec.k
    n = np.arange(1, N + 1)
    shift = np.where(n <= N // 2, -k, k)
    return (-N + 2 * (n + shift) - 1).astype(float)


def build_parabolic_field(spec: ParabolicChainSpec) -> np.ndarray:
    x = np.arange(spec.size) - spec.half_length
    return 2.0 * spec.field_strength * x.astype(float) ** 2


def build_parabolic_hamiltonian(spec: ParabolicChainSpec) -> TridiagonalOperator:
    # the constant from the Heisenberg -> hopping mapping is dropped
    return TridiagonalOperator(
        0.5 * build_parabolic_field(spec),
        np.full(spec.size - 1, -0.5 * spec.J),
    )


def uniform_chain(size: int, coupling: float = 1.0) -> TridiagonalOperator:
    """Zero-field chain with equal hopping on every bond."""
    return TridiagonalOperator(np.zeros(size), np.full(size - 1, float(coupling)))


def is_mirror_symmetric(op: TridiagonalOperator, tol: float = 1e-12) -> bool:
    if not tol > 0:
        raise ValueError("tol must be positive")
    d, e = op.diagonal, op.offdiagonal
    return bool(np.all(np.abs(d - d[::-1]) <= tol) and np.all(np.abs(e - e[::-1]) <= tol))


def operator_from_sequences(diagonal: Sequence[float], offdiagonal: Sequence[float]) -> TridiagonalOperator:
    return TridiagonalOperator(np.asarray(diagonal, dtype=float), np.asarray(offdiagonal, dtype=float))
