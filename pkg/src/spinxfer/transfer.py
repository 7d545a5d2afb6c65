"""
Gaussian wavepacket transfer through the parabolic-field Heisenberg chain.

A packet launched at distance L/2 left of the chain centre is carried by the
quasi-harmonic low-energy part of the spectrum to the mirror position. The
field factor ``lam`` scales the curvature B0 = 8 (ln 2 / width^2)^2 * lam;
:func:`optimize_lambda` scans it for the best arrival fidelity.

Near the band bottom the hopping -J/2 gives an effective mass 1/J, and the
on-site energy B0 x^2 then oscillates with angular frequency
``omega = alpha^2 * sqrt(lam * J)`` where alpha^2 = 4 ln 2 / width^2. The
harmonic transit time pi / omega sets the default time window and the
coarse lambda scale used below.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .chains import ParabolicChainSpec, build_parabolic_hamiltonian, field_strength_from_lambda
from .dynamics import FidelityCurve, fidelity_curve, mirror_reflect
from .spectral import EigenSystem, diagonalize

DEFAULT_MARGIN = 20
DEFAULT_GRID_POINTS = 60
DEFAULT_GRID_SPAN = (0.05, 20.0)
DEFAULT_REFINE_POINTS = 15
PEAK_THRESHOLD = 0.1


@dataclass(frozen=True)
class GaussianSpec:
    """Packet centred ``center_offset`` sites from the chain centre, FWHM ``width``."""

    center_offset: int
    width: float

    def __post_init__(self) -> None:
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ValueError(f"width must be positive and finite, got {self.width!r}")
        if int(self.center_offset) != self.center_offset:
            raise ValueError("center_offset must be an integer")
        object.__setattr__(self, "center_offset", int(self.center_offset))

    @property
    def alpha_sq(self) -> float:
        return 4.0 * math.log(2.0) / self.width**2


def gaussian_state(chain_size: int, center_site: int, spec: GaussianSpec) -> np.ndarray:
    """Normalised amplitudes exp(-alpha^2 (i - center_site)^2 / 2) on sites 1..chain_size."""
    if not 1 <= center_site <= chain_size:
        raise ValueError(f"center_site {center_site} outside 1..{chain_size}")
    i = np.arange(1, chain_size + 1, dtype=float)
    amp = np.exp(-0.5 * spec.alpha_sq * (i - center_site) ** 2)
    return (amp / np.linalg.norm(amp)).astype(np.complex128)


def analytic_fidelity(t, spec: GaussianSpec):
    """Harmonic-limit fidelity exp[-alpha^2 N_A^2 (1 + cos(alpha^2 t)) / 2] at lam = 1.

    Maxima equal 1 at t = (2m + 1) pi / alpha^2. The frequency alpha^2 is the
    oscillator frequency of the chain at lam = 1, J = 1.
    """
    a2 = spec.alpha_sq
    out = np.exp(-0.5 * a2 * spec.center_offset**2 * (1.0 + np.cos(a2 * np.asarray(t, dtype=float))))
    return float(out) if np.ndim(out) == 0 else out


def harmonic_frequency(width: float, lam: float, J: float = 1.0) -> float:
    return 4.0 * math.log(2.0) / width**2 * math.sqrt(lam * J)


def reference_lambda(distance: int, width: float, J: float = 1.0) -> float:
    """Field factor at which a packet released at L/2 reaches unit peak quasi-momentum."""
    a2 = 4.0 * math.log(2.0) / width**2
    return J * (2.0 / (a2 * distance)) ** 2


def default_lambda_grid(distance: int, width: float, J: float = 1.0,
                        points: int = DEFAULT_GRID_POINTS,
                        span: tuple[float, float] = DEFAULT_GRID_SPAN) -> np.ndarray:
    lam0 = reference_lambda(distance, width, J)
    return np.geomspace(span[0] * lam0, span[1] * lam0, points)


@dataclass(frozen=True)
class SweepConfig:
    distance: int
    width: float
    lambda_grid: Optional[tuple[float, ...]] = None
    margin: int = DEFAULT_MARGIN
    J: float = 1.0
    t_max: Optional[float] = None
    time_step: Optional[float] = None
    refine: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if isinstance(self.distance, bool) or int(self.distance) != self.distance:
            raise ValueError("distance must be an integer")
        if self.distance < 0 or self.distance % 2:
            raise ValueError(f"distance must be a nonnegative even integer, got {self.distance}")
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ValueError("width must be positive")
        if int(self.margin) != self.margin or self.margin < 0:
            raise ValueError("margin must be a nonnegative integer")
        if self.distance // 2 + self.margin < 1:
            raise ValueError("chain needs at least three sites")
        if not self.J > 0:
            raise ValueError("J must be positive")
        if self.t_max is not None and not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if self.time_step is not None and not self.time_step > 0:
            raise ValueError("time_step must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.lambda_grid is not None:
            g = tuple(float(x) for x in self.lambda_grid)
            if not g:
                raise ValueError("lambda_grid is empty")
            if any(not (x > 0 and math.isfinite(x)) for x in g):
                raise ValueError("lambda_grid values must be positive")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise ValueError("lambda_grid must be strictly ascending")
            object.__setattr__(self, "lambda_grid", g)
        object.__setattr__(self, "distance", int(self.distance))
        object.__setattr__(self, "margin", int(self.margin))

    @property
    def half_length(self) -> int:
        return self.distance // 2 + self.margin

    @property
    def packet(self) -> GaussianSpec:
        return GaussianSpec(-(self.distance // 2), self.width)

    def grid(self) -> np.ndarray:
        if self.lambda_grid is not None:
            return np.array(self.lambda_grid)
        return default_lambda_grid(self.distance, self.width, self.J)

    def chain(self, lam: float) -> ParabolicChainSpec:
        return ParabolicChainSpec(self.half_length, J=self.J, packet_width=self.width, lam=lam)

    def time_grid(self, lam: float) -> np.ndarray:
        """Uniform grid over [0, t_max]; default t_max is two harmonic transit times."""
        if self.t_max is not None:
            t_max = self.t_max
        elif lam > 0:
            t_max = 2.0 * math.pi / harmonic_frequency(self.width, lam, self.J)
        else:
            # free chain: group velocity is at most J sites per unit time
            t_max = 2.0 * max(self.distance, 1) / self.J
        dt = self.time_step if self.time_step is not None else self.width / (16.0 * self.J)
        n = max(3, int(math.ceil(t_max / dt)) + 1)
        return np.linspace(0.0, t_max, n)


@dataclass(frozen=True)
class SweepRow:
    lam: float
    B0: float
    peak_time: float
    peak_fidelity: float
    peak_found: bool


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    best_row: int
    config: SweepConfig = field(repr=False)

    @property
    def best(self) -> SweepRow:
        return self.rows[self.best_row]


@dataclass(frozen=True)
class TransferReport:
    lam: float
    B0: float
    half_length: int
    initial_site: int
    target_site: int
    packet: GaussianSpec
    curve: FidelityCurve
    analytic: np.ndarray

    @property
    def peak_found(self) -> bool:
        return self.curve.peak_interior and self.curve.peak_value >= PEAK_THRESHOLD


def packet_states(config: SweepConfig) -> tuple[np.ndarray, np.ndarray, int, int]:
    M = config.half_length
    n = 2 * M + 1
    start = M + 1 - config.distance // 2
    psi0 = gaussian_state(n, start, config.packet)
    target = mirror_reflect(psi0)
    return psi0, target, start, n + 1 - start


def _system(config: SweepConfig, lam: float) -> EigenSystem:
    return diagonalize(build_parabolic_hamiltonian(config.chain(lam)))


def transfer_report(config: SweepConfig, lam: float,
                    times: Optional[Sequence[float]] = None) -> TransferReport:
    """Fidelity curve for one field factor, with the harmonic-limit curve alongside."""
    if not (lam >= 0 and math.isfinite(lam)):
        raise ValueError("lambda must be nonnegative")
    t = config.time_grid(lam) if times is None else np.asarray(times, dtype=float)
    psi0, target, a, b = packet_states(config)
    curve = fidelity_curve(_system(config, lam), psi0, target, t)
    return TransferReport(
        lam=float(lam),
        B0=field_strength_from_lambda(config.width, lam),
        half_length=config.half_length,
        initial_site=a,
        target_site=b,
        packet=config.packet,
        curve=curve,
        analytic=np.atleast_1d(analytic_fidelity(curve.times, config.packet)),
    )


def _row(config: SweepConfig, lam: float) -> SweepRow:
    rep = transfer_report(config, lam)
    return SweepRow(float(lam), rep.B0, rep.curve.peak_time, rep.curve.peak_value, rep.peak_found)


def _scan(config: SweepConfig, lams: Sequence[float]) -> list[SweepRow]:
    if config.workers == 1:
        return [_row(config, x) for x in lams]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(lambda x: _row(config, x), lams))


def _best_index(rows: Sequence[SweepRow]) -> int:
    pool = [i for i, r in enumerate(rows) if r.peak_found] or list(range(len(rows)))
    # rows are sorted by lambda, so the first maximum is the smallest lambda
    return max(pool, key=lambda i: (rows[i].peak_fidelity, -i))


def optimize_lambda(config: SweepConfig) -> SweepResult:
    """Scan the lambda grid, then rescan once between the neighbours of the best point."""
    grid = config.grid()
    rows = _scan(config, grid)
    if config.refine and len(rows) > 1:
        i = _best_index(rows)
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        fine = np.geomspace(lo, hi, DEFAULT_REFINE_POINTS + 2)[1:-1]
        fine = [x for x in fine if not np.any(np.isclose(x, grid, rtol=1e-12, atol=0))]
        rows = sorted(rows + _scan(config, fine), key=lambda r: r.lam)
    return SweepResult(tuple(rows), _best_index(rows), config)
