import math

import numpy as np
import pytest

from spinxfer.chains import build_parabolic_hamiltonian
from spinxfer.dynamics import fidelity_curve, mirror_reflect
from spinxfer.spectral import diagonalize
from spinxfer.transfer import (
    GaussianSpec,
    SweepConfig,
    SweepRow,
    _best_index,
    analytic_fidelity,
    gaussian_state,
    harmonic_frequency,
    optimize_lambda,
    packet_states,
    reference_lambda,
    transfer_report,
)


def test_alpha_sq_from_width():
    assert GaussianSpec(0, 2.0).alpha_sq == pytest.approx(math.log(2), abs=1e-15)
    assert GaussianSpec(0, 2.0).alpha_sq == pytest.approx(0.693147, abs=1e-6)
    with pytest.raises(ValueError):
        GaussianSpec(0, 0.0)


def test_wide_packet_is_uniform():
    psi = gaussian_state(3, 2, GaussianSpec(0, 1e8))
    assert np.allclose(psi, np.ones(3) / math.sqrt(3), atol=1e-12)


def test_fwhm_of_probability():
    psi = gaussian_state(101, 51, GaussianSpec(0, 4.0))
    p = np.abs(psi) ** 2
    assert p[48] / p[50] == pytest.approx(0.5, rel=1e-12)
    assert p[52] / p[50] == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("center", [1, 2, 7])
def test_truncated_packet_normalised(center):
    psi = gaussian_state(7, center, GaussianSpec(0, 6.0))
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-14)


def test_gaussian_center_out_of_range():
    with pytest.raises(ValueError):
        gaussian_state(5, 6, GaussianSpec(0, 2.0))


def test_analytic_fidelity_shape():
    spec = GaussianSpec(-5, 10.0)
    a2 = spec.alpha_sq
    assert analytic_fidelity(math.pi / a2, spec) == pytest.approx(1.0, abs=1e-15)
    assert analytic_fidelity(0.0, spec) == pytest.approx(math.exp(-a2 * 25), rel=1e-14)
    t = np.linspace(0, 40, 9)
    assert np.allclose(analytic_fidelity(t + 2 * math.pi / a2, spec), analytic_fidelity(t, spec))


def test_harmonic_frequency_at_unit_lambda_is_alpha_sq():
    assert harmonic_frequency(10.0, 1.0) == pytest.approx(GaussianSpec(0, 10.0).alpha_sq)


def test_small_packet_reaches_analytic_peak():
    cfg = SweepConfig(10, 10.0, margin=35)
    assert cfg.half_length == 40
    rep = transfer_report(cfg, 1.0)
    assert abs(rep.curve.peak_value - 1.0) <= 0.05
    assert rep.curve.peak_time == pytest.approx(math.pi / cfg.packet.alpha_sq, rel=0.05)


def test_analytic_consistency_harmonic_regime():
    # |N_A| <= width, M >= |N_A| + 4 width, lam = 1
    cfg = SweepConfig(16, 8.0, margin=36)
    a2 = cfg.packet.alpha_sq
    t = np.linspace(0, 2 * math.pi / a2, 801)
    rep = transfer_report(cfg, 1.0, t)
    assert np.max(np.abs(rep.curve.values - rep.analytic)) <= 0.05


def test_printed_time_argument_does_not_track_the_chain():
    # exp[-a2 N_A^2 (1 + cos(2t/a2)) / 2] oscillates ~600x too fast for this chain
    cfg = SweepConfig(10, 10.0, margin=40)
    a2 = cfg.packet.alpha_sq
    t = np.linspace(0, 2 * math.pi / a2, 2001)
    rep = transfer_report(cfg, 1.0, t)
    printed = np.exp(-0.5 * a2 * 25 * (1 + np.cos(2 * t / a2)))
    assert np.max(np.abs(rep.curve.values - printed)) > 0.4


def test_zero_field_disperses():
    rep = transfer_report(SweepConfig(100, 2.0, margin=20), 0.0)
    assert rep.curve.peak_value < 0.3


def test_mirror_target_and_swap_invariance():
    cfg = SweepConfig(40, 4.0, margin=10)
    psi0, target, a, b = packet_states(cfg)
    assert np.array_equal(target, mirror_reflect(psi0))
    assert a + b == 2 * cfg.half_length + 2
    lam = reference_lambda(cfg.distance, cfg.width) * 2
    sys = diagonalize(build_parabolic_hamiltonian(cfg.chain(lam)))
    t = cfg.time_grid(lam)
    fwd = fidelity_curve(sys, psi0, target, t)
    bwd = fidelity_curve(sys, target, psi0, t)
    assert abs(fwd.peak_value - bwd.peak_value) <= 1e-10


def test_centred_packet_mirror_at_t0():
    rep = transfer_report(SweepConfig(0, 4.0, margin=30), 1.0, [0.0])
    assert rep.curve.values[0] == pytest.approx(1.0, abs=1e-14)


def test_sweep_config_validation():
    for bad in (dict(distance=3, width=2.0), dict(distance=10, width=-1.0),
                dict(distance=10, width=2.0, lambda_grid=()),
                dict(distance=10, width=2.0, lambda_grid=(2.0, 1.0)),
                dict(distance=10, width=2.0, margin=-1),
                dict(distance=10, width=2.0, lambda_grid=(0.0, 1.0))):
        with pytest.raises(ValueError):
            SweepConfig(**bad)


def test_single_point_grid():
    res = optimize_lambda(SweepConfig(40, 4.0, lambda_grid=(0.01,), margin=10))
    assert len(res.rows) == 1
    assert res.best_row == 0


def test_flagged_rows_kept():
    # huge field freezes the packet: no arrival peak in the window
    res = optimize_lambda(SweepConfig(40, 4.0, lambda_grid=(0.01, 50.0), margin=10, refine=False))
    assert len(res.rows) == 2
    assert res.rows[0].peak_found
    assert not res.rows[1].peak_found
    assert res.best_row == 0


def test_best_row_ties_prefer_smaller_lambda():
    rows = [SweepRow(1.0, 0.1, 5.0, 0.9, True), SweepRow(2.0, 0.2, 4.0, 0.9, True),
            SweepRow(3.0, 0.3, 3.0, 0.95, False)]
    assert _best_index(rows) == 0


def test_sweep_deterministic_and_thread_order():
    base = SweepConfig(60, 4.0, margin=10)
    lam0 = reference_lambda(60, 4.0)
    grid = tuple(np.geomspace(0.3 * lam0, 5 * lam0, 8))
    a = optimize_lambda(SweepConfig(60, 4.0, lambda_grid=grid, margin=10))
    b = optimize_lambda(SweepConfig(60, 4.0, lambda_grid=grid, margin=10, workers=4))
    assert a.rows == b.rows
    assert a.best_row == b.best_row
    assert [r.lam for r in a.rows] == sorted(r.lam for r in a.rows)
    assert len(a.rows) > len(grid)  # refinement added points
    assert base.grid().size == 60


def test_short_distance_sweep_finds_high_fidelity():
    res = optimize_lambda(SweepConfig(60, 6.0, margin=20))
    assert res.best.peak_found
    assert res.best.peak_fidelity > 0.99
