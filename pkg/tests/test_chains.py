import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinxfer.chains import (
    EngineeredChainSpec,
    ParabolicChainSpec,
    TridiagonalOperator,
    build_engineered_couplings,
    build_engineered_hamiltonian,
    build_parabolic_field,
    build_parabolic_hamiltonian,
    engineered_spectrum_formula,
    field_strength_from_lambda,
    is_mirror_symmetric,
)


def test_operator_rejects_bad_lengths_and_nonfinite():
    with pytest.raises(ValueError):
        TridiagonalOperator([0, 0, 0], [1])
    with pytest.raises(ValueError):
        TridiagonalOperator([0, np.nan], [1])
    with pytest.raises(ValueError):
        TridiagonalOperator([], [])


@pytest.mark.parametrize("N,k,expected", [
    (4, 0, [math.sqrt(3), 2, math.sqrt(3)]),
    (4, 1, [math.sqrt(15), 2, math.sqrt(15)]),
    (2, 0, [1.0]),
])
def test_engineered_couplings(N, k, expected):
    assert np.allclose(build_engineered_couplings(EngineeredChainSpec(N, k)), expected, atol=1e-15)


@pytest.mark.parametrize("N,k", [(3, 0), (5, 1), (0, 0), (4, -1)])
def test_engineered_spec_rejects(N, k):
    with pytest.raises(ValueError):
        EngineeredChainSpec(N, k)


def test_engineered_hamiltonian_n4_k0():
    op = build_engineered_hamiltonian(EngineeredChainSpec(4, 0))
    assert np.array_equal(op.diagonal, np.zeros(4))
    assert np.allclose(op.offdiagonal, [math.sqrt(3), 2, math.sqrt(3)])


def test_engineered_n4_k1_characteristic_polynomial():
    # det(x - H) = x^4 - 34 x^2 + 225
    H = build_engineered_hamiltonian(EngineeredChainSpec(4, 1)).to_dense()
    assert np.allclose(np.poly(H), [1, 0, -34, 0, 225], atol=1e-9)
    assert np.allclose(np.sort(np.roots([1, 0, -34, 0, 225]).real), [-5, -3, 3, 5])
    assert np.allclose(np.linalg.eigvalsh(H), [-5, -3, 3, 5], atol=1e-12)


def test_two_site_eigenvalues():
    H = build_engineered_hamiltonian(EngineeredChainSpec(2, 0)).to_dense()
    assert np.allclose(np.linalg.eigvalsh(H), [-1, 1])


@pytest.mark.parametrize("N,k,expected", [(4, 0, [-3, -1, 1, 3]), (4, 1, [-5, -3, 3, 5])])
def test_spectrum_formula(N, k, expected):
    assert np.array_equal(engineered_spectrum_formula(EngineeredChainSpec(N, k)), expected)


@pytest.mark.parametrize("N", range(2, 22, 2))
@pytest.mark.parametrize("k", range(4))
def test_formula_matches_dense_eigenvalues(N, k):
    spec = EngineeredChainSpec(N, k)
    dense = np.linalg.eigvalsh(build_engineered_hamiltonian(spec).to_dense())
    assert np.max(np.abs(dense - engineered_spectrum_formula(spec))) <= 1e-9


@given(st.integers(1, 40).map(lambda h: 2 * h), st.integers(0, 6))
def test_couplings_mirror_symmetric_exactly(N, k):
    J = build_engineered_couplings(EngineeredChainSpec(N, k))
    assert np.array_equal(J, J[::-1])


def test_parabolic_field_values():
    assert np.allclose(build_parabolic_field(ParabolicChainSpec(2, B0=0.5)), [4, 1, 0, 1, 4])


def test_field_strength_from_lambda():
    assert field_strength_from_lambda(2.0, 1.0) == pytest.approx(8 * (math.log(2) / 4) ** 2, rel=1e-15)
    assert field_strength_from_lambda(2.0, 1.0) == pytest.approx(0.240227, abs=1e-6)
    spec = ParabolicChainSpec(3, packet_width=2.0, lam=1.0)
    assert spec.field_strength == pytest.approx(0.2402265, abs=1e-7)


def test_parabolic_spec_needs_exactly_one_field_source():
    with pytest.raises(ValueError):
        ParabolicChainSpec(3)
    with pytest.raises(ValueError):
        ParabolicChainSpec(3, B0=1.0, packet_width=2.0, lam=1.0)
    with pytest.raises(ValueError):
        ParabolicChainSpec(0, B0=1.0)


@given(st.integers(1, 30), st.floats(1e-6, 10.0))
def test_parabolic_field_even_with_zero_center(M, B0):
    B = build_parabolic_field(ParabolicChainSpec(M, B0=B0))
    assert B.size == 2 * M + 1
    assert B[M] == 0.0
    assert np.array_equal(B, B[::-1])
    assert np.all(np.delete(B, M) > 0)


def test_parabolic_hamiltonian_free():
    op = build_parabolic_hamiltonian(ParabolicChainSpec(1, B0=0.0))
    assert np.array_equal(op.diagonal, [0, 0, 0])
    assert np.array_equal(op.offdiagonal, [-0.5, -0.5])
    # 3-site hopping -1/2: eigenvalues -1/2 * sqrt(2) * {1, 0, -1}
    assert np.allclose(np.linalg.eigvalsh(op.to_dense()), [-1 / math.sqrt(2), 0, 1 / math.sqrt(2)])


def test_parabolic_hamiltonian_with_field():
    op = build_parabolic_hamiltonian(ParabolicChainSpec(2, B0=0.5))
    assert np.allclose(op.diagonal, [2, 0.5, 0, 0.5, 2])
    assert np.array_equal(op.offdiagonal, [-0.5] * 4)


def test_mirror_symmetry_checks():
    assert is_mirror_symmetric(build_engineered_hamiltonian(EngineeredChainSpec(4, 1)))
    assert not is_mirror_symmetric(TridiagonalOperator([0, 1, 0, 0], [1, 1, 1]))
    for M, B0 in [(1, 0.0), (5, 0.3), (40, 1e-3)]:
        assert is_mirror_symmetric(build_parabolic_hamiltonian(ParabolicChainSpec(M, J=2.0, B0=B0)))
    with pytest.raises(ValueError):
        is_mirror_symmetric(TridiagonalOperator([0, 0], [1]), tol=0)


def test_builders_are_pure():
    a = build_parabolic_hamiltonian(ParabolicChainSpec(10, packet_width=4.0, lam=0.7))
    b = build_parabolic_hamiltonian(ParabolicChainSpec(10, packet_width=4.0, lam=0.7))
    assert a.diagonal.tobytes() == b.diagonal.tobytes()
    assert a.offdiagonal.tobytes() == b.offdiagonal.tobytes()
    c = build_engineered_hamiltonian(EngineeredChainSpec(12, 3))
    d = build_engineered_hamiltonian(EngineeredChainSpec(12, 3))
    assert c.offdiagonal.tobytes() == d.offdiagonal.tobytes()


def test_operator_is_immutable():
    op = TridiagonalOperator([0.0, 0.0], [1.0])
    with pytest.raises(ValueError):
        op.diagonal[0] = 1.0
