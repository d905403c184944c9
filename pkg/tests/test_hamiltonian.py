import numpy as np
import pytest

from magsim.hamiltonian import (
    DECOUPLED,
    SegmentConfig,
    build_effective_hamiltonian,
    build_full_hamiltonian,
    build_full_terms,
)
from magsim.hilbert import basis_ket, build_layout, number_operator, qubit_ops
from magsim.parameters import FarDetuningError, paper_params


def test_all_decoupled_qubit_off_is_zero(params2):
    layout = build_layout(2, 2)
    config = SegmentConfig((DECOUPLED, DECOUPLED), qubit_cavity_active=False)
    h = build_full_hamiltonian(layout, params2, config, 3.7)
    assert np.max(np.abs(h.matrix)) == 0.0


def test_resonant_magnon_matrix_element(params2):
    layout = build_layout(2, 2)
    config = SegmentConfig((0.0, DECOUPLED), qubit_cavity_active=False)
    h = build_full_hamiltonian(layout, params2, config, 12.3)
    bra = basis_ket(layout, {"a1": 1})
    ket = basis_ket(layout, {"m1": 1})
    element = np.vdot(bra.vector, h.matrix @ ket.vector)
    assert np.isclose(element, params2.lambda_m[0])
    # Only the m1-a1 exchange block is populated.
    ket2 = basis_ket(layout, {"m2": 1})
    assert np.max(np.abs(h.matrix @ ket2.vector)) == 0.0


def test_qubit_coupling_matrix_element_at_t0(params2):
    layout = build_layout(2, 2)
    config = SegmentConfig((DECOUPLED, DECOUPLED), qubit_cavity_active=True)
    h = build_full_hamiltonian(layout, params2, config, 0.0)
    bra = basis_ket(layout, {"q": "e"})
    ket = basis_ket(layout, {"a1": 1})
    element = np.vdot(bra.vector, h.matrix @ ket.vector)
    assert np.isclose(element, params2.lambda_q)


def test_full_hamiltonian_is_hermitian(params3):
    layout = build_layout(3, 2)
    config = SegmentConfig((0.9, 1.5, DECOUPLED), qubit_cavity_active=True)
    for t in (0.0, 0.31, 7.9):
        h = build_full_hamiltonian(layout, params3, config, t)
        assert h.is_hermitian(1e-12)


def test_residual_qubit_magnon_coupling(params2):
    layout = build_layout(2, 2)
    config = SegmentConfig(
        (DECOUPLED, DECOUPLED), qubit_cavity_active=False, include_residual_qm=True
    )
    h = build_full_hamiltonian(layout, params2, config, 0.0)
    bra = basis_ket(layout, {"q": "e"})
    ket = basis_ket(layout, {"m1": 1})
    element = np.vdot(bra.vector, h.matrix @ ket.vector)
    expected = params2.lambda_q * params2.lambda_m[0] / params2.delta0
    assert np.isclose(element, expected)


def test_coactivation_warns(params2):
    with pytest.warns(UserWarning):
        SegmentConfig((0.0, DECOUPLED), qubit_cavity_active=True)


def test_effective_g_sector_element(params2):
    layout = build_layout(2, 2)
    h = build_effective_hamiltonian(layout, params2)
    bra = basis_ket(layout, {"a2": 1})
    ket = basis_ket(layout, {"a1": 1})
    element = np.vdot(bra.vector, h.matrix @ ket.vector)
    assert np.isclose(element, -params2.lambda_eff)
    vac = basis_ket(layout)
    assert np.isclose(np.vdot(vac.vector, h.matrix @ vac.vector), 0.0)
    assert h.is_hermitian(1e-12)


def test_effective_conserved_quantities(params3):
    layout = build_layout(3, 2)
    h = build_effective_hamiltonian(layout, params3)
    _, _, sigma_z = qubit_ops(layout)
    assert np.max(np.abs(h.commutator(sigma_z).matrix)) == 0.0
    photon_number = sum(
        (number_operator(layout, f"a{k}") for k in (2, 3)),
        number_operator(layout, "a1"),
    )
    assert np.max(np.abs(h.commutator(photon_number).matrix)) < 1e-14


def test_effective_requires_far_detuning():
    params = paper_params(2).with_value("omega_q", paper_params(2).omega_a + 0.01)
    layout = build_layout(2, 2)
    with pytest.raises(FarDetuningError):
        build_effective_hamiltonian(layout, params)


def test_rotating_terms_match_pointwise_build(params2):
    layout = build_layout(2, 2)
    config = SegmentConfig((0.7, DECOUPLED), qubit_cavity_active=True)
    terms = build_full_terms(layout, params2, config)
    for t in (0.0, 0.113, 5.5):
        direct = build_full_hamiltonian(layout, params2, config, t)
        assert np.allclose(terms.at(t), direct.matrix)
