"""Unit tests for spin operators, chain specs and Hamiltonian assembly."""

import numpy as np
import pytest

from spinfss.errors import CapacityError
from spinfss.hilbert import (
    Model,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    SPIN1_MINUS,
    SPIN1_PLUS,
    SPIN1_X,
    SPIN1_Y,
    SPIN1_Z,
    SpinChainSpec,
    basis_index,
    build_hamiltonian,
    build_ising_half,
    build_xxz_spin1,
    hamiltonian_terms,
    site_parity_flip,
    staggered_sign,
)


def test_pauli_algebra():
    """sigma matrices: commutators, squares, tracelessness"""
    assert np.allclose(SIGMA_X @ SIGMA_Y - SIGMA_Y @ SIGMA_X, 2j * SIGMA_Z)
    for s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
        assert np.allclose(s @ s, np.eye(2))
        assert abs(np.trace(s)) < 1e-15
        assert np.allclose(s, s.conj().T)


def test_spin1_algebra():
    """spin-1 matrices: commutators, Casimir S^2 = 2, ladder action"""
    assert np.allclose(SPIN1_X @ SPIN1_Y - SPIN1_Y @ SPIN1_X, 1j * SPIN1_Z)
    s2 = SPIN1_X @ SPIN1_X + SPIN1_Y @ SPIN1_Y + SPIN1_Z @ SPIN1_Z
    assert np.allclose(s2, 2.0 * np.eye(3))
    # S+ |m=0> = sqrt(2) |m=+1>; basis order is m = +1, 0, -1
    v = np.zeros(3)
    v[1] = 1.0
    assert np.allclose(SPIN1_PLUS @ v, np.sqrt(2.0) * np.eye(3)[0])
    assert np.allclose(SPIN1_MINUS @ v, np.sqrt(2.0) * np.eye(3)[2])
    assert np.allclose(SPIN1_PLUS.imag, 0.0)


def test_basis_index_big_endian():
    assert basis_index([0, 1], 2) == 1
    assert basis_index([1, 0], 2) == 2
    assert basis_index([1, 0, 2], 3) == 11
    with pytest.raises(ValueError):
        basis_index([2], 2)


def test_staggered_sign():
    assert staggered_sign(1) == -1
    assert staggered_sign(2) == 1
    assert [staggered_sign(i) for i in range(1, 5)] == [-1, 1, -1, 1]


def test_spec_validation():
    with pytest.raises(ValueError):
        SpinChainSpec(model=Model.ISING_HALF, L=1)
    with pytest.raises(ValueError):
        SpinChainSpec(model=Model.ISING_HALF, L=4, Jz=1.0)
    with pytest.raises(ValueError):
        SpinChainSpec(model=Model.ISING_HALF, L=4, D=0.5)
    with pytest.raises(ValueError):
        SpinChainSpec(model=Model.ISING_HALF, L=4, Bz=-0.1)
    with pytest.raises(ValueError):
        SpinChainSpec(model=Model.XXZ_SPIN1, L=4)  # Jz mandatory
    with pytest.raises(ValueError):
        SpinChainSpec(model=Model.XXZ_SPIN1, L=4, Jz=1.0, Bx=0.2)
    spec = SpinChainSpec(model=Model.ISING_HALF, L=4, Bz=0.5)
    assert spec.J == 1.0 and spec.local_dim == 2 and spec.dim == 16
    spec = SpinChainSpec(model="xxz_spin1", L=3, Jz=2.0)
    assert spec.model is Model.XXZ_SPIN1 and spec.dim == 27


def test_ising_l2_matrix_oracle():
    """L=2 Hamiltonian equals the hand-built 4x4 matrix"""
    J, Bz, Bx = 1.3, 0.7, 0.2
    spec = SpinChainSpec(model=Model.ISING_HALF, L=2, J=J, Bz=Bz, Bx=Bx)
    H = build_ising_half(spec).toarray()
    eye = np.eye(2)
    expected = (
        -J * np.kron(SIGMA_X, SIGMA_X)
        - Bz * (np.kron(SIGMA_Z, eye) + np.kron(eye, SIGMA_Z))
        - Bx * (np.kron(SIGMA_X, eye) + np.kron(eye, SIGMA_X))
    )
    assert np.allclose(H, expected, atol=1e-14)


def test_xxz_l3_matrix_oracle():
    """spin-1 builder vs an independent complex Sx Sx + Sy Sy construction"""
    Jz, D, Bu, Bst = 2.5, 0.8, 0.3, 0.15
    spec = SpinChainSpec(model=Model.XXZ_SPIN1, L=3, Jz=Jz, D=D,
                         Bz_uniform=Bu, Bz_staggered=Bst)
    H = build_xxz_spin1(spec).toarray()
    eye = np.eye(3)

    def emb(op, site):  # 1-based embedding, independent of the library's
        mats = [eye, eye, eye]
        mats[site - 1] = op
        return np.kron(np.kron(mats[0], mats[1]), mats[2])

    expected = np.zeros((27, 27), dtype=complex)
    for i in (1, 2):
        expected += (emb(SPIN1_X, i) @ emb(SPIN1_X, i + 1)
                     + emb(SPIN1_Y, i) @ emb(SPIN1_Y, i + 1)
                     + Jz * emb(SPIN1_Z, i) @ emb(SPIN1_Z, i + 1))
    for i in (1, 2, 3):
        w = -1.0 if i % 2 == 1 else 1.0
        expected += D * emb(SPIN1_Z @ SPIN1_Z, i)
        expected += (Bu + Bst * w) * emb(SPIN1_Z, i)
    assert np.abs(expected.imag).max() < 1e-14
    assert np.allclose(H, expected.real, atol=1e-13)


def test_hermiticity_and_determinism():
    spec = SpinChainSpec(model=Model.ISING_HALF, L=6, Bz=0.5, Bx=0.03)
    H1 = build_hamiltonian(spec)
    H2 = build_hamiltonian(spec)
    assert H1.hermiticity_defect() == 0.0
    assert (H1.matrix != H2.matrix).nnz == 0


def test_bond_matrix_consistency():
    """the term list reassembles the same two-site block for both models"""
    for spec in (
        SpinChainSpec(model=Model.ISING_HALF, L=2, Bz=0.0, Bx=0.0),
        SpinChainSpec(model=Model.XXZ_SPIN1, L=2, Jz=1.7),
    ):
        terms = hamiltonian_terms(spec)
        H = build_hamiltonian(spec).toarray()
        expected = terms.bond_matrix().astype(float)
        d, eye = spec.local_dim, np.eye(spec.local_dim)
        for i in (1, 2):
            site = terms.site_matrix(i)
            op = np.kron(site, eye) if i == 1 else np.kron(eye, site)
            expected = expected + op
        assert np.allclose(H, expected, atol=1e-14)


def test_parity_flip_symmetry():
    """U H(+f) U^dag = H(-f) and U is an involution, for both models"""
    cases = [
        (SpinChainSpec(model=Model.ISING_HALF, L=4, Bz=0.5, Bx=0.2),
         SpinChainSpec(model=Model.ISING_HALF, L=4, Bz=0.5, Bx=-0.2)),
        (SpinChainSpec(model=Model.XXZ_SPIN1, L=3, Jz=2.0, D=0.4,
                       Bz_uniform=0.1, Bz_staggered=0.3),
         SpinChainSpec(model=Model.XXZ_SPIN1, L=3, Jz=2.0, D=0.4,
                       Bz_uniform=-0.1, Bz_staggered=-0.3)),
    ]
    for plus, minus in cases:
        U = site_parity_flip(plus).toarray()
        assert np.allclose(U @ U, np.eye(plus.dim), atol=1e-14)
        Hp = build_hamiltonian(plus).toarray()
        Hm = build_hamiltonian(minus).toarray()
        assert np.allclose(U @ Hp @ U.T, Hm, atol=1e-13)


def test_capacity_ceiling():
    spec = SpinChainSpec(model=Model.XXZ_SPIN1, L=14, Jz=1.0)
    with pytest.raises(CapacityError):
        build_hamiltonian(spec)
