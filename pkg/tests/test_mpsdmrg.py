"""Unit tests for the MPS/MPO machinery and the two-site DMRG solver."""

import numpy as np
import pytest

from spinfss.eigensolve import Method, PureState, lowest_two
from spinfss.hilbert import (
    Model,
    SIGMA_X,
    SIGMA_Z,
    SPIN1_Z,
    SpinChainSpec,
    build_hamiltonian,
    hamiltonian_terms,
)
from spinfss.measure import (
    central_pair,
    magnetization,
    partial_trace,
    staggered_magnetization_rms,
)
from spinfss.mpsdmrg import (
    DmrgConfig,
    build_mpo,
    dmrg_excited,
    dmrg_ground,
    mps_correlation_matrix,
    mps_local_expectation,
    mps_overlap,
    mps_rdm,
    mps_staggered_rms,
    product_mps,
    random_mps,
)


def _mpo_to_dense(mpos, d, L):
    """contract an MPO chain to the full matrix (small L only)"""
    acc = mpos[0]  # [1, w, bra, ket]
    for W in mpos[1:]:
        acc = np.einsum("awBK,wvbk->avBbKk", acc, W)
        s = acc.shape
        acc = acc.reshape(s[0], s[1], s[2] * s[3], s[4] * s[5])
    assert acc.shape == (1, 1, d ** L, d ** L)
    return acc[0, 0]


def test_mpo_matches_sparse_builder():
    cases = [
        SpinChainSpec(model=Model.ISING_HALF, L=3, Bz=0.6, Bx=0.15),
        SpinChainSpec(model=Model.XXZ_SPIN1, L=3, Jz=2.3, D=0.7,
                      Bz_uniform=0.1, Bz_staggered=0.2),
    ]
    for spec in cases:
        mpos = build_mpo(hamiltonian_terms(spec))
        dense = _mpo_to_dense(mpos, spec.local_dim, spec.L)
        want = build_hamiltonian(spec).toarray()
        assert np.allclose(dense, want, atol=1e-13)


def test_random_mps_canonical():
    mps = random_mps(L=6, d=2, chi=4, seed=1)
    assert mps.canonical_center == 0
    assert mps.canonical_defect() < 1e-12
    assert abs(mps.norm() - 1.0) < 1e-12
    again = random_mps(L=6, d=2, chi=4, seed=1)
    assert np.array_equal(mps.to_dense(), again.to_dense())


def test_move_center_preserves_state():
    mps = random_mps(L=5, d=3, chi=5, seed=2)
    v0 = mps.to_dense()
    mps.move_center(4)
    assert mps.canonical_defect() < 1e-12
    assert np.allclose(mps.to_dense(), v0, atol=1e-12)
    mps.move_center(1)
    assert np.allclose(mps.to_dense(), v0, atol=1e-12)


def test_product_mps_and_overlap():
    mps = product_mps([0, 1, 0], d=2)
    v = mps.to_dense()
    assert v[int("010", 2)] == 1.0 and np.count_nonzero(v) == 1
    a = random_mps(L=4, d=2, chi=3, seed=3)
    b = random_mps(L=4, d=2, chi=3, seed=4)
    assert abs(mps_overlap(a, b) - float(a.to_dense() @ b.to_dense())) < 1e-12


def test_dmrg_ground_matches_ed_ising():
    spec = SpinChainSpec(model=Model.ISING_HALF, L=8, Bz=0.5, Bx=0.02)
    cfg = DmrgConfig(chi_max=32, svd_cutoff=1e-13, energy_tol=1e-12)
    e, mps, report = dmrg_ground(spec, cfg)
    res = lowest_two(build_hamiltonian(spec), Method.DENSE)
    assert report.converged
    assert abs(e - res.E0) < 1e-10
    v = mps.to_dense()
    assert abs(abs(v @ res.v0.amplitudes) - 1.0) < 1e-8
    # RDM agreement at the central pair
    pair = central_pair(spec.L)
    rho_mps = mps_rdm(mps, pair).matrix
    rho_ed = partial_trace(res.v0, pair, spec).matrix
    assert np.abs(rho_mps - rho_ed.real).max() < 1e-8


def test_dmrg_excited_gap():
    spec = SpinChainSpec(model=Model.XXZ_SPIN1, L=4, Jz=2.0, D=0.5)
    cfg = DmrgConfig(chi_max=32, svd_cutoff=1e-13, energy_tol=1e-12)
    e0, g, _ = dmrg_ground(spec, cfg)
    e1, x, _ = dmrg_excited(spec, cfg, g)
    res = lowest_two(build_hamiltonian(spec), Method.DENSE)
    assert abs(e0 - res.E0) < 1e-10
    assert abs(e1 - res.E1) < 1e-9
    assert abs(mps_overlap(g, x)) < 1e-6


def test_dmrg_warm_start():
    spec_a = SpinChainSpec(model=Model.ISING_HALF, L=8, Bz=0.5, Bx=0.01)
    spec_b = SpinChainSpec(model=Model.ISING_HALF, L=8, Bz=0.5, Bx=0.012)
    cfg = DmrgConfig(chi_max=16, svd_cutoff=1e-12, energy_tol=1e-11)
    _, mps_a, _ = dmrg_ground(spec_a, cfg)
    e_cold, _, rep_cold = dmrg_ground(spec_b, cfg)
    e_warm, _, rep_warm = dmrg_ground(spec_b, cfg, initial=mps_a)
    assert abs(e_cold - e_warm) < 1e-9
    assert rep_warm.sweeps <= rep_cold.sweeps


def test_bond_dimension_cap():
    spec = SpinChainSpec(model=Model.ISING_HALF, L=10, Bz=1.0)
    cfg = DmrgConfig(chi_max=4, svd_cutoff=1e-16, energy_tol=1e-9,
                     max_sweeps=10)
    _, mps, _ = dmrg_ground(spec, cfg)
    assert max(mps.bond_dims) <= 4


def test_product_limit_bond_collapse():
    """a Hamiltonian diagonal in the x basis has an exact product ground
    state, so truncation collapses every bond to dimension 1"""
    spec = SpinChainSpec(model=Model.ISING_HALF, L=8, Bz=0.0, Bx=0.3)
    cfg = DmrgConfig(chi_max=16, svd_cutoff=1e-10, energy_tol=1e-12)
    e, mps, _ = dmrg_ground(spec, cfg)
    assert max(mps.bond_dims) == 1
    # fully x-polarized chain: E = -(L-1) J - L Bx
    assert abs(e - (-(spec.L - 1) - spec.L * 0.3)) < 1e-10


def test_strong_field_near_product():
    """deep in the paramagnet the state is close to (but not exactly) a
    product; bonds stay at the minimum the cutoff allows"""
    spec = SpinChainSpec(model=Model.ISING_HALF, L=12, Bz=50.0)
    cfg = DmrgConfig(chi_max=16, svd_cutoff=1e-10, energy_tol=1e-12)
    e, mps, _ = dmrg_ground(spec, cfg)
    assert max(mps.bond_dims) <= 2
    # perturbation theory: E = -L Bz - (L-1)/(4 Bz) + O(Bz^-3)
    assert abs(e - (-12 * 50.0 - 11 / 200.0)) < 1e-3


def test_mps_measurements_match_dense():
    spec = SpinChainSpec(model=Model.XXZ_SPIN1, L=4, Jz=3.0, D=0.2,
                         Bz_staggered=0.05)
    cfg = DmrgConfig(chi_max=27, svd_cutoff=1e-14, energy_tol=1e-12)
    _, mps, _ = dmrg_ground(spec, cfg)
    v = mps.to_dense()
    state = PureState(spec.dim, v / np.linalg.norm(v))
    for site in (1, 2, 4):
        rho1 = partial_trace(state, (site,), spec).matrix
        want = float(np.trace(SPIN1_Z @ rho1).real)
        assert abs(mps_local_expectation(mps, site, SPIN1_Z) - want) < 1e-10
    got = mps_staggered_rms(mps, SPIN1_Z)
    want = staggered_magnetization_rms(state, spec)
    assert abs(got - want) < 1e-9
    corr = mps_correlation_matrix(mps, SPIN1_Z)
    assert np.allclose(corr, corr.T, atol=1e-12)


def test_mps_rdm_validation():
    mps = random_mps(L=5, d=2, chi=4, seed=8)
    rho = mps_rdm(mps, (2, 3))
    rho.assert_valid(1e-10)
    with pytest.raises(ValueError):
        mps_rdm(mps, (2, 4))
    with pytest.raises(ValueError):
        mps_rdm(mps, (5, 6))


def test_dmrg_deterministic():
    spec = SpinChainSpec(model=Model.ISING_HALF, L=6, Bz=0.7, Bx=0.05)
    cfg = DmrgConfig(chi_max=8, svd_cutoff=1e-12, energy_tol=1e-11)
    e1, m1, _ = dmrg_ground(spec, cfg)
    e2, m2, _ = dmrg_ground(spec, cfg)
    assert e1 == e2
    assert all(np.array_equal(a, b)
               for a, b in zip(m1.tensors, m2.tensors))
