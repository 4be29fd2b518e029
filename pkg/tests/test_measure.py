"""Unit tests for reduced density matrices, magnetizations and the
energy-reconstruction identity."""

import numpy as np
import pytest

from spinfss.eigensolve import Method, PureState, lowest_two
from spinfss.errors import CapacityError
from spinfss.hilbert import Model, SpinChainSpec, basis_index, build_hamiltonian
from spinfss.measure import (
    DensityMatrix,
    central_pair,
    energy_reconstruction,
    magnetization,
    partial_trace,
    staggered_magnetization_rms,
    staggered_weight,
)


def _random_state(spec: SpinChainSpec, seed: int) -> PureState:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(spec.dim)
    return PureState(spec.dim, v / np.linalg.norm(v))


def _partial_trace_oracle(psi: np.ndarray, keep: tuple[int, ...],
                          d: int, L: int) -> np.ndarray:
    """Brute-force double loop over kept and traced indices."""
    keep0 = [s - 1 for s in keep]
    rest = [a for a in range(L) if a not in keep0]
    dk = d ** len(keep0)
    rho = np.zeros((dk, dk), dtype=complex)
    t = psi.reshape((d,) * L)
    for a in np.ndindex(*(d,) * len(keep0)):
        for b in np.ndindex(*(d,) * len(keep0)):
            acc = 0.0
            for r in np.ndindex(*(d,) * len(rest)):
                ia = [0] * L
                ib = [0] * L
                for s, g in zip(keep0, a):
                    ia[s] = g
                for s, g in zip(keep0, b):
                    ib[s] = g
                for s, g in zip(rest, r):
                    ia[s] = g
                    ib[s] = g
                acc += t[tuple(ia)] * np.conj(t[tuple(ib)])
            rho[basis_index(a, d), basis_index(b, d)] = acc
    return rho


def test_partial_trace_against_double_loop():
    spec = SpinChainSpec(model=Model.ISING_HALF, L=4, Bz=0.3)
    state = _random_state(spec, seed=42)
    for keep in [(2, 3), (1,), (1, 4)]:
        got = partial_trace(state, keep, spec).matrix
        want = _partial_trace_oracle(state.amplitudes, keep, 2, 4)
        assert np.allclose(got, want, atol=1e-13)


def test_partial_trace_spin1():
    spec = SpinChainSpec(model=Model.XXZ_SPIN1, L=3, Jz=1.0)
    state = _random_state(spec, seed=7)
    got = partial_trace(state, (2,), spec).matrix
    want = _partial_trace_oracle(state.amplitudes, (2,), 3, 3)
    assert np.allclose(got, want, atol=1e-13)


def test_partial_trace_validity():
    spec = SpinChainSpec(model=Model.ISING_HALF, L=5, Bz=0.4)
    state = _random_state(spec, seed=1)
    rho = partial_trace(state, (2, 3), spec)
    rho.assert_valid(1e-10)
    with pytest.raises(ValueError):
        partial_trace(state, (2, 2), spec)
    with pytest.raises(ValueError):
        partial_trace(state, (0,), spec)


def test_partial_trace_capacity():
    spec = SpinChainSpec(model=Model.XXZ_SPIN1, L=9, Jz=1.0)
    state = _random_state(spec, seed=3)
    with pytest.raises(CapacityError):
        partial_trace(state, tuple(range(1, 9)), spec)


def test_density_matrix_invariants():
    good = DensityMatrix((2, 2), np.diag([0.4, 0.3, 0.2, 0.1]).astype(float))
    good.assert_valid()
    with pytest.raises(ValueError):
        DensityMatrix((2, 2), np.eye(3))
    bad_trace = DensityMatrix((2,), np.diag([0.7, 0.6]))
    with pytest.raises(ValueError):
        bad_trace.assert_valid()
    bad_neg = DensityMatrix((2,), np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        bad_neg.assert_valid()


def test_central_pair():
    """most central bond with even left site"""
    assert central_pair(4) == (2, 3)
    assert central_pair(8) == (4, 5)
    assert central_pair(10) == (6, 7)
    assert central_pair(12) == (6, 7)
    assert central_pair(16) == (8, 9)
    assert central_pair(32) == (16, 17)
    for L in range(4, 40, 2):
        i, j = central_pair(L)
        assert j == i + 1 and i % 2 == 0 and 1 <= i < L
        assert abs(i - L / 2) <= 1  # never more than one bond off center


def test_staggered_weight_convention():
    assert staggered_weight(1) == 1
    assert staggered_weight(2) == -1


def test_magnetization_product_states():
    spec = SpinChainSpec(model=Model.ISING_HALF, L=4, Bz=0.0)
    up = np.zeros(spec.dim)
    up[0] = 1.0  # |uuuu>
    state = PureState(spec.dim, up)
    assert abs(magnetization(state, spec, axis="z") - 4.0) < 1e-14
    assert abs(magnetization(state, spec, axis="z", staggered=True)) < 1e-14
    assert abs(magnetization(state, spec, axis="x")) < 1e-14
    # |+>^L is the sigma_x eigenstate with eigenvalue +1 on every site
    plus = np.full(spec.dim, 0.25)
    state = PureState(spec.dim, plus)
    assert abs(magnetization(state, spec, axis="x") - 4.0) < 1e-13


def test_staggered_rms_neel_state():
    spec = SpinChainSpec(model=Model.XXZ_SPIN1, L=4, Jz=1.0)
    idx = basis_index([0, 2, 0, 2], 3)  # m = +1, -1, +1, -1
    v = np.zeros(spec.dim)
    v[idx] = 1.0
    state = PureState(spec.dim, v)
    assert abs(staggered_magnetization_rms(state, spec) - 4.0) < 1e-13
    assert abs(magnetization(state, spec, axis="z", staggered=True) - 4.0) < 1e-13


def test_energy_reconstruction_identity():
    cases = [
        SpinChainSpec(model=Model.ISING_HALF, L=6, Bz=0.5, Bx=0.07),
        SpinChainSpec(model=Model.ISING_HALF, L=5, Bz=1.3),
        SpinChainSpec(model=Model.XXZ_SPIN1, L=4, Jz=3.0, D=0.5,
                      Bz_staggered=0.1),
    ]
    for spec in cases:
        res = lowest_two(build_hamiltonian(spec), Method.DENSE)
        e = energy_reconstruction(res.v0, spec)
        assert abs(e - res.E0) < 1e-10


def test_energy_reconstruction_random_state():
    """for any state the reconstruction equals <psi|H|psi>"""
    spec = SpinChainSpec(model=Model.XXZ_SPIN1, L=4, Jz=2.0, D=1.1,
                         Bz_uniform=0.2, Bz_staggered=0.3)
    state = _random_state(spec, seed=12)
    H = build_hamiltonian(spec).toarray()
    want = float(state.amplitudes @ H @ state.amplitudes)
    assert abs(energy_reconstruction(state, spec) - want) < 1e-11
