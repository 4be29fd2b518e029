"""Spin operators and sparse chain Hamiltonians.

Two models are supported: the spin-1/2 Ising chain in transverse and
longitudinal fields, and the spin-1 XXZ chain with uniaxial anisotropy and
optional uniform/staggered longitudinal fields.  Both use open boundary
conditions (bond sums run over the L-1 nearest-neighbor bonds).

Basis convention (fixed, relied upon by every downstream module):

* product-basis index is big-endian in the site label: site 1 is the most
  significant digit, so ``index = sum_k digit_k * d**(L-k)``;
* spin-1/2 digits: ``|up> -> 0``, ``|down> -> 1`` (sigma_z eigenbasis,
  sigma_z |up> = +|up>);
* spin-1 digits: ``m=+1 -> 0``, ``m=0 -> 1``, ``m=-1 -> 2``.

The staggered field enters the Hamiltonian as ``Bst * sum_i (-1)^i S^z_i``
with sites counted from 1, i.e. the first site carries weight -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError

#: Hard ceiling on the full Hilbert-space dimension for sparse construction.
MAX_SPARSE_DIM = 2_000_000

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])

_S2 = 1.0 / np.sqrt(2.0)
SPIN1_X = _S2 * np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
SPIN1_Y = _S2 * np.array(
    [[0.0, -1.0j, 0.0], [1.0j, 0.0, -1.0j], [0.0, 1.0j, 0.0]]
)
SPIN1_Z = np.diag([1.0, 0.0, -1.0])
SPIN1_PLUS = SPIN1_X + 1.0j * SPIN1_Y   # real in this basis
SPIN1_MINUS = SPIN1_X - 1.0j * SPIN1_Y


class Model(str, Enum):
    ISING_HALF = "ising_half"
    XXZ_SPIN1 = "xxz_spin1"


@dataclass(frozen=True)
class SpinChainSpec:
    """Single source of truth for one chain Hamiltonian.

    Fields that do not belong to the selected model must stay at their
    defaults; a nonzero irrelevant field is rejected.
    """

    model: Model
    L: int
    J: float | None = None          # Ising exchange, defaults to 1
    Bz: float = 0.0                 # transverse field (Ising)
    Bx: float = 0.0                 # longitudinal field (Ising)
    Jz: float | None = None         # Ising anisotropy (spin-1 XXZ)
    D: float = 0.0                  # uniaxial anisotropy (spin-1 XXZ)
    Bz_uniform: float = 0.0         # uniform S^z field (spin-1 XXZ)
    Bz_staggered: float = 0.0       # staggered S^z field amplitude (spin-1 XXZ)

    def __post_init__(self):
        model = Model(self.model)
        object.__setattr__(self, "model", model)
        if self.L < 2:
            raise ValueError(f"chain length must be >= 2, got L={self.L}")
        if model is Model.ISING_HALF:
            for name in ("Jz",):
                if getattr(self, name) is not None:
                    raise ValueError(f"{name} is not an IsingHalf parameter")
            for name in ("D", "Bz_uniform", "Bz_staggered"):
                if getattr(self, name) != 0.0:
                    raise ValueError(f"{name} is not an IsingHalf parameter")
            if self.J is None:
                object.__setattr__(self, "J", 1.0)
            if self.Bz < 0:
                raise ValueError("Bz must be >= 0 for IsingHalf")
        else:
            if self.J is not None:
                raise ValueError("J is not an XXZSpin1 parameter")
            if self.Jz is None:
                raise ValueError("XXZSpin1 requires Jz")
            for name in ("Bz", "Bx"):
                if getattr(self, name) != 0.0:
                    raise ValueError(f"{name} is not an XXZSpin1 parameter")
            if self.D < 0:
                raise ValueError("D must be >= 0 for XXZSpin1")

    @property
    def local_dim(self) -> int:
        return 2 if self.model is Model.ISING_HALF else 3

    @property
    def dim(self) -> int:
        return self.local_dim ** self.L


@dataclass(frozen=True)
class SparseOperator:
    """Hermitian operator over the full product basis, CSR-compressed.

    The CSR matrix is canonicalized (duplicates summed, indices sorted) so
    that matrix-vector products are deterministic.
    """

    dim: int
    matrix: sp.csr_matrix

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.getH()
        return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())


@dataclass(frozen=True)
class HamiltonianTerms:
    """Bond/site term list shared by the sparse builder, the MPO builder and
    the energy-reconstruction check.

    ``bond_products`` is the sum-of-products decomposition of the uniform
    two-site term: ``h_bond = sum_k coeff_k A_k (x) B_k``.  ``site`` maps the
    1-based site index to its d x d single-site term (may be site dependent
    through the staggered field).
    """

    L: int
    local_dim: int
    bond_products: tuple[tuple[float, np.ndarray, np.ndarray], ...]
    site: tuple[np.ndarray, ...]

    def bond_matrix(self) -> np.ndarray:
        d = self.local_dim
        h = np.zeros((d * d, d * d))
        for coeff, a, b in self.bond_products:
            h += coeff * np.kron(a, b)
        return h

    def site_matrix(self, site: int) -> np.ndarray:
        """Single-site term for 1-based ``site``."""
        return self.site[site - 1]


def staggered_sign(site: int) -> int:
    """(-1)**site with sites counted from 1: the first site gets -1."""
    return -1 if site % 2 == 1 else 1


def hamiltonian_terms(spec: SpinChainSpec) -> HamiltonianTerms:
    """Decompose the spec Hamiltonian into uniform bond products and
    per-site terms.  All matrices are real."""
    if spec.model is Model.ISING_HALF:
        bond = ((-spec.J, SIGMA_X, SIGMA_X),)
        onsite = [-spec.Bz * SIGMA_Z - spec.Bx * SIGMA_X for _ in range(spec.L)]
    else:
        # SxSx + SySy = (S+S- + S-S+)/2, real in the m = +1,0,-1 basis.
        sp1 = SPIN1_PLUS.real
        sm1 = SPIN1_MINUS.real
        bond = (
            (0.5, sp1, sm1),
            (0.5, sm1, sp1),
            (spec.Jz, SPIN1_Z, SPIN1_Z),
        )
        onsite = [
            spec.D * (SPIN1_Z @ SPIN1_Z)
            + (spec.Bz_uniform + spec.Bz_staggered * staggered_sign(i)) * SPIN1_Z
            for i in range(1, spec.L + 1)
        ]
    return HamiltonianTerms(
        L=spec.L,
        local_dim=spec.local_dim,
        bond_products=bond,
        site=tuple(onsite),
    )


def _check_capacity(spec: SpinChainSpec) -> None:
    if spec.dim > MAX_SPARSE_DIM:
        raise CapacityError(
            f"Hilbert dimension {spec.local_dim}**{spec.L} = {spec.dim} "
            f"exceeds the sparse ceiling {MAX_SPARSE_DIM}"
        )


def _embed(op: np.ndarray, site: int, L: int, d: int) -> sp.csr_matrix:
    """Embed a single-site operator at 1-based ``site`` (big-endian)."""
    left = sp.identity(d ** (site - 1), format="coo")
    right = sp.identity(d ** (L - site), format="coo")
    return sp.kron(sp.kron(left, sp.coo_matrix(op)), right).tocsr()


def _embed_pair(a: np.ndarray, b: np.ndarray, site: int, L: int, d: int) -> sp.csr_matrix:
    left = sp.identity(d ** (site - 1), format="coo")
    right = sp.identity(d ** (L - site - 1), format="coo")
    pair = sp.coo_matrix(np.kron(a, b))
    return sp.kron(sp.kron(left, pair), right).tocsr()


def build_hamiltonian(spec: SpinChainSpec) -> SparseOperator:
    """Assemble the spec Hamiltonian as a canonical CSR sparse operator."""
    _check_capacity(spec)
    terms = hamiltonian_terms(spec)
    L, d = spec.L, spec.local_dim
    H = sp.csr_matrix((spec.dim, spec.dim))
    for i in range(1, L):
        for coeff, a, b in terms.bond_products:
            H = H + coeff * _embed_pair(a, b, i, L, d)
    for i in range(1, L + 1):
        h = terms.site_matrix(i)
        if np.any(h):
            H = H + _embed(h, i, L, d)
    H.sum_duplicates()
    H.sort_indices()
    return SparseOperator(dim=spec.dim, matrix=H)


def build_ising_half(spec: SpinChainSpec) -> SparseOperator:
    if spec.model is not Model.ISING_HALF:
        raise ValueError("spec.model must be IsingHalf")
    return build_hamiltonian(spec)


def build_xxz_spin1(spec: SpinChainSpec) -> SparseOperator:
    if spec.model is not Model.XXZ_SPIN1:
        raise ValueError("spec.model must be XXZSpin1")
    return build_hamiltonian(spec)


def site_parity_flip(spec: SpinChainSpec) -> SparseOperator:
    """Global unitary U with U H(+f) U^dag = H(-f).

    For IsingHalf, f = Bx and U is the product of sigma_z over all sites.
    For XXZSpin1, f covers both longitudinal fields (Bz_uniform and
    Bz_staggered) and U is the product over all sites of the spin flip
    exchanging m = +1 and m = -1, which preserves every other term.
    U is an involution: U @ U = identity.
    """
    _check_capacity(spec)
    d, L = spec.local_dim, spec.L
    flip = SIGMA_Z if spec.model is Model.ISING_HALF else np.fliplr(np.eye(3))
    U = sp.identity(1, format="coo")
    for _ in range(L):
        U = sp.kron(U, sp.coo_matrix(flip))
    U = U.tocsr()
    U.sum_duplicates()
    U.sort_indices()
    return SparseOperator(dim=spec.dim, matrix=U)


def basis_index(digits: list[int] | tuple[int, ...], d: int) -> int:
    """Big-endian product-basis index of per-site digits (site 1 first)."""
    idx = 0
    for g in digits:
        if not 0 <= g < d:
            raise ValueError(f"digit {g} out of range for local dim {d}")
        idx = idx * d + g
    return idx
