"""Lowest two eigenpairs of a sparse chain Hamiltonian.

Two interchangeable backends:

* ``Method.DENSE`` -- full ``numpy.linalg.eigh``, permitted up to dimension
  20 000; exact reference for tests.
* ``Method.LANCZOS`` -- ARPACK Lanczos (``scipy.sparse.linalg.eigsh``) with
  full implicit restarts, seeded deterministic start vector and explicit
  residual verification.

The start vector is drawn once from ``numpy.random.default_rng(LANCZOS_SEED)``
so repeated solves of the same operator are bitwise reproducible.  Degenerate
ground states (gap below 1e-12) are reported via the ``degenerate`` flag, not
as an error; the eigenvectors are whatever the deterministic pipeline yields.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse.linalg as spla

from .errors import CapacityError, NoConvergenceError
from .hilbert import SparseOperator

#: Documented seed of the deterministic Lanczos start vector.
LANCZOS_SEED = 20170901

#: Dense diagonalization ceiling.
DENSE_DIM_LIMIT = 20_000

#: Gap below which the ground state is flagged degenerate.
DEGENERACY_GAP = 1e-12


class Method(str, Enum):
    DENSE = "dense"
    LANCZOS = "lanczos"


@dataclass(frozen=True)
class PureState:
    dim: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (self.dim,):
            raise ValueError("amplitude vector has wrong shape")
        n = np.linalg.norm(self.amplitudes)
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(n-1):.3e}")


@dataclass(frozen=True)
class EigenResult:
    E0: float
    E1: float
    v0: PureState
    v1: PureState
    residuals: tuple[float, float]
    degenerate: bool

    @property
    def gap(self) -> float:
        return self.E1 - self.E0


def start_vector(dim: int) -> np.ndarray:
    """Deterministic normalized Lanczos start vector."""
    rng = np.random.default_rng(LANCZOS_SEED)
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _residual(H: SparseOperator, E: float, v: np.ndarray) -> float:
    return float(np.linalg.norm(H.matrix @ v - E * v))


def _dense_pairs(H: SparseOperator, k: int):
    if H.dim > DENSE_DIM_LIMIT:
        raise CapacityError(
            f"dense diagonalization limited to dim <= {DENSE_DIM_LIMIT}, got {H.dim}"
        )
    w, V = np.linalg.eigh(H.toarray())
    return w[:k], [np.ascontiguousarray(V[:, i]) for i in range(k)]


def _lanczos_pairs(H: SparseOperator, k: int, tol: float):
    if H.dim < 4:
        raise ValueError("Lanczos requires dim >= 4")
    v0 = start_vector(H.dim)
    ncv = min(H.dim - 1, max(6 * k, 40))
    try:
        w, V = spla.eigsh(
            H.matrix, k=k, which="SA", v0=v0, tol=tol,
            maxiter=200 * H.dim, ncv=ncv,
        )
    except spla.ArpackNoConvergence as exc:
        raise NoConvergenceError(f"ARPACK did not converge: {exc}") from exc
    order = np.argsort(w)
    return w[order], [np.ascontiguousarray(V[:, i]) for i in order]


def _normalize(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    # fix the overall sign for reproducibility
    j = int(np.argmax(np.abs(v)))
    if v[j].real < 0:
        v = -v
    return v


def _residual_bound(tol: float, E: float) -> float:
    # ARPACK's tol is relative to the operator scale; verify on that footing.
    return max(tol, tol * abs(E)) * 10 + 1e-13


def lowest_two(H: SparseOperator, method: Method | str = Method.LANCZOS,
               tol: float = 1e-10) -> EigenResult:
    """Ground and first excited eigenpair (counting multiplicity)."""
    method = Method(method)
    if method is Method.DENSE:
        w, vecs = _dense_pairs(H, 2)
    else:
        w, vecs = _lanczos_pairs(H, 2, tol)
    v0, v1 = _normalize(vecs[0]), _normalize(vecs[1])
    r0 = _residual(H, w[0], v0)
    r1 = _residual(H, w[1], v1)
    if method is Method.LANCZOS:
        bound = _residual_bound(tol, max(abs(w[0]), abs(w[1])))
        if r0 > bound or r1 > bound:
            raise NoConvergenceError(
                f"residuals ({r0:.3e}, {r1:.3e}) exceed bound {bound:.3e}"
            )
    return EigenResult(
        E0=float(w[0]), E1=float(w[1]),
        v0=PureState(H.dim, v0), v1=PureState(H.dim, v1),
        residuals=(r0, r1),
        degenerate=bool(w[1] - w[0] < DEGENERACY_GAP),
    )


def ground_state(H: SparseOperator, method: Method | str = Method.LANCZOS,
                 tol: float = 1e-10) -> tuple[float, PureState]:
    """Ground-state energy and vector only."""
    method = Method(method)
    if method is Method.DENSE:
        w, vecs = _dense_pairs(H, 1)
    else:
        w, vecs = _lanczos_pairs(H, 1, tol)
    v = _normalize(vecs[0])
    if method is Method.LANCZOS:
        r = _residual(H, w[0], v)
        if r > _residual_bound(tol, abs(w[0])):
            raise NoConvergenceError(f"ground-state residual {r:.3e} too large")
    return float(w[0]), PureState(H.dim, v)
