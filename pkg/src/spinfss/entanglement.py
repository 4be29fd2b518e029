"""Concurrence, negativity and direct RDM matrix-element access."""

from __future__ import annotations

import numpy as np

from .errors import InvalidStateError
from .hilbert import SIGMA_Y
from .measure import DensityMatrix

_YY = np.kron(SIGMA_Y, SIGMA_Y)

#: Basis labels per local dimension, ordered by basis index.
_LABELS = {2: ("u", "d"), 3: ("+", "0", "-")}


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The eigenvalues of R = sqrt(sqrt(rho) rho_tilde sqrt(rho)), with
    rho_tilde = (sy (x) sy) rho* (sy (x) sy), equal the singular values of
    A = sqrt(rho) (sy (x) sy) conj(sqrt(rho)) because R^2 = A A^dagger; the
    SVD route is numerically stable even for nearly pure states.
    """
    if tuple(rho.subsystem_dims) != (2, 2):
        raise ValueError(f"concurrence needs 2x2 subsystems, got {rho.subsystem_dims}")
    m = rho.matrix
    w, U = np.linalg.eigh(m)
    if w[0] < -1e-10:
        raise InvalidStateError(f"density matrix has eigenvalue {w[0]} < -1e-10")
    sq = (U * np.sqrt(np.clip(w, 0.0, None))) @ U.conj().T
    A = sq @ _YY @ sq.conj()
    lam = np.linalg.svd(A, compute_uv=False)
    c = lam[0] - lam[1] - lam[2] - lam[3]
    return float(min(max(c, 0.0), 1.0))


def partial_transpose(rho: DensityMatrix) -> np.ndarray:
    """Partial transpose on the second subsystem of a bipartite RDM."""
    if len(rho.subsystem_dims) != 2:
        raise ValueError("partial transpose needs a bipartite density matrix")
    da, db = rho.subsystem_dims
    r = rho.matrix.reshape(da, db, da, db)
    return r.transpose(0, 3, 2, 1).reshape(da * db, da * db)


def negativity(rho: DensityMatrix) -> float:
    """(||rho^{T_B}||_1 - 1) / 2, the trace norm taken over the partially
    transposed matrix (Hermitian, so singular values = |eigenvalues|)."""
    rt = partial_transpose(rho)
    ev = np.linalg.eigvalsh(rt)
    return float((np.abs(ev).sum() - 1.0) / 2.0)


def _label_to_index(label: str, dims: tuple[int, ...]) -> int:
    syms = [c for c in label if not c.isspace()]
    if len(syms) != len(dims):
        raise ValueError(
            f"label {label!r} has {len(syms)} symbols for {len(dims)} subsystems"
        )
    idx = 0
    for sym, d in zip(syms, dims):
        table = _LABELS[d]
        if sym not in table:
            raise ValueError(f"symbol {sym!r} invalid for local dim {d} "
                             f"(use one of {table})")
        idx = idx * d + table.index(sym)
    return idx


def rdm_element(rho: DensityMatrix, bra_label: str, ket_label: str) -> complex:
    """Matrix element <bra|rho|ket> by product-basis label.

    Labels use one symbol per subsystem: ``u``/``d`` for spin-1/2 and
    ``+``/``0``/``-`` for spin-1, e.g. ``rdm_element(rho, "uu", "ud")``.
    """
    dims = tuple(rho.subsystem_dims)
    i = _label_to_index(bra_label, dims)
    j = _label_to_index(ket_label, dims)
    return complex(rho.matrix[i, j])
