"""Finite-system two-site DMRG with open boundary conditions.

The Hamiltonian is compiled into a matrix product operator from the same
term list (:func:`spinfss.hilbert.hamiltonian_terms`) used by the sparse
builder, so exact diagonalization and DMRG solve literally the same model.

Everything is kept in real float64 arithmetic: both supported models have
real Hamiltonians in the chosen bases, hence real MPO tensors and real
ground/excited states.

Index conventions::

    MPS tensor  A[left bond, physical, right bond]
    MPO tensor  W[left bond, right bond, bra physical, ket physical]
    environment E[bra bond, MPO bond, ket bond]

Determinism: the starting MPS is drawn from a seeded RNG and every local
eigenproblem is started from the current two-site tensor, so repeated runs
are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .errors import NoConvergenceError, OrthogonalityLossError
from .hilbert import HamiltonianTerms, SpinChainSpec, hamiltonian_terms
from .measure import DensityMatrix

#: Seed of the deterministic random starting state.
DMRG_INIT_SEED = 20170902

#: Local problems at or below this dimension are solved densely.
_DENSE_LOCAL_DIM = 400


@dataclass
class DmrgConfig:
    chi_max: int = 128
    svd_cutoff: float = 1e-10
    max_sweeps: int = 30
    energy_tol: float = 1e-10
    init_bond_dim: int = 8
    seed: int = DMRG_INIT_SEED

    def __post_init__(self):
        if self.chi_max < 2:
            raise ValueError("chi_max must be >= 2")
        if not 0.0 < self.svd_cutoff < 1.0:
            raise ValueError("svd_cutoff must lie in (0, 1)")
        if self.energy_tol <= 0.0:
            raise ValueError("energy_tol must be positive")


@dataclass
class ConvergenceReport:
    converged: bool
    sweeps: int
    energy_history: list[float]
    max_discarded_weight: float

    @property
    def final_energy_change(self) -> float:
        if len(self.energy_history) < 2:
            return float("inf")
        return abs(self.energy_history[-1] - self.energy_history[-2])


class MatrixProductState:
    """Mixed-canonical MPS; tensors strictly left (right) of
    ``canonical_center`` are left (right) isometries."""

    def __init__(self, tensors: list[np.ndarray], center: int):
        self.tensors = tensors
        self.canonical_center = center

    @property
    def L(self) -> int:
        return len(self.tensors)

    @property
    def local_dim(self) -> int:
        return self.tensors[0].shape[1]

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "MatrixProductState":
        return MatrixProductState([t.copy() for t in self.tensors],
                                  self.canonical_center)

    def norm(self) -> float:
        c = self.tensors[self.canonical_center]
        return float(np.linalg.norm(c))

    def canonical_defect(self) -> float:
        """Worst isometry violation away from the center."""
        worst = 0.0
        for i, t in enumerate(self.tensors):
            dl, d, dr = t.shape
            if i < self.canonical_center:
                m = t.reshape(dl * d, dr)
                worst = max(worst, np.abs(m.T @ m - np.eye(dr)).max())
            elif i > self.canonical_center:
                m = t.reshape(dl, d * dr)
                worst = max(worst, np.abs(m @ m.T - np.eye(dl)).max())
        return worst

    def move_center(self, target: int) -> None:
        if not 0 <= target < self.L:
            raise ValueError(f"center {target} out of range")
        while self.canonical_center < target:
            c = self.canonical_center
            t = self.tensors[c]
            dl, d, dr = t.shape
            q, r = np.linalg.qr(t.reshape(dl * d, dr))
            self.tensors[c] = q.reshape(dl, d, q.shape[1])
            self.tensors[c + 1] = np.tensordot(r, self.tensors[c + 1],
                                               axes=([1], [0]))
            self.canonical_center = c + 1
        while self.canonical_center > target:
            c = self.canonical_center
            t = self.tensors[c]
            dl, d, dr = t.shape
            q, r = np.linalg.qr(t.reshape(dl, d * dr).T)
            self.tensors[c] = q.T.reshape(q.shape[1], d, dr)
            self.tensors[c - 1] = np.tensordot(self.tensors[c - 1], r.T,
                                               axes=([2], [0]))
            self.canonical_center = c - 1

    def to_dense(self) -> np.ndarray:
        """Full state vector; for cross-checks at small L only."""
        v = self.tensors[0]
        for t in self.tensors[1:]:
            v = np.tensordot(v, t, axes=([v.ndim - 1], [0]))
        return v.reshape(-1)


def random_mps(L: int, d: int, chi: int, seed: int) -> MatrixProductState:
    """Seeded random MPS, right-canonicalized with center at site 0."""
    rng = np.random.default_rng(seed)
    dims = [1]
    for i in range(1, L):
        dims.append(min(chi, d ** i, d ** (L - i)))
    dims.append(1)
    tensors = [rng.standard_normal((dims[i], d, dims[i + 1]))
               for i in range(L)]
    mps = MatrixProductState(tensors, L - 1)
    mps.move_center(0)
    c = mps.tensors[0]
    mps.tensors[0] = c / np.linalg.norm(c)
    return mps


def product_mps(digits: list[int], d: int) -> MatrixProductState:
    """Product state with the given per-site basis digits."""
    tensors = []
    for g in digits:
        t = np.zeros((1, d, 1))
        t[0, g, 0] = 1.0
        tensors.append(t)
    return MatrixProductState(tensors, 0)


def mps_overlap(a: MatrixProductState, b: MatrixProductState) -> float:
    """<a|b> for real MPS."""
    env = np.ones((1, 1))
    for ta, tb in zip(a.tensors, b.tensors):
        tmp = np.tensordot(env, tb, axes=([1], [0]))       # [ga, s, b]
        env = np.tensordot(ta, tmp, axes=([0, 1], [0, 1]))  # [ga', b]
    return float(env[0, 0])


# ---------------------------------------------------------------------------
# MPO construction

def build_mpo(terms: HamiltonianTerms) -> list[np.ndarray]:
    """Lower-triangular finite-state MPO from the shared term list."""
    d = terms.local_dim
    nprod = len(terms.bond_products)
    w = nprod + 2
    eye = np.eye(d)
    mpos = []
    for i in range(1, terms.L + 1):
        W = np.zeros((w, w, d, d))
        W[0, 0] = eye
        W[w - 1, w - 1] = eye
        W[w - 1, 0] = terms.site_matrix(i)
        for k, (coeff, a, b) in enumerate(terms.bond_products, start=1):
            W[k, 0] = b
            W[w - 1, k] = coeff * a
        mpos.append(W)
    mpos[0] = mpos[0][w - 1: w, :]
    mpos[-1] = mpos[-1][:, 0:1]
    return mpos


# ---------------------------------------------------------------------------
# environment and effective-Hamiltonian contractions

def _left_update(env, A, W):
    tmp = np.tensordot(env, A, axes=([2], [0]))            # [a', w, s, b]
    tmp = np.tensordot(tmp, W, axes=([1, 2], [0, 3]))      # [a', b, w2, t]
    out = np.tensordot(A, tmp, axes=([0, 1], [0, 3]))      # A*[a',t,b'] -> [b', b, w2]
    return out.transpose(0, 2, 1)                          # [b', w2, b]


def _right_update(env, A, W):
    tmp = np.tensordot(A, env, axes=([2], [2]))            # [a, s, b', w]
    tmp = np.tensordot(tmp, W, axes=([3, 1], [1, 3]))      # [a, b', w0, t]
    out = np.tensordot(A, tmp, axes=([1, 2], [3, 1]))      # A*[a',t,b'] -> [a', a, w0]
    return out.transpose(0, 2, 1)                          # [a', w0, a]


def _theta_matvec(lenv, Wi, Wj, renv, theta):
    t1 = np.tensordot(lenv, theta, axes=([2], [0]))        # [a', w0, s, t, b]
    t2 = np.tensordot(t1, Wi, axes=([1, 2], [0, 3]))       # [a', t, b, w1, s']
    t3 = np.tensordot(t2, Wj, axes=([3, 1], [0, 3]))       # [a', b, s', w2, t']
    return np.tensordot(t3, renv, axes=([3, 1], [1, 2]))   # [a', s', t', b']


def _dense_heff(lenv, Wi, Wj, renv):
    h2 = np.tensordot(Wi, Wj, axes=([1], [0]))             # [w0, s', s, w2, t', t]
    m = np.tensordot(lenv, h2, axes=([1], [0]))            # [a', a, s', s, w2, t', t]
    m = np.tensordot(m, renv, axes=([4], [1]))             # [a', a, s', s, t', t, b', b]
    m = m.transpose(0, 2, 4, 6, 1, 3, 5, 7)
    n = m.shape[0] * m.shape[1] * m.shape[2] * m.shape[3]
    return m.reshape(n, n)


def _solve_local(lenv, Wi, Wj, renv, theta0, project=None, penalty=0.0):
    """Lowest eigenpair of the effective two-site Hamiltonian, optionally in
    the orthogonal complement of a local direction ``project`` (normalized),
    whose energy is pushed up by ``penalty``."""
    shape = theta0.shape
    dim = theta0.size
    if dim <= _DENSE_LOCAL_DIM:
        h = _dense_heff(lenv, Wi, Wj, renv)
        if project is not None:
            g = project.reshape(-1)
            h = h - np.outer(g, g @ h) - np.outer(h @ g, g) \
                + (g @ h @ g) * np.outer(g, g) + penalty * np.outer(g, g)
        w, v = np.linalg.eigh(h)
        theta = v[:, 0].reshape(shape)
        return float(w[0]), theta

    def mv(x):
        th = x.reshape(shape)
        if project is not None:
            g = project.reshape(-1)
            c = g @ x
            th = (x - c * g).reshape(shape)
            y = _theta_matvec(lenv, Wi, Wj, renv, th).reshape(-1)
            y -= (g @ y) * g
            y += penalty * c * g
            return y
        return _theta_matvec(lenv, Wi, Wj, renv, th).reshape(-1)

    op = spla.LinearOperator((dim, dim), matvec=mv, dtype=np.float64)
    v0 = theta0.reshape(-1)
    if project is not None:
        g = project.reshape(-1)
        v0 = v0 - (g @ v0) * g
        n = np.linalg.norm(v0)
        if n < 1e-12:
            rng = np.random.default_rng(DMRG_INIT_SEED + 1)
            v0 = rng.standard_normal(dim)
            v0 -= (g @ v0) * g
            n = np.linalg.norm(v0)
        v0 = v0 / n
    try:
        w, v = spla.eigsh(op, k=1, which="SA", v0=v0,
                          maxiter=max(2000, 20 * dim), ncv=min(dim - 1, 25))
    except spla.ArpackNoConvergence as exc:
        raise NoConvergenceError(f"local eigenproblem stalled: {exc}") from exc
    return float(w[0]), v[:, 0].reshape(shape)


def _truncate(theta, chi_max, cutoff, center_right=True):
    """SVD split of a two-site tensor; returns (A, B, discarded weight).

    The singular values are absorbed to the right (A isometric) when
    ``center_right`` else to the left (B isometric).
    """
    dl, d1, d2, dr = theta.shape
    m = theta.reshape(dl * d1, d2 * dr)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    total = float(np.sum(s ** 2))
    keep = len(s)
    tail = 0.0
    # shrink while the discarded weight stays below the cutoff
    while keep > 1 and tail + s[keep - 1] ** 2 <= cutoff * total:
        tail += s[keep - 1] ** 2
        keep -= 1
    keep = min(keep, chi_max)
    discarded = float(np.sum(s[keep:] ** 2) / total)
    s_kept = s[:keep] / np.linalg.norm(s[:keep])
    if center_right:
        A = u[:, :keep].reshape(dl, d1, keep)
        B = (s_kept[:, None] * vt[:keep, :]).reshape(keep, d2, dr)
    else:
        A = (u[:, :keep] * s_kept[None, :]).reshape(dl, d1, keep)
        B = vt[:keep, :].reshape(keep, d2, dr)
    return A, B, discarded


class _Dmrg:
    """One DMRG run (ground or deflated excited state)."""

    def __init__(self, spec: SpinChainSpec, cfg: DmrgConfig,
                 ortho: MatrixProductState | None = None,
                 initial: MatrixProductState | None = None):
        self.cfg = cfg
        self.mpo = build_mpo(hamiltonian_terms(spec))
        self.L = spec.L
        d = spec.local_dim
        if initial is not None:
            self.mps = initial.copy()
            self.mps.move_center(0)
        else:
            seed = cfg.seed if ortho is None else cfg.seed + 7
            self.mps = random_mps(self.L, d, cfg.init_bond_dim, seed)
        self.ortho = ortho
        self.penalty_base = 100.0
        # H environments: lenv[i] covers sites < i, renv[i] covers sites > i
        self.lenv = [np.ones((1, 1, 1))] + [None] * self.L
        self.renv = [None] * self.L + [np.ones((1, 1, 1))]
        for i in range(self.L - 1, 0, -1):
            self.renv[i] = _right_update(self.renv[i + 1], self.mps.tensors[i],
                                         self.mpo[i])
        if ortho is not None:
            self.olenv = [np.ones((1, 1))] + [None] * self.L
            self.orenv = [None] * self.L + [np.ones((1, 1))]
            for i in range(self.L - 1, 0, -1):
                self.orenv[i] = self._ov_right(self.orenv[i + 1],
                                               ortho.tensors[i],
                                               self.mps.tensors[i])

    @staticmethod
    def _ov_left(env, G, X):
        tmp = np.tensordot(env, X, axes=([1], [0]))        # [g, s, b]
        return np.tensordot(G, tmp, axes=([0, 1], [0, 1]))  # [g', b]

    @staticmethod
    def _ov_right(env, G, X):
        tmp = np.tensordot(X, env, axes=([2], [1]))        # [a, s, g']
        return np.tensordot(G, tmp, axes=([1, 2], [1, 2]))  # [g, a]

    def _ground_local(self, i):
        """Ground-state direction expressed in the current two-site basis."""
        g = self.ortho
        el = self.olenv[i]                                  # [g, a]
        er = self.orenv[i + 2]                              # [g2, b]
        t = np.tensordot(el, g.tensors[i], axes=([0], [0]))      # [a, s, g1]
        t = np.tensordot(t, g.tensors[i + 1], axes=([2], [0]))   # [a, s, t, g2]
        gamma = np.tensordot(t, er, axes=([3], [0]))              # [a, s, t, b]
        n = np.linalg.norm(gamma)
        if n < 1e-8:
            return None
        return gamma / n

    def _bond_step(self, i, to_right):
        theta0 = np.tensordot(self.mps.tensors[i], self.mps.tensors[i + 1],
                              axes=([2], [0]))
        project = self._ground_local(i) if self.ortho is not None else None
        penalty = self.penalty_base + abs(self.last_energy) \
            if project is not None else 0.0
        e, theta = _solve_local(self.lenv[i], self.mpo[i], self.mpo[i + 1],
                                self.renv[i + 2], theta0,
                                project=project, penalty=penalty)
        A, B, disc = _truncate(theta, self.cfg.chi_max, self.cfg.svd_cutoff,
                               center_right=to_right)
        self.mps.tensors[i] = A
        self.mps.tensors[i + 1] = B
        self.max_discarded = max(self.max_discarded, disc)
        if to_right:
            self.mps.canonical_center = i + 1
            self.lenv[i + 1] = _left_update(self.lenv[i], A, self.mpo[i])
            if self.ortho is not None:
                self.olenv[i + 1] = self._ov_left(self.olenv[i],
                                                  self.ortho.tensors[i], A)
        else:
            self.mps.canonical_center = i
            self.renv[i + 1] = _right_update(self.renv[i + 2], B,
                                             self.mpo[i + 1])
            if self.ortho is not None:
                self.orenv[i + 1] = self._ov_right(self.orenv[i + 2],
                                                   self.ortho.tensors[i + 1],
                                                   B)
        self.last_energy = e
        return e

    def run(self):
        self.last_energy = 0.0
        history = []
        self.max_discarded = 0.0
        converged = False
        sweeps = 0
        for sweep in range(self.cfg.max_sweeps):
            self.max_discarded = 0.0
            for i in range(self.L - 1):
                e = self._bond_step(i, to_right=True)
            for i in range(self.L - 2, -1, -1):
                e = self._bond_step(i, to_right=False)
            history.append(e)
            sweeps = sweep + 1
            if len(history) >= 2 and abs(history[-1] - history[-2]) \
                    < self.cfg.energy_tol:
                converged = True
                break
        report = ConvergenceReport(converged=converged, sweeps=sweeps,
                                   energy_history=history,
                                   max_discarded_weight=self.max_discarded)
        return history[-1], self.mps, report


def dmrg_ground(spec: SpinChainSpec, cfg: DmrgConfig,
                initial: MatrixProductState | None = None
                ) -> tuple[float, MatrixProductState, ConvergenceReport]:
    """Variational ground state; returns best-so-far with an unconverged
    report if the sweep cap is hit."""
    energy, mps, report = _Dmrg(spec, cfg, initial=initial).run()
    return energy, mps, report


def dmrg_excited(spec: SpinChainSpec, cfg: DmrgConfig,
                 ground: MatrixProductState,
                 initial: MatrixProductState | None = None
                 ) -> tuple[float, MatrixProductState, ConvergenceReport]:
    """First excited state, constrained orthogonal to ``ground`` by explicit
    projection of every local eigenproblem onto the ground state's orthogonal
    complement."""
    g = ground.copy()
    g.move_center(0)
    energy, mps, report = _Dmrg(spec, cfg, ortho=g, initial=initial).run()
    overlap = abs(mps_overlap(g, mps))
    if overlap > 1e-6:
        raise OrthogonalityLossError(
            f"excited state overlaps ground by {overlap:.3e} > 1e-6"
        )
    return energy, mps, report


# ---------------------------------------------------------------------------
# measurements on MPS

def mps_rdm(mps: MatrixProductState, sites: tuple[int, int]) -> DensityMatrix:
    """Two-site RDM of an adjacent (1-based) site pair."""
    i, j = sites
    if j != i + 1:
        raise ValueError("mps_rdm supports adjacent site pairs only")
    if not 1 <= i < mps.L:
        raise ValueError(f"sites {sites} out of range for L={mps.L}")
    work = mps.copy()
    work.move_center(i - 1)
    theta = np.tensordot(work.tensors[i - 1], work.tensors[i],
                         axes=([2], [0]))
    d = mps.local_dim
    rho = np.tensordot(theta, theta, axes=([0, 3], [0, 3]))  # [s,t,s',t']
    rho = rho.reshape(d * d, d * d)
    rho = 0.5 * (rho + rho.T)
    rho /= np.trace(rho)
    return DensityMatrix(subsystem_dims=(d, d), matrix=rho)


def mps_local_expectation(mps: MatrixProductState, site: int,
                          op: np.ndarray) -> float:
    """<op> at a 1-based site."""
    d = mps.local_dim
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} != ({d}, {d})")
    work = mps.copy()
    work.move_center(site - 1)
    c = work.tensors[site - 1]
    oc = np.tensordot(np.asarray(op, dtype=float), c, axes=([1], [1]))
    val = np.tensordot(c, oc, axes=([1, 0, 2], [0, 1, 2]))
    return float(val)


def mps_correlation_matrix(mps: MatrixProductState,
                           op: np.ndarray) -> np.ndarray:
    """All two-point functions <op_i op_j> (and <op_i^2> on the diagonal)."""
    L, d = mps.L, mps.local_dim
    op = np.asarray(op, dtype=float)
    corr = np.zeros((L, L))
    for i in range(L):
        work = mps.copy()
        work.move_center(i)
        c = work.tensors[i]
        oc = np.tensordot(op, c, axes=([1], [1])).transpose(1, 0, 2)
        corr[i, i] = np.tensordot(
            c, np.tensordot(op, oc, axes=([1], [1])).transpose(1, 0, 2),
            axes=([0, 1, 2], [0, 1, 2]))
        env = np.tensordot(c, oc, axes=([0, 1], [0, 1]))   # [b', b]
        for j in range(i + 1, L):
            t = work.tensors[j]
            ot = np.tensordot(op, t, axes=([1], [1])).transpose(1, 0, 2)
            closed = np.tensordot(env, ot, axes=([1], [0]))  # [b', s, b]
            corr[i, j] = np.tensordot(t, closed,
                                      axes=([0, 1, 2], [0, 1, 2]))
            corr[j, i] = corr[i, j]
            env = np.tensordot(t, np.tensordot(env, t, axes=([1], [0])),
                               axes=([0, 1], [0, 1]))
    return corr


def mps_staggered_rms(mps: MatrixProductState, op: np.ndarray) -> float:
    """sqrt(<O_st^2>) with O_st = sum_i (+-1)^i op_i, first site +1."""
    corr = mps_correlation_matrix(mps, op)
    L = mps.L
    w = np.array([1.0 if i % 2 == 0 else -1.0 for i in range(L)])
    val = float(w @ corr @ w)
    return float(np.sqrt(max(val, 0.0)))
