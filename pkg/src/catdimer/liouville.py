"""Sparse Lindblad superoperators: assembly, steady states, evolution, spectra.

Density matrices are vectorized by stacking columns, vec(rho)[i + D*j] =
rho[i, j], so that vec(A X B) = (B^T kron A) vec(X). Every routine in this
module uses that convention.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from . import fockspace as fs
from .errors import DimensionMismatch, NonUniqueSteadyState, SolverFailure, TruncationError
from .fockspace import Dims, DimsLike, dag

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
PSD_TOL = 1e-8
UNIQUENESS_TOL = 1e-6


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, n: int | None = None) -> np.ndarray:
    if n is None:
        n = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape((n, n), order="F")


@dataclass(frozen=True, eq=False)
class Liouvillian:
    matrix: sp.csr_matrix
    dims: Dims
    hamiltonian: sp.csr_matrix
    collapse: tuple = ()

    @property
    def hilbert_dim(self) -> int:
        return self.dims.total

    @cached_property
    def norm(self) -> float:
        """Induced 1-norm (largest absolute column sum)."""
        return float(spla.norm(self.matrix, 1))

    @cached_property
    def parity_blocks(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Index sets of the parity-diagonal and parity-off-diagonal blocks of vec(rho).

        Available when the Hamiltonian conserves total photon-number parity
        and every jump operator has definite parity; both blocks are then
        invariant under the Liouvillian. ``None`` otherwise.
        """
        par = np.real(fs.parity(self.dims).diagonal())
        if not _has_definite_parity(self.hamiltonian, par, even_only=True):
            return None
        if not all(_has_definite_parity(op, par) for _, op in self.collapse):
            return None
        same = (par[:, None] == par[None, :]).reshape(-1, order="F")
        return np.flatnonzero(same), np.flatnonzero(~same)


def _has_definite_parity(op, par, even_only=False) -> bool:
    coo = sp.coo_matrix(op)
    if coo.nnz == 0:
        return True
    flips = par[coo.row] != par[coo.col]
    if even_only:
        return not flips.any()
    return flips.all() or not flips.any()


def build_liouvillian(H, collapse, dims: DimsLike | None = None) -> Liouvillian:
    """Assemble -i[H, .] + sum_k rate_k L[c_k] as a sparse matrix.

    ``collapse`` holds ``(rate, operator)`` pairs; rates are not square-rooted.
    """
    H = sp.csr_matrix(H, dtype=complex)
    n = H.shape[0]
    dims = fs.as_dims(dims if dims is not None else n)
    if dims.total != n or H.shape != (n, n):
        raise DimensionMismatch(f"Hamiltonian of shape {H.shape} does not match dims {dims.modes}")
    eye = sp.identity(n, dtype=complex, format="csr")
    L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    kept = []
    for rate, op in collapse:
        op = sp.csr_matrix(op, dtype=complex)
        if op.shape != (n, n):
            raise DimensionMismatch(f"jump operator of shape {op.shape} does not match dims {dims.modes}")
        if rate == 0:
            continue
        cdc = (dag(op) @ op).tocsr()
        L = L + rate * (sp.kron(op.conj(), op) - 0.5 * sp.kron(eye, cdc) - 0.5 * sp.kron(cdc.T, eye))
        kept.append((float(rate), op))
    L = L.tocsr()
    L.eliminate_zeros()
    return Liouvillian(L, dims, H, tuple(kept))


def trace_row(n: int) -> np.ndarray:
    row = np.zeros(n * n)
    row[np.arange(n) * (n + 1)] = 1.0
    return row


# ------------------------------------------------------------- steady state

def _replace_row(M: sp.csr_matrix, r: int, row: np.ndarray) -> sp.csc_matrix:
    new = sp.csr_matrix(row.reshape(1, -1).astype(complex))
    return sp.vstack([M[:r], new, M[r + 1:]], format="csc")


def _constrained_solve(Ls: sp.csr_matrix, r: int, constraint: np.ndarray) -> np.ndarray:
    M = _replace_row(Ls, r, constraint)
    try:
        lu = spla.splu(M, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise NonUniqueSteadyState(f"trace-constrained Liouvillian is singular ({exc})") from None
    rhs = np.zeros(Ls.shape[0], dtype=complex)
    rhs[r] = 1.0
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise NonUniqueSteadyState("trace-constrained solve produced non-finite values")
    return x


def _to_density(x: np.ndarray, idx: np.ndarray, n: int) -> np.ndarray:
    full = np.zeros(n * n, dtype=complex)
    full[idx] = x
    rho = unvec(full, n)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _eig_fallback(Ls: sp.csr_matrix, norm: float) -> np.ndarray:
    # shift slightly off zero so the shift-invert factorization is regular
    shift = -1e-9 * norm
    vals, vecs = spla.eigs(Ls.tocsc(), k=1, sigma=shift, which="LM")
    return vecs[:, 0]


def steady_state_numeric(L: Liouvillian, check_unique: bool = True,
                         use_symmetry: bool = True, seed: int = 1234) -> np.ndarray:
    """Steady state of ``L`` by sparse LU of the trace-constrained system.

    One row of L is replaced by the trace functional and the system is solved
    with SuperLU. When the model has a parity symmetry the solve is restricted
    to the parity-diagonal block of rho, which is where any trace-one
    steady state lives. With ``check_unique`` a second solve drops a different
    equation and imposes a randomly weighted trace; the two results agree only
    if the kernel is one dimensional. Shift-invert eigen-iteration is the
    fallback when the LU result misses the residual target.
    """
    n = L.hilbert_dim
    blocks = L.parity_blocks if use_symmetry else None
    idx = blocks[0] if blocks is not None else np.arange(n * n)
    Ls = L.matrix[idx][:, idx].tocsr()
    tr = trace_row(n)[idx]
    diag_pos = np.flatnonzero(tr)

    x = _constrained_solve(Ls, int(diag_pos[0]), tr)
    rho = _to_density(x, idx, n)
    residual = np.linalg.norm(L.matrix @ vec(rho))
    if residual > RESIDUAL_TOL * L.norm:
        log.info("LU residual %.3e above target, trying eigen-iteration", residual)
        try:
            rho = _to_density(_eig_fallback(Ls, L.norm), idx, n)
        except (RuntimeError, spla.ArpackError) as exc:
            raise SolverFailure(f"steady-state solve failed: {exc}") from None
        residual = np.linalg.norm(L.matrix @ vec(rho))
        if residual > RESIDUAL_TOL * L.norm:
            raise SolverFailure(f"steady-state residual {residual:.3e} exceeds "
                                f"{RESIDUAL_TOL:g} * ||L|| = {RESIDUAL_TOL * L.norm:.3e}")

    if check_unique:
        rng = np.random.default_rng(seed)
        weights = np.zeros_like(tr)
        weights[diag_pos] = rng.uniform(0.5, 1.5, diag_pos.size)
        x2 = _constrained_solve(Ls, int(diag_pos[-1]), weights)
        rho2 = _to_density(x2, idx, n)
        mismatch = 1.0 - _fidelity_clamped(rho, rho2)
        if mismatch > UNIQUENESS_TOL or _min_eig(rho) < -UNIQUENESS_TOL:
            raise NonUniqueSteadyState(
                f"independent constrained solves disagree (1 - F = {mismatch:.2e}); "
                "the steady state is not unique")

    lowest = _min_eig(rho)
    if lowest < -PSD_TOL:
        log.warning("steady state has eigenvalue %.3e below zero", lowest)
    return rho


def _min_eig(rho: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(rho)[0])


def _fidelity_clamped(r1: np.ndarray, r2: np.ndarray) -> float:
    w, v = np.linalg.eigh(r1)
    s = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    ev = np.linalg.eigvalsh(s @ r2 @ s)
    return float(min(1.0, np.sqrt(np.clip(ev, 0, None)).sum() ** 2))


# ---------------------------------------------------------------- evolution

def evolve(rho0: np.ndarray, L: Liouvillian, times, method: str = "expm",
           truncation_tol: float | None = 1e-6, rtol: float = 1e-8,
           atol: float = 1e-11) -> list[np.ndarray]:
    """Density matrices at ``times`` starting from ``rho0`` at t = 0.

    ``method="expm"`` applies the action of the matrix exponential
    (scipy's ``expm_multiply``) and suits times up to a few hundred inverse
    norms; ``method="bdf"`` integrates with an implicit BDF scheme using the
    sparse Liouvillian as Jacobian, which copes with long, stiff horizons.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-D sequence")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending and non-negative")
    n = L.hilbert_dim
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (n, n):
        raise DimensionMismatch(f"rho0 of shape {rho0.shape} does not match dims {L.dims.modes}")

    v0 = vec(rho0)
    idx = np.arange(n * n)
    blocks = L.parity_blocks
    if blocks is not None and not np.any(v0[blocks[1]]):
        idx = blocks[0]
    M = L.matrix[idx][:, idx].tocsc()
    y0 = v0[idx]

    if method == "expm":
        if times.size == 1:
            ys = [spla.expm_multiply(M * times[0], y0)]
        else:
            ys, prev, y = [], 0.0, y0
            for t in times:
                if t > prev:
                    y = spla.expm_multiply(M * (t - prev), y)
                ys.append(y)
                prev = t
    elif method == "bdf":
        if times[-1] == 0:
            ys = [y0 for _ in times]
        else:
            sol = solve_ivp(lambda t, y: M @ y, (0.0, times[-1]), y0, method="BDF",
                            t_eval=times, jac=M, rtol=rtol, atol=atol)
            if not sol.success:
                raise SolverFailure(f"BDF integration failed: {sol.message}")
            ys = list(sol.y.T)
    else:
        raise ValueError(f"unknown method {method!r}")

    out = []
    for t, y in zip(times, ys):
        full = np.zeros(n * n, dtype=complex)
        full[idx] = y
        rho = unvec(full, n)
        rho = 0.5 * (rho + rho.conj().T)
        if truncation_tol is not None:
            pops = fs.top_level_population(rho, L.dims, levels=1)
            if max(pops) > truncation_tol:
                raise TruncationError(f"boundary population {max(pops):.2e} at t={t:g} "
                                      f"exceeds {truncation_tol:g}")
        out.append(rho)
    return out


# ------------------------------------------------------------------ spectra

@dataclass
class GapResult:
    gap: float
    eigenvalues: np.ndarray
    n_zero: int
    zero_tol: float


def spectral_gap(L: Liouvillian, k: int = 6, tol: float | None = None,
                 use_symmetry: bool = True) -> GapResult:
    """Slowest nonzero decay rate from shift-invert Arnoldi near the origin.

    ``eigenvalues`` are the eigenvalues closest to zero (sorted by decreasing
    real part). Eigenvalues with modulus below ``tol`` (default 1e-10 ||L||)
    count as zero modes; the gap is minus the largest real part of the rest.
    """
    k = max(k, 6)
    if tol is None:
        tol = 1e-10 * L.norm
    n2 = L.matrix.shape[0]
    blocks = L.parity_blocks if use_symmetry else None
    groups = [b for b in blocks if b.size] if blocks is not None else [np.arange(n2)]
    # real positive shift keeps L - sigma invertible despite the zero mode
    sigma = 1e-7 * L.norm
    found = []
    for idx in groups:
        M = L.matrix[idx][:, idx].tocsc()
        kk = min(k, M.shape[0] - 2)
        if kk < 1:
            found.append(np.linalg.eigvals(M.toarray()))
            continue
        try:
            vals = spla.eigs(M, k=kk, sigma=sigma, which="LM", return_eigenvectors=False,
                             maxiter=5000)
        except (spla.ArpackError, RuntimeError) as exc:
            raise SolverFailure(f"shift-invert eigensolve failed: {exc}") from None
        found.append(vals)
    vals = np.concatenate(found)
    vals = vals[np.argsort(-vals.real)]
    zero = np.abs(vals) < tol
    rest = vals[~zero]
    gap = float(-rest.real.max()) if rest.size else float("nan")
    return GapResult(gap=gap, eigenvalues=vals, n_zero=int(zero.sum()), zero_tol=tol)


# -------------------------------------------------------------- diagnostics

@dataclass
class TruncationReport:
    top_populations: tuple[float, ...]
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = max(self.top_populations) <= self.tol


def truncation_check(state, dims: DimsLike, tol: float = 1e-8) -> TruncationReport:
    """Population on the top two Fock levels of each mode versus ``tol``."""
    return TruncationReport(fs.top_level_population(state, dims, levels=2), tol)


def validate_density(rho: np.ndarray, tol: float = 1e-10, psd_tol: float = PSD_TOL) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"density matrix has trace {np.trace(rho)}")
    if _min_eig(rho) < -psd_tol:
        raise ValueError("density matrix is not positive semidefinite")


# ---------------------------------------------------------------- COO dumps

COO_MAGIC = b"CDLVCOO1"


def write_coo(path, matrix) -> None:
    """Write a sparse matrix as little-endian COO triplets.

    Layout: 8-byte magic ``CDLVCOO1``; uint64 rows, cols, nnz; then nnz int64
    row indices, nnz int64 column indices and nnz complex128 values.
    """
    coo = sp.coo_matrix(matrix)
    with open(path, "wb") as fh:
        fh.write(COO_MAGIC)
        fh.write(struct.pack("<QQQ", coo.shape[0], coo.shape[1], coo.nnz))
        fh.write(coo.row.astype("<i8").tobytes())
        fh.write(coo.col.astype("<i8").tobytes())
        fh.write(coo.data.astype("<c16").tobytes())


def read_coo(path) -> sp.csr_matrix:
    with open(path, "rb") as fh:
        if fh.read(8) != COO_MAGIC:
            raise ValueError(f"{path}: not a COO dump")
        rows, cols, nnz = struct.unpack("<QQQ", fh.read(24))
        r = np.frombuffer(fh.read(8 * nnz), dtype="<i8")
        c = np.frombuffer(fh.read(8 * nnz), dtype="<i8")
        v = np.frombuffer(fh.read(16 * nnz), dtype="<c16")
    return sp.csr_matrix((v, (r, c)), shape=(rows, cols))
