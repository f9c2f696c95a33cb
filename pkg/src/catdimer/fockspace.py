"""Truncated Fock spaces: ladder operators, canonical states, two-mode embedding.

Two-mode objects always use the ordering ``first ⊗ second`` where the first
factor is mode a (local basis) or mode c (delocalized basis), and the second
is mode b or d. The ordering is carried by :class:`Dims` and never inferred.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.special import gammaln

from .errors import DegenerateInput, DimensionMismatch, TruncationError, TruncationWarning

DIRECTIONS = ("ab->cd", "cd->ab")


@dataclass(frozen=True)
class Dims:
    """Truncation of a one- or two-mode Fock space.

    ``modes[k]`` is the number of retained Fock levels (0 .. n-1) of mode k.
    """

    modes: tuple[int, ...]

    def __post_init__(self):
        modes = tuple(int(n) for n in self.modes)
        if len(modes) not in (1, 2):
            raise ValueError(f"one or two modes supported, got {len(modes)}")
        if any(n < 2 for n in modes):
            raise ValueError(f"every mode needs n_max >= 2, got {modes}")
        object.__setattr__(self, "modes", modes)

    @property
    def total(self) -> int:
        return math.prod(self.modes)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)


DimsLike = Union[int, tuple, list, Dims]


def as_dims(spec: DimsLike) -> Dims:
    if isinstance(spec, Dims):
        return spec
    if isinstance(spec, (int, np.integer)):
        return Dims((int(spec),))
    return Dims(tuple(spec))


def two_mode(spec: DimsLike) -> Dims:
    dims = as_dims(spec)
    if dims.n_modes != 2:
        raise DimensionMismatch(f"two-mode dims required, got {dims.modes}")
    return dims


def default_nmax(alpha_bar: complex) -> int:
    """Per-mode truncation recommended for a cat of amplitude ``alpha_bar``."""
    return int(math.ceil(4 * abs(alpha_bar) ** 2 - 1e-9)) + 12


def _single(dim: DimsLike) -> int:
    dims = as_dims(dim)
    if dims.n_modes != 1:
        raise DimensionMismatch(f"single-mode dim required, got {dims.modes}")
    return dims.modes[0]


# ---------------------------------------------------------------- operators

def annihilation(dim: DimsLike) -> sp.csr_matrix:
    n = _single(dim)
    return sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, shape=(n, n),
                    format="csr", dtype=complex)


def creation(dim: DimsLike) -> sp.csr_matrix:
    return annihilation(dim).T.tocsr()


def number(dim: DimsLike) -> sp.csr_matrix:
    n = _single(dim)
    return sp.diags(np.arange(n, dtype=float), 0, format="csr", dtype=complex)


def identity(dim: DimsLike) -> sp.csr_matrix:
    return sp.identity(as_dims(dim).total, dtype=complex, format="csr")


def parity(dim: DimsLike) -> sp.csr_matrix:
    dims = as_dims(dim)
    n_tot = np.zeros(1, dtype=int)
    for n in dims.modes:
        n_tot = np.add.outer(n_tot, np.arange(n)).ravel()
    return sp.diags((-1.0) ** n_tot, 0, format="csr", dtype=complex)


def dag(op):
    return op.conj().T


def displacement(alpha: complex, dim: DimsLike) -> np.ndarray:
    """Dense displacement operator exp(alpha a^dag - alpha^* a) on the truncated space.

    The truncated generator is anti-Hermitian, so the result is unitary by
    construction; its accuracy is instead judged by how much of D|0> reaches
    the top two Fock levels. A :class:`TruncationWarning` is emitted when that
    weight exceeds 1e-8.
    """
    n = _single(dim)
    a = annihilation(n).toarray()
    D = la.expm(alpha * a.conj().T - np.conj(alpha) * a)
    edge = float(np.sum(np.abs(D[n - 2:, 0]) ** 2))
    if edge > 1e-8:
        warnings.warn(f"displacement by {alpha} on n_max={n} reaches the truncation edge "
                      f"(weight {edge:.2e})", TruncationWarning, stacklevel=2)
    return D


def embed(op, which: int, dims: DimsLike) -> sp.csr_matrix:
    """Kronecker embedding of a single-mode operator into slot ``which``."""
    dims = two_mode(dims)
    if which not in (0, 1):
        raise DimensionMismatch(f"mode index must be 0 or 1, got {which}")
    n = dims.modes[which]
    if op.shape != (n, n):
        raise DimensionMismatch(f"operator of shape {op.shape} does not fit mode {which} "
                                f"with n_max={n}")
    other = sp.identity(dims.modes[1 - which], dtype=complex, format="csr")
    factors = (op, other) if which == 0 else (other, op)
    return sp.kron(*factors, format="csr")


def mode_operators(dims: DimsLike) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Annihilation operators of the first and second mode of a two-mode space."""
    dims = two_mode(dims)
    return (embed(annihilation(dims.modes[0]), 0, dims),
            embed(annihilation(dims.modes[1]), 1, dims))


# ------------------------------------------------------------------- states

def basis(dim: DimsLike, *levels: int) -> np.ndarray:
    dims = as_dims(dim)
    if len(levels) != dims.n_modes:
        raise DimensionMismatch(f"need {dims.n_modes} occupation numbers, got {len(levels)}")
    psi = np.zeros(dims.total, dtype=complex)
    psi[np.ravel_multi_index(levels, dims.modes)] = 1.0
    return psi


def _coherent_amplitudes(alpha: complex, n: int) -> np.ndarray:
    k = np.arange(n)
    if alpha == 0:
        out = np.zeros(n, dtype=complex)
        out[0] = 1.0
        return out
    logmag = -abs(alpha) ** 2 / 2 + k * math.log(abs(alpha)) - 0.5 * gammaln(k + 1)
    return np.exp(logmag) * np.exp(1j * np.angle(alpha) * k)


def coherent(alpha: complex, dim: DimsLike, tol: float = 1e-10,
             check: bool = True) -> np.ndarray:
    """Coherent state |alpha>, renormalized after truncation.

    Raises :class:`TruncationError` when the discarded Poisson tail exceeds
    ``tol`` (pass ``check=False`` to accept the truncated state anyway).
    """
    n = _single(dim)
    amp = _coherent_amplitudes(complex(alpha), n)
    kept = float(np.vdot(amp, amp).real)
    if check and 1.0 - kept > tol:
        raise TruncationError(f"coherent({alpha}) loses {1 - kept:.2e} of its norm at n_max={n}")
    return amp / math.sqrt(kept)


def cat(alpha: complex, sign: int, dim: DimsLike, tol: float = 1e-10,
        check: bool = True) -> np.ndarray:
    """Even (``sign=+1``) or odd (``sign=-1``) cat state (|alpha> ± |-alpha>)/N.

    Built by keeping the matching-parity Fock amplitudes of |alpha>, which is
    algebraically identical to the superposition and stays accurate for
    small |alpha|.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    n = _single(dim)
    alpha = complex(alpha)
    if sign == -1 and alpha == 0:
        raise DegenerateInput("odd cat state is undefined at alpha = 0")
    amp = _coherent_amplitudes(alpha, n)
    if sign == 1:
        amp[1::2] = 0.0
        sector = math.exp(-abs(alpha) ** 2) * math.cosh(abs(alpha) ** 2)
    else:
        amp[0::2] = 0.0
        sector = math.exp(-abs(alpha) ** 2) * math.sinh(abs(alpha) ** 2)
    kept = float(np.vdot(amp, amp).real)
    if check and 1.0 - kept / sector > tol:
        raise TruncationError(f"cat({alpha}, {sign:+d}) loses {1 - kept / sector:.2e} "
                              f"of its norm at n_max={n}")
    return amp / math.sqrt(kept)


def product(psi1: np.ndarray, psi2: np.ndarray) -> np.ndarray:
    return np.kron(psi1, psi2)


# -------------------------------------------------------------- diagnostics

def top_level_population(state, dims: DimsLike, levels: int = 2) -> tuple[float, ...]:
    """Population of the ``levels`` highest Fock levels of each mode."""
    dims = as_dims(dims)
    if sp.issparse(state):
        state = state.toarray()
    state = np.asarray(state)
    if state.ndim == 1:
        probs = np.abs(state) ** 2
    else:
        probs = np.real(np.diag(state))
    if probs.size != dims.total:
        raise DimensionMismatch(f"object of size {probs.size} does not match dims {dims.modes}")
    probs = probs.reshape(dims.modes)
    out = []
    for k, n in enumerate(dims.modes):
        marginal = probs.sum(axis=tuple(j for j in range(dims.n_modes) if j != k))
        out.append(float(marginal[n - levels:].sum()))
    return tuple(out)


# ------------------------------------------------------------- beam splitter

@lru_cache(maxsize=16)
def _beamsplitter_unitary(n: int) -> sp.csr_matrix:
    # U = exp(-pi/4 (x^dag y - y^dag x)) P_y maps x^dag -> (x^dag + y^dag)/sqrt2 and
    # y^dag -> (x^dag - y^dag)/sqrt2. U is an involution, so one matrix serves
    # both directions. The generator conserves x^dag x + y^dag y, so the
    # exponential is taken block by block over total photon number; blocks with
    # total < n are exact in the truncated space.
    dims = Dims((n, n))
    x, y = mode_operators(dims)
    gen = (dag(x) @ y - dag(y) @ x).tocsr()
    occ = np.add.outer(np.arange(n), np.arange(n)).ravel()
    rows, cols, vals = [], [], []
    for total in range(2 * n - 1):
        idx = np.flatnonzero(occ == total)
        block = la.expm(-np.pi / 4 * gen[idx][:, idx].toarray())
        r, c = np.meshgrid(idx, idx, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(block.ravel())
    U = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n * n, n * n))
    U = U @ embed(parity(n), 1, dims)
    U.eliminate_zeros()
    return U.tocsr()


def beamsplitter_unitary(dims: DimsLike) -> sp.csr_matrix:
    dims = two_mode(dims)
    if dims.modes[0] != dims.modes[1]:
        raise DimensionMismatch(f"beam splitter needs equal n_max per mode, got {dims.modes}")
    return _beamsplitter_unitary(dims.modes[0])


def beamsplitter_map(obj, dims: DimsLike, direction: str = "cd->ab",
                     check: bool | None = None, tol: float = 1e-8):
    """Rewrite a two-mode state vector, density matrix or operator in the other basis.

    The local and delocalized modes are related by a = (c + d)/sqrt2 and
    b = (c - d)/sqrt2. Vectors are mapped as ``U psi``, matrices as
    ``U M U^dag``. With ``check`` (default on for vectors) a
    :class:`TruncationError` is raised when the result carries more than
    ``tol`` population on the top two Fock levels of either mode.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    dims = two_mode(dims)
    U = beamsplitter_unitary(dims)
    if obj.shape[0] != dims.total:
        raise DimensionMismatch(f"object of shape {obj.shape} does not match dims {dims.modes}")
    if sp.issparse(obj):
        out = (U @ obj @ U.conj().T).tocsr()
    else:
        obj = np.asarray(obj)
        if obj.ndim == 1:
            out = U @ obj
        else:
            out = U @ (U @ obj.conj().T).conj().T
    if check is None:
        check = out.ndim == 1
    if check:
        pops = top_level_population(out, dims)
        if max(pops) > tol:
            raise TruncationError(f"beam-splitter output has top-level populations {pops} "
                                  f"above {tol:g}")
    return out
