"""Wigner functions, fidelities, partial traces and simple observables.

Phase-space convention: alpha = (x + i p)/sqrt2 and W is normalized so that
its integral over dx dp is one. The vacuum then peaks at 1/pi and
W(0, 0) = <P>/pi for photon-number parity P.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import fockspace as fs
from .errors import DimensionMismatch, NonPSDInput
from .fockspace import DimsLike

PSD_TOL = 1e-8


def _as_density(state) -> np.ndarray:
    if sp.issparse(state):
        state = state.toarray()
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    if state.ndim != 2 or state.shape[0] != state.shape[1]:
        raise DimensionMismatch(f"expected a state vector or square matrix, got shape {state.shape}")
    return state


# ------------------------------------------------------------------ Wigner

@dataclass
class WignerMap:
    """W sampled on a rectangular grid; ``values[j, i]`` is W(x[i], p[j])."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray
    normalized: bool = True

    @property
    def cell(self) -> float:
        dx = self.x[1] - self.x[0] if self.x.size > 1 else 1.0
        dp = self.p[1] - self.p[0] if self.p.size > 1 else 1.0
        return float(dx * dp)

    def integral(self) -> float:
        return float(self.values.sum() * self.cell)

    def to_csv(self, path) -> None:
        X, P = np.meshgrid(self.x, self.p)
        with open(path, "w") as fh:
            fh.write("x,p,W\n")
            for xv, pv, wv in zip(X.ravel(), P.ravel(), self.values.ravel()):
                fh.write(f"{xv:.12e},{pv:.12e},{wv:.12e}\n")

    def to_json(self, path) -> None:
        doc = {"x": self.x.tolist(), "p": self.p.tolist(),
               "values": self.values.tolist(),
               "layout": "values[j][i] = W(x[i], p[j])",
               "convention": "alpha = (x + i p)/sqrt(2); integral of W dx dp = 1"}
        with open(path, "w") as fh:
            json.dump(doc, fh)


def default_grid(alpha_bar: complex = 0.0, points: int = 161) -> np.ndarray:
    """Symmetric axis covering +-(2 |sqrt2 alpha_bar| + 3)."""
    half = 2 * abs(math.sqrt(2) * alpha_bar) + 3
    return np.linspace(-half, half, points)


def wigner(state, xvec=None, pvec=None) -> WignerMap:
    """Wigner function of a single-mode state vector or density matrix.

    Uses the three-term recursion for the phase-space functions of the
    operators |m><n|, which is numerically stable for all Fock indices and
    involves no truncated displacement operators.
    """
    rho = _as_density(state)
    xvec = default_grid() if xvec is None else np.asarray(xvec, dtype=float)
    pvec = xvec if pvec is None else np.asarray(pvec, dtype=float)
    X, P = np.meshgrid(xvec, pvec)
    A = (X + 1j * P) / math.sqrt(2)
    n = rho.shape[0]

    wl = [None] * n
    wl[0] = np.exp(-2 * np.abs(A) ** 2) / np.pi
    W = np.real(rho[0, 0]) * wl[0].real
    for k in range(1, n):
        wl[k] = 2 * A * wl[k - 1] / math.sqrt(k)
        W = W + 2 * np.real(rho[0, k] * wl[k])
    for m in range(1, n):
        prev = wl[m].copy()
        wl[m] = (2 * np.conj(A) * prev - math.sqrt(m) * wl[m - 1]) / math.sqrt(m)
        W = W + np.real(rho[m, m] * wl[m])
        for k in range(m + 1, n):
            nxt = (2 * A * wl[k - 1] - math.sqrt(m) * prev) / math.sqrt(k)
            prev = wl[k].copy()
            wl[k] = nxt
            W = W + 2 * np.real(rho[m, k] * wl[k])
    return WignerMap(xvec, pvec, W)


@dataclass
class Negativity:
    min_value: float
    negative_volume: float


def wigner_negativity(wmap: WignerMap) -> Negativity:
    neg = np.clip(wmap.values, None, 0.0)
    return Negativity(float(wmap.values.min()), float(-neg.sum() * wmap.cell))


# ---------------------------------------------------------------- fidelity

def fidelity_pure(psi1, psi2) -> float:
    psi1 = np.asarray(psi1)
    psi2 = np.asarray(psi2)
    if psi1.shape != psi2.shape:
        raise DimensionMismatch(f"state shapes differ: {psi1.shape} vs {psi2.shape}")
    return float(min(1.0, abs(np.vdot(psi1, psi2)) ** 2))


def _psd_sqrt(rho: np.ndarray, tol: float) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    if w[0] < -tol:
        raise NonPSDInput(f"density matrix has eigenvalue {w[0]:.3e} below -{tol:g}")
    # eigenvalues at rounding level are zeroed; their square roots would
    # otherwise inject O(sqrt(eps)) errors into the fidelity
    floor = 10 * rho.shape[0] * np.finfo(float).eps * max(w[-1], 0.0)
    w = np.where(w > floor, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho1, rho2, tol: float = PSD_TOL) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2, clamped to [0, 1].

    Evaluated as the squared nuclear norm of sqrt(rho1) sqrt(rho2), which is
    the same quantity but symmetric and accurate for rank-deficient inputs.
    Either argument may be a state vector.
    """
    r1 = _as_density(rho1)
    r2 = _as_density(rho2)
    if r1.shape != r2.shape:
        raise DimensionMismatch(f"shapes differ: {r1.shape} vs {r2.shape}")
    s1 = _psd_sqrt(0.5 * (r1 + r1.conj().T), tol)
    s2 = _psd_sqrt(0.5 * (r2 + r2.conj().T), tol)
    f = np.linalg.svd(s1 @ s2, compute_uv=False).sum() ** 2
    return float(min(1.0, max(0.0, f)))


# ------------------------------------------------------------ partial trace

def reduced_density(state, dims: DimsLike, keep: int) -> np.ndarray:
    """Partial trace of a two-mode state onto mode ``keep`` (0 or 1)."""
    dims = fs.two_mode(dims)
    if keep not in (0, 1):
        raise DimensionMismatch(f"keep must be 0 or 1, got {keep}")
    n1, n2 = dims.modes
    state = np.asarray(state.toarray() if sp.issparse(state) else state, dtype=complex)
    if state.shape[0] != dims.total:
        raise DimensionMismatch(f"state of shape {state.shape} does not match dims {dims.modes}")
    if state.ndim == 1:
        psi = state.reshape(n1, n2)
        return psi @ psi.conj().T if keep == 0 else psi.T @ psi.conj()
    r = state.reshape(n1, n2, n1, n2)
    return np.einsum("ijkj->ik", r) if keep == 0 else np.einsum("ijil->jl", r)


# ------------------------------------------------------------- observables

@dataclass
class Observables:
    n_a: float
    n_b: float
    joint_parity: float
    purity: float


def observables(state, dims: DimsLike) -> Observables:
    """Mean occupations of both modes, joint photon parity and purity."""
    dims = fs.two_mode(dims)
    rho = _as_density(state)
    if rho.shape[0] != dims.total:
        raise DimensionMismatch(f"state of size {rho.shape[0]} does not match dims {dims.modes}")
    probs = np.real(np.diag(rho)).reshape(dims.modes)
    na = np.arange(dims.modes[0])
    nb = np.arange(dims.modes[1])
    parity = np.outer((-1.0) ** na, (-1.0) ** nb)
    return Observables(n_a=float(probs.sum(axis=1) @ na), n_b=float(probs.sum(axis=0) @ nb),
                       joint_parity=float(np.sum(probs * parity)),
                       purity=float(np.real(np.vdot(rho, rho))))
