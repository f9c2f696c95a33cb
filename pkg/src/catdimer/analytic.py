"""Closed-form steady state of the dimer and its limiting states.

The steady state in the delocalized picture is |0>_c |C~>_d, where |C~> is
the even-parity dark state of z_cat = (mu0 + mu1 n) d + nu d^dag. Its Fock
amplitudes c~_{2n} obey a two-term ratio that is evaluated here in
log-magnitude form, so that large truncations never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fockspace as fs
from .errors import DegenerateInput, DivergentSeries, SingularParameter, TruncationError
from .fockspace import DimsLike
from .model import ABParams, CDParams


@dataclass(frozen=True)
class SteadyCoeffs:
    """Even Fock amplitudes of the dark state, c~_0 = 1 before normalization.

    ``log_magnitude`` and ``sign`` describe the unnormalized amplitudes;
    ``coefficients`` are normalized over the retained terms. ``tail_bound``
    is a geometric upper bound on the relative weight beyond the last term
    (``inf`` when the ratio has not yet dropped below one).
    """

    mu0: float
    mu1: float
    nu: float
    log_magnitude: np.ndarray
    sign: np.ndarray
    coefficients: np.ndarray
    norm: float
    tail_bound: float

    @property
    def raw(self) -> np.ndarray:
        return self.sign * np.exp(self.log_magnitude)

    @property
    def n_terms(self) -> int:
        return self.coefficients.size

    def fock_amplitudes(self, dim: int) -> np.ndarray:
        """Normalized amplitudes placed on Fock levels 0, 2, 4, ... below ``dim``."""
        out = np.zeros(dim)
        m = min(self.n_terms, (dim + 1) // 2)
        out[0:2 * m:2] = self.coefficients[:m]
        return out / np.linalg.norm(out)

    @property
    def mean_photon_number(self) -> float:
        n = np.arange(self.n_terms)
        return float(np.sum(2 * n * self.coefficients ** 2))


def _ratio(n: np.ndarray, mu0: float, mu1: float, nu: float) -> np.ndarray:
    # c~_{2n+2} / c~_{2n}
    s = mu0 / (2 * mu1)
    denom = n + 0.5 + s
    if np.any(denom == 0):
        raise SingularParameter(f"mu0/mu1 = {mu0 / mu1} hits a pole of the coefficient ratio")
    return (-nu / (2 * mu1)) * np.sqrt((2 * n + 1) / (2 * n + 2)) / denom


def steady_coeffs(mu0: float, mu1: float, nu: float, n_terms: int) -> SteadyCoeffs:
    """Amplitudes c~_{2n}, n = 0 .. n_terms - 1, of the dark state of z_cat."""
    if mu1 == 0:
        raise DegenerateInput("mu1 = 0 has no cat-like dark state; use squeezed_limit_state")
    if mu1 < 0:
        raise ValueError("mu1 must be positive")
    if n_terms < 2:
        raise ValueError("n_terms must be at least 2")
    ratios = _ratio(np.arange(n_terms - 1, dtype=float), mu0, mu1, nu)
    with np.errstate(divide="ignore"):
        logr = np.log(np.abs(ratios))
    log_mag = np.concatenate([[0.0], np.cumsum(logr)])
    sign = np.concatenate([[1.0], np.cumprod(np.sign(ratios))])
    sign[np.isneginf(log_mag)] = 0.0
    shift = log_mag.max()
    scaled = sign * np.exp(log_mag - shift)
    norm_scaled = float(np.linalg.norm(scaled))
    coeffs = scaled / norm_scaled
    q = abs(float(_ratio(np.array([n_terms - 1.0]), mu0, mu1, nu)[0]))
    if q < 1:
        tail = coeffs[-1] ** 2 * q ** 2 / (1 - q ** 2)
    else:
        tail = math.inf
    # norm of the raw vector in log form: log N = shift + log(norm_scaled)
    return SteadyCoeffs(mu0, mu1, nu, log_mag, sign, coeffs,
                        float(math.exp(shift) * norm_scaled) if shift < 700 else math.inf,
                        float(tail))


def recursion_coeffs(mu0: float, mu1: float, nu: float, n_terms: int) -> np.ndarray:
    """Unnormalized even amplitudes from the Fock-space condition z_cat |psi> = 0.

    Projecting z_cat |psi> onto |m> gives
    (mu0 + mu1 m) sqrt(m+1) alpha_{m+1} + nu sqrt(m) alpha_{m-1} = 0,
    iterated here directly in linear arithmetic from alpha_0 = 1.
    """
    alpha = np.zeros(2 * n_terms)
    alpha[0] = 1.0
    for m in range(1, 2 * n_terms - 1):
        lhs = (mu0 + mu1 * m) * math.sqrt(m + 1)
        if lhs == 0:
            raise SingularParameter(f"recursion coefficient vanishes at m = {m}")
        alpha[m + 1] = -nu * math.sqrt(m) * alpha[m - 1] / lhs
    return alpha[0::2]


def required_dim(p: CDParams, tol: float = 1e-8, max_dim: int = 4000) -> int:
    """Smallest d-mode truncation whose top two levels and beyond carry at most ``tol``."""
    n_terms = 32
    while True:
        full = steady_coeffs(p.mu0, p.mu1, p.nu, n_terms)
        if full.tail_bound <= tol or 2 * n_terms > max_dim:
            break
        n_terms *= 2
    weights = full.coefficients ** 2
    # mass on Fock levels >= 2k, i.e. the suffix sums
    suffix = np.cumsum(weights[::-1])[::-1] + full.tail_bound
    for dim in range(4, 2 * n_terms + 1):
        first = (dim - 2 + 1) // 2
        beyond = suffix[first] if first < suffix.size else full.tail_bound
        if beyond <= tol:
            return dim
    raise TruncationError(f"no truncation up to {max_dim} levels reaches tol {tol:g}")


def _require_dims(dims: DimsLike):
    return fs.two_mode(dims)


def _check_mass(beyond: float, tol: float, what: str):
    if beyond > tol:
        raise TruncationError(f"{what}: {beyond:.2e} of the norm lies on or beyond the top "
                              f"two retained Fock levels (tol {tol:g})")


def d_mode_state(p: CDParams, dim: int, tol: float = 1e-8, check: bool = True) -> np.ndarray:
    """Normalized single-mode dark state |C~> on ``dim`` Fock levels."""
    full = steady_coeffs(p.mu0, p.mu1, p.nu, dim // 2 + 40)
    if check:
        levels = 2 * np.arange(full.n_terms)
        _check_mass(float(np.sum(full.coefficients[levels >= dim - 2] ** 2)) + full.tail_bound,
                    tol, "dark state")
    return full.fock_amplitudes(dim).astype(complex)


def steady_state_cd(p: CDParams, dims: DimsLike, tol: float = 1e-8,
                    check: bool = True) -> np.ndarray:
    """|0>_c (x) |C~>_d on the (c, d) product space."""
    dims = _require_dims(dims)
    psi_d = d_mode_state(p, dims.modes[1], tol, check)
    return fs.product(fs.basis(dims.modes[0], 0), psi_d)


def steady_state_ab(p: ABParams, dims: DimsLike, tol: float = 1e-8,
                    check: bool = True) -> np.ndarray:
    """The dark steady state written in the local (a, b) basis."""
    dims = _require_dims(dims)
    psi = steady_state_cd(p.to_cd(), dims, tol, check)
    out = fs.beamsplitter_map(psi, dims, "cd->ab", check=check, tol=tol)
    return out / np.linalg.norm(out)


def ideal_entangled_cat(alpha_bar: complex, dims: DimsLike, tol: float = 1e-10,
                        check: bool = True) -> np.ndarray:
    """(|C+>|C+> - |C->|C->)/sqrt2 with cats of amplitude ``alpha_bar`` in each mode."""
    dims = _require_dims(dims)
    if abs(alpha_bar) < 1e-3:
        raise DegenerateInput(f"|alpha_bar| = {abs(alpha_bar):.1e} is too small for an odd cat")
    na, nb = dims.modes
    even = fs.product(fs.cat(alpha_bar, 1, na, tol, check), fs.cat(alpha_bar, 1, nb, tol, check))
    odd = fs.product(fs.cat(alpha_bar, -1, na, tol, check), fs.cat(alpha_bar, -1, nb, tol, check))
    psi = even - odd
    return psi / np.linalg.norm(psi)


def squeezed_limit_state(Delta: float, lam: float, dim: DimsLike, tol: float = 1e-8,
                         check: bool = True) -> np.ndarray:
    """Squeezed vacuum with tanh r = 2 lam / Delta, the Kerr-free dark state."""
    n = fs._single(dim)
    if Delta == 0:
        raise DivergentSeries("squeezed limit needs Delta != 0")
    t = 2 * lam / Delta
    if abs(t) >= 1:
        raise DivergentSeries(f"squeeze ratio 2 lam / Delta = {t:.4g} does not give a "
                              "normalizable state")
    m = np.arange((n + 1) // 2 - 1, dtype=float)
    ratios = -t * np.sqrt((2 * m + 1) / (2 * m + 2))
    coeffs = np.concatenate([[1.0], np.cumprod(ratios)])
    if check:
        # sum_n t^{2n} (2n-1)!!/(2n)!! = (1 - t^2)^(-1/2)
        exact = 1 / math.sqrt(1 - t * t)
        levels = 2 * np.arange(coeffs.size)
        kept = float(np.sum(coeffs[levels < n - 2] ** 2))
        _check_mass(max(0.0, 1 - kept / exact), tol, "squeezed state")
    psi = np.zeros(n, dtype=complex)
    psi[0:2 * coeffs.size:2] = coeffs
    return psi / np.linalg.norm(psi)


def cat_amplitude(p: ABParams) -> complex:
    """Cat amplitude i sqrt(lam / U) of each cavity."""
    if p.U == 0:
        raise DegenerateInput("cat amplitude undefined for U = 0")
    if p.lam / p.U < 0:
        raise DegenerateInput("lam / U must be non-negative")
    return 1j * math.sqrt(p.lam / p.U)


def cd_cat_amplitude(p: CDParams) -> complex:
    """Amplitude i sqrt(nu / (2 mu1)) of the single-mode cat limit (before the sqrt2)."""
    if p.mu1 == 0:
        raise DegenerateInput("cat amplitude undefined for mu1 = 0")
    return 1j * math.sqrt(p.nu / (2 * p.mu1))


def write_coeffs_csv(coeffs: SteadyCoeffs, path) -> None:
    with open(path, "w") as fh:
        fh.write("n,c2n\n")
        for n, c in enumerate(coeffs.coefficients):
            fh.write(f"{n},{c:.12e}\n")
