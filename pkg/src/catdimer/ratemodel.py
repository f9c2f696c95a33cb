"""Four-state effective dynamics on the two-mode cat manifold.

For large cat amplitude the slow dynamics lives in the span of the products
of even and odd cats. In the basis |1>..|4> (|1>, |2> dark; |1>, |3> odd
parity; |2>, |4> even parity) the detuning couples |1> and |3> coherently
with amplitude Delta~, and the correlated loss drives |3> -> |2>, |3> -> |4>
and |4> -> |3>. Here rates are written Gamma_{i,j} for the transition
j -> i.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import fockspace as fs
from .analytic import cat_amplitude
from .errors import DegenerateInput, ManifoldLeakage
from .fockspace import DimsLike, dag
from .model import ABParams, collapse_ops, hamiltonian_h2_ab

LEAKAGE_LIMIT = 0.10


@dataclass(frozen=True)
class CatManifold:
    """Orthonormal states |1>, |2>, |3>, |4> as the columns of ``states``."""

    alpha_bar: complex
    dims: fs.Dims
    states: np.ndarray
    theta: float
    sin_theta_asymptotic: float
    tilde_even: np.ndarray  # columns |2~>, |4~>

    @property
    def parities(self) -> tuple[int, int, int, int]:
        return (-1, 1, -1, 1)

    def gram(self) -> np.ndarray:
        return self.states.conj().T @ self.states


def cat_basis(alpha_bar: complex, dims: DimsLike, tol: float = 1e-10) -> CatManifold:
    """Entangled-cat basis with the even pair rotated onto the dark state.

    The rotation angle comes from the exact overlaps of the even dark vector
    |alpha,-alpha> + |-alpha,alpha> with |2~> and |4~>. The large-amplitude
    form 2 exp(-2 |alpha_bar|^2) is reported as ``sin_theta_asymptotic``.
    """
    dims = fs.two_mode(dims)
    if abs(alpha_bar) < 0.5:
        raise DegenerateInput(f"|alpha_bar| = {abs(alpha_bar):.3g} < 0.5: the cat manifold "
                              "is ill-conditioned")
    na, nb = dims.modes
    cp = [fs.cat(alpha_bar, 1, n, tol) for n in (na, nb)]
    cm = [fs.cat(alpha_bar, -1, n, tol) for n in (na, nb)]
    s = 1 / math.sqrt(2)
    pp, mm = fs.product(cp[0], cp[1]), fs.product(cm[0], cm[1])
    pm, mp = fs.product(cp[0], cm[1]), fs.product(cm[0], cp[1])
    t2, t4 = s * (pp - mm), s * (pp + mm)
    one, three = s * (pm - mp), s * (pm + mp)

    coh = [fs.coherent(alpha_bar, n, tol) for n in (na, nb)]
    anti = [fs.coherent(-alpha_bar, n, tol) for n in (na, nb)]
    dark = fs.product(coh[0], anti[1]) + fs.product(anti[0], coh[1])
    dark /= np.linalg.norm(dark)
    o2, o4 = np.vdot(t2, dark), np.vdot(t4, dark)
    theta = math.atan2((o4 * np.conj(o2)).real, abs(o2) ** 2)
    two = math.cos(theta) * t2 + math.sin(theta) * t4
    four = -math.sin(theta) * t2 + math.cos(theta) * t4
    states = np.column_stack([one, two, three, four])
    return CatManifold(complex(alpha_bar), dims, states, theta,
                       2 * math.exp(-2 * abs(alpha_bar) ** 2), np.column_stack([t2, t4]))


@dataclass
class RateSet:
    Delta_tilde: float
    Gamma_23: float
    Gamma_43: float
    Gamma_34: float
    Gamma_Delta: float
    Gamma_rel: float

    def to_dict(self) -> dict:
        return {k: (None if v is None or (isinstance(v, float) and math.isnan(v)) else v)
                for k, v in asdict(self).items()}


def relaxation_rate(gamma_delta: float, gamma_23: float) -> float:
    """(2 G_D + G_23 - sqrt((2 G_D)^2 + G_23^2)) / 2, in cancellation-free form."""
    a, b = 2 * gamma_delta, gamma_23
    denom = a + b + math.hypot(a, b)
    return 0.0 if denom == 0 else a * b / denom


def _incoherent_tunneling(delta_tilde: float, g23: float, g43: float) -> float:
    return 4 * delta_tilde ** 2 / (g23 + g43) if g23 + g43 > 0 else 0.0


def asymptotic_rates(alpha_bar: complex, Delta: float, gamma: float) -> RateSet:
    """Large-amplitude rates; Gamma_43 = 4 |alpha_bar|^2 gamma, Gamma_34 unknown (NaN)."""
    if gamma <= 0:
        raise DegenerateInput("asymptotic rates need gamma > 0")
    a2 = abs(alpha_bar) ** 2
    dt = -4 * a2 * math.exp(-2 * a2) * Delta
    g23 = 16 * a2 * math.exp(-4 * a2) * gamma
    g43 = 4 * a2 * gamma
    gd = _incoherent_tunneling(dt, g23, g43)
    return RateSet(dt, g23, g43, math.nan, gd, relaxation_rate(gd, g23))


def numeric_optimal_gamma(alpha_bar: complex, Delta: float) -> float:
    """Argmax of the closed-form Gamma_rel over gamma in [Delta/10, 10 Delta]."""
    res = minimize_scalar(lambda g: -asymptotic_rates(alpha_bar, Delta, g).Gamma_rel,
                          bounds=(Delta / 10, 10 * Delta), method="bounded",
                          options={"xatol": 1e-10 * Delta})
    return float(res.x)


def optimal_gamma(alpha_bar: complex, Delta: float) -> float:
    """sqrt2 Delta, cross-checked against a numeric maximization."""
    if Delta <= 0:
        raise ValueError("Delta must be positive")
    closed = math.sqrt(2) * Delta
    numeric = numeric_optimal_gamma(alpha_bar, Delta)
    if abs(numeric - closed) > 0.01 * closed:
        warnings.warn(f"numeric optimum gamma = {numeric:.6g} differs from sqrt2 Delta = "
                      f"{closed:.6g} by more than 1%", RuntimeWarning, stacklevel=2)
    return closed


@dataclass
class ProjectedRates:
    rates: RateSet
    leakage: float
    dark_residual: float
    parity_violation: float
    gamma_rel_projected: float
    transfer: np.ndarray  # transfer[i, j] = rate j -> i inside the manifold
    hamiltonian: np.ndarray
    superoperator: np.ndarray
    warnings: list = field(default_factory=list)

    @property
    def connectivity_ok(self) -> bool:
        return self.parity_violation < 1e-8 and self.dark_residual < 1e-6

    def summary(self) -> dict:
        return {"rates": self.rates.to_dict(), "leakage": self.leakage,
                "dark_residual": self.dark_residual, "parity_violation": self.parity_violation,
                "gamma_rel_projected": self.gamma_rel_projected,
                "connectivity_ok": self.connectivity_ok, "warnings": list(self.warnings)}


def projected_rates(p: ABParams, dims: DimsLike, raise_on_leakage: bool = True,
                    tol: float = 1e-10) -> ProjectedRates:
    """Restrict the full master equation to the cat manifold of ``p``.

    Matrix elements are taken between the four manifold states; the jump
    operators' outflow <j|c^dag c|j> is compared with the part landing inside
    the manifold to measure leakage.
    """
    dims = fs.two_mode(dims)
    manifold = cat_basis(cat_amplitude(p), dims, tol)
    V = manifold.states
    H = hamiltonian_h2_ab(p, dims)
    Hm = V.conj().T @ (H @ V)
    jumps = collapse_ops(p, "ab", dims)
    eye = np.eye(4)
    M = -1j * (np.kron(eye, Hm) - np.kron(Hm.T, eye))
    transfer = np.zeros((4, 4))
    outflow = np.zeros(4)
    for rate, op in jumps:
        cv = op @ V
        Cm = V.conj().T @ cv
        Km = cv.conj().T @ cv
        M += rate * (np.kron(Cm.conj(), Cm) - 0.5 * np.kron(eye, Km) - 0.5 * np.kron(Km.T, eye))
        transfer += rate * np.abs(Cm) ** 2
        outflow += rate * np.real(np.diag(Km))

    scale = max((rate for rate, _ in jumps), default=1.0)
    dark_residual = float(outflow[:2].max() / scale) if jumps else 0.0
    bright = outflow > 1e-6 * scale
    captured = transfer.sum(axis=0)
    leak = float(np.max(1 - captured[bright] / outflow[bright])) if bright.any() else 0.0
    notes = []
    if leak > LEAKAGE_LIMIT:
        msg = f"{leak:.1%} of the bright-state outflow leaves the cat manifold"
        if raise_on_leakage:
            raise ManifoldLeakage(msg)
        notes.append(msg)

    par = np.array(manifold.parities)
    same = par[:, None] == par[None, :]
    parity_violation = float(transfer[same].max() / scale) if jumps else 0.0

    dt = float(np.real(Hm[0, 2]))
    g23, g43, g34 = transfer[1, 2], transfer[3, 2], transfer[2, 3]
    gd = _incoherent_tunneling(dt, g23, g43)
    rates = RateSet(dt, float(g23), float(g43), float(g34), gd, relaxation_rate(gd, g23))

    ev = np.linalg.eigvals(M)
    ev = ev[np.argsort(np.abs(ev))]
    slow = ev[1:]
    gamma_rel_proj = float(-slow.real.max()) if slow.size else math.nan
    return ProjectedRates(rates, leak, dark_residual, parity_violation, gamma_rel_proj,
                          transfer, Hm, M, notes)
