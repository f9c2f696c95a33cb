"""Parameter sets, jump operators and Hamiltonians of the driven Bose-Hubbard dimer.

Two pictures are used throughout:

* local modes a, b with detuning ``Delta``, two-photon drive ``lam``, Kerr
  ``U``, correlated loss ``gamma`` (dissipator gamma L[a + b]) and local loss
  ``kappa`` on each cavity;
* delocalized modes c = (a + b)/sqrt2, d = (a - b)/sqrt2 with coupling scale
  ``Lambda`` and dimensionless ``mu0, mu1, nu``.

They are related by Delta = Lambda mu0, lam = Lambda nu / 2, U = Lambda mu1.
All rates share one (arbitrary) frequency unit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from . import fockspace as fs
from .errors import ConfigError, DimensionMismatch, SingularParameter
from .fockspace import DimsLike, dag

BASES = ("ab", "cd")


@dataclass(frozen=True)
class CDParams:
    """Delocalized-picture parameters.

    ``gamma`` is the damping rate of mode c, i.e. the dissipator is
    gamma L[c]. A local-picture correlated loss gamma L[a + b] equals
    2 gamma L[c].
    """

    Lambda: float
    mu0: float
    mu1: float
    nu: float
    gamma: float = 0.0

    def __post_init__(self):
        if not self.Lambda > 0:
            raise ValueError(f"Lambda must be positive, got {self.Lambda}")
        if self.mu1 < 0 or self.nu < 0 or self.gamma < 0:
            raise ValueError("mu1, nu and gamma must be non-negative")

    @property
    def degenerate(self) -> bool:
        """True when mu0 = 0 and both cat parities are dark."""
        return self.mu0 == 0

    def to_ab(self, kappa: float = 0.0) -> ABParams:
        return ABParams(Delta=self.Lambda * self.mu0, lam=self.Lambda * self.nu / 2,
                        U=self.Lambda * self.mu1, gamma=self.gamma / 2, kappa=kappa)


@dataclass(frozen=True)
class ABParams:
    Delta: float
    lam: float
    U: float
    gamma: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.gamma < 0 or self.kappa < 0:
            raise ValueError("gamma and kappa must be non-negative")

    def to_cd(self, Lambda: float | None = None) -> CDParams:
        """Convert with the gauge Lambda = U (so mu1 = 1) unless given explicitly."""
        if Lambda is None:
            Lambda = self.U
        if not Lambda > 0:
            raise ValueError("the delocalized picture needs Lambda > 0 (U > 0 in the default gauge)")
        return CDParams(Lambda=Lambda, mu0=self.Delta / Lambda, mu1=self.U / Lambda,
                        nu=2 * self.lam / Lambda, gamma=2 * self.gamma)

    def replace(self, **changes) -> ABParams:
        values = asdict(self)
        values.update(changes)
        return ABParams(**values)


@dataclass(frozen=True)
class MismatchParams:
    """Relative deviations of cavity b from the matched values."""

    d_delta: float = 0.0
    d_lambda: float = 0.0
    d_u: float = 0.0


# ------------------------------------------------------------ jump operators

def jump_z_squeezed(mu: float, nu: float, dim: DimsLike) -> sp.csr_matrix:
    """Bogoliubov jump operator mu d + nu d^dag."""
    a = fs.annihilation(dim)
    return (mu * a + nu * dag(a)).tocsr()


def jump_z_cat(mu0: float, mu1: float, nu: float, dim: DimsLike) -> sp.csr_matrix:
    """Nonlinear jump operator (mu0 + mu1 d^dag d) d + nu d^dag."""
    a = fs.annihilation(dim)
    n = fs.number(dim)
    return ((mu0 * fs.identity(dim) + mu1 * n) @ a + nu * dag(a)).tocsr()


# ---------------------------------------------------------------- Hamiltonians

def _hermitian_part(op) -> sp.csr_matrix:
    return (op + dag(op)).tocsr()


def hamiltonian_h1(p: CDParams, dims: DimsLike) -> sp.csr_matrix:
    """Lambda (c^dag z_cat + z_cat^dag c) on the (c, d) space."""
    dims = fs.two_mode(dims)
    c, _ = fs.mode_operators(dims)
    z = fs.embed(jump_z_cat(p.mu0, p.mu1, p.nu, dims.modes[1]), 1, dims)
    return (p.Lambda * _hermitian_part(dag(c) @ z)).tocsr()


def hamiltonian_h2_cd(p: CDParams, dims: DimsLike) -> sp.csr_matrix:
    """H1 plus the symmetrizing term Lambda mu1 c^dag (c^dag c) d + h.c."""
    dims = fs.two_mode(dims)
    c, d = fs.mode_operators(dims)
    extra = p.Lambda * p.mu1 * (dag(c) @ dag(c) @ c @ d)
    return (hamiltonian_h1(p, dims) + _hermitian_part(extra)).tocsr()


def local_mode_operators(dims: DimsLike, basis: str = "ab"):
    """Matrices of the local annihilation operators a, b in the requested basis.

    In the ``cd`` basis they are (c + d)/sqrt2 and (c - d)/sqrt2 on the
    (c, d) product space. Products built from them in normal order have exact
    matrix elements within the truncated space.
    """
    if basis not in BASES:
        raise ValueError(f"basis must be one of {BASES}, got {basis!r}")
    first, second = fs.mode_operators(dims)
    if basis == "ab":
        return first, second
    s = 1 / math.sqrt(2)
    return ((first + second) * s).tocsr(), ((first - second) * s).tocsr()


def hamiltonian_mismatch(p: ABParams, m: MismatchParams, dims: DimsLike,
                         basis: str = "ab") -> sp.csr_matrix:
    """Local-picture Hamiltonian with cavity b detuned from its matched values."""
    dims = fs.two_mode(dims)
    if basis == "ab" and dims.modes[0] != dims.modes[1]:
        raise DimensionMismatch(f"local-basis Hamiltonian needs equal n_max, got {dims.modes}")
    a, b = local_mode_operators(dims, basis)
    ad, bd = dag(a), dag(b)
    H = p.Delta * (ad @ a - (1 + m.d_delta) * (bd @ b))
    H = H + p.lam * _hermitian_part(ad @ ad - (1 + m.d_lambda) * (bd @ bd))
    H = H + p.U * (ad @ ad @ a @ a - (1 + m.d_u) * (bd @ bd @ b @ b))
    # rounding in the rotated basis leaves ~1e-15 asymmetry; symmetrize exactly
    return (0.5 * (H + dag(H))).tocsr()


def hamiltonian_h2_ab(p: ABParams, dims: DimsLike, basis: str = "ab") -> sp.csr_matrix:
    """Delta(n_a - n_b) + lam(a^dag^2 - b^dag^2 + h.c.) + U(a^dag^2 a^2 - b^dag^2 b^2)."""
    return hamiltonian_mismatch(p, MismatchParams(), dims, basis)


def collapse_ops(p: ABParams, basis: str, dims: DimsLike) -> list[tuple[float, sp.csr_matrix]]:
    """(rate, jump) pairs of the dissipators in the chosen basis.

    Local basis: gamma L[a + b], kappa L[a], kappa L[b]. Delocalized basis:
    2 gamma L[c] (because a + b = sqrt2 c), kappa L[c], kappa L[d]; the
    equal-rate local losses keep their form under the 50/50 rotation.
    Zero-rate entries are dropped.
    """
    if basis not in BASES:
        raise ValueError(f"basis must be one of {BASES}, got {basis!r}")
    first, second = fs.mode_operators(dims)
    if basis == "ab":
        ops = [(p.gamma, (first + second).tocsr()), (p.kappa, first), (p.kappa, second)]
    else:
        ops = [(2 * p.gamma, first), (p.kappa, first), (p.kappa, second)]
    return [(float(rate), op) for rate, op in ops if rate > 0]


# ------------------------------------------------------- transmon-induced Kerr

@dataclass(frozen=True)
class KerrEstimate:
    U_eff: float
    repulsive: bool
    straddling: bool


def transmon_effective_kerr(g: float, delta: float, U_qb: float) -> KerrEstimate:
    """Fourth-order dispersive self-Kerr inherited by a cavity from a transmon.

    U_eff = g^4 U_qb / (2 delta^3 (delta + U_qb/2)), with ``delta`` the
    qubit-cavity detuning and ``U_qb`` the (negative) transmon anharmonicity.
    The straddling regime is delta + U_qb < 0.
    """
    denom_half = delta + U_qb / 2
    if delta == 0 or denom_half == 0:
        raise SingularParameter(f"U_eff diverges at delta={delta}, U_qb={U_qb}")
    U_eff = g ** 4 * U_qb / (2 * delta ** 3 * denom_half)
    return KerrEstimate(U_eff=U_eff, repulsive=U_eff > 0, straddling=delta + U_qb < 0)


# -------------------------------------------------------------- config files

CONFIG_KEYS = ("delta", "lambda", "u", "gamma", "kappa", "d_delta", "d_lambda", "d_u",
               "nmax_a", "nmax_b")


@dataclass
class ModelConfig:
    params: ABParams
    mismatch: MismatchParams = field(default_factory=MismatchParams)
    nmax: tuple[int, int] | None = None


def parse_config(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` text; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key.lower()] = value
    return out


def model_from_mapping(values: dict) -> ModelConfig:
    """Build parameter sets from config values; unknown keys are ignored here."""
    def num(key, default):
        raw = values.get(key, default)
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: not a number: {raw!r}") from None

    try:
        params = ABParams(Delta=num("delta", 1.0), lam=num("lambda", 2.0), U=num("u", 1.0),
                          gamma=num("gamma", 2.0), kappa=num("kappa", 0.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    mismatch = MismatchParams(num("d_delta", 0.0), num("d_lambda", 0.0), num("d_u", 0.0))
    nmax = None
    if "nmax_a" in values or "nmax_b" in values:
        if not ("nmax_a" in values and "nmax_b" in values):
            raise ConfigError("nmax_a and nmax_b must be given together")
        try:
            nmax = (int(values["nmax_a"]), int(values["nmax_b"]))
        except (TypeError, ValueError):
            raise ConfigError("nmax_a/nmax_b must be integers") from None
        if min(nmax) < 2:
            raise ConfigError(f"n_max must be >= 2, got {nmax}")
    return ModelConfig(params, mismatch, nmax)


def model_to_mapping(cfg: ModelConfig) -> dict[str, str]:
    p, m = cfg.params, cfg.mismatch
    out = {"delta": p.Delta, "lambda": p.lam, "u": p.U, "gamma": p.gamma, "kappa": p.kappa,
           "d_delta": m.d_delta, "d_lambda": m.d_lambda, "d_u": m.d_u}
    out = {k: repr(float(v)) for k, v in out.items()}
    if cfg.nmax is not None:
        out["nmax_a"], out["nmax_b"] = str(cfg.nmax[0]), str(cfg.nmax[1])
    return out


def format_config(values: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in values.items())


def stability_probe(p: ABParams, dims: DimsLike, basis: str = "cd") -> float:
    """Spectral gap of the full Liouvillian; positive means all modes decay.

    Exposed instead of a closed-form stability condition, which is only known
    for U = 0.
    """
    from .liouville import build_liouvillian, spectral_gap

    H = hamiltonian_h2_ab(p, dims, basis)
    L = build_liouvillian(H, collapse_ops(p, basis, dims), dims)
    return spectral_gap(L).gap


def hermiticity_defect(H) -> float:
    diff = H - dag(H)
    if sp.issparse(diff):
        return float(abs(diff).max()) if diff.nnz else 0.0
    return float(np.abs(diff).max())
