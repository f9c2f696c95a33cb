import math

import numpy as np
import pytest
from scipy.special import factorial2

from catdimer import analytic as an
from catdimer import fockspace as fs
from catdimer import liouville as lv
from catdimer import model as md
from catdimer.errors import ConfigError, DimensionMismatch, SingularParameter
from catdimer.model import ABParams, CDParams, MismatchParams


def squeezed_oracle(t, n):
    # squeezed vacuum Fock amplitudes from double factorials
    psi = np.zeros(n)
    for k in range(0, n, 2):
        m = k // 2
        psi[k] = (-t) ** m * math.sqrt(factorial2(2 * m - 1) / factorial2(2 * m)) if m else 1.0
    return psi / np.linalg.norm(psi)


def hermiticity(H):
    return abs(H - H.conj().T).max()


# ------------------------------------------------------------ parameters

def test_param_conversion_round_trip():
    p = ABParams(Delta=0.7, lam=1.3, U=0.9, gamma=0.4, kappa=1e-3)
    cd = p.to_cd()
    assert cd.mu1 == pytest.approx(1.0)
    assert cd.mu0 == pytest.approx(0.7 / 0.9)
    assert cd.nu == pytest.approx(2 * 1.3 / 0.9)
    assert cd.gamma == pytest.approx(0.8)
    back = cd.to_ab(kappa=1e-3)
    for key in ("Delta", "lam", "U", "gamma", "kappa"):
        assert getattr(back, key) == pytest.approx(getattr(p, key))


def test_param_conversion_other_gauge():
    p = ABParams(Delta=1.0, lam=2.0, U=1.0)
    cd = p.to_cd(Lambda=2.0)
    assert (cd.mu0, cd.mu1, cd.nu) == pytest.approx((0.5, 0.5, 2.0))
    assert cd.to_ab().lam == pytest.approx(2.0)


def test_param_validation():
    with pytest.raises(ValueError):
        CDParams(Lambda=0, mu0=1, mu1=1, nu=1)
    with pytest.raises(ValueError):
        ABParams(1, 1, 1, kappa=-1)
    assert CDParams(1, 0, 1, 2).degenerate
    with pytest.raises(ValueError):
        ABParams(1, 1, 0).to_cd()


# ------------------------------------------------------------ jump operators

def test_jump_squeezed_limits():
    n = 6
    np.testing.assert_array_equal(md.jump_z_squeezed(1, 0, n).toarray(), fs.annihilation(n).toarray())
    np.testing.assert_array_equal(md.jump_z_squeezed(0, 1, n).toarray(), fs.creation(n).toarray())


def test_jump_squeezed_dark_state():
    r = 0.5
    z40 = md.jump_z_squeezed(math.cosh(r), math.sinh(r), 40)
    psi40 = squeezed_oracle(math.tanh(r), 40)
    # rows below the truncation edge are exact
    assert np.linalg.norm((z40 @ psi40)[:-1]) < 1e-8
    z = md.jump_z_squeezed(math.cosh(r), math.sinh(r), 60)
    assert np.linalg.norm(z @ squeezed_oracle(math.tanh(r), 60)) < 1e-8


def test_jump_cat_annihilates_both_cats():
    n = 40
    alpha = math.sqrt(2) * 1j * math.sqrt(2 / 2)
    z = md.jump_z_cat(0, 1, 2, n)
    for sign in (1, -1):
        assert np.linalg.norm(z @ fs.cat(alpha, sign, n)) < 1e-7


def test_jump_cat_reduces_to_squeezed():
    n = 8
    np.testing.assert_allclose(md.jump_z_cat(0.7, 0, 0.3, n).toarray(),
                               md.jump_z_squeezed(0.7, 0.3, n).toarray())


def test_jump_cat_annihilates_analytic_state():
    p = CDParams(1, 1, 1, 2)
    n = an.required_dim(p, 1e-24)
    psi = an.d_mode_state(p, n)
    assert np.linalg.norm(md.jump_z_cat(1, 1, 2, n) @ psi) < 1e-8


@pytest.mark.parametrize("n", [29, 30])
def test_dark_vector_has_even_parity(n):
    z = md.jump_z_cat(0.8, 1.0, 2.5, n).toarray()
    _, s, vh = np.linalg.svd(z)
    dark = vh[-1].conj()
    assert s[-1] < 1e-3
    assert np.sum(np.abs(dark[1::2]) ** 2) < 1e-8


# ------------------------------------------------------------ Hamiltonians

CD = CDParams(Lambda=1.0, mu0=1.0, mu1=1.0, nu=4.0)


def test_h1_hermitian_and_terms():
    dims = (4, 6)
    H = md.hamiltonian_h1(CD, dims)
    assert hermiticity(H) == 0
    p = CDParams(Lambda=1.5, mu0=0.8, mu1=0, nu=0)
    c, d = fs.mode_operators(dims)
    expected = 1.5 * 0.8 * (c.conj().T @ d + d.conj().T @ c)
    np.testing.assert_allclose(md.hamiltonian_h1(p, dims).toarray(), expected.toarray(), atol=1e-15)


def test_h1_h2_annihilate_steady_state():
    nd = an.required_dim(CD, 1e-24)
    dims = (4, nd)
    psi = an.steady_state_cd(CD, dims)
    assert np.linalg.norm(md.hamiltonian_h1(CD, dims) @ psi) < 1e-8
    assert np.linalg.norm(md.hamiltonian_h2_cd(CD, dims) @ psi) < 1e-8


def test_h2_minus_h1_kills_c_vacuum():
    rng = np.random.default_rng(0)
    dims = (5, 7)
    phi = rng.normal(size=7) + 1j * rng.normal(size=7)
    psi = fs.product(fs.basis(5, 0), phi / np.linalg.norm(phi))
    diff = md.hamiltonian_h2_cd(CD, dims) - md.hamiltonian_h1(CD, dims)
    assert np.linalg.norm(diff @ psi) < 1e-12
    assert hermiticity(md.hamiltonian_h2_cd(CD, dims)) == 0


def test_h2_two_routes_agree_in_cd_basis():
    # delocalized construction vs local Hamiltonian expressed with a = (c + d)/sqrt2
    p = ABParams(Delta=0.7, lam=1.6, U=1.2)
    dims = (7, 7)
    H_cd = md.hamiltonian_h2_cd(p.to_cd(), dims).toarray()
    H_loc = md.hamiltonian_h2_ab(p, dims, basis="cd").toarray()
    np.testing.assert_allclose(H_cd, H_loc, atol=1e-12)


def test_h2_beamsplitter_matches_local_matrix():
    p = ABParams(Delta=1.0, lam=2.0, U=1.0)
    n = 9
    dims = (n, n)
    mapped = fs.beamsplitter_map(md.hamiltonian_h2_cd(p.to_cd(), dims), dims, "cd->ab").toarray()
    H_ab = md.hamiltonian_h2_ab(p, dims).toarray()
    occ = np.add.outer(np.arange(n), np.arange(n)).ravel()
    cols = occ <= n - 3
    np.testing.assert_allclose(mapped[:, cols], H_ab[:, cols], atol=1e-10)


def test_h2_ab_swap_symmetry():
    n = 6
    dims = (n, n)
    p = ABParams(0.6, 1.1, 0.8)
    q = ABParams(-0.6, -1.1, -0.8)
    swap = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            swap[j * n + i, i * n + j] = 1
    H = md.hamiltonian_h2_ab(p, dims).toarray()
    Hq = md.hamiltonian_h2_ab(q, dims).toarray()
    np.testing.assert_allclose(swap @ Hq @ swap.T, H, atol=1e-14)


def test_h2_ab_diagonal_limit():
    n = 5
    H = md.hamiltonian_h2_ab(ABParams(0.9, 0, 0), (n, n)).toarray()
    occ_a, occ_b = np.divmod(np.arange(n * n), n)
    np.testing.assert_allclose(H, np.diag(0.9 * (occ_a - occ_b)), atol=1e-15)


def test_h2_ab_needs_equal_truncation():
    with pytest.raises(DimensionMismatch):
        md.hamiltonian_h2_ab(ABParams(1, 1, 1), (4, 5))
    md.hamiltonian_h2_ab(ABParams(1, 1, 1), (4, 5), basis="cd")


def test_mismatch_zero_is_identical():
    p = ABParams(1.0, 2.0, 1.0)
    dims = (6, 6)
    a = md.hamiltonian_mismatch(p, MismatchParams(), dims).toarray()
    b = md.hamiltonian_h2_ab(p, dims).toarray()
    assert np.array_equal(a, b)


def test_mismatch_kerr_coefficient():
    p = ABParams(0.0, 0.0, 1.0)
    H = md.hamiltonian_mismatch(p, MismatchParams(d_u=0.05), (4, 4)).toarray()
    idx = np.ravel_multi_index((0, 2), (4, 4))
    # b^dag^2 b^2 |2> = 2 |2>
    assert H[idx, idx] == pytest.approx(-1.05 * 2)
    idx_a = np.ravel_multi_index((2, 0), (4, 4))
    assert H[idx_a, idx_a] == pytest.approx(2.0)


def test_mismatch_hermitian():
    m = MismatchParams(0.03, -0.04, 0.05)
    for basis in ("ab", "cd"):
        H = md.hamiltonian_mismatch(ABParams(1, 2, 1), m, (6, 6), basis)
        assert md.hermiticity_defect(H) == 0


# ------------------------------------------------------------ dissipators

def test_collapse_ops_forms():
    p = ABParams(1, 2, 1, gamma=0.5)
    ops = md.collapse_ops(p, "ab", (5, 5))
    assert len(ops) == 1 and ops[0][0] == 0.5
    ops = md.collapse_ops(p.replace(kappa=0.1), "cd", (5, 5))
    assert [r for r, _ in ops] == [1.0, 0.1, 0.1]
    with pytest.raises(ValueError):
        md.collapse_ops(p, "xy", (5, 5))


def test_correlated_jump_maps_to_sqrt2_c():
    n = 8
    dims = (n, n)
    a, b = fs.mode_operators(dims)
    mapped = fs.beamsplitter_map((a + b).tocsr(), dims, "ab->cd").toarray()
    c, _ = fs.mode_operators(dims)
    occ = np.add.outer(np.arange(n), np.arange(n)).ravel()
    cols = occ <= n - 1
    np.testing.assert_allclose(mapped[:, cols], math.sqrt(2) * c.toarray()[:, cols], atol=1e-12)


def test_local_losses_invariant_under_rotation():
    dims = (5, 6)
    H = md.hamiltonian_h2_ab(ABParams(1, 2, 1), dims, "cd")
    a, b = md.local_mode_operators(dims, "cd")
    c, d = fs.mode_operators(dims)
    L1 = lv.build_liouvillian(H, [(0.3, a), (0.3, b)], dims).matrix
    L2 = lv.build_liouvillian(H, [(0.3, c), (0.3, d)], dims).matrix
    assert abs(L1 - L2).max() < 1e-10


# ------------------------------------------------------------ transmon Kerr

def test_transmon_kerr_examples():
    est = md.transmon_effective_kerr(0.1, 1.0, -3.0)
    assert est.U_eff == pytest.approx(3e-4)
    assert est.repulsive and est.straddling
    assert md.transmon_effective_kerr(0.1, -1.0, -3.0).U_eff < 0
    assert md.transmon_effective_kerr(0.0, 1.0, -3.0).U_eff == 0


def test_transmon_kerr_singular():
    with pytest.raises(SingularParameter):
        md.transmon_effective_kerr(0.1, 0.0, -3.0)
    with pytest.raises(SingularParameter):
        md.transmon_effective_kerr(0.1, 1.5, -3.0)


# ------------------------------------------------------------ config

def test_config_round_trip():
    text = "# test\ndelta = 0.5\nlambda = 2  # drive\nu=1\ngamma = 0.7071\nkappa = 2e-4\nd_u = 0.05\n"
    cfg = md.model_from_mapping(md.parse_config(text))
    assert cfg.params.Delta == 0.5 and cfg.params.kappa == 2e-4
    assert cfg.mismatch.d_u == 0.05
    again = md.model_from_mapping(md.parse_config(md.format_config(md.model_to_mapping(cfg))))
    assert again == cfg


def test_config_errors():
    with pytest.raises(ConfigError):
        md.parse_config("delta 1\n")
    with pytest.raises(ConfigError):
        md.model_from_mapping({"delta": "abc"})
    with pytest.raises(ConfigError):
        md.model_from_mapping({"nmax_a": "4"})
    with pytest.raises(ConfigError):
        md.model_from_mapping({"kappa": "-1"})
    cfg = md.model_from_mapping({"nmax_a": "6", "nmax_b": "10"})
    assert cfg.nmax == (6, 10)


def test_stability_probe_positive_gap():
    gap = md.stability_probe(ABParams(1.0, 0.3, 1.0, gamma=1.0, kappa=0.05), (4, 8))
    assert gap > 0
