"""Tests for the resolvent-side analysis."""

import numpy as np
import pytest

from dibvp.core import (
    SchemeDef,
    lax_friedrichs,
    lax_wendroff,
    leap_frog,
    upwind,
)
from dibvp.resolvent import (
    ResolventError,
    CompanionMatrix,
    arg_total_variation,
    assemble_M,
    branch_log_deviation,
    classify_boundary_blocks,
    kl_boundary_matrix,
    kl_determinant,
    resolvent_coeffs,
    spectral_split,
    uklc_scan,
)

RNG = np.random.default_rng(20240811)


def upwind2(nu: float) -> SchemeDef:
    """Second order upwind scheme (r = 2, p = 0), stable for nu <= 2."""
    interior = np.zeros((3, 1, 1, 1))
    interior[0, 0, 0, 0] = (nu * nu - nu) / 2
    interior[1, 0, 0, 0] = nu * (2 - nu)
    interior[2, 0, 0, 0] = 1 - 1.5 * nu + nu * nu / 2
    return SchemeDef(
        N=2 - 1, r=2, p=0, q=0, s=0, lam=1.0,
        interior=interior,
        boundary=np.zeros((1, 2, 2, 1, 1)),
        label="second-order-upwind",
    )


def system_upwind() -> SchemeDef:
    """Symmetric 2x2 system advected leftward (r = 1, p = 0)."""
    A = np.array([[0.5, 0.25], [0.25, 0.5]])
    interior = np.stack([A, np.eye(2) - A])[:, None]
    return SchemeDef(
        N=2, r=1, p=0, q=0, s=0, lam=1.0,
        interior=interior,
        boundary=np.zeros((1, 1, 2, 2, 2)),
        label="system-upwind",
    )


def random_annulus_z(rng, n):
    radii = 1 + rng.uniform(1e-3, 2.0, n)
    angles = rng.uniform(0, 2 * np.pi, n)
    return radii * np.exp(1j * angles)


# ---------------------------------------------------------------------------
# resolvent coefficients


def test_coeffs_upwind_at_two():
    c = resolvent_coeffs(upwind(1.0, 0.5), 2.0)
    assert c.A(0)[0, 0] == pytest.approx(0.75)
    assert c.A(-1)[0, 0] == pytest.approx(-0.25)


def test_coeffs_leap_frog_at_two():
    c = resolvent_coeffs(leap_frog(1.0, 0.5), 2.0)
    assert c.A(1)[0, 0] == pytest.approx(0.25)
    assert c.A(0)[0, 0] == pytest.approx(0.75)
    assert c.A(-1)[0, 0] == pytest.approx(-0.25)


def test_coeffs_large_z_limit():
    # z -> infinity kills every z^{-sigma-1} term, leaving delta_{l0} I
    for scheme in [upwind(1.0, 0.5), leap_frog(1.0, 0.5), lax_wendroff(1.0, 0.8)]:
        c = resolvent_coeffs(scheme, 1e12)
        for ell in range(-scheme.r, scheme.p + 1):
            expect = np.eye(scheme.N) if ell == 0 else np.zeros((scheme.N,) * 2)
            assert np.allclose(c.A(ell), expect, atol=1e-11)


def test_coeffs_boundary_blocks():
    c = resolvent_coeffs(upwind(1.0, 0.5), 1.7)
    assert np.all(c.B(0, 0) == 0)  # dirichlet rows carry no coupling
    c = resolvent_coeffs(lax_wendroff(1.0, 0.5, boundary="extrapolation"), 1.7)
    # U_0^{n+1} = U_1^{n+1} transforms to W_0 = W_1 independently of z
    assert np.allclose(c.B(0, 0), np.eye(1))


def test_coeffs_reject_zero():
    with pytest.raises(ResolventError):
        resolvent_coeffs(upwind(1.0, 0.5), 0.0)


# ---------------------------------------------------------------------------
# companion matrix


def test_companion_upwind_values():
    assert assemble_M(upwind(1.0, 0.5), 2.0).M[0, 0] == pytest.approx(1 / 3)
    assert assemble_M(upwind(1.0, 0.5), 1.5).M[0, 0] == pytest.approx(1 / 2)


def test_companion_leap_frog_matches_quadratic():
    # interior recursion at z reads mu^2 + (z - 1/z)/nu mu - 1 = 0
    nu = 0.5
    for z in [2.0, 1.3 * np.exp(0.8j), 1.05 * np.exp(-2.0j)]:
        M = assemble_M(leap_frog(1.0, nu), z).M
        assert M.shape == (2, 2)
        eig = np.sort_complex(np.linalg.eigvals(M))
        expect = np.sort_complex(np.roots([1, (z - 1 / z) / nu, -1]))
        assert np.allclose(eig, expect, atol=1e-12)


def test_companion_row_identity():
    # each eigenpair gives a geometric solution W_j = mu^j x of the recursion
    for scheme in [lax_wendroff(1.0, 0.5), leap_frog(1.0, 0.5), system_upwind()]:
        for z in random_annulus_z(RNG, 4):
            c = resolvent_coeffs(scheme, z)
            M = assemble_M(scheme, z).M
            vals, vecs = np.linalg.eig(M)
            N = scheme.N
            for mu, v in zip(vals, vecs.T):
                x = v[-N:]  # bottom block holds the lowest shift
                res = sum(
                    c.A(ell) @ x * mu ** (ell + scheme.r)
                    for ell in range(-scheme.r, scheme.p + 1)
                )
                assert np.linalg.norm(res) <= 1e-12 * np.linalg.norm(v)


def test_companion_no_zero_eigenvalues():
    for scheme in [upwind(1.0, 0.5), lax_wendroff(1.0, 0.8), leap_frog(1.0, 0.5)]:
        for z in random_annulus_z(RNG, 8):
            eig = np.linalg.eigvals(assemble_M(scheme, z).M)
            assert np.min(np.abs(eig)) > 1e-12


# ---------------------------------------------------------------------------
# spectral splitting


@pytest.mark.parametrize(
    "scheme,n_stable,n_unstable",
    [
        (upwind(1.0, 0.5), 1, 0),
        (lax_friedrichs(1.0, 0.7), 1, 1),
        (lax_wendroff(1.0, 0.8), 1, 1),
        (leap_frog(1.0, 0.5), 1, 1),
        (upwind2(0.5), 2, 0),
        (system_upwind(), 2, 0),
    ],
    ids=["upwind", "lax-friedrichs", "lax-wendroff", "leap-frog",
         "second-order-upwind", "system"],
)
def test_split_counts(scheme, n_stable, n_unstable):
    for z in random_annulus_z(RNG, 40):
        sp = spectral_split(assemble_M(scheme, z), scheme)
        assert sp.counts_ok
        assert (sp.n_stable, sp.n_unstable) == (n_stable, n_unstable)
        assert sp.unit_gap > 0
        assert sp.invariance_residual <= 1e-12


def test_split_projectors():
    scheme = leap_frog(1.0, 0.5)
    for z in random_annulus_z(RNG, 10):
        sp = spectral_split(assemble_M(scheme, z), scheme)
        eye = np.eye(sp.proj_s.shape[0])
        assert np.linalg.norm(sp.proj_s @ sp.proj_s - sp.proj_s) <= 1e-10
        assert np.linalg.norm(sp.proj_u @ sp.proj_u - sp.proj_u) <= 1e-10
        assert np.linalg.norm(sp.proj_s + sp.proj_u - eye) <= 1e-10
        # projectors commute with M and reproduce the invariant subspaces
        M = assemble_M(scheme, z).M
        assert np.linalg.norm(sp.proj_s @ M - M @ sp.proj_s) <= 1e-10


def test_split_orthonormal_bases():
    scheme = lax_wendroff(1.0, 0.6)
    sp = spectral_split(assemble_M(scheme, 1.4 + 0.3j), scheme)
    for V in (sp.V_s, sp.V_u):
        assert np.allclose(V.conj().T @ V, np.eye(V.shape[1]), atol=1e-13)


def test_split_rejects_z_too_close_to_circle():
    scheme = upwind(1.0, 0.5)
    for z in [1.0, 1 + 1e-9, np.exp(0.5j)]:
        with pytest.raises(ResolventError):
            spectral_split(assemble_M(scheme, z), scheme)


def test_split_rejects_unresolved_eigenvalue():
    scheme = lax_wendroff(1.0, 0.5)
    fake = CompanionMatrix(z=2.0, M=np.diag([1 + 1e-12, 2.0]).astype(complex))
    with pytest.raises(ResolventError):
        spectral_split(fake, scheme)


def test_split_count_mismatch_is_diagnostic():
    scheme = lax_wendroff(1.0, 0.5)  # expects (1, 1)
    fake = CompanionMatrix(z=2.0, M=np.diag([0.5, 0.6]).astype(complex))
    sp = spectral_split(fake, scheme)
    assert not sp.counts_ok
    assert "expected (1 stable, 1 unstable)" in sp.message


# ---------------------------------------------------------------------------
# Lopatinskii determinant


def test_kl_upwind_dirichlet_is_one():
    scheme = upwind(1.0, 0.5)
    assert kl_boundary_matrix(scheme, 2.0) == pytest.approx(np.ones((1, 1)))
    for z in [1.2, 2.0, 1 + 1e-6, (1 + 1e-3) * np.exp(0.7j)]:
        assert kl_determinant(scheme, z) == pytest.approx(1.0, abs=1e-12)


def test_kl_dirichlet_exact_for_wide_and_system_stencils():
    # dirichlet rows select complete state blocks; orthonormal stable bases
    # then give |Delta| = |det of a unitary| = 1
    for scheme in [upwind2(0.5), system_upwind()]:
        for z in [1.3, 2.2, (1 + 1e-4) * np.exp(1.9j)]:
            assert kl_determinant(scheme, z) == pytest.approx(1.0, abs=1e-12)


def test_kl_zero_rows():
    scheme = upwind(1.0, 0.5)
    assert kl_determinant(scheme, 2.0, b_eff=np.zeros((1, 1))) == 0.0


def test_kl_lax_wendroff_extrapolation_closed_form():
    # boundary row [-1, 1] against stable vector (mu, 1)/sqrt(1+|mu|^2)
    scheme = lax_wendroff(1.0, 0.5, boundary="extrapolation")
    for z in [1.2, 1.5 * np.exp(0.4j), 1.05 * np.exp(-1.1j)]:
        eig = np.linalg.eigvals(assemble_M(scheme, z).M)
        mu_s = eig[np.abs(eig) < 1][0]
        expect = abs(1 - mu_s) / np.sqrt(1 + abs(mu_s) ** 2)
        assert kl_determinant(scheme, z) == pytest.approx(expect, abs=1e-12)


def test_kl_basis_independence():
    scheme = upwind2(0.5)
    z = 1.7 * np.exp(0.9j)
    sp = spectral_split(assemble_M(scheme, z), scheme)
    B = kl_boundary_matrix(scheme, z)
    d0 = abs(np.linalg.det(B @ sp.V_s))
    for _ in range(5):
        raw = RNG.standard_normal((2, 2)) + 1j * RNG.standard_normal((2, 2))
        Q = np.linalg.qr(raw)[0]
        d1 = abs(np.linalg.det(B @ (sp.V_s @ Q)))
        assert abs(d0 - d1) <= 1e-10


def test_kl_rejects_bad_shape():
    with pytest.raises(ResolventError):
        kl_determinant(upwind(1.0, 0.5), 2.0, b_eff=np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# UKLC scan


def test_uklc_upwind_dirichlet():
    scan = uklc_scan(upwind(1.0, 0.5), n_theta=32)
    assert scan.plausible
    assert scan.min_abs == pytest.approx(1.0, abs=1e-10)
    assert scan.warnings == ()
    assert np.allclose(scan.per_radius_min, 1.0, atol=1e-10)


def test_uklc_zero_rows_fails():
    scan = uklc_scan(
        upwind(1.0, 0.5), radii=(1e-1, 1e-3), n_theta=8,
        b_eff=np.zeros((1, 1)), check_symbol=False,
    )
    assert not scan.plausible
    assert scan.values.max() == 0.0


def test_uklc_extrapolation_degenerates_toward_circle():
    # |Delta| ~ |1 - mu_s(z)| vanishes as z -> 1: verdict flips once the
    # scan radii go deep enough
    scheme = lax_wendroff(1.0, 0.5, boundary="extrapolation")
    scan = uklc_scan(scheme, radii=(1e-1, 1e-3, 1e-5, 1e-7), n_theta=32,
                     check_symbol=False)
    assert not scan.plausible
    mins = np.asarray(scan.per_radius_min)
    assert np.all(np.diff(mins) < 0)
    # decay is first order in the offset from the circle
    assert mins[-1] == pytest.approx(1e-2 * mins[-2], rel=0.05)


def test_uklc_glancing_warning_propagates():
    scan = uklc_scan(leap_frog(1.0, 0.5), radii=(1e-1, 1e-3), n_theta=16)
    assert scan.plausible  # dirichlet leap-frog passes the determinant test
    assert any("glancing" in w for w in scan.warnings)


# ---------------------------------------------------------------------------
# classification on the unit circle


def test_classify_upwind_at_one():
    cl = classify_boundary_blocks(upwind(1.0, 0.5), 1.0)
    (block,) = cl.blocks
    assert block.kind == "crossing"
    assert block.mu == pytest.approx(1.0, abs=1e-12)
    # radial drift of the root of mu = nu/(z - (1-nu)) at z = 1 is -1/nu
    assert block.drift == pytest.approx(-2.0, abs=1e-6)
    assert cl.counts["crossing"] == 1


def test_classify_upwind_at_minus_one():
    cl = classify_boundary_blocks(upwind(1.0, 0.5), -1.0)
    (block,) = cl.blocks
    assert block.kind == "contracting"
    assert block.mu == pytest.approx(-1 / 3, abs=1e-12)


def test_classify_lax_friedrichs_at_one():
    cl = classify_boundary_blocks(lax_friedrichs(1.0, 0.5), 1.0)
    kinds = {round(b.mu.real, 6): b for b in cl.blocks}
    assert kinds[3.0].kind == "expanding"
    assert kinds[1.0].kind == "crossing"
    assert kinds[1.0].drift == pytest.approx(-2.0, abs=1e-6)
    assert cl.counts == {
        "expanding": 1, "contracting": 0, "crossing": 1, "glancing": 0,
    }


def test_classify_leap_frog_glancing_point():
    # double spatial root mu = i at z = e^{-i pi/6}: branch-point behavior,
    # detected through the two-scale stencil mismatch
    z_bar = np.exp(-1j * np.pi / 6)
    cl = classify_boundary_blocks(leap_frog(1.0, 0.5), z_bar)
    (block,) = cl.blocks
    assert block.multiplicity == 2
    assert abs(block.mu - 1j) < 1e-6
    assert block.kind == "glancing"
    assert block.fd_mismatch > 1e-2


def test_classify_rejects_off_circle():
    with pytest.raises(ResolventError):
        classify_boundary_blocks(upwind(1.0, 0.5), 1.2)


def test_classify_counts_cover_spectrum():
    for scheme in [lax_wendroff(1.0, 0.8), leap_frog(1.0, 0.5)]:
        for z_bar in [1.0, -1.0, np.exp(0.83j)]:
            cl = classify_boundary_blocks(scheme, z_bar)
            assert sum(cl.counts.values()) == scheme.N * (scheme.p + scheme.r)


# ---------------------------------------------------------------------------
# argument total variation


def test_tv_pure_transport_oracle():
    # f(tau) = tau, w = 0: v = arg(gamma + i theta) sweeps 2 arctan(eps/gamma)
    rep = arg_total_variation(
        lambda tau: tau, gamma_grid=(1e-4,), w_grid=np.array([0.0]), eps=0.1
    )
    assert rep.tv[0, 0] == pytest.approx(2 * np.arctan(0.1 / 1e-4), abs=1e-10)
    assert not rep.capped and rep.skipped == ()


def test_tv_far_w_below_pi():
    # a point far off the curve subtends less than a half turn
    sup_f = abs(1e-4 + 0.1j)
    rep = arg_total_variation(
        lambda tau: tau, gamma_grid=(1e-4,),
        w_grid=np.array([3 * sup_f, -3 * sup_f]), eps=0.1,
    )
    assert np.all(rep.tv < np.pi)


def test_tv_touch_is_skipped_and_flagged():
    # f = i theta passes through i w exactly for w = 0
    rep = arg_total_variation(
        lambda tau: 1j * tau.imag, gamma_grid=(1e-4,),
        w_grid=np.array([0.0, 0.047]), eps=0.1,
    )
    assert rep.skipped == ((1e-4, 0.0),)
    assert np.isnan(rep.tv[0, 0])
    # the near-touched sample keeps its ~pi variation and reports the cap
    assert rep.tv[0, 1] == pytest.approx(np.pi, abs=0.05)
    assert rep.capped


def test_tv_default_w_grid_shape():
    rep = arg_total_variation(
        branch_log_deviation(upwind(1.0, 0.5), 1.0, 1.0),
        gamma_grid=(1e-2, 1e-3), eps=0.1,
    )
    assert rep.ws.shape == (41,)
    assert rep.tv.shape == (2, 41)
    assert rep.sup_at[0] in (1e-2, 1e-3)


def test_branch_curve_matches_upwind_closed_form():
    # mu(z) = nu/(z - (1-nu)): f(tau) = -log((e^tau - (1-nu))/nu)
    nu = 0.5
    branch = branch_log_deviation(upwind(1.0, nu), 1.0, 1.0)
    thetas = np.linspace(-0.1, 0.1, 257)
    for gamma in (1e-2, 1e-4):
        f = branch.curve(gamma, thetas)
        tau = gamma + 1j * thetas
        expect = -np.log((np.exp(tau) - (1 - nu)) / nu)
        assert np.max(np.abs(f - expect)) <= 1e-10


def test_branch_curve_continuous_at_glancing_point():
    # the tracked log never hops branches even though the eigenvalues
    # nearly collide at theta = 0
    z_bar = np.exp(-1j * np.pi / 6)
    branch = branch_log_deviation(leap_frog(1.0, 0.5), z_bar, 1j)
    f = branch.curve(1e-4, np.linspace(-0.1, 0.1, 2049))
    steps = np.abs(np.diff(f))
    assert steps.max() < 0.2
    assert np.min(np.abs(f)) < 0.05  # passes near the base point


def test_branch_rejects_bad_inputs():
    scheme = upwind(1.0, 0.5)
    with pytest.raises(ResolventError):
        branch_log_deviation(scheme, 1.2, 1.0)  # base off the circle
    with pytest.raises(ResolventError):
        branch_log_deviation(scheme, 1.0, 0.5)  # not an eigenvalue
    branch = branch_log_deviation(scheme, 1.0, 1.0)
    with pytest.raises(ResolventError):
        branch.curve(-1e-3, np.linspace(-0.1, 0.1, 9))


def test_tv_third_type_branches_stay_bounded():
    # transversally crossing branches keep the variation far below 6 pi
    for scheme, z_bar, mu in [
        (upwind(1.0, 0.5), 1.0, 1.0),
        (lax_friedrichs(1.0, 0.5), 1.0, 1.0),
    ]:
        rep = arg_total_variation(
            branch_log_deviation(scheme, z_bar, mu),
            gamma_grid=(1e-2, 1e-4), eps=0.1,
        )
        assert rep.sup <= 6 * np.pi + 0.1
        assert not rep.capped


def test_tv_glancing_branch_grows_toward_circle():
    z_bar = np.exp(-1j * np.pi / 6)
    branch = branch_log_deviation(leap_frog(1.0, 0.5), z_bar, 1j)
    rep = arg_total_variation(branch, gamma_grid=(1e-2, 1e-4), eps=0.1)
    assert rep.per_gamma_sup[1] > rep.per_gamma_sup[0] + 0.5


def test_tv_all_skipped_raises():
    with pytest.raises(ResolventError):
        arg_total_variation(
            lambda tau: 1j * tau.imag, gamma_grid=(1e-4,),
            w_grid=np.array([0.0]), eps=0.1,
        )
