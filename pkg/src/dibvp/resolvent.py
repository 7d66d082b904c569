"""Resolvent-side analysis of the half-line scheme.

After a z-transform in time, a solution U_j^n = z^n W_j of the
homogeneous scheme satisfies a spatial recursion with coefficients

    RA_l(z) = delta_{l0} I - sum_sigma z^{-sigma-1} A[l, sigma],
    RB_{l,j}(z) = sum_{sigma=-1}^{s} z^{-sigma-1} B[l, j, sigma],

an interior relation sum_l RA_l(z) W_{j+l} = 0 (j >= 1) and boundary
relations W_j = sum_l RB_{l,j}(z) W_{1+l} (1-r <= j <= 0).  Stacking
consecutive values into states Wvec_j = (W_{j+p-1}, ..., W_{j-r}) turns
the interior relation into a one-step recursion Wvec_{j+1} = M(z) Wvec_j
with a block companion matrix M(z).

For |z| > 1 the matrix M(z) has exactly N r eigenvalues inside the unit
disk and N p outside; square-summable solutions live in the stable
invariant subspace.  The boundary relations restricted to that subspace
give a square matrix whose determinant modulus |Delta(z)| is the
Lopatinskii determinant: the uniform Kreiss-Lopatinskii condition (UKLC)
asks for a positive lower bound as |z| decreases to 1.

The module also classifies the eigenvalues of M(z) at a unit-modulus
point (expanding / contracting / crossing the circle transversally /
glancing) and implements a total-variation-of-argument diagnostic along
eigenvalue branch curves z = z_bar e^{gamma + i theta}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import SchemeDef, _resolvent_block
from .symbol import find_glancing, von_neumann_check

DEFAULT_RADII = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
DEFAULT_GAMMAS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
KL_TOL = 1e-6
SPLIT_MARGIN = 1e-8


class ResolventError(ValueError):
    """Raised when a resolvent-side computation is ill-posed at this z."""


# ---------------------------------------------------------------------------
# coefficients and companion matrix


@dataclass(frozen=True)
class ResolventCoeffs:
    """Spatial-recursion coefficients at a fixed z.

    ``A_blocks[l + r]`` is RA_l(z) for l in [-r, p]; ``B_blocks[l, j - (1-r)]``
    is RB_{l,j}(z) for l in [0, q], j in [1-r, 0].
    """

    z: complex
    r: int
    A_blocks: np.ndarray
    B_blocks: np.ndarray

    def A(self, ell: int) -> np.ndarray:
        return self.A_blocks[ell + self.r]

    def B(self, ell: int, j: int) -> np.ndarray:
        return self.B_blocks[ell, j - (1 - self.r)]


def resolvent_coeffs(scheme: SchemeDef, z: complex) -> ResolventCoeffs:
    """Evaluate RA_l(z) and RB_{l,j}(z)."""
    if z == 0:
        raise ResolventError("resolvent coefficients are singular at z = 0")
    r, p, q, s, N = scheme.r, scheme.p, scheme.q, scheme.s, scheme.N
    A = np.stack([_resolvent_block(scheme, ell, z) for ell in range(-r, p + 1)])
    B = np.zeros((q + 1, r, N, N), dtype=complex)
    for ell in range(q + 1):
        for j in range(1 - r, 1):
            acc = np.zeros((N, N), dtype=complex)
            for sigma in range(-1, s + 1):
                acc += z ** (-sigma - 1) * scheme.B(ell, j, sigma)
            B[ell, j - (1 - r)] = acc
    return ResolventCoeffs(z=z, r=r, A_blocks=A, B_blocks=B)


@dataclass(frozen=True)
class CompanionMatrix:
    """Block companion matrix of the spatial recursion at z."""

    z: complex
    M: np.ndarray


def assemble_M(
    scheme: SchemeDef, z: complex, cond_cutoff: float = 1e12
) -> CompanionMatrix:
    """Build M(z) of size N(p+r): top block row -RA_p^{-1}(RA_{p-1}..RA_{-r}),
    identity on the subdiagonal."""
    coeffs = resolvent_coeffs(scheme, z)
    r, p, N = scheme.r, scheme.p, scheme.N
    Ap = coeffs.A_blocks[p + r]
    if np.linalg.cond(Ap) > cond_cutoff:
        raise ResolventError(
            f"leading coefficient RA_p({z}) is numerically singular"
        )
    dim = N * (p + r)
    M = np.zeros((dim, dim), dtype=complex)
    ApInv = np.linalg.inv(Ap)
    # top row blocks multiply (W_{j+p-1}, ..., W_{j-r})
    for k, ell in enumerate(range(p - 1, -r - 1, -1)):
        M[:N, k * N : (k + 1) * N] = -ApInv @ coeffs.A_blocks[ell + r]
    if p + r > 1:
        M[N:, :-N] = np.eye(N * (p + r - 1))
    return CompanionMatrix(z=z, M=M)


# ---------------------------------------------------------------------------
# spectral splitting


@dataclass(frozen=True)
class SpectralSplit:
    """Stable/unstable invariant subspaces of M(z) for |z| > 1.

    ``V_s`` and ``V_u`` have orthonormal columns (ordered Schur bases);
    ``proj_s``/``proj_u`` are the spectral projectors built from them.
    ``counts_ok`` records whether the dimensions match (N r, N p).
    """

    z: complex
    eigenvalues: np.ndarray
    V_s: np.ndarray
    V_u: np.ndarray
    proj_s: np.ndarray
    proj_u: np.ndarray
    n_stable: int
    n_unstable: int
    counts_ok: bool
    unit_gap: float
    invariance_residual: float
    message: str = ""


def spectral_split(
    companion: CompanionMatrix,
    scheme: SchemeDef,
    margin: float = SPLIT_MARGIN,
    unit_tol: float = 1e-10,
) -> SpectralSplit:
    """Split the spectrum of M(z) across the unit circle.

    Requires |z| > 1 + margin.  An eigenvalue within ``unit_tol`` of the
    unit circle cannot be assigned a side and raises; a count different
    from (N r, N p) is reported in ``counts_ok``/``message`` rather than
    raised, since it indicates an assumption violation of the scheme, not
    a numerical failure.
    """
    z, M = companion.z, companion.M
    if abs(z) <= 1 + margin:
        raise ResolventError(
            f"spectral split needs |z| > 1 + {margin:g}, got |z| = {abs(z):.12f}"
        )
    eigs = np.linalg.eigvals(M)
    unit_gap = float(np.min(np.abs(np.abs(eigs) - 1)))
    if unit_gap < unit_tol:
        raise ResolventError(
            f"eigenvalue within {unit_tol:g} of the unit circle at |z| = "
            f"{abs(z):.12f}; splitting is not numerically resolved"
        )
    _, Zs, ns = scipy.linalg.schur(
        M, output="complex", sort=lambda mu: abs(mu) < 1
    )
    _, Zu, nu = scipy.linalg.schur(
        M, output="complex", sort=lambda mu: abs(mu) > 1
    )
    V_s, V_u = Zs[:, :ns], Zu[:, :nu]
    dim = M.shape[0]
    expect_s, expect_u = scheme.N * scheme.r, scheme.N * scheme.p
    counts_ok = ns == expect_s and nu == expect_u and ns + nu == dim
    message = ""
    if not counts_ok:
        message = (
            f"expected ({expect_s} stable, {expect_u} unstable), "
            f"got ({ns}, {nu}); scheme assumptions violated at z = {z}"
        )
    X = np.concatenate([V_s, V_u], axis=1)
    Xinv = np.linalg.inv(X)
    proj_s = V_s @ Xinv[:ns]
    proj_u = V_u @ Xinv[ns:]
    res = 0.0
    for V in (V_s, V_u):
        if V.shape[1]:
            MV = M @ V
            res = max(res, float(np.linalg.norm(MV - V @ (V.conj().T @ MV), 2)))
    return SpectralSplit(
        z=z,
        eigenvalues=eigs,
        V_s=V_s,
        V_u=V_u,
        proj_s=proj_s,
        proj_u=proj_u,
        n_stable=ns,
        n_unstable=nu,
        counts_ok=counts_ok,
        unit_gap=unit_gap,
        invariance_residual=res,
        message=message,
    )


# ---------------------------------------------------------------------------
# Lopatinskii determinant


def kl_boundary_matrix(scheme: SchemeDef, z: complex) -> np.ndarray:
    """Effective boundary rows acting on the state Wvec_1 = (W_p, ..., W_{1-r}).

    Row j (for j = 0 down to 1-r) encodes W_j - sum_l RB_{l,j}(z) W_{1+l} = 0.
    W_i with i <= p is a block of Wvec_1 (column block p - i); W_{1+l} with
    l >= p is extracted by iterating the companion matrix:
    W_{1+l} = E_top M(z)^{l+1-p} Wvec_1.
    """
    coeffs = resolvent_coeffs(scheme, z)
    r, p, q, N = scheme.r, scheme.p, scheme.q, scheme.N
    dim = N * (p + r)

    def selector(i: int) -> np.ndarray:
        out = np.zeros((N, dim), dtype=complex)
        c = p - i
        out[:, c * N : (c + 1) * N] = np.eye(N)
        return out

    powers = None
    if q >= p:
        Mmat = assemble_M(scheme, z).M
        max_pow = q + 1 - p
        powers = [np.eye(dim, dtype=complex)]
        for _ in range(max_pow):
            powers.append(Mmat @ powers[-1])

    def extract(i: int) -> np.ndarray:
        # matrix X with W_i = X @ Wvec_1 on homogeneous interior solutions
        if i <= p:
            return selector(i)
        return powers[i - p][:N]  # top block of M^{i-p}

    rows = []
    for j in range(0, -r, -1):
        row = selector(j).copy()
        for ell in range(q + 1):
            row -= coeffs.B_blocks[ell, j - (1 - r)] @ extract(1 + ell)
        rows.append(row)
    return np.concatenate(rows, axis=0)


def kl_determinant(
    scheme: SchemeDef, z: complex, b_eff: np.ndarray | None = None
) -> float:
    """|Delta(z)| = |det(B_eff(z) V_s(z))| with an orthonormal stable basis.

    The modulus is independent of the basis choice.  ``b_eff`` overrides
    the assembled boundary rows (shape N r x N(p+r)); rows of zeros give
    |Delta| = 0 identically.
    """
    split = spectral_split(assemble_M(scheme, z), scheme)
    if not split.counts_ok:
        raise ResolventError(split.message)
    B = kl_boundary_matrix(scheme, z) if b_eff is None else np.asarray(b_eff)
    if B.shape != (split.n_stable, scheme.N * (scheme.p + scheme.r)):
        raise ResolventError(
            f"boundary matrix shape {B.shape} incompatible with "
            f"state dimension {scheme.N * (scheme.p + scheme.r)}"
        )
    return float(abs(np.linalg.det(B @ split.V_s)))


@dataclass(frozen=True)
class KLScan:
    """|Delta| sampled on circles z = (1+delta) e^{i theta}."""

    radii: tuple
    thetas: np.ndarray
    values: np.ndarray  # (len(radii), len(thetas))
    min_abs: float
    argmin: tuple  # (delta, theta)
    per_radius_min: tuple
    tol: float
    plausible: bool
    warnings: tuple = field(default_factory=tuple)


def uklc_scan(
    scheme: SchemeDef,
    radii: tuple = DEFAULT_RADII,
    n_theta: int = 64,
    tol_kl: float = KL_TOL,
    b_eff: np.ndarray | None = None,
    check_symbol: bool = True,
) -> KLScan:
    """Scan |Delta| toward the unit circle and issue a verdict.

    The verdict "plausible" means min |Delta| >= tol_kl over all samples.
    ``per_radius_min`` exposes the trend as delta decreases.  Symbol-side
    hypotheses are cross-checked: glancing modes or a von Neumann violation
    are attached as warnings since they void the UKLC-implies-stability
    equivalence.
    """
    thetas = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    values = np.empty((len(radii), len(thetas)))
    for i, delta in enumerate(radii):
        for k, th in enumerate(thetas):
            z = (1 + delta) * np.exp(1j * th)
            values[i, k] = kl_determinant(scheme, z, b_eff=b_eff)
    flat = int(np.argmin(values))
    i0, k0 = divmod(flat, len(thetas))
    warnings = []
    if check_symbol:
        vn = von_neumann_check(scheme)
        if not vn.ok:
            warnings.append(
                f"von Neumann condition fails (max radius {vn.max_radius:.6f})"
            )
        gl = find_glancing(scheme)
        if gl.has_glancing:
            locs = ", ".join(
                f"theta={t:.6f}"
                for t in sorted({round(p.theta, 9) for p in gl.points})
            )
            warnings.append(
                f"glancing modes present ({locs}); UKLC alone does not "
                "imply strong stability"
            )
    return KLScan(
        radii=tuple(radii),
        thetas=thetas,
        values=values,
        min_abs=float(values.min()),
        argmin=(radii[i0], float(thetas[k0])),
        per_radius_min=tuple(float(v) for v in values.min(axis=1)),
        tol=tol_kl,
        plausible=bool(values.min() >= tol_kl),
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# classification of M(z_bar) eigenvalues on the unit circle


@dataclass(frozen=True)
class BoundaryBlock:
    """One eigenvalue cluster of M(z_bar) with its circle-crossing type.

    kind: "expanding" (|mu| > 1), "contracting" (|mu| < 1), "crossing"
    (unimodular, moving radially as |z| grows; ``drift`` > 0 means
    outward), or "glancing" (unimodular with no resolved radial motion:
    branch-point behavior or vanishing drift).
    """

    mu: complex
    multiplicity: int
    kind: str
    drift: float | None
    fd_mismatch: float | None


@dataclass(frozen=True)
class BlockClassification:
    z_bar: complex
    blocks: tuple
    counts: dict


def _nearest(vals: np.ndarray, ref: complex) -> complex:
    return complex(vals[np.argmin(np.abs(vals - ref))])


def classify_boundary_blocks(
    scheme: SchemeDef,
    z_bar: complex,
    delta_prime: float = 1e-6,
    h: float = 1e-5,
    drift_tol: float = 1e-6,
    fd_tol: float = 1e-2,
    cluster_tol: float = 1e-7,
) -> BlockClassification:
    """Classify eigenvalues of M(z_bar) for unit-modulus z_bar.

    Unimodular eigenvalues get a radial drift estimate
    Lambda = (d mu / d tau) conj(mu) along z = z_bar e^tau by centered
    differences at steps h and h/4.  Re Lambda > 0 means the eigenvalue
    leaves the unit disk as |z| grows.  Disagreement of the two stencils
    (relative mismatch > fd_tol) or |Re Lambda| <= drift_tol marks the
    block glancing: the branch is not analytic, or touches the circle
    tangentially.
    """
    if abs(abs(z_bar) - 1) > 1e-12:
        raise ResolventError("classification point must be on the unit circle")
    eigs = np.linalg.eigvals(assemble_M(scheme, z_bar).M)
    order = np.lexsort((eigs.imag, eigs.real))
    eigs = eigs[order]

    clusters = []
    for mu in eigs:
        for cl in clusters:
            if abs(mu - cl[-1]) <= cluster_tol:
                cl.append(mu)
                break
        else:
            clusters.append([mu])

    blocks = []
    counts = {"expanding": 0, "contracting": 0, "crossing": 0, "glancing": 0}
    for cl in clusters:
        mu = complex(np.mean(cl))
        mult = len(cl)
        if abs(mu) > 1 + delta_prime:
            kind, drift, mism = "expanding", None, None
        elif abs(mu) < 1 - delta_prime:
            kind, drift, mism = "contracting", None, None
        else:

            def fd(step: float) -> complex:
                zp = np.linalg.eigvals(assemble_M(scheme, z_bar * np.exp(step)).M)
                zm = np.linalg.eigvals(assemble_M(scheme, z_bar * np.exp(-step)).M)
                return (_nearest(zp, mu) - _nearest(zm, mu)) / (2 * step)

            d1, d4 = fd(h), fd(h / 4)
            mism = float(abs(d1 - d4) / max(abs(d4), 1e-12))
            lam = (16 * d4 - d1) / 15 * np.conj(mu)
            drift = float(lam.real)
            if mism > fd_tol or abs(drift) <= drift_tol:
                kind = "glancing"
            else:
                kind = "crossing"
        counts[kind] += mult
        blocks.append(
            BoundaryBlock(
                mu=mu, multiplicity=mult, kind=kind, drift=drift, fd_mismatch=mism
            )
        )
    return BlockClassification(z_bar=z_bar, blocks=tuple(blocks), counts=counts)


# ---------------------------------------------------------------------------
# total variation of the argument along branch curves


class EigenvalueBranch:
    """Continuously tracked eigenvalue branch mu(z) of M(z) near z_bar.

    ``curve(gamma, thetas)`` returns f(gamma + i theta) = log(mu / mu_bar)
    along z = z_bar e^{gamma + i theta}, tracked by continuity: first a
    radial walk from z_bar to z_bar e^gamma with geometrically growing
    steps, then an angular sweep through reference nodes spaced finely
    enough (relative to the distance from the branch point) that nearest-
    eigenvalue continuation cannot hop branches.  The logarithm's
    imaginary part is accumulated along the path, so f is continuous even
    across the cut of the principal branch.
    """

    def __init__(self, scheme: SchemeDef, z_bar: complex, mu_bar: complex):
        if abs(abs(z_bar) - 1) > 1e-12:
            raise ResolventError("branch base point must be on the unit circle")
        self.scheme = scheme
        self.z_bar = z_bar
        self.mu_bar = complex(mu_bar)
        eigs = np.linalg.eigvals(assemble_M(scheme, z_bar).M)
        if np.min(np.abs(eigs - self.mu_bar)) > 1e-6:
            raise ResolventError(
                f"mu_bar {mu_bar} is not an eigenvalue of M(z_bar)"
            )

    def _eigs_at(self, taus: np.ndarray) -> np.ndarray:
        mats = np.stack(
            [assemble_M(self.scheme, self.z_bar * np.exp(t)).M for t in taus]
        )
        return np.linalg.eigvals(mats)

    def _radial_seed(self, gamma: float):
        """Track from the base point out to tau = gamma; returns (mu, logmu)."""
        steps = [gamma / 2**k for k in range(12, -1, -1)]
        eigs = self._eigs_at(np.asarray(steps, dtype=complex))
        mu = self.mu_bar
        log_acc = 0.0j
        for row in eigs:
            nxt = complex(row[np.argmin(np.abs(row - mu))])
            log_acc += np.log(nxt / mu)
            mu = nxt
        return mu, np.log(self.mu_bar) + log_acc

    def curve(self, gamma: float, thetas: np.ndarray) -> np.ndarray:
        """f(gamma + i theta) on the given theta grid (must include range 0)."""
        if gamma <= 0:
            raise ResolventError("gamma must be positive")
        thetas = np.asarray(thetas, dtype=float)
        t_max = float(np.abs(thetas).max())
        mu0, log0 = self._radial_seed(gamma)

        # reference nodes: geometric spacing away from theta = 0
        nodes = [0.0]
        t = gamma / 4
        while t < t_max:
            nodes.append(t)
            t *= 1.25
        nodes.append(t_max)
        node_th = np.array(nodes)
        node_th = np.concatenate([-node_th[:0:-1], node_th])

        k0 = len(nodes) - 1  # index of theta = 0 in node_th
        node_eigs = self._eigs_at(gamma + 1j * node_th)
        node_mu = np.empty(len(node_th), dtype=complex)
        node_log = np.empty(len(node_th), dtype=complex)
        node_mu[k0], node_log[k0] = mu0, log0
        for k in range(k0 + 1, len(node_th)):
            row = node_eigs[k]
            nxt = complex(row[np.argmin(np.abs(row - node_mu[k - 1]))])
            node_mu[k] = nxt
            node_log[k] = node_log[k - 1] + np.log(nxt / node_mu[k - 1])
        for k in range(k0 - 1, -1, -1):
            row = node_eigs[k]
            nxt = complex(row[np.argmin(np.abs(row - node_mu[k + 1]))])
            node_mu[k] = nxt
            node_log[k] = node_log[k + 1] + np.log(nxt / node_mu[k + 1])

        # evaluate the grid against the nearest reference node
        grid_eigs = self._eigs_at(gamma + 1j * thetas)
        ref = np.searchsorted(node_th, thetas)
        ref = np.clip(ref, 1, len(node_th) - 1)
        left_closer = np.abs(thetas - node_th[ref - 1]) <= np.abs(
            node_th[ref] - thetas
        )
        ref = np.where(left_closer, ref - 1, ref)
        pick = np.argmin(np.abs(grid_eigs - node_mu[ref][:, None]), axis=1)
        mu = grid_eigs[np.arange(len(thetas)), pick]
        f = node_log[ref] + np.log(mu / node_mu[ref]) - np.log(self.mu_bar)
        return f


def branch_log_deviation(
    scheme: SchemeDef, z_bar: complex, mu_bar: complex
) -> EigenvalueBranch:
    """Branch object exposing f(tau) = log(mu(z_bar e^tau) / mu_bar)."""
    return EigenvalueBranch(scheme, z_bar, mu_bar)


@dataclass(frozen=True)
class ArgTVReport:
    """Total variation of theta -> arg(f(gamma + i theta) - i w).

    ``tv[i, j]`` is the variation for gamma = gammas[i], w = ws[j]; NaN
    marks skipped samples (curve within 1e-14 of i w).  ``per_gamma_sup``
    shows the trend as gamma decreases.
    """

    gammas: tuple
    ws: np.ndarray
    tv: np.ndarray
    sup: float
    sup_at: tuple
    per_gamma_sup: tuple
    eps: float
    skipped: tuple
    capped: bool


def _tv_for_curve(f: np.ndarray, w: float):
    """(total variation of arg(f - i w), max single increment, touched)."""
    g = f - 1j * w
    if np.min(np.abs(g)) < 1e-14:
        return np.nan, 0.0, True
    v = np.angle(g)
    d = np.diff(v)
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return float(np.sum(np.abs(d))), float(np.abs(d).max()), False


def arg_total_variation(
    branch,
    gamma_grid: tuple = DEFAULT_GAMMAS,
    w_grid: np.ndarray | None = None,
    eps: float = 0.1,
    n_theta0: int = 257,
    max_points: int = 2**17 + 1,
) -> ArgTVReport:
    """Sup over (gamma, w) of the argument variation along branch curves.

    ``branch`` is an EigenvalueBranch or any callable tau -> f(tau).  For
    each gamma the theta grid over [-eps, eps] is doubled until every
    increment of arg(f - i w) is below pi/4 (or ``max_points`` is hit).
    When ``w_grid`` is omitted it is built from the first gamma's curve:
    41 points spanning three times the curve's imaginary range.
    """
    evaluate = (
        branch.curve
        if hasattr(branch, "curve")
        else lambda gamma, thetas: np.asarray(
            [branch(gamma + 1j * t) for t in thetas]
        )
    )

    curves: dict = {}

    def curve_at(gamma: float, n: int) -> np.ndarray:
        key = (gamma, n)
        if key not in curves:
            curves[key] = evaluate(gamma, np.linspace(-eps, eps, n))
        return curves[key]

    if w_grid is None:
        f0 = curve_at(gamma_grid[0], n_theta0)
        lo, hi = float(f0.imag.min()), float(f0.imag.max())
        span = max(hi - lo, 1e-12)
        mid = 0.5 * (lo + hi)
        w_grid = np.linspace(mid - 1.5 * span, mid + 1.5 * span, 41)
    else:
        w_grid = np.asarray(w_grid, dtype=float)

    tv = np.full((len(gamma_grid), len(w_grid)), np.nan)
    skipped = []
    capped = False
    for i, gamma in enumerate(gamma_grid):
        for j, w in enumerate(w_grid):
            n = n_theta0
            while True:
                total, max_inc, touched = _tv_for_curve(curve_at(gamma, n), w)
                if touched:
                    skipped.append((gamma, float(w)))
                    break
                if max_inc < np.pi / 4:
                    tv[i, j] = total
                    break
                if 2 * n - 1 > max_points:
                    tv[i, j] = total
                    capped = True
                    break
                n = 2 * n - 1
    if np.all(np.isnan(tv)):
        raise ResolventError("all (gamma, w) samples were skipped")
    flat = int(np.nanargmax(tv))
    i0, j0 = divmod(flat, len(w_grid))
    per_gamma = tuple(
        float(np.nanmax(tv[i])) if not np.all(np.isnan(tv[i])) else float("nan")
        for i in range(len(gamma_grid))
    )
    return ArgTVReport(
        gammas=tuple(gamma_grid),
        ws=w_grid,
        tv=tv,
        sup=float(np.nanmax(tv)),
        sup_at=(gamma_grid[i0], float(w_grid[j0])),
        per_gamma_sup=per_gamma,
        eps=eps,
        skipped=tuple(skipped),
        capped=capped,
    )
