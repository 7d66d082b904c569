"""Scheme data model, grid sequences and shift-operator algebra.

The objects here describe explicit multi-level finite difference schemes
for a first order hyperbolic system on the half-line j >= 1-r.  One time
step advances

    U_j^{n+1} = sum_{sigma=0}^{s} (Q_sigma U^{n-sigma})_j + dt * F_j^n      (j >= 1)
    U_j^{n+1} = sum_{sigma=-1}^{s} (B_{j,sigma} U^{n-sigma})_1 + g_j^{n+1}  (1-r <= j <= 0)

with Q_sigma = sum_{ell=-r}^{p} A[ell,sigma] T^ell and
B_{j,sigma} = sum_{ell=0}^{q} B[ell,j,sigma] T^ell, where T is the
spatial shift (T^ell v)_j = v_{j+ell}.  D = T - I denotes the forward
difference.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEME_SCHEMA_VERSION = 1

#: tolerance used for the consistency flag sum_{ell,sigma} A[ell,sigma] = I
CONSISTENCY_TOL = 1e-12

#: singular values below this fail the sampled invertibility check
NONCHARACTERISTIC_TOL = 1e-10


class SchemeError(ValueError):
    """Malformed or inconsistent scheme data."""


class RangeError(IndexError):
    """A grid index outside the valid range of a sequence was requested."""


# ---------------------------------------------------------------------------
# scheme definition


@dataclass(frozen=True, eq=False)
class SchemeDef:
    """Explicit multi-level difference scheme with boundary closure.

    Parameters
    ----------
    N : int
        Number of unknowns per grid point.
    r, p : int
        Left and right stencil widths of the interior operators (r >= 1).
    q : int
        Right stencil width of the boundary rows.
    s : int
        Number of extra time levels (two-level scheme: s = 0).
    lam : float
        Grid ratio dt/dx, fixed once and for all.
    interior : ndarray, shape (p+r+1, s+1, N, N)
        Real coefficients A[ell, sigma], indexed by [ell+r, sigma].
    boundary : ndarray, shape (q+1, r, s+2, N, N)
        Real coefficients B[ell, j, sigma], indexed by
        [ell, j-(1-r), sigma+1]; sigma = -1 couples to the new time level.
    label : str
        Optional human-readable name used in reports.
    """

    N: int
    r: int
    p: int
    q: int
    s: int
    lam: float
    interior: np.ndarray
    boundary: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.N < 1 or self.r < 1 or self.p < 0 or self.q < 0 or self.s < 0:
            raise SchemeError(
                f"need N>=1, r>=1, p,q,s>=0; got N={self.N} r={self.r} "
                f"p={self.p} q={self.q} s={self.s}"
            )
        if not (self.lam > 0):
            raise SchemeError(f"grid ratio must be positive, got {self.lam}")
        interior = np.asarray(self.interior, dtype=float)
        boundary = np.asarray(self.boundary, dtype=float)
        if interior.shape != (self.p + self.r + 1, self.s + 1, self.N, self.N):
            raise SchemeError(
                f"interior shape {interior.shape} != "
                f"{(self.p + self.r + 1, self.s + 1, self.N, self.N)}"
            )
        if boundary.shape != (self.q + 1, self.r, self.s + 2, self.N, self.N):
            raise SchemeError(
                f"boundary shape {boundary.shape} != "
                f"{(self.q + 1, self.r, self.s + 2, self.N, self.N)}"
            )
        interior.setflags(write=False)
        boundary.setflags(write=False)
        object.__setattr__(self, "interior", interior)
        object.__setattr__(self, "boundary", boundary)

    # -- coefficient access ------------------------------------------------

    def A(self, ell: int, sigma: int) -> np.ndarray:
        """Interior coefficient A[ell, sigma], ell in [-r, p], sigma in [0, s]."""
        if not (-self.r <= ell <= self.p) or not (0 <= sigma <= self.s):
            raise RangeError(f"A[{ell},{sigma}] outside declared ranges")
        return self.interior[ell + self.r, sigma]

    def B(self, ell: int, j: int, sigma: int) -> np.ndarray:
        """Boundary coefficient B[ell, j, sigma], ell in [0,q], j in [1-r,0],
        sigma in [-1, s]."""
        if (
            not (0 <= ell <= self.q)
            or not (1 - self.r <= j <= 0)
            or not (-1 <= sigma <= self.s)
        ):
            raise RangeError(f"B[{ell},{j},{sigma}] outside declared ranges")
        return self.boundary[ell, j - (1 - self.r), sigma + 1]

    def interior_op(self, sigma: int) -> "DifferenceOp":
        """The operator Q_sigma as a DifferenceOp."""
        taps = {
            ell: self.A(ell, sigma)
            for ell in range(-self.r, self.p + 1)
            if np.any(self.A(ell, sigma))
        }
        if not taps:
            taps = {0: np.zeros((self.N, self.N))}
        return DifferenceOp(taps)

    def boundary_op(self, j: int, sigma: int) -> "DifferenceOp":
        """The boundary operator B_{j,sigma} as a DifferenceOp."""
        taps = {
            ell: self.B(ell, j, sigma)
            for ell in range(self.q + 1)
            if np.any(self.B(ell, j, sigma))
        }
        if not taps:
            taps = {0: np.zeros((self.N, self.N))}
        return DifferenceOp(taps)

    def consistency_sum(self) -> np.ndarray:
        """sum over all (ell, sigma) of A[ell, sigma]; equals I if consistent."""
        return self.interior.sum(axis=(0, 1))

    @property
    def stencil_extent(self) -> int:
        """Total interior stencil width p + r."""
        return self.p + self.r


# ---------------------------------------------------------------------------
# grid sequences


@dataclass(frozen=True, eq=False)
class GridSequence:
    """Vector-valued sequence on a contiguous integer index range.

    ``values[k]`` holds the vector at grid index ``offset + k``.  With
    ``implicit_zero`` the sequence is treated as zero outside the stored
    range (finitely supported); otherwise out-of-range access is an error.
    """

    offset: int
    values: np.ndarray
    implicit_zero: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] == 0:
            raise SchemeError(f"values must be (L, N) with L >= 1, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, offset: int, length: int, N: int = 1, implicit_zero: bool = False):
        return cls(offset, np.zeros((length, N), dtype=complex), implicit_zero)

    @property
    def N(self) -> int:
        return self.values.shape[1]

    @property
    def last(self) -> int:
        """Largest stored index."""
        return self.offset + len(self.values) - 1

    def __len__(self) -> int:
        return self.values.shape[0]

    def get(self, j: int) -> np.ndarray:
        """Value at grid index j (zero-padded when implicit_zero)."""
        k = j - self.offset
        if 0 <= k < len(self.values):
            return self.values[k]
        if self.implicit_zero:
            return np.zeros(self.N, dtype=complex)
        raise RangeError(f"index {j} outside stored range [{self.offset}, {self.last}]")

    def window(self, jmin: int, jmax: int) -> np.ndarray:
        """Values on [jmin, jmax] as an array, zero-padded if implicit_zero."""
        if jmax < jmin:
            raise RangeError(f"empty window [{jmin}, {jmax}]")
        if not self.implicit_zero and (jmin < self.offset or jmax > self.last):
            raise RangeError(
                f"window [{jmin}, {jmax}] outside stored range "
                f"[{self.offset}, {self.last}]"
            )
        out = np.zeros((jmax - jmin + 1, self.N), dtype=complex)
        lo = max(jmin, self.offset)
        hi = min(jmax, self.last)
        if lo <= hi:
            out[lo - jmin : hi - jmin + 1] = self.values[
                lo - self.offset : hi - self.offset + 1
            ]
        return out

    def norm_sq(self, dx: float = 1.0) -> float:
        """dx-weighted squared l2 norm of the stored values."""
        return float(dx * np.sum(np.abs(self.values) ** 2))


# ---------------------------------------------------------------------------
# shift / difference operators


@dataclass(frozen=True, eq=False)
class DifferenceOp:
    """Finite linear combination of shifts: (P u)_j = sum_ell taps[ell] u_{j+ell}."""

    taps: dict

    def __post_init__(self):
        if not self.taps:
            raise SchemeError("operator needs at least one tap")
        N = None
        taps = {}
        for ell, m in sorted(self.taps.items()):
            m = np.asarray(m, dtype=float)
            if m.ndim == 0:
                m = m[None, None]
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise SchemeError(f"tap {ell} is not square: {m.shape}")
            if N is None:
                N = m.shape[0]
            elif m.shape[0] != N:
                raise SchemeError("taps have mismatched sizes")
            m.setflags(write=False)
            taps[int(ell)] = m
        object.__setattr__(self, "taps", taps)

    @classmethod
    def identity(cls, N: int = 1) -> "DifferenceOp":
        return cls({0: np.eye(N)})

    @classmethod
    def shift(cls, ell: int, N: int = 1) -> "DifferenceOp":
        """T^ell."""
        return cls({ell: np.eye(N)})

    @classmethod
    def diff(cls, N: int = 1) -> "DifferenceOp":
        """Forward difference D = T - I."""
        return cls({1: np.eye(N), 0: -np.eye(N)})

    @property
    def N(self) -> int:
        return next(iter(self.taps.values())).shape[0]

    @property
    def ell_min(self) -> int:
        return min(self.taps)

    @property
    def ell_max(self) -> int:
        return max(self.taps)

    def __add__(self, other: "DifferenceOp") -> "DifferenceOp":
        taps = {ell: m.copy() for ell, m in self.taps.items()}
        for ell, m in other.taps.items():
            taps[ell] = taps.get(ell, 0) + m
        return DifferenceOp(taps)

    def __sub__(self, other: "DifferenceOp") -> "DifferenceOp":
        return self + (-1.0) * other

    def __mul__(self, c: float) -> "DifferenceOp":
        return DifferenceOp({ell: c * m for ell, m in self.taps.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "DifferenceOp") -> "DifferenceOp":
        """Composition (self o other); taps convolve."""
        taps = {}
        for i, mi in self.taps.items():
            for j, mj in other.taps.items():
                taps[i + j] = taps.get(i + j, 0) + mi @ mj
        return DifferenceOp(taps)

    def __pow__(self, k: int) -> "DifferenceOp":
        if k < 0:
            raise SchemeError("negative operator powers are not defined here")
        out = DifferenceOp.identity(self.N)
        for _ in range(k):
            out = out @ self
        return out

    def symbol(self, kappa: complex) -> np.ndarray:
        """sum_ell kappa^ell taps[ell] (N x N complex)."""
        out = np.zeros((self.N, self.N), dtype=complex)
        for ell, m in self.taps.items():
            out += (kappa ** ell) * m
        return out

    def drop_zeros(self, tol: float = 0.0) -> "DifferenceOp":
        taps = {ell: m for ell, m in self.taps.items() if np.abs(m).max() > tol}
        if not taps:
            taps = {0: np.zeros((self.N, self.N))}
        return DifferenceOp(taps)


def apply_op(op: DifferenceOp, u: GridSequence) -> GridSequence:
    """Apply a shift-polynomial operator to a sequence.

    Without implicit zeros the valid range shrinks by the stencil extent:
    the result lives on [offset - ell_min, last - ell_max].  With implicit
    zeros the result covers the full support [offset - ell_max, last - ell_min].
    """
    if op.N != u.N:
        raise SchemeError(f"operator size {op.N} != sequence size {u.N}")
    if u.implicit_zero:
        new_off = u.offset - op.ell_max
        new_len = len(u) + (op.ell_max - op.ell_min)
    else:
        new_off = u.offset - op.ell_min
        new_len = len(u) - (op.ell_max - op.ell_min)
        if new_len <= 0:
            raise RangeError(
                f"stencil extent {op.ell_max - op.ell_min} exceeds sequence "
                f"length {len(u)}"
            )
    out = np.zeros((new_len, u.N), dtype=complex)
    for ell, m in op.taps.items():
        # rows j = new_off .. new_off+new_len-1 read u_{j+ell}
        lo = new_off + ell
        hi = lo + new_len - 1
        block = u.window(lo, hi) if u.implicit_zero else u.values[
            lo - u.offset : hi - u.offset + 1
        ]
        out += block @ m.T
    return GridSequence(new_off, out, u.implicit_zero)


def difference_power_taps(k: int) -> dict:
    """Scalar taps of D^k: D^k = sum_m (-1)^{k-m} C(k,m) T^m."""
    return {m: float((-1) ** (k - m) * math.comb(k, m)) for m in range(k + 1)}


def discrete_derivative(u: GridSequence, k: int) -> GridSequence:
    """k-th forward difference D^k u via binomial taps (k = 0 copies u)."""
    if k < 0:
        raise SchemeError("negative difference order")
    if k == 0:
        return u
    taps = {m: c * np.eye(u.N) for m, c in difference_power_taps(k).items()}
    return apply_op(DifferenceOp(taps), u)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    dimensions_ok: bool
    consistent: bool
    consistency_residual: float
    noncharacteristic_ok: bool
    min_sv_left: float
    min_sv_right: float
    messages: tuple

    @property
    def ok(self) -> bool:
        return self.dimensions_ok and self.noncharacteristic_ok


def _resolvent_block(scheme: SchemeDef, ell: int, z: complex) -> np.ndarray:
    """delta_{ell,0} I - sum_sigma z^{-sigma-1} A[ell, sigma]."""
    out = np.eye(scheme.N, dtype=complex) if ell == 0 else np.zeros(
        (scheme.N, scheme.N), dtype=complex
    )
    for sigma in range(scheme.s + 1):
        out = out - z ** (-sigma - 1) * scheme.A(ell, sigma)
    return out


def validate_scheme(
    scheme: SchemeDef,
    radii=(1.0, 1.5, 2.0, 3.0, 4.0),
    n_theta: int = 32,
    tol: float = NONCHARACTERISTIC_TOL,
) -> ValidationReport:
    """Check dimensions, consistency and sampled noncharacteristic condition.

    The extreme resolvent blocks at ell = -r and ell = p must be invertible
    for |z| in [1, 4]; their minimum singular value over the sampled annulus
    is reported.
    """
    messages = []
    dimensions_ok = True  # enforced by the constructor; re-verify shapes anyway
    if scheme.interior.shape != (scheme.p + scheme.r + 1, scheme.s + 1, scheme.N, scheme.N):
        dimensions_ok = False
        messages.append("interior coefficient array has wrong shape")
    if scheme.boundary.shape != (scheme.q + 1, scheme.r, scheme.s + 2, scheme.N, scheme.N):
        dimensions_ok = False
        messages.append("boundary coefficient array has wrong shape")

    residual = float(
        np.abs(scheme.consistency_sum() - np.eye(scheme.N)).max()
    )
    consistent = residual <= CONSISTENCY_TOL
    if not consistent:
        messages.append(f"consistency sum differs from identity by {residual:.3e}")

    min_left = np.inf
    min_right = np.inf
    for rho in radii:
        for t in range(n_theta):
            z = rho * np.exp(2j * np.pi * t / n_theta)
            sv_l = np.linalg.svd(_resolvent_block(scheme, -scheme.r, z), compute_uv=False)
            sv_r = np.linalg.svd(_resolvent_block(scheme, scheme.p, z), compute_uv=False)
            min_left = min(min_left, float(sv_l[-1]))
            min_right = min(min_right, float(sv_r[-1]))
    noncharacteristic_ok = min_left > tol and min_right > tol
    if not noncharacteristic_ok:
        messages.append(
            f"extreme coefficient blocks nearly singular on |z| in [1,4]: "
            f"min sv left {min_left:.3e}, right {min_right:.3e}"
        )
    return ValidationReport(
        dimensions_ok=dimensions_ok,
        consistent=consistent,
        consistency_residual=residual,
        noncharacteristic_ok=noncharacteristic_ok,
        min_sv_left=min_left,
        min_sv_right=min_right,
        messages=tuple(messages),
    )


# ---------------------------------------------------------------------------
# fixtures


def _boundary_array(r: int, q: int, s: int, N: int, kind: str) -> np.ndarray:
    bnd = np.zeros((q + 1, r, s + 2, N, N))
    if kind == "dirichlet":
        pass  # all rows read U_j^{n+1} = g_j^{n+1}
    elif kind == "extrapolation":
        # zeroth order: U_j^{n+1} = U_1^{n+1} for every boundary row
        for jj in range(r):
            bnd[0, jj, 0] = np.eye(N)  # ell = 0, sigma = -1
    else:
        raise SchemeError(f"unknown boundary kind {kind!r}")
    return bnd


def three_point(
    a_minus: float,
    a_zero: float,
    a_plus: float,
    lam: float = 1.0,
    boundary: str = "dirichlet",
    label: str = "three-point",
) -> SchemeDef:
    """Scalar one-step scheme U^{n+1} = a_- T^{-1} U + a_0 U + a_+ T U."""
    interior = np.zeros((3, 1, 1, 1))
    interior[0, 0, 0, 0] = a_minus
    interior[1, 0, 0, 0] = a_zero
    interior[2, 0, 0, 0] = a_plus
    return SchemeDef(
        N=1, r=1, p=1, q=0, s=0, lam=lam,
        interior=interior,
        boundary=_boundary_array(1, 0, 0, 1, boundary),
        label=label,
    )


def upwind(lam: float, a: float, boundary: str = "dirichlet") -> SchemeDef:
    """First order upwind scheme for u_t + a u_x = 0 with a > 0.

    U_j^{n+1} = (1 - lam*a) U_j + lam*a U_{j-1}; r = 1, p = 0.
    """
    if a <= 0:
        raise SchemeError("upwind fixture assumes a > 0 (leftgoing stencil)")
    nu = lam * a
    interior = np.zeros((2, 1, 1, 1))
    interior[0, 0, 0, 0] = nu         # ell = -1
    interior[1, 0, 0, 0] = 1.0 - nu   # ell = 0
    return SchemeDef(
        N=1, r=1, p=0, q=0, s=0, lam=lam,
        interior=interior,
        boundary=_boundary_array(1, 0, 0, 1, boundary),
        label="upwind",
    )


def lax_friedrichs(lam: float, a: float, boundary: str = "dirichlet") -> SchemeDef:
    """Lax-Friedrichs scheme: U^{n+1}_j = (U_{j+1}+U_{j-1})/2 - lam*a (U_{j+1}-U_{j-1})/2."""
    nu = lam * a
    return three_point(
        (1 + nu) / 2, 0.0, (1 - nu) / 2, lam=lam, boundary=boundary,
        label="lax-friedrichs",
    )


def lax_wendroff(lam: float, a: float, boundary: str = "dirichlet") -> SchemeDef:
    """Second order Lax-Wendroff scheme."""
    nu = lam * a
    return three_point(
        nu * (nu + 1) / 2, 1 - nu ** 2, nu * (nu - 1) / 2, lam=lam,
        boundary=boundary, label="lax-wendroff",
    )


def leap_frog(lam: float, a: float, boundary: str = "dirichlet") -> SchemeDef:
    """Three-level leap-frog scheme U^{n+1}_j = U^{n-1}_j - lam*a (U^n_{j+1} - U^n_{j-1})."""
    nu = lam * a
    interior = np.zeros((3, 2, 1, 1))
    interior[0, 0, 0, 0] = nu    # ell = -1, sigma = 0
    interior[2, 0, 0, 0] = -nu   # ell = +1, sigma = 0
    interior[1, 1, 0, 0] = 1.0   # ell = 0, sigma = 1
    return SchemeDef(
        N=1, r=1, p=1, q=0, s=1, lam=lam,
        interior=interior,
        boundary=_boundary_array(1, 0, 1, 1, boundary),
        label="leap-frog",
    )


FIXTURES = {
    "upwind": upwind,
    "lax-friedrichs": lax_friedrichs,
    "lax-wendroff": lax_wendroff,
    "leap-frog": leap_frog,
}


# ---------------------------------------------------------------------------
# JSON scheme files (schema_version 1)
#
# {
#   "schema_version": 1,
#   "N": 1, "r": 1, "p": 1, "q": 0, "s": 0,
#   "lambda": 1.0,
#   "label": "lax-friedrichs",
#   "interior": [{"ell": -1, "sigma": 0, "matrix": [[0.75]]}, ...],
#   "boundary": [{"ell": 0, "j": 0, "sigma": -1, "matrix": [[1.0]]}, ...]
# }
#
# Matrices are row-major nested lists; omitted (ell, sigma) entries are zero.


def scheme_to_dict(scheme: SchemeDef) -> dict:
    interior = []
    for ell in range(-scheme.r, scheme.p + 1):
        for sigma in range(scheme.s + 1):
            m = scheme.A(ell, sigma)
            if np.any(m):
                interior.append(
                    {"ell": ell, "sigma": sigma, "matrix": m.tolist()}
                )
    boundary = []
    for ell in range(scheme.q + 1):
        for j in range(1 - scheme.r, 1):
            for sigma in range(-1, scheme.s + 1):
                m = scheme.B(ell, j, sigma)
                if np.any(m):
                    boundary.append(
                        {"ell": ell, "j": j, "sigma": sigma, "matrix": m.tolist()}
                    )
    return {
        "schema_version": SCHEME_SCHEMA_VERSION,
        "N": scheme.N,
        "r": scheme.r,
        "p": scheme.p,
        "q": scheme.q,
        "s": scheme.s,
        "lambda": scheme.lam,
        "label": scheme.label,
        "interior": interior,
        "boundary": boundary,
    }


def scheme_from_dict(data: dict) -> SchemeDef:
    version = data.get("schema_version")
    if version != SCHEME_SCHEMA_VERSION:
        raise SchemeError(
            f"unsupported scheme schema_version {version!r} "
            f"(this build reads version {SCHEME_SCHEMA_VERSION})"
        )
    try:
        N, r, p, q, s = (int(data[k]) for k in ("N", "r", "p", "q", "s"))
        lam = float(data["lambda"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemeError(f"missing or malformed scheme field: {exc}") from exc

    interior = np.zeros((p + r + 1, s + 1, N, N))
    seen = set()
    for entry in data.get("interior", []):
        ell, sigma = int(entry["ell"]), int(entry["sigma"])
        if not (-r <= ell <= p) or not (0 <= sigma <= s):
            raise SchemeError(f"interior entry (ell={ell}, sigma={sigma}) out of range")
        if (ell, sigma) in seen:
            raise SchemeError(f"duplicate interior entry (ell={ell}, sigma={sigma})")
        seen.add((ell, sigma))
        m = np.asarray(entry["matrix"], dtype=float)
        if m.shape != (N, N):
            raise SchemeError(f"interior matrix at (ell={ell}) has shape {m.shape}")
        interior[ell + r, sigma] = m

    boundary = np.zeros((q + 1, r, s + 2, N, N))
    seen = set()
    for entry in data.get("boundary", []):
        ell, j, sigma = int(entry["ell"]), int(entry["j"]), int(entry["sigma"])
        if not (0 <= ell <= q) or not (1 - r <= j <= 0) or not (-1 <= sigma <= s):
            raise SchemeError(
                f"boundary entry (ell={ell}, j={j}, sigma={sigma}) out of range"
            )
        if (ell, j, sigma) in seen:
            raise SchemeError(f"duplicate boundary entry (ell={ell}, j={j}, sigma={sigma})")
        seen.add((ell, j, sigma))
        m = np.asarray(entry["matrix"], dtype=float)
        if m.shape != (N, N):
            raise SchemeError(f"boundary matrix at (ell={ell}, j={j}) has shape {m.shape}")
        boundary[ell, j - (1 - r), sigma + 1] = m

    return SchemeDef(
        N=N, r=r, p=p, q=q, s=s, lam=lam,
        interior=interior, boundary=boundary,
        label=str(data.get("label", "")),
    )


def save_scheme(scheme: SchemeDef, path) -> None:
    Path(path).write_text(json.dumps(scheme_to_dict(scheme), indent=2, sort_keys=True))


def load_scheme(path) -> SchemeDef:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemeError(f"scheme file is not valid JSON: {exc}") from exc
    return scheme_from_dict(data)
