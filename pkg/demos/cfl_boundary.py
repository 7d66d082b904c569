"""Recover the CFL boundary of the classic three-point schemes.

Two independent oracles locate the largest stable lambda*a by bisection:
the spectral radius of the amplification matrix on the unit circle, and
the sign criterion on the dissipation coefficients of the canonical
energy identity.  Both land on lambda*a = 1.
"""

from dibvp.core import lax_friedrichs, lax_wendroff, upwind
from dibvp.sbp import cauchy_criterion_3pt
from dibvp.symbol import von_neumann_check


def coeffs(scheme):
    c = scheme.interior[:, 0, 0, 0]
    a_plus = float(c[2]) if c.shape[0] > 2 else 0.0
    return float(c[0]), float(c[1]), a_plus


def bisect(pred, lo=0.5, hi=1.5, tol=1e-8):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def main():
    for factory in (upwind, lax_friedrichs, lax_wendroff):
        name = factory.__name__.replace("_", "-")
        spectral = bisect(lambda t: von_neumann_check(factory(1.0, t)).ok)
        energetic = bisect(
            lambda t: cauchy_criterion_3pt(*coeffs(factory(1.0, t))).stable
        )
        print(f"{name:15s} spectral oracle: lambda*a <= {spectral:.8f}")
        print(f"{'':15s} energy oracle:   lambda*a <= {energetic:.8f}")

    crit = cauchy_criterion_3pt(*coeffs(upwind(1.0, 1.2)))
    print(f"\nupwind at lambda*a = 1.2: d1 = {crit.d1:+.4f}, "
          f"d2 = {crit.d2:+.4f}, margin = {crit.margin:+.4f} -> unstable")


if __name__ == "__main__":
    main()
