"""Run half-line problems and measure stability constants empirically.

Random square-summable data is evolved with Dirichlet rows, the gamma-
weighted interior and boundary-trace norms are accumulated, and the
ratio against the data norm is tracked across mesh refinements.  A
stable closure keeps the ratio flat; the neighbor-copy closure makes it
grow under refinement.
"""

from dibvp.core import upwind
from dibvp.sim import (
    accumulate_norms,
    decaying_data,
    run_ibvp,
    verify_strong_stability,
    verify_thm1,
)


def main():
    scheme = upwind(0.5, 1.0)
    data = decaying_data(scheme, n_sites=64, seed=3)
    trace = run_ibvp(scheme, data, n_max=200, dt=0.05)
    series = accumulate_norms(trace, gamma=0.1, P=3)
    print(f"single run (dt = 0.05, gamma = 0.1): interior = {series.interior:.4f}, "
          f"trace = {series.trace:.4f}, sup |U|^2 = {series.sup_norm:.4f}")

    rep = verify_thm1(scheme, P=3, t_end=10.0)
    print(f"\ntrace estimate across refinements: {rep.verdict}")
    for i, dt in enumerate(rep.dts):
        row = ", ".join(f"{r:.3f}" for r in rep.ratios[i])
        print(f"  dt = {dt:7.4f}  ratios over gamma grid: {row}")

    marginal = upwind(0.5, 1.0, boundary="extrapolation")
    rep = verify_strong_stability(marginal, t_end=50.0,
                                  refinements=(0.1, 0.05, 0.025))
    print(f"\nneighbor-copy closure: {rep.verdict}")
    print(f"  max ratio {rep.max_ratio:.1f}, growth slope {rep.slope:+.3f}")


if __name__ == "__main__":
    main()
