"""Scan dispersion branches for zero group velocity.

A glancing mode is a unit-modulus eigenvalue branch of the amplification
matrix whose derivative vanishes: the associated wave packet does not
move.  The two-level leap-frog scheme has such modes at kappa = +/-i;
the dissipative one-step schemes stay clear by a wide margin.
"""

import numpy as np

from dibvp.core import lax_friedrichs, lax_wendroff, leap_frog, upwind
from dibvp.symbol import find_glancing, group_velocity


def main():
    rep = find_glancing(leap_frog(0.5, 1.0))
    print(f"leap-frog: {len(rep.points)} glancing point(s)")
    for pt in rep.points:
        print(f"  branch {pt.branch}  theta = {pt.theta:+.6f}  "
              f"kappa = {pt.kappa:+.3f}  |branch derivative| = {pt.abs_deriv:.1e}")

    for factory in (upwind, lax_friedrichs, lax_wendroff):
        r = find_glancing(factory(0.5, 1.0))
        name = factory.__name__.replace("_", "-")
        print(f"{name:15s} glancing: {r.has_glancing}  "
              f"min |branch derivative| = {r.min_abs_deriv:.3f}")

    # the packet speed behind the flat branch
    scheme = leap_frog(0.5, 1.0)
    zeta = np.exp(-1j * np.pi / 6)  # unimodular branch value at theta = pi/2
    v = group_velocity(scheme, np.pi / 2, zeta)
    print(f"\nleap-frog group velocity at theta = pi/2: {v:+.2e}")


if __name__ == "__main__":
    main()
