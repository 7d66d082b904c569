"""Watch a zero-velocity wave packet pile up at the boundary.

A band-limited packet rides one eigenvalue branch of the scheme.  When
the branch has zero group velocity the packet stands still, so the
accumulated boundary trace grows linearly in the horizon with slope
|amplitude * a(0)|^2; a transported packet crosses the boundary once and
its trace sum saturates at a fixed fraction of the initial mass.
"""

import numpy as np

from dibvp.core import leap_frog, upwind
from dibvp.wavepacket import glancing_trace_experiment, make_envelope, make_packet


def main():
    envelope = make_envelope(0.5)
    stationary = make_packet(leap_frog(0.5, 1.0), np.pi / 2, envelope, branch=1)
    print(f"stationary packet: carrier z = {stationary.z_bar:+.4f}, "
          f"group velocity = {stationary.velocity:+.2e}")

    grow = glancing_trace_experiment(
        stationary, T_list=(2.0, 4.0, 6.0, 8.0), dt_list=(0.1, 0.05)
    )
    print(f"reference slope |amplitude * a(0)|^2 = {grow.reference:.6e}")
    for i, dt in enumerate(grow.dts):
        sums = ", ".join(f"{s:.5e}" for s in grow.trace_sums[i])
        print(f"  dt = {dt:5.2f}  trace sums: {sums}")
        print(f"           fit slope = {grow.slopes[i]:.6e}  "
              f"R^2 = {grow.r_squared[i]:.6f}")

    moving = make_packet(upwind(0.5, 1.0), 0.0, envelope)
    print(f"\ntransported packet: group velocity = {moving.velocity:+.3f}")
    sat = glancing_trace_experiment(moving, T_list=(50.0, 100.0, 200.0),
                                    dt_list=(0.1,))
    ratios = ", ".join(f"{r:.4f}" for r in sat.mass_ratios[0])
    print(f"  trace sum / initial mass at T = 50, 100, 200: {ratios} "
          f"(saturated, no growth)")


if __name__ == "__main__":
    main()
