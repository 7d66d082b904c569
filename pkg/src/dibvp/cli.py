"""Command line front end: scheme ingestion, checks, and reports.

Every command loads a scheme from a JSON file, runs one analysis, prints
a JSON report to stdout, and optionally writes ``report.json`` plus one
CSV sidecar per data table into ``--out``.  Exit codes: 0 all verdicts
pass (or the command is purely informational), 1 at least one verdict
fails, 2 usage or configuration error.

Reports are deterministic given the same configuration and seed: the
``meta`` block (wall clock) is the only part excluded from that
contract.  The only environment variable read is ``DIBVP_THREADS``,
which parallelizes independent experiment cells.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .core import SchemeError, load_scheme
from .resolvent import DEFAULT_RADII, KL_TOL, classify_boundary_blocks, uklc_scan
from .sbp import DecompositionError, boundary_energy_rate, energy_decomposition
from .sim import (
    accumulate_norms,
    decaying_data,
    run_ibvp,
    verify_semigroup,
    verify_strong_stability,
    verify_thm1,
)
from .symbol import (
    VON_NEUMANN_TOL,
    amplification_matrix,
    find_glancing,
    von_neumann_check,
)
from .wavepacket import (
    WavepacketError,
    glancing_trace_experiment,
    make_envelope,
    make_packet,
)

SCHEMA = "dibvp-report/1"


class ConfigError(ValueError):
    """Raised for unusable command line or configuration input."""


# ---------------------------------------------------------------------------
# serialization


def _pyify(obj):
    """Recursively convert to plain JSON-safe Python (NaN/inf become null)."""
    if isinstance(obj, dict):
        return {str(k): _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_pyify(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        val = float(obj)
        return val if np.isfinite(val) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _pyify(obj.real), "im": _pyify(obj.imag)}
    return obj


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        val = float(value)
        return repr(val) if np.isfinite(val) else ""
    return str(value)


def table(columns, rows) -> dict:
    return {"columns": list(columns), "rows": [list(r) for r in rows]}


def verdict(name: str, ok: bool, detail: str) -> dict:
    return {"name": name, "ok": bool(ok), "detail": detail}


def emit_report(report: dict, out_dir: str) -> list:
    """Write report.json and one CSV per data table; return the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    path = os.path.join(out_dir, "report.json")
    with open(path, "w") as fh:
        json.dump(_pyify(report), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    paths.append(path)
    for name, tab in report["data"].items():
        path = os.path.join(out_dir, f"{name}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(tab["columns"])
            for row in tab["rows"]:
                writer.writerow([_cell(v) for v in row])
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# argument plumbing


def _floats(text: str) -> tuple:
    try:
        vals = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dibvp", description="stability analysis for discrete IBVPs"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scheme", required=True, help="scheme JSON file")
        p.add_argument("--out", help="directory for report.json and CSVs")
        p.add_argument("--seed", type=int, default=0, help="RNG seed")
        return p

    p = command("check-cauchy", "von Neumann condition on the unit circle")
    p.add_argument("--grid-ntheta", type=int, default=512)
    p.add_argument("--tol-radius", type=float, default=VON_NEUMANN_TOL)

    p = command("check-glancing", "scan for zero-group-velocity modes")
    p.add_argument("--grid-ntheta", type=int, default=512)

    p = command("check-uklc", "determinant lower bound toward the circle")
    p.add_argument("--grid-radii", type=_floats, default=DEFAULT_RADII)
    p.add_argument("--grid-ntheta", type=int, default=64)
    p.add_argument("--tol-delta", type=float, default=KL_TOL)

    p = command("classify-blocks", "eigenvalue blocks of the transfer matrix")
    p.add_argument("--z-angle", type=float, default=0.0,
                   help="angle of the unit-circle point z")

    command("sbp-decompose", "energy identity in difference form")

    p = command("simulate", "half-line run with random decaying data")
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--p", type=int, default=3, help="trace depth")
    p.add_argument("--sites", type=int, default=64)

    p = command("verify", "empirical stability estimate across refinements")
    p.add_argument("--estimate", required=True,
                   choices=("thm1", "strong", "semigroup"))
    p.add_argument("--grid-gammas", type=_floats,
                   default=(1e-3, 1e-2, 1e-1, 1.0))
    p.add_argument("--grid-refinements", type=_floats,
                   default=(0.1, 0.05, 0.025, 0.0125))
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--p", type=int, default=3, help="trace depth")

    p = command("packet-experiment", "boundary-trace growth of a wave packet")
    p.add_argument("--xi", type=float, required=True, help="carrier frequency")
    p.add_argument("--branch", type=int, default=0)
    p.add_argument("--Ts", type=_floats, default=(2.0, 4.0, 6.0, 8.0))
    p.add_argument("--dts", type=_floats, default=(0.1, 0.05))
    p.add_argument("--delta0", type=float, default=0.5,
                   help="spectral width of the envelope")
    return parser


def _check_positive(args) -> None:
    for name in ("tol_radius", "tol_delta", "dt", "gamma", "t_end", "delta0"):
        val = getattr(args, name, None)
        if val is not None and not val > 0:
            raise ConfigError(f"--{name.replace('_', '-')} must be positive")
    for name in ("grid_radii", "grid_gammas", "grid_refinements", "Ts", "dts"):
        vals = getattr(args, name, None)
        if vals is not None and any(not v > 0 for v in vals):
            raise ConfigError(f"--{name.replace('_', '-')} must be positive")
    ntheta = getattr(args, "grid_ntheta", None)
    if ntheta is not None and ntheta < 8:
        raise ConfigError("--grid-ntheta must be at least 8")


def _threads() -> int:
    raw = os.environ.get("DIBVP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"DIBVP_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("DIBVP_THREADS must be at least 1")
    return n


# ---------------------------------------------------------------------------
# command handlers: scheme, args -> (verdicts, tables, config extras)


def _cmd_check_cauchy(scheme, args):
    rep = von_neumann_check(scheme, n_theta=args.grid_ntheta, tol=args.tol_radius)
    thetas = np.linspace(0.0, 2 * np.pi, args.grid_ntheta, endpoint=False)
    rows = []
    for th in thetas:
        radius = np.max(
            np.abs(np.linalg.eigvals(amplification_matrix(scheme, np.exp(1j * th))))
        )
        rows.append((float(th), float(radius)))
    verdicts = [
        verdict(
            "von-neumann-radius",
            rep.ok,
            f"max radius {rep.max_radius:.12f} at theta {rep.worst_theta:.6f} "
            f"(tol {rep.tol:g})",
        )
    ]
    tables = {"radius_samples": table(("theta", "spectral_radius"), rows)}
    extras = {"n_theta": rep.n_theta, "tol_radius": rep.tol}
    return verdicts, tables, extras


def _cmd_check_glancing(scheme, args):
    rep = find_glancing(scheme, n_theta=args.grid_ntheta)
    rows = [
        (pt.branch, pt.theta, pt.kappa.real, pt.kappa.imag,
         pt.zeta.real, pt.zeta.imag, pt.abs_deriv, pt.deriv_err)
        for pt in rep.points
    ]
    detail = (
        f"{len(rep.points)} glancing point(s); min |branch derivative| "
        f"{rep.min_abs_deriv:.6e}"
    )
    verdicts = [verdict("no-glancing-modes", not rep.has_glancing, detail)]
    tables = {
        "glancing_points": table(
            ("branch", "theta", "kappa_re", "kappa_im",
             "zeta_re", "zeta_im", "abs_deriv", "deriv_err"),
            rows,
        )
    }
    return verdicts, tables, {"n_theta": args.grid_ntheta}


def _cmd_check_uklc(scheme, args):
    scan = uklc_scan(
        scheme,
        radii=tuple(args.grid_radii),
        n_theta=args.grid_ntheta,
        tol_kl=args.tol_delta,
    )
    rows = [
        (float(delta), float(th), float(scan.values[i, k]))
        for i, delta in enumerate(scan.radii)
        for k, th in enumerate(scan.thetas)
    ]
    detail = (
        f"min |Delta| {scan.min_abs:.6e} at delta {scan.argmin[0]:g}, "
        f"theta {scan.argmin[1]:.6f} (tol {scan.tol:g})"
    )
    if scan.warnings:
        detail += "; " + "; ".join(scan.warnings)
    verdicts = [verdict("determinant-lower-bound", scan.plausible, detail)]
    tables = {
        "delta_samples": table(("radius", "theta", "abs_delta"), rows),
        "per_radius_min": table(
            ("radius", "min_abs_delta"),
            list(zip(scan.radii, scan.per_radius_min)),
        ),
    }
    extras = {"radii": list(scan.radii), "n_theta": args.grid_ntheta,
              "tol_delta": scan.tol}
    return verdicts, tables, extras


def _cmd_classify_blocks(scheme, args):
    cls = classify_boundary_blocks(scheme, np.exp(1j * args.z_angle))
    rows = [
        (blk.mu.real, blk.mu.imag, blk.multiplicity, blk.kind,
         blk.drift, blk.fd_mismatch)
        for blk in cls.blocks
    ]
    tables = {
        "blocks": table(
            ("mu_re", "mu_im", "multiplicity", "kind", "drift", "fd_mismatch"),
            rows,
        ),
        "counts": table(("kind", "count"), sorted(cls.counts.items())),
    }
    return [], tables, {"z_angle": args.z_angle}


def _cmd_sbp_decompose(scheme, args):
    try:
        dec = energy_decomposition(scheme)
        rate = boundary_energy_rate(scheme)
    except DecompositionError as exc:
        return [verdict("energy-decomposition", False, str(exc))], {}, {}
    coeff_rows = [
        (ell + 1, i, j, dec.A_tilde[ell][i, j])
        for ell in range(len(dec.A_tilde))
        for i in range(scheme.N)
        for j in range(scheme.N)
    ]
    quad_rows = [
        (ell + 1, i, j, dec.S[ell][i, j])
        for ell in range(len(dec.S))
        for i in range(dec.S[ell].shape[0])
        for j in range(dec.S[ell].shape[1])
    ]
    cross_rows = [
        (ell + 1, i, j, dec.S_tilde[ell][i, j])
        for ell in range(len(dec.S_tilde))
        for i in range(dec.S_tilde[ell].shape[0])
        for j in range(dec.S_tilde[ell].shape[1])
    ]
    rate_rows = [
        (i, j, rate.matrix[i, j])
        for i in range(rate.matrix.shape[0])
        for j in range(rate.matrix.shape[1])
    ]
    detail = f"boundary rate constant {rate.constant:.12e}"
    if dec.d1 is not None:
        detail += f"; d1 {dec.d1:.12e}"
    if dec.d2 is not None:
        detail += f"; d2 {dec.d2:.12e}"
    verdicts = [verdict("energy-decomposition", True, detail)]
    tables = {
        "difference_coefficients": table(("ell", "row", "col", "value"), coeff_rows),
        "quadratic_terms": table(("ell", "row", "col", "value"), quad_rows),
        "cross_terms": table(("ell", "row", "col", "value"), cross_rows),
        "boundary_rate_matrix": table(("row", "col", "value"), rate_rows),
    }
    return verdicts, tables, {}


def _cmd_simulate(scheme, args):
    if args.n_max < scheme.s:
        raise ConfigError(f"--n-max must be at least {scheme.s}")
    data = decaying_data(scheme, n_sites=args.sites, seed=args.seed)
    trace = run_ibvp(scheme, data, n_max=args.n_max, dt=args.dt)
    series = accumulate_norms(trace, gamma=args.gamma, P=args.p)
    rows = [
        (n, series.level_mass[n], series.interior_terms[n], series.trace_terms[n])
        for n in range(args.n_max + 1)
    ]
    tables = {
        "levels": table(("n", "level_mass", "interior_term", "trace_term"), rows),
        "summary": table(
            ("interior", "trace", "sup_norm", "dx"),
            [(series.interior, series.trace, series.sup_norm, series.dx)],
        ),
    }
    extras = {"n_max": args.n_max, "dt": args.dt, "gamma": args.gamma,
              "p": args.p, "sites": args.sites}
    return [], tables, extras


def _cmd_verify(scheme, args):
    refinements = tuple(args.grid_refinements)
    gammas = tuple(args.grid_gammas)
    if args.estimate == "thm1":
        rep = verify_thm1(
            scheme, gammas=gammas, refinements=refinements,
            P=args.p, t_end=args.t_end, seed=args.seed,
        )
    elif args.estimate == "strong":
        rep = verify_strong_stability(
            scheme, gammas=gammas, refinements=refinements,
            t_end=args.t_end, seed=args.seed,
        )
    else:
        rep = verify_semigroup(
            scheme, refinements=refinements, t_end=args.t_end, seed=args.seed,
        )
    verdicts = [verdict(f"{args.estimate}-estimate", rep.bounded, rep.verdict)]
    if args.estimate == "semigroup":
        tables = {
            "c2": table(("dt", "C2"), list(zip(rep.dts, rep.C2))),
            "checks": table(
                ("uklc_plausible", "consistent_with_uklc",
                 "step_violation", "chain_ok"),
                [(rep.uklc_plausible, rep.consistent_with_uklc,
                  rep.step_violation, rep.chain_ok)],
            ),
        }
    else:
        rows = [
            (float(dt), float(g), float(rep.ratios[i, k]))
            for i, dt in enumerate(rep.dts)
            for k, g in enumerate(rep.gammas)
        ]
        tables = {
            "ratios": table(("dt", "gamma", "ratio"), rows),
            "fit": table(
                ("max_ratio", "slope", "hypotheses_met"),
                [(rep.max_ratio, rep.slope, rep.hypotheses_met)],
            ),
        }
    extras = {"estimate": args.estimate, "refinements": list(refinements),
              "t_end": args.t_end}
    if args.estimate != "semigroup":
        extras["gammas"] = list(gammas)
        extras["p"] = args.p
    return verdicts, tables, extras


def _cmd_packet_experiment(scheme, args):
    try:
        envelope = make_envelope(args.delta0)
        spec = make_packet(scheme, args.xi, envelope, branch=args.branch)
    except WavepacketError as exc:
        raise ConfigError(str(exc)) from exc
    Ts = tuple(args.Ts)
    if len(Ts) < 2:
        raise ConfigError("--Ts needs at least two horizons")

    def one(dt):
        return glancing_trace_experiment(spec, T_list=Ts, dt_list=(dt,))

    n_threads = _threads()
    dts = tuple(args.dts)
    if n_threads > 1 and len(dts) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            reps = list(pool.map(one, dts))
    else:
        reps = [one(dt) for dt in dts]

    sum_rows, fit_rows, growing = [], [], []
    for dt, rep in zip(dts, reps):
        for k, T in enumerate(Ts):
            sum_rows.append(
                (float(dt), float(T), float(rep.trace_sums[0, k]),
                 float(rep.mass_ratios[0, k]))
            )
        fit_rows.append((float(dt), rep.slopes[0], rep.intercepts[0],
                         rep.r_squared[0]))
        growing.append(
            rep.r_squared[0] >= 0.9 and rep.slopes[0] >= 0.5 * rep.reference
        )
    reference = reps[0].reference
    velocity = reps[0].velocity
    detail = (
        f"reference slope {reference:.6e}; fitted slopes "
        + ", ".join(f"{r[1]:.6e}" for r in fit_rows)
        + f"; group velocity {velocity:.3e}"
    )
    verdicts = [verdict("bounded-boundary-trace", not any(growing), detail)]
    tables = {
        "trace_sums": table(("dt", "T", "trace_sum", "mass_ratio"), sum_rows),
        "fits": table(("dt", "slope", "intercept", "r_squared"), fit_rows),
    }
    extras = {"xi": args.xi, "branch": args.branch, "delta0": args.delta0,
              "Ts": list(Ts), "dts": list(dts), "reference": reference,
              "velocity": velocity}
    return verdicts, tables, extras


_HANDLERS = {
    "check-cauchy": _cmd_check_cauchy,
    "check-glancing": _cmd_check_glancing,
    "check-uklc": _cmd_check_uklc,
    "classify-blocks": _cmd_classify_blocks,
    "sbp-decompose": _cmd_sbp_decompose,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "packet-experiment": _cmd_packet_experiment,
}


# ---------------------------------------------------------------------------
# dispatch


def run_command(argv) -> int:
    """Parse argv, run one command, print the report; return the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        code = exc.code
        return int(code) if isinstance(code, int) else 2

    started = time.perf_counter()
    try:
        _check_positive(args)
        try:
            scheme = load_scheme(args.scheme)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load scheme {args.scheme!r}: {exc}") from exc
        verdicts, tables, extras = _HANDLERS[args.command](scheme, args)
    except ConfigError as exc:
        print(f"dibvp: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # parameters incompatible with the scheme (wrong stencil family,
        # horizon shorter than the number of data levels, ...)
        print(f"dibvp: {args.command}: {exc}", file=sys.stderr)
        return 2

    from dibvp import __version__

    config = {"scheme": args.scheme, "seed": args.seed}
    config.update(extras)
    report = {
        "schema": SCHEMA,
        "command": args.command,
        "config": config,
        "verdicts": verdicts,
        "data": tables,
        "version": __version__,
        "meta": {"wallclock_s": round(time.perf_counter() - started, 6)},
    }
    print(json.dumps(_pyify(report), indent=2, sort_keys=True, allow_nan=False))
    if args.out:
        emit_report(report, args.out)
    return 0 if all(v["ok"] for v in verdicts) else 1


def entry() -> None:
    sys.exit(run_command(sys.argv[1:]))
