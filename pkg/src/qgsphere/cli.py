"""Command-line interface.

Subcommands: solve, verify, rossby, lagrangian, spectrum.  Exit codes:
0 pass, 1 check/run failure, 2 usage error.  The QQG_THREADS environment
variable (0 = auto) caps the BLAS/OpenMP worker pools; it must be set
before numpy is first imported, so this module configures it at entry
before loading the compute modules.  The determinism contract (identical
config + seed -> bitwise-identical snapshots) is stated for QQG_THREADS=1.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path


def _configure_threads() -> None:
    val = os.environ.get("QQG_THREADS")
    if val is None:
        return
    try:
        n = int(val)
    except ValueError:
        print(f"error: QQG_THREADS must be an integer, got {val!r}", file=sys.stderr)
        raise SystemExit(2)
    if n < 0:
        print("error: QQG_THREADS must be >= 0", file=sys.stderr)
        raise SystemExit(2)
    if n == 0:
        return  # auto: leave pool sizes to the libraries
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgsphere",
        description="Quasigeostrophic solver on the sphere + operator verification kit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="integrate a configured run, writing snapshots + CSV")
    solve.add_argument("--config", required=True, help="path to a key = value config file")
    solve.add_argument("--output-dir", default=None, help="override the config output_dir")

    verify = sub.add_parser("verify", help="run property suites and print a residual table")
    verify.add_argument(
        "--suite",
        default="all",
        choices=["contact", "hopf", "spectral", "all"],
        help="which suite to run",
    )

    rossby = sub.add_parser("rossby", help="measure the harmonic-wave drift rate vs prediction")
    rossby.add_argument("--config", required=True)

    lag = sub.add_parser("lagrangian", help="advect particles; transport + separation checks")
    lag.add_argument("--config", required=True)
    lag.add_argument("--output-dir", default=None)

    spectrum = sub.add_parser("spectrum", help="print energy per degree from a snapshot")
    spectrum.add_argument("snapshot", help="snapshot path")
    spectrum.add_argument("--dump-grid", default=None, help="write synthesized grid values to CSV")
    spectrum.add_argument("--nlat", type=int, default=None)
    spectrum.add_argument("--nlon", type=int, default=None)
    return parser


def _cmd_solve(args) -> int:
    import numpy as np

    from .dynamics import SolverBlowupError, run
    from .io import FileSink, initial_state, load_config
    from .lagrangian import pairs_at_separations, random_ensemble

    cfg = load_config(args.config)
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    params = cfg.params()
    state = initial_state(cfg, base_dir=Path(args.config).parent)

    positions = None
    pair_index: list[tuple[int, int]] = []
    if cfg.particles > 0 or cfg.pairs > 0:
        seed = cfg.particle_seed if cfg.particle_seed is not None else cfg.seed + 1
        parts = []
        if cfg.particles > 0:
            parts.append(random_ensemble(cfg.particles, seed).positions)
        if cfg.pairs > 0:
            rho = np.logspace(-4, 0, cfg.pairs)
            pair_ens = pairs_at_separations(rho, seed + 1)
            offset = cfg.particles
            pair_index = [(i + offset, j + offset) for i, j in pair_ens.pair_index]
            parts.append(pair_ens.positions)
        positions = np.concatenate(parts, axis=0)

    sink = FileSink(cfg.output_dir, params, pair_index=pair_index)
    try:
        final, _ = run(
            state,
            params,
            sink,
            snapshot_every=cfg.snapshot_every,
            diag_every=cfg.diag_every,
            positions=positions,
        )
    except SolverBlowupError as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        sink.close()
        return 1
    sink.close()
    print(f"final time {final.time:.6g}; wrote {sink.count} snapshots to {sink.dir}")
    return 0


def _cmd_verify(args) -> int:
    from .verify import format_report, run_suites

    results = run_suites([args.suite])
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 1


def _cmd_rossby(args) -> int:
    from .dynamics import measure_angular_drift, predicted_drift_magnitude
    from .io import initial_state, load_config

    cfg = load_config(args.config)
    tokens = cfg.init.split()
    if tokens[0] != "harmonic":
        print("error: rossby needs an 'init = harmonic L M AMP' config", file=sys.stderr)
        return 2
    l, m = int(tokens[1]), int(tokens[2])
    params = cfg.params()
    state = initial_state(cfg, base_dir=Path(args.config).parent)
    predicted = predicted_drift_magnitude(l, params)
    measured = measure_angular_drift(state, params, l, abs(m))
    rel = abs(abs(measured) - predicted) / predicted if predicted > 0 else float("inf")
    print(f"predicted |c| = beta/(l(l+1)+alpha2) = {predicted:.6f}")
    print(f"measured  |c| = {abs(measured):.6f}  (signed {measured:+.6f})")
    print(f"relative error = {rel:.3e}")
    ok = rel < 0.01
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def _cmd_lagrangian(args) -> int:
    import numpy as np

    from .dynamics import run
    from .io import FileSink, initial_state, load_config
    from .lagrangian import (
        holder_bound_check,
        pairs_at_separations,
        pv_transport_residual,
        quasi_lipschitz_constant,
        random_ensemble,
        ParticleEnsemble,
    )

    cfg = load_config(args.config)
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    if cfg.particles <= 0 and cfg.pairs <= 0:
        print("error: lagrangian needs particles > 0 or pairs > 0 in the config", file=sys.stderr)
        return 2
    params = cfg.params()
    state = initial_state(cfg, base_dir=Path(args.config).parent)
    seed = cfg.particle_seed if cfg.particle_seed is not None else cfg.seed + 1

    parts = []
    pair_index: list[tuple[int, int]] = []
    if cfg.particles > 0:
        parts.append(random_ensemble(cfg.particles, seed).positions)
    if cfg.pairs > 0:
        rho = np.logspace(-4, 0, cfg.pairs)
        pair_ens = pairs_at_separations(rho, seed + 1)
        offset = cfg.particles
        pair_index = [(i + offset, j + offset) for i, j in pair_ens.pair_index]
        parts.append(pair_ens.positions)
    positions = np.concatenate(parts, axis=0)

    times: list[float] = []
    sep_rows: list[np.ndarray] = []
    kmax = [0.0]

    from .dynamics import RunSink

    class LagSink(FileSink):
        def diagnostics(self, st, pos) -> None:
            super().diagnostics(st, pos)
            times.append(st.time)
            if pair_index:
                seps = np.array(
                    [
                        np.arccos(np.clip(np.dot(pos[i], pos[j]), -1.0, 1.0))
                        for i, j in pair_index
                    ]
                )
                sep_rows.append(seps)
                probe = ParticleEnsemble(pos, pair_index, st.time)
                kmax[0] = max(kmax[0], quasi_lipschitz_constant(st.f, probe).K)

    sink = LagSink(cfg.output_dir, params, pair_index=pair_index)
    final, pos = run(
        state,
        params,
        sink,
        snapshot_every=cfg.snapshot_every,
        diag_every=cfg.diag_every,
        positions=positions,
    )
    sink.close()

    ok = True
    if cfg.particles > 0:
        res = pv_transport_residual(
            state.omega, final.omega, positions[: cfg.particles], pos[: cfg.particles]
        )
        print(f"transport residual max|omega(t,eta(x)) - omega(0,x)| = {res:.3e}")
        ok = ok and res < 1e-3
    if pair_index:
        report = holder_bound_check(np.array(times), np.array(sep_rows), kmax[0])
        print(
            f"pair-separation bound (K = {report['K']:.4f}): "
            f"worst margin {report['worst_margin']:.3f} "
            f"{'holds' if report['passed'] else 'VIOLATED'}"
        )
        ok = ok and report["passed"]
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def _cmd_spectrum(args) -> int:
    import numpy as np

    from .io import read_snapshot
    from .spharm import SphGrid, sph_index, synthesize

    state, header = read_snapshot(args.snapshot)
    from .dynamics import QGParams

    params = QGParams(alpha2=header["alpha2"], beta=header["beta"], lmax=header["lmax"])
    print(f"# snapshot time {header['time']:.6g}, lmax {header['lmax']}, "
          f"alpha2 {header['alpha2']}, beta {header['beta']}")
    print("l,energy_per_degree")
    for l in range(header["lmax"] + 1):
        e_l = sum(
            (params.alpha2 + l * (l + 1)) * state.f.coeffs[sph_index(l, m)] ** 2
            for m in range(-l, l + 1)
        )
        if l == 0:
            e_l = 0.0
        print(f"{l},{e_l:.17g}")

    if args.dump_grid is not None:
        grid = SphGrid(header["lmax"], args.nlat, args.nlon)
        vals = synthesize(state.omega, grid)
        with open(args.dump_grid, "w", encoding="utf-8") as fh:
            fh.write("lat_index,lon_index,mu,lambda,omega\n")
            for j in range(grid.nlat):
                for k in range(grid.nlon):
                    fh.write(
                        f"{j},{k},{grid.mu[j]:.17g},{grid.lon[k]:.17g},{vals[j, k]:.17g}\n"
                    )
        print(f"# wrote grid values to {args.dump_grid}")
    return 0


def main(argv: list[str] | None = None) -> int:
    _configure_threads()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "rossby":
            return _cmd_rossby(args)
        if args.command == "lagrangian":
            return _cmd_lagrangian(args)
        if args.command == "spectrum":
            return _cmd_spectrum(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # config/snapshot format errors are user errors
        from .io import ConfigError, SnapshotError

        if isinstance(exc, (ConfigError, SnapshotError)):
            print(f"error: {exc}", file=sys.stderr)
            return 2
        raise
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
