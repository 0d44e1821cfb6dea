"""Command-line driver: point, sweep, scaling, benchmark, oracle.

Exit codes: 0 success, 1 benchmark failure, 2 configuration error,
3 convergence failure (outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import load_config, merge_options
from .errors import ConfigError, ConvergenceError
from .models import ModelPreset, PRESET_KINDS
from .oracle import FockTruncation, dump_vector, full_ground_state, full_observables
from .scf import ScfConfig
from .spins import SolverConfig
from .sweep import Axis, SweepPlan, default_backend, run_point, run_scaling, run_sweep

EXIT_OK = 0
EXIT_BENCHMARK = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file (flags override it)")
    p.add_argument("--preset", choices=PRESET_KINDS)
    p.add_argument("--N", type=int)
    p.add_argument("--g", type=float)
    p.add_argument("--J", type=float, help="scalar exchange (dicke-ising)")
    p.add_argument("--Jz", type=float, help="anisotropy (dicke-xxz)")
    p.add_argument("--omega", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--backend", choices=("auto", "dense", "collective", "mps"))
    p.add_argument("--branch", choices=("both", "normal", "superradiant"))
    p.add_argument("--chi", type=int, help="DMRG bond dimension")
    p.add_argument("--seed", type=int, help="solver start-vector seed")
    p.add_argument("--out")


def _gather(args, defaults: dict) -> dict:
    cfg = load_config(args.config) if args.config else {}
    flags = {k: getattr(args, k, None) for k in defaults}
    return merge_options(defaults, cfg, flags)


_POINT_DEFAULTS = {
    "preset": "dicke", "N": 8, "g": 0.0, "J": 0.0, "Jz": 0.0,
    "omega": 1.0, "epsilon": 1.0, "backend": "auto", "branch": "both",
    "chi": 64, "seed": 7, "out": "point-out", "n_max": 40,
}


def _build_spec(opts: dict):
    preset = ModelPreset(kind=opts["preset"], N=opts["N"], g=opts["g"],
                         omega=opts["omega"], epsilon=opts["epsilon"],
                         J=opts["J"], Jz=opts["Jz"])
    return preset.build()


def _solver_config(opts: dict, spec) -> SolverConfig:
    backend = opts["backend"]
    if backend == "auto":
        backend = default_backend(spec)
    return SolverConfig(backend=backend, chi=opts["chi"], seed=opts["seed"])


def cmd_point(args) -> int:
    opts = _gather(args, _POINT_DEFAULTS)
    spec = _build_spec(opts)
    solver = _solver_config(opts, spec)
    try:
        rep, obs = run_point(spec, opts["out"], ScfConfig(), solver, opts["branch"])
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    print(f"E0 = {rep.energy_per_particle:.10f}  n/N = {obs.n_mean:.6g}  "
          f"Mz = {obs.M_z:.6g}  phase = {obs.phase}  branch = {rep.branch}")
    print(f"outputs in {opts['out']}/")
    return EXIT_OK


_SWEEP_DEFAULTS = dict(_POINT_DEFAULTS, axis1="J=0:0:1", axis2="g=0:1:0.02",
                       out="sweep-out", workers=0)


def cmd_sweep(args) -> int:
    opts = _gather(args, _SWEEP_DEFAULTS)
    workers = opts["workers"] or int(os.environ.get("CAVITYCHAIN_WORKERS", "1"))
    spec_probe = _build_spec(opts)
    plan = SweepPlan(preset=opts["preset"], N=opts["N"],
                     axis1=Axis.parse(opts["axis1"]), axis2=Axis.parse(opts["axis2"]),
                     solver=_solver_config(opts, spec_probe),
                     branch=opts["branch"], omega=opts["omega"],
                     epsilon=opts["epsilon"], out_dir=opts["out"], workers=workers)
    rows, boundary = run_sweep(plan)
    bad = [r for r in rows if r.get("status") not in ("ok",)]
    print(f"{len(rows)} points solved ({len(bad)} flagged); "
          f"{len(boundary)} boundary segments -> {opts['out']}/")
    return EXIT_OK if not bad else EXIT_CONVERGENCE


_SCALING_DEFAULTS = dict(_POINT_DEFAULTS, preset="dicke-xxz", N_list="8,12,16,20",
                         cells="0.01:-10;0.01:10;0.4:-1.6;0.01:-1.6",
                         out="scaling-out")


def cmd_scaling(args) -> int:
    opts = _gather(args, _SCALING_DEFAULTS)
    try:
        N_list = [int(v) for v in str(opts["N_list"]).split(",") if v]
        cells = []
        for chunk in str(opts["cells"]).split(";"):
            if not chunk:
                continue
            g_txt, jz_txt = chunk.split(":")
            cells.append((float(g_txt), float(jz_txt)))
    except ValueError as exc:
        raise ConfigError(f"bad N_list/cells: {exc}") from exc
    table = run_scaling(opts["preset"], cells, N_list, opts["out"])
    for row in table:
        print(f"g={row['g']} Jz={row['Jz']}: alpha = {row['alpha']:.4f}")
    print(f"outputs in {opts['out']}/")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    from .benchmark import run_benchmark

    results = run_benchmark()
    return EXIT_OK if all(r.passed for r in results) else EXIT_BENCHMARK


def cmd_oracle(args) -> int:
    opts = _gather(args, _POINT_DEFAULTS)
    spec = _build_spec(opts)
    result = full_ground_state(spec, FockTruncation(n_max=opts["n_max"]))
    obs = full_observables(result)
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "energy": result.energy,
        "energy_per_particle": (result.energy - 0.5 * spec.omega) / spec.N,
        "margin": result.margin,
        "n_max": result.n_max,
        "n_mean_pp": obs["n_mean_pp"],
        "M_z": obs["M_z"],
    }
    (out / "oracle.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    if args.dump_vector:
        dump_vector(result, str(out / "eigenvector.npz"))
    print(f"E = {result.energy:.12f} (margin {result.margin:.2e})  "
          f"n/N = {obs['n_mean_pp']:.6g}  Mz = {obs['M_z']:.6g}")
    print(f"outputs in {out}/")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cavitychain",
        description="Ground states of cavity-coupled spin chains: variational "
                    "photon frames with exact, collective and DMRG spin backends.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="solve one parameter point")
    _add_model_flags(p)
    p.set_defaults(fn=cmd_point)

    p = sub.add_parser("sweep", help="solve a parameter grid and extract the boundary")
    _add_model_flags(p)
    p.add_argument("--axis1", help="outer axis, e.g. J=-0.6:0.3:0.05")
    p.add_argument("--axis2", help="scan axis, e.g. g=0:1:0.02")
    p.add_argument("--workers", type=int, help="worker pool width "
                   "(default $CAVITYCHAIN_WORKERS or 1)")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("scaling", help="photon-number scaling study over N")
    _add_model_flags(p)
    p.add_argument("--N-list", dest="N_list", help="comma list, e.g. 8,12,16,20")
    p.add_argument("--cells", help="semicolon list of g:Jz cells")
    p.set_defaults(fn=cmd_scaling)

    p = sub.add_parser("benchmark", help="run the acceptance suite")
    p.set_defaults(fn=cmd_benchmark)

    p = sub.add_parser("oracle", help="small-size exact diagonalization")
    _add_model_flags(p)
    p.add_argument("--n-max", dest="n_max", type=int, help="Fock cutoff")
    p.add_argument("--dump-vector", action="store_true")
    p.set_defaults(fn=cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
