"""Command-line front end.

Subcommands: ingest, qsve, solve, sweep, verify. Exit codes: 0 success,
2 validation error, 3 degenerate input, 4 resource-guard refusal.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import (
    DegenerateInputError,
    ResourceLimitError,
    SimulatorError,
    ValidationError,
)
from .generate import FAMILIES, generate_matrix, top_eigenvector_b, uniform_b
from .matrix_store import MatrixStore, load_matrix_file
from .phase_estimation import ancilla_bits_for
from .qsve import qsve_error_audit, qsve_run
from .solver import FILTERS, MODES, SolverConfig, solve, spectrum_normalize
from .sweep import ExperimentSpec, run_sweep
from .verify import run_verification

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DEGENERATE = 3
EXIT_RESOURCE = 4


def _load_store(args) -> MatrixStore:
    if getattr(args, "matrix", None):
        return load_matrix_file(args.matrix, fmt=getattr(args, "format", None))
    if getattr(args, "family", None):
        a = generate_matrix(args.family, args.n, args.kappa or 1.0, seed=args.seed)
        return MatrixStore.from_dense(a)
    raise ValidationError("provide --matrix FILE or --family with --n")


def _load_b(spec: str | None, store: MatrixStore) -> np.ndarray:
    n = store.n
    if spec is None or spec == "uniform":
        return uniform_b(n)
    if spec == "top":
        return top_eigenvector_b(store.to_dense())
    if spec.startswith("e") and spec[1:].isdigit():
        k = int(spec[1:])
        if not 0 <= k < n:
            raise ValidationError(f"basis vector {spec} out of range for n={n}")
        vec = np.zeros(n)
        vec[k] = 1.0
        return vec
    vals = []
    with open(spec, "r", encoding="utf-8") as fh:
        for line in fh:
            vals.extend(float(tok) for tok in line.replace(",", " ").split())
    if len(vals) != n:
        raise ValidationError(f"b file holds {len(vals)} values, expected {n}")
    return np.array(vals)


def _write_or_print(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _cmd_ingest(args) -> int:
    store = load_matrix_file(args.matrix, fmt=args.format)
    worst = store.check_consistency()
    info = {
        "m": store.m,
        "n": store.n,
        "frobenius_norm_sq": store.frob_sq,
        "updates": store.update_count,
        "touched_nodes": store.touched_nodes,
        "touched_bound_per_update": store.path_bound,
        "zero_rows": store.zero_rows(),
        "worst_tree_relative_error": worst,
    }
    _write_or_print(json.dumps(info, indent=2, sort_keys=True), args.out)
    return EXIT_OK


def _cmd_qsve(args) -> int:
    store = _load_store(args)
    b = _load_b(args.b, store)
    if args.t_bits is None and args.delta is None:
        raise ValidationError("provide --t-bits or --delta")
    t = args.t_bits if args.t_bits else ancilla_bits_for(args.delta)
    mode = "sampled" if args.shots else "coherent"
    out = qsve_run(store, b, t, mode=mode, path=args.path, shots=args.shots,
                   median_repetitions=args.median, seed=args.seed)
    sig = out.sigma_values()
    payload = {
        "t": out.t,
        "frobenius_norm": out.frobenius_norm,
        "walk_applications": out.walk_applications,
        "mode": out.mode,
        "path": out.path,
        "components": [
            {
                "index": c.index,
                "singular_value": c.singular_value,
                "eigenvalue": c.eigenvalue,
                "weight": c.weight,
                "expected_estimate": float(c.outcome_probs @ sig),
                "expected_abs_error": c.expected_abs_error(sig),
            }
            for c in out.components
        ],
    }
    if args.delta:
        audit = qsve_error_audit(out, args.delta)
        payload["audit"] = {
            "delta": audit.delta,
            "min_mass_within": audit.min_mass,
            "weighted_mass_within": audit.weighted_mass,
        }
    if out.sample_sigmas is not None:
        payload["samples"] = {
            "shots": len(out.sample_sigmas),
            "mean_estimate": float(np.mean(out.sample_sigmas)),
            "component_counts": np.bincount(out.sample_components,
                                            minlength=len(out.components)).tolist(),
        }
    _write_or_print(json.dumps(payload, indent=2, sort_keys=True), args.out)
    return EXIT_OK


def _cmd_solve(args) -> int:
    store = _load_store(args)
    a = store.to_dense()
    scaled, factor = spectrum_normalize(a)
    if abs(factor - 1.0) > 1e-9:
        store = MatrixStore.from_dense(scaled)
        sys.stderr.write(f"note: spectrum normalized by factor {factor:.12g}\n")
    b = _load_b(args.b, store)
    config = SolverConfig(
        epsilon=args.epsilon, kappa=args.kappa, mode=args.mode, filter=args.filter,
        t=args.t_bits, seed=args.seed, median_repetitions=args.median,
    )
    report = solve(store, b, config)
    _write_or_print(report.to_json(), args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = ExperimentSpec.from_json(fh.read())
    else:
        spec = ExperimentSpec(
            family=args.family or "random-symmetric",
            dimensions=[int(x) for x in args.dims.split(",")],
            kappas=[float(x) for x in args.kappas.split(",")],
            epsilons=[float(x) for x in args.epsilons.split(",")],
            t_bits=[int(x) for x in args.t_grid.split(",")] if args.t_grid else None,
            mode=args.mode,
            filter=args.filter,
            b_spec=args.b or "uniform",
            seed=args.seed,
            shots=args.shots,
        )
    csv_text, summary = run_sweep(spec)
    _write_or_print(csv_text, args.out_csv)
    _write_or_print(json.dumps(summary, indent=2, sort_keys=True), args.out_json)
    return EXIT_OK


def _cmd_verify(args) -> int:
    ok = run_verification(seed=args.seed)
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsvesim",
        description="Simulator and verification harness for a singular-value-estimation "
                    "based linear system solver.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_matrix_args(p, require_file=False):
        p.add_argument("--matrix", help="matrix file (coordinate triples or dense CSV)")
        p.add_argument("--format", choices=["coo", "csv"], default=None,
                       help="matrix file format (default: by extension)")
        if not require_file:
            p.add_argument("--family", choices=list(FAMILIES), help="generator family")
            p.add_argument("--n", type=int, default=4, help="generated dimension")
            p.add_argument("--kappa", type=float, default=None, help="condition number target")
        p.add_argument("--seed", type=int, default=0, help="master seed")

    p_ingest = sub.add_parser("ingest", help="load a matrix file and report store statistics")
    p_ingest.add_argument("--matrix", required=True)
    p_ingest.add_argument("--format", choices=["coo", "csv"], default=None)
    p_ingest.add_argument("--out", default=None)
    p_ingest.set_defaults(func=_cmd_ingest)

    p_qsve = sub.add_parser("qsve", help="run singular value estimation")
    add_matrix_args(p_qsve)
    p_qsve.add_argument("--b", default="uniform", help="input vector: uniform|top|eK|file")
    p_qsve.add_argument("--t-bits", type=int, default=None, dest="t_bits")
    p_qsve.add_argument("--delta", type=float, default=None, help="target precision")
    p_qsve.add_argument("--path", choices=["spectral", "statevector"], default="spectral")
    p_qsve.add_argument("--shots", type=int, default=0)
    p_qsve.add_argument("--median", type=int, default=1, help="median repetitions per shot")
    p_qsve.add_argument("--out", default=None)
    p_qsve.set_defaults(func=_cmd_qsve)

    p_solve = sub.add_parser("solve", help="solve a linear system end to end")
    add_matrix_args(p_solve)
    p_solve.add_argument("--b", default="uniform")
    p_solve.add_argument("--epsilon", type=float, default=0.05)
    p_solve.add_argument("--t-bits", type=int, default=None, dest="t_bits")
    p_solve.add_argument("--mode", choices=list(MODES) + ["paper"], default="corrected")
    p_solve.add_argument("--filter", choices=list(FILTERS), default="invert-only")
    p_solve.add_argument("--median", type=int, default=15)
    p_solve.add_argument("--out", default=None)
    p_solve.set_defaults(func=_cmd_solve)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep, emit CSV + summary JSON")
    p_sweep.add_argument("--spec", help="ExperimentSpec JSON file")
    p_sweep.add_argument("--family", choices=list(FAMILIES), default=None)
    p_sweep.add_argument("--dims", default="2,4")
    p_sweep.add_argument("--kappas", default="2")
    p_sweep.add_argument("--epsilons", default="0.05")
    p_sweep.add_argument("--t-grid", default=None, dest="t_grid")
    p_sweep.add_argument("--mode", choices=list(MODES) + ["paper"], default="corrected")
    p_sweep.add_argument("--filter", choices=list(FILTERS), default="invert-only")
    p_sweep.add_argument("--b", default="uniform")
    p_sweep.add_argument("--shots", type=int, default=0)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--out-csv", default=None, dest="out_csv")
    p_sweep.add_argument("--out-json", default=None, dest="out_json")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the invariant suite")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        sys.stderr.write(f"resource guard: {exc}\n")
        return EXIT_RESOURCE
    except DegenerateInputError as exc:
        sys.stderr.write(f"degenerate input: {exc}\n")
        return EXIT_DEGENERATE
    except (ValidationError, SimulatorError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
