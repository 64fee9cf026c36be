"""Command-line interface.

Every subcommand prints one machine-readable JSON document to stdout, or
writes CSV when -o is given; --figure additionally renders a PNG next to
the delimited output.  Exit codes: 0 success, 1 validation or compute
error, 2 usage error.  All randomized paths take --seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import formats
from .channels import fuzz_monotonicity, MONOTONE_IDS
from .dynamics import (
    IntegrationError,
    evolve,
    nh_generator,
    theorem4a_generator,
)
from .experiments import copy_equivalence, scaling_table
from .fock import FockSpace, StateRecipe, standard_state
from .macroscopicity import (
    SearchConfig,
    m4_ordering_check,
    nf_qubits,
    nlj_closed_form,
    nlj_integral,
)
from .measures import ConvexRoofConfig, compute_measure
from .modes import AmbiguousSpectrumError, gap_set, mode_norms
from .states import ResourceLimitError, ValidationError

VERSION = "macrocoh 0.1.0"

_CLI_MEASURES = ("qfi", "variance", "skew", "il", "relent", "roof")
_MEASURE_ALIASES = {"relent": "rel_ent"}


def _jsonable(obj):
    """Recursively convert numpy containers into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _print_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(_jsonable(payload), sort_keys=True))
    sys.stdout.write("\n")


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace("i", "j"))
    except ValueError:
        raise ValidationError(f"cannot parse complex number {text!r}")


def _parse_int_list(text: str, flag: str):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValidationError(f"{flag} expects comma-separated integers, got {text!r}")


def _cmd_measure(args) -> int:
    state = formats.load_state(args.state)
    A = formats.load_observable(args.observable)
    measure_id = _MEASURE_ALIASES.get(args.which, args.which)
    roof_cfg = None
    if measure_id == "roof":
        roof_cfg = ConvexRoofConfig(n_decompositions=args.samples, seed=args.seed)
    report = compute_measure(state, A, measure_id, roof_cfg=roof_cfg)
    payload = {
        "schema": "macrocoh/measure/1",
        "measure_id": report.measure_id,
        "value": report.value,
        "diagnostics": report.diagnostics,
    }
    if args.output:
        _write_csv(
            args.output, ["measure_id", "value"], [[report.measure_id, report.value]]
        )
    _print_json(payload)
    return 0


def _cmd_modes(args) -> int:
    state = formats.load_state(args.state)
    A = formats.load_observable(args.observable)
    mat = np.diag(A) if A.ndim == 1 else A
    gaps = gap_set(mat, group_tolerance=args.gap_tol)
    deltas, norms, residual = mode_norms(state, mat, gaps)
    payload = {
        "schema": "macrocoh/modes/1",
        "modes": [
            {"delta": float(d), "trace_norm": float(n)}
            for d, n in zip(deltas, norms)
        ],
        "reconstruction_residual": residual,
    }
    if args.output:
        _write_csv(
            args.output,
            ["delta", "trace_norm"],
            [[float(d), float(n)] for d, n in zip(deltas, norms)],
        )
    _print_json(payload)
    return 0


def _cmd_nf(args) -> int:
    state = formats.load_state(args.state)
    dim = state.dim
    if args.sites is not None and 2**args.sites != dim:
        raise ValidationError(
            f"--sites {args.sites} implies dimension {2**args.sites}, "
            f"but the state has dimension {dim}"
        )
    cfg = SearchConfig(restarts=args.restarts, seed=args.seed)
    value, family = nf_qubits(state, cfg)
    payload = {
        "schema": "macrocoh/nf/1",
        "value": value,
        "optimizer": {"bloch_vectors": family.bloch_vectors},
        "diagnostics": {
            "n_sites": family.n_sites,
            "restarts": args.restarts,
            "seed": args.seed,
        },
    }
    if args.output:
        rows = [
            [value, site, *map(float, vec)]
            for site, vec in enumerate(family.bloch_vectors)
        ]
        _write_csv(args.output, ["value", "site", "bx", "by", "bz"], rows)
    _print_json(payload)
    return 0


def _cmd_nlj(args) -> int:
    state = formats.load_state(args.state)
    fock = FockSpace(1, args.fock_dim)
    if args.method == "closed":
        value = nlj_closed_form(state, fock)
        diagnostics = {"method": "closed", "fock_dim": args.fock_dim}
    else:
        value = nlj_integral(state, fock, radius=args.radius)
        diagnostics = {
            "method": "integral",
            "fock_dim": args.fock_dim,
            "radius": args.radius,
        }
    payload = {
        "schema": "macrocoh/nlj/1",
        "value": value,
        "optimizer": None,
        "diagnostics": diagnostics,
    }
    if args.output:
        _write_csv(args.output, ["method", "value"], [[args.method, value]])
    _print_json(payload)
    return 0


def _cmd_state(args) -> int:
    if args.kind == "vacuum":
        recipe = StateRecipe("number", n=0)
    elif args.kind == "number":
        recipe = StateRecipe("number", n=args.n)
    elif args.kind == "coherent":
        recipe = StateRecipe("coherent", alpha=_parse_complex(args.alpha))
    elif args.kind == "cat":
        recipe = StateRecipe("cat", alpha=_parse_complex(args.alpha))
    else:
        alpha = _parse_complex(args.alpha) if args.alpha is not None else 0.0
        recipe = StateRecipe("squeezed", xi=_parse_complex(args.xi), alpha=alpha)
    fock = FockSpace(1, args.fock_dim)
    psi = standard_state(recipe, fock)
    payload = formats.matrix_to_json(psi)
    if args.output:
        formats.dump_matrix(args.output, psi)
    _print_json(payload)
    return 0


def _cmd_evolve(args) -> int:
    state = formats.load_state(args.state)
    fock = FockSpace(1, state.dim)
    if args.model == "t4a":
        L = theorem4a_generator(fock)
    else:
        if args.cx is None or args.cp is None:
            raise ValidationError("--model nh requires --cx and --cp")
        L = nh_generator(args.cx, args.cp, fock)
    trajectory = evolve(state, L, args.t, args.steps)
    rows = [
        [time, purity, nlj_closed_form(dm, fock, check_health=False)]
        for time, dm, purity in trajectory
    ]
    payload = {
        "schema": "macrocoh/evolve/1",
        "model": args.model,
        "trajectory": [
            {"time": t, "purity": p, "nlj": s} for t, p, s in rows
        ],
    }
    if args.output:
        _write_csv(args.output, ["time", "purity", "nlj"], rows)
    if args.figure:
        from . import figures

        times, purities, sizes = zip(*rows)
        figures.render_evolution(times, purities, sizes, args.figure)
    _print_json(payload)
    return 0


def _cmd_fuzz(args) -> int:
    ids = tuple(tok for tok in args.measure.split(",") if tok)
    summary = fuzz_monotonicity(
        ids, dim=args.dim, n_channels=args.channels, seed=args.seed, slack=args.slack
    )
    summary["schema"] = "macrocoh/fuzz-monotone/1"
    if args.output:
        rows = [
            [m, summary["measures"][m]["worst_m2a"], summary["measures"][m]["worst_m2b"]]
            for m in sorted(summary["measures"])
        ]
        _write_csv(args.output, ["measure", "worst_m2a", "worst_m2b"], rows)
    if args.figure:
        from . import figures

        figures.render_fuzz(summary, args.figure)
    _print_json(summary)
    return 0 if summary["passed"] else 1


def _cmd_scaling(args) -> int:
    n_list = _parse_int_list(args.N, "--N")
    rows = scaling_table(n_list)
    payload = {
        "schema": "macrocoh/scaling/1",
        "rows": [
            {
                "N": row.N,
                "qfi": row.qfi_value,
                "il": row.il_value,
                "qfi_formula": row.qfi_formula,
                "il_formula": row.il_formula,
                "ratio": row.ratio,
            }
            for row in rows
        ],
    }
    if args.output:
        _write_csv(
            args.output,
            ["N", "qfi", "il", "qfi_formula", "il_formula", "ratio"],
            [
                [row.N, row.qfi_value, row.il_value, row.qfi_formula,
                 row.il_formula, row.ratio]
                for row in rows
            ],
        )
    if args.figure:
        from . import figures

        figures.render_scaling(rows, args.figure)
    _print_json(payload)
    return 0


def _cmd_copies(args) -> int:
    psi = formats.load_state(args.psi)
    phi = formats.load_state(args.phi)
    for label, state in (("psi", psi), ("phi", phi)):
        if not hasattr(state, "amplitudes"):
            raise ValidationError(f"--{label} must be a pure state (column vector)")
    A = formats.load_observable(args.observable)
    profile = copy_equivalence(psi, A, phi, args.n)
    payload = {
        "schema": "macrocoh/copies/1",
        "n": profile.n,
        "m": profile.m,
        "x0": profile.x0,
        "profile_distance": profile.profile_distance,
        "delta_grid": profile.delta_grid,
        "psi_norms": profile.psi_norms,
        "phi_norms": profile.phi_norms,
        "diagnostics": profile.diagnostics,
    }
    if args.output:
        _write_csv(
            args.output,
            ["delta", "psi_norm", "phi_norm"],
            list(zip(profile.delta_grid, profile.psi_norms, profile.phi_norms)),
        )
    if args.figure:
        from . import figures

        figures.render_copies(profile, args.figure)
    _print_json(payload)
    return 0


def _cmd_m4check(args) -> int:
    A = formats.load_observable(args.observable)
    mat = np.diag(A) if A.ndim == 1 else A
    pair1 = _parse_int_list(args.pair1, "--pair1")
    pair2 = _parse_int_list(args.pair2, "--pair2")
    for flag, pair in (("--pair1", pair1), ("--pair2", pair2)):
        if len(pair) != 2:
            raise ValidationError(f"{flag} expects exactly two indices")
    measure_id = _MEASURE_ALIASES.get(args.measure, args.measure)
    result = m4_ordering_check(measure_id, mat, tuple(pair1), tuple(pair2),
                               atol=args.atol)
    result["schema"] = "macrocoh/m4check/1"
    if args.output:
        _write_csv(
            args.output,
            ["measure_id", "gap_1", "gap_2", "value_1", "value_2", "verdict"],
            [[result["measure_id"], result["gap_1"], result["gap_2"],
              result["value_1"], result["value_2"], result["verdict"]]],
        )
    _print_json(result)
    return 0


def _add_io_flags(p, figure: bool = False):
    p.add_argument("-o", "--output", help="write CSV to this path")
    if figure:
        p.add_argument("--figure", help="render a PNG figure to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macrocoh",
        description="Coherence-mode and macroscopicity toolkit",
    )
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="evaluate one coherence measure")
    p.add_argument("--state", required=True)
    p.add_argument("--observable", required=True)
    p.add_argument("--which", required=True, choices=_CLI_MEASURES)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("modes", help="gap-resolved coherence mode norms")
    p.add_argument("--state", required=True)
    p.add_argument("--observable", required=True)
    p.add_argument("--gap-tol", type=float, default=None)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_modes)

    p = sub.add_parser("nf", help="effective size over local spin sums")
    p.add_argument("--state", required=True)
    p.add_argument("--sites", type=int, default=None)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_nf)

    p = sub.add_parser("nlj", help="phase-space size of a bosonic state")
    p.add_argument("--state", required=True)
    p.add_argument("--fock-dim", type=int, required=True)
    p.add_argument("--method", choices=("closed", "integral"), default="closed")
    p.add_argument("--radius", type=float, default=6.0)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_nlj)

    p = sub.add_parser("state", help="emit a standard bosonic state file")
    p.add_argument(
        "--kind",
        required=True,
        choices=("vacuum", "number", "coherent", "cat", "squeezed"),
    )
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--alpha", default=None)
    p.add_argument("--xi", default=None)
    p.add_argument("--fock-dim", type=int, default=40)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_state)

    p = sub.add_parser("evolve", help="double-commutator decoherence trajectory")
    p.add_argument("--state", required=True)
    p.add_argument("--model", required=True, choices=("t4a", "nh"))
    p.add_argument("--cx", type=float, default=None)
    p.add_argument("--cp", type=float, default=None)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    _add_io_flags(p, figure=True)
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("fuzz-monotone", help="fuzz measure monotonicity")
    p.add_argument("--measure", default=",".join(MONOTONE_IDS))
    p.add_argument("--dim", type=int, default=6)
    p.add_argument("--channels", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--slack", type=float, default=1e-8)
    _add_io_flags(p, figure=True)
    p.set_defaults(func=_cmd_fuzz)

    p = sub.add_parser("scaling", help="Fisher vs commutator scaling table")
    p.add_argument("--N", required=True, help="comma-separated even sizes")
    _add_io_flags(p, figure=True)
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("copies", help="copy-count equivalence profiles")
    p.add_argument("--psi", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--observable", required=True)
    p.add_argument("--n", type=int, required=True)
    _add_io_flags(p, figure=True)
    p.set_defaults(func=_cmd_copies)

    p = sub.add_parser("m4check", help="gap-ordering check for one measure")
    p.add_argument("--observable", required=True)
    p.add_argument("--measure", required=True, choices=_CLI_MEASURES)
    p.add_argument("--pair1", required=True)
    p.add_argument("--pair2", required=True)
    p.add_argument("--atol", type=float, default=1e-9)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_m4check)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValidationError, AmbiguousSpectrumError, ResourceLimitError,
            IntegrationError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
