"""
Command-line front end for anisowave.

Each subcommand prints a JSON document on stdout. Exit codes: 0 when every
check passes, 1 when a check fails or a computation leaves its domain (for
example a singular matrix), 2 for configuration or input errors.

    $ anisowave matrix check --matrix "2,0;0,4"
    $ anisowave norm tl --matrix "2" --signal gaussian --params "p=2,q=2"
    $ anisowave transform --matrix "2" --signal spec.json --window wnd.json --scales=-4:2:25 --out field.gaf
    $ anisowave maximal peetre --in field.gaf --beta 1.5 --out peetre.gaf
    $ anisowave campaign run --config configs/dyadic-2d.json --only norm-equiv
"""

import argparse
import json
import logging
import math
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from ..anisotropy import build_ellipsoid, check_expansive, make_expansive, quasi_norm_table
from ..coorbit import envelope_integrability, molecule_param_check, weight_check, weight_v
from ..errors import AnisowaveError, ConfigError
from ..group import export_slice_csv, load_field, save_field
from ..maximal import MAXIMAL_KINDS, default_ball_range, maximal_field
from ..models import Envelope, ExperimentConfig, GridSpec, GroupElement, MaximalConfig, QBox, ScaleProfile
from ..norms import (
    coorbit_norm,
    norm_equivalence,
    random_sparse_sequence,
    seq_norm,
    sequence_equivalence,
    shell_range,
    tl_norm_lp,
    tl_norm_peetre_cont,
    tl_norm_peetre_disc,
    uncovered_fraction,
)
from ..spectra import (
    PROFILE_KINDS,
    admissibility_defect,
    build_admissible,
    build_calderon_pair,
    calderon_defect,
    random_frequencies,
    tight_profile,
)
from ..transform import SIGNAL_KINDS, covering_scales, isometry_ratio, make_battery, make_signal, wavelet_transform
from ..utils import parse_matrix, parse_params, parse_scales
from .campaign import SUITES, run_campaign, select_suites, to_plain
from .plotdata import emit_plot_data

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

DEFECT_TOL = 1e-6

__all__ = [
    # Entry point
    "main",
    "build_parser",
    # Campaigns
    "run_campaign",
    "select_suites",
    "SUITES",
    # Plot data
    "emit_plot_data",
]


def _emit(document: Dict[str, Any]) -> None:
    print(json.dumps(to_plain(document), indent=2, sort_keys=True))


def _points(text: str, d: int) -> np.ndarray:
    """Parse "1,0;0,1" into an (N, d) array."""
    try:
        X = np.array([[float(v) for v in row.split(",")] for row in text.replace(" ", "").split(";") if row])
    except ValueError:
        raise ValueError(f"Invalid point list: {text!r}")
    if X.ndim != 2 or X.shape[1] != d:
        raise ValueError(f"Points must have {d} coordinates, got {text!r}")
    return X


def _grid(args: argparse.Namespace, d: int) -> GridSpec:
    return GridSpec(d=d, n=args.n, X=args.X, m=1, s_min=0.0, s_max=0.0)


def _read_json(path: str, what: str) -> Dict[str, Any]:
    """Load a JSON object from a --signal or --window file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid {what} JSON in {path}: {e.msg}", field=what, line=e.lineno)
    if not isinstance(document, dict):
        raise ConfigError(f"The {what} file {path} must hold a JSON object", field=what)
    return document


def _profile(args: argparse.Namespace) -> ScaleProfile:
    """Window profile from the --window file, overridden by explicit flags."""
    spec = _read_json(args.window, "window") if args.window else {}
    flags = {
        "kind": args.profile,
        "center": args.center,
        "halfwidth": args.halfwidth,
        "plateauHalfwidth": args.plateau_halfwidth,
    }
    spec.update({key: value for key, value in flags.items() if value is not None})
    kind = spec.get("kind", "tight")
    if kind == "tight":
        return tight_profile(center=float(spec.get("center", 0.0)))
    if kind not in PROFILE_KINDS:
        raise ConfigError(f"Unknown profile kind {kind!r}", field="window.kind")
    spec.setdefault("center", 0.0)
    spec.setdefault("halfwidth", 1.0 if kind == "cosine" else 1.5)
    if "plateauHalfwidth" not in spec and "plateau_halfwidth" not in spec:
        halfwidth = float(spec["halfwidth"])
        spec["plateauHalfwidth"] = 1.0 if halfwidth > 1.0 else 0.5 * halfwidth
    return ScaleProfile.from_dict(spec)


def _signal(args: argparse.Namespace, M, grid: GridSpec):
    """Test signal from a kind name or a JSON spec file, overridden by explicit flags."""
    source = args.signal or "gaussian"
    if source.endswith(".json"):
        params = _read_json(source, "signal")
        kind = params.pop("kind", "gaussian")
    else:
        params, kind = {}, source
    if kind not in SIGNAL_KINDS:
        raise ConfigError(f"Unknown signal kind {kind!r}; expected one of {', '.join(SIGNAL_KINDS)}",
                          field="signal.kind")
    if args.width is not None:
        params["width"] = args.width
    if args.frequency is not None:
        params["frequency"] = [float(v) for v in args.frequency.split(",")]
    if args.seed is not None:
        params["seed"] = args.seed
    return make_signal(kind, grid, M, **params)


# --- subcommands -------------------------------------------------------------


def cmd_matrix_check(args: argparse.Namespace) -> int:
    A = parse_matrix(args.matrix)
    info = check_expansive(A)
    document: Dict[str, Any] = {"matrix": A, **info}
    if info["expansive"]:
        M = make_expansive(A, integer_only=args.integer_only)
        E = build_ellipsoid(M)
        document["ellipsoid"] = {"P": E.P, "c": E.c, "r": E.r, "volume": E.volume,
                                 "terms": E.terms, "monotone": E.monotone}
        document["integerOnly"] = M.integer_only
    _emit(document)
    return EXIT_PASS if info["expansive"] else EXIT_FAIL


def cmd_quasinorm(args: argparse.Namespace) -> int:
    M = make_expansive(parse_matrix(args.matrix), integer_only=args.integer_only)
    E = build_ellipsoid(M)
    rows = quasi_norm_table(E, M, _points(args.points, M.dim))
    _emit(rows[0] if args.action == "eval" else {"rows": rows})
    return EXIT_PASS


def cmd_wavelet(args: argparse.Namespace) -> int:
    M = make_expansive(parse_matrix(args.matrix))
    profile = _profile(args)
    if args.action == "build":
        window = build_admissible(M, profile)
        _emit({"profile": profile.to_dict(), "profileNorm": window.profile_norm,
               "minCoverage": window.min_coverage, "role": window.role})
        return EXIT_PASS
    xi = random_frequencies(M, args.count, seed=args.seed)
    admissible = admissibility_defect(build_admissible(M, profile), xi)["defect"]
    calderon = calderon_defect(build_calderon_pair(M, profile), xi)["defect"]
    passed = admissible < DEFECT_TOL and calderon < DEFECT_TOL
    _emit({"profile": profile.to_dict(), "admissibilityDefect": admissible,
           "calderonDefect": calderon, "frequencies": args.count, "passed": passed})
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_transform(args: argparse.Namespace) -> int:
    M = make_expansive(parse_matrix(args.matrix))
    window = build_admissible(M, _profile(args))
    signal = _signal(args, M, _grid(args, M.dim))
    if args.scales:
        scales = parse_scales(args.scales)
    else:
        box = covering_scales(signal, window)
        scales = (box["s_min"], box["s_max"], box["m"])
    W = wavelet_transform(signal, window, scales)
    if args.out:
        save_field(W, args.out)
    if args.slice_csv:
        export_slice_csv(W, int(np.argmin(np.abs(W.scales))), args.slice_csv)
    _emit({"isometryRatio": isometry_ratio(W, signal, M), "gridMeta": W.grid.to_dict(), "output": args.out})
    return EXIT_PASS


def cmd_maximal(args: argparse.Namespace) -> int:
    F = load_field(args.input)
    d = F.grid.d
    A = parse_matrix(args.matrix) if args.matrix else 2.0 * np.eye(d)
    M = make_expansive(A)
    if M.dim != d:
        raise ConfigError(f"A {M.dim}x{M.dim} matrix does not fit a {d}-dimensional field", field="matrix")
    E = build_ellipsoid(M)
    cfg = MaximalConfig(
        j_min=args.j_min,
        j_max=args.j_max,
        beta=args.beta,
        centered=args.centered,
        pruned=args.pruned,
        prune_ratio=args.prune_ratio,
        box=QBox(half_width=args.q_half_width, spatial_step=args.q_spatial_step, scale_step=args.q_scale_step),
    )
    result = maximal_field(F, args.kind, M, cfg, E)
    if args.out:
        save_field(result, args.out)
    document: Dict[str, Any] = {
        "kind": args.kind,
        "inputMax": float(np.abs(F.values).max()),
        "outputMax": float(np.abs(result.values).max()),
        "gridMeta": F.grid.to_dict(),
        "output": args.out,
    }
    if args.kind == "hl":
        j_lo, j_hi = default_ball_range(F.grid, M, E)
        document["ballRange"] = [j_lo if cfg.j_min is None else cfg.j_min,
                                 j_hi if cfg.j_max is None else cfg.j_max]
    _emit(document)
    return EXIT_PASS


def cmd_norm(args: argparse.Namespace) -> int:
    M = make_expansive(parse_matrix(args.matrix))
    params = parse_params(args.params)
    grid = _grid(args, M.dim)
    if args.kind == "seq":
        coeffs = random_sparse_sequence(M.dim, count=args.count, seed=0 if args.seed is None else args.seed)
        _emit({"value": seq_norm(coeffs, params, M), "coverageFraction": 1.0, "gridMeta": grid.to_dict()})
        return EXIT_PASS

    pair = build_calderon_pair(M, _profile(args))
    signal = _signal(args, M, grid)
    j_min, j_max = shell_range(signal, pair)
    levels = range(j_min, j_max + 1)
    coverage = 1.0 - uncovered_fraction(signal, pair, levels)
    if args.kind == "tl":
        value = tl_norm_lp(signal, pair, params)
    elif args.kind == "peetre-disc":
        value = tl_norm_peetre_disc(signal, pair, params)
    elif args.kind == "peetre-cont":
        value = tl_norm_peetre_cont(signal, pair, params, step=args.step)
    else:
        value = coorbit_norm(signal, pair.analyzing, params)
    _emit({"value": value, "coverageFraction": coverage, "gridMeta": grid.to_dict()})
    return EXIT_PASS


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Read the JSON config and apply flag overrides."""
    config = ExperimentConfig.from_json(args.config)
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "battery_size", None) is not None:
        config.battery_size = args.battery_size
    if getattr(args, "output_dir", None) is not None:
        config.output_dir = args.output_dir
    if getattr(args, "params", None):
        config.params = [parse_params(text) for text in args.params]
    return config


def cmd_equiv_verify(args: argparse.Namespace) -> int:
    config = _load_config(args)
    M = make_expansive(config.matrix)
    battery = make_battery(config.grid.with_scales(0.0, 0.0, 1), M, config.battery_size, config.seed)
    pair = build_calderon_pair(M, tight_profile(center=0.0))
    reports = [norm_equivalence(battery, pair, params) for params in config.params]
    passed = all(math.isfinite(r[form]["C"]) for r in reports for form in ("disc", "cont"))
    _emit({"passed": passed, "reports": reports})
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_seq_verify(args: argparse.Namespace) -> int:
    config = _load_config(args)
    M = make_expansive(config.matrix)
    sequences = [random_sparse_sequence(M.dim, count=4, seed=config.seed + i) for i in range(config.battery_size)]
    lattice = config.grid.with_scales(0.0, 0.0, 1)
    reports = [sequence_equivalence(sequences, params, M, lattice) for params in config.params]
    passed = all(math.isfinite(r["ratio"]["C"]) for r in reports)
    _emit({"passed": passed, "reports": reports})
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_weight(args: argparse.Namespace) -> int:
    M = make_expansive(parse_matrix(args.matrix))
    E = build_ellipsoid(M)
    if args.action == "eval":
        g = GroupElement(_points(args.point, M.dim)[0], args.scale)
        _emit({"x": g.x, "s": g.s, "mode": args.mode, "value": weight_v(g, M, args.mode, E)})
        return EXIT_PASS
    report = weight_check(M, count=args.count, seed=args.seed, E=E)
    _emit({"C": report["C"], "violations": report["violations"], "count": args.count})
    return EXIT_PASS if report["violations"] == 0 else EXIT_FAIL


def cmd_molecule_check(args: argparse.Namespace) -> int:
    params = parse_params(args.params)
    if args.matrix:
        M = make_expansive(parse_matrix(args.matrix), lambda_minus=args.lambda_minus)
        lambda_minus, det_a = M.lambda_minus, M.det_a
    else:
        if args.lambda_minus is None or args.det_a is None:
            raise ConfigError("Either --matrix or both --lambda-minus and --det-a are required", field="matrix")
        lambda_minus, det_a = args.lambda_minus, args.det_a
    report = molecule_param_check(params, args.L, args.N, args.delta, lambda_minus, det_a)
    _emit(report)
    return EXIT_PASS if report["passed"] else EXIT_FAIL


def cmd_envelope_integrable(args: argparse.Namespace) -> int:
    M = make_expansive(parse_matrix(args.matrix))
    sigma = tuple(float(v) for v in args.sigma.split(","))
    if len(sigma) != 2:
        raise ValueError(f"Sigma must be two numbers, got {args.sigma!r}")
    report = envelope_integrability(Envelope(sigma=sigma, L=args.L), args.r, M)
    _emit(report)
    return EXIT_PASS if report["finite"] else EXIT_FAIL


def cmd_campaign_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    only = [name for name in args.only.split(",") if name] if args.only else None
    bundle = run_campaign(config, only)
    _emit({
        "passed": bundle["passed"],
        "suites": {r.name: {"passed": r.passed, "failures": r.failures} for r in bundle["results"]},
        "paths": bundle["paths"],
    })
    return EXIT_PASS if bundle["passed"] else EXIT_FAIL


# --- parser -------------------------------------------------------------------


def _add_matrix(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--matrix", required=required, help='Dilation matrix, rows separated by ";" (e.g. "2,0;0,4").')
    p.add_argument("--integer-only", action="store_true", dest="integer_only",
                   help="Accept matrices without a real logarithm (integer powers only).")


def _add_window(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window", default=None,
                   help='JSON window file {"kind", "center", "halfwidth", "plateauHalfwidth"}; '
                        "flags override it.")
    p.add_argument("--profile", choices=PROFILE_KINDS + ("tight",), default=None,
                   help="Scale profile of the window (default: tight).")
    p.add_argument("--center", type=float, default=None, help="Profile center (default: 0).")
    p.add_argument("--halfwidth", type=float, default=None,
                   help="Profile half-width (default: 1 for cosine, else 1.5).")
    p.add_argument("--plateau-halfwidth", type=float, default=None, dest="plateau_halfwidth",
                   help="Plateau half-width of plateau-bump "
                        "(default: 1, or half the half-width when that is at most 1).")


def _add_signal(p: argparse.ArgumentParser) -> None:
    p.add_argument("--signal", default=None, metavar="KIND|SPEC.json",
                   help=f"Test signal kind ({', '.join(SIGNAL_KINDS)}) or a JSON spec with a kind and its "
                        "parameters; flags override it (default: gaussian).")
    p.add_argument("--width", type=float, default=None, help="Signal width (default: 1).")
    p.add_argument("--frequency", default=None, help='Modulation frequency, e.g. "1.5" or "1,0".')
    p.add_argument("--n", type=int, default=128, help="Points per axis (default: 128).")
    p.add_argument("--X", type=float, default=8.0, help="Half-extent of the spatial box (default: 8).")
    p.add_argument("--seed", type=int, default=None, help="Seed for random signals (default: 0).")


def _add_campaign_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="Path to the JSON experiment config.")
    p.add_argument("--seed", type=lambda v: int(v, 0), default=None, help="Override the battery seed.")
    p.add_argument("--battery-size", type=int, default=None, dest="battery_size",
                   help="Override the battery size.")
    p.add_argument("--output-dir", default=None, dest="output_dir", help="Override the output directory.")
    p.add_argument("--params", action="append", default=None,
                   help='Override the params list; repeatable, e.g. "p=2,q=2,alpha=0,beta=1.1".')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anisowave",
        description="Anisotropic wavelet transforms and Triebel-Lizorkin norm verification.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", "-v", action="store_true", help="Log debug messages.")
    verbosity.add_argument("--quiet", "-q", action="store_true", help="Only log errors.")
    commands = parser.add_subparsers(dest="command", required=True)

    matrix = commands.add_parser("matrix", help="Dilation matrix tools.")
    matrix_actions = matrix.add_subparsers(dest="action", required=True)
    check = matrix_actions.add_parser("check", help="Check expansiveness and build the ellipsoid.")
    _add_matrix(check)
    check.set_defaults(func=cmd_matrix_check)

    quasinorm = commands.add_parser("quasinorm", help="Evaluate the step quasi-norm.")
    quasinorm.add_argument("action", choices=("eval", "table"))
    _add_matrix(quasinorm)
    quasinorm.add_argument("--points", required=True, help='Point(s), e.g. "1,2" or "1,0;0,1".')
    quasinorm.set_defaults(func=cmd_quasinorm)

    wavelet = commands.add_parser("wavelet", help="Build or inspect admissible windows.")
    wavelet.add_argument("action", choices=("build", "inspect"))
    _add_matrix(wavelet)
    _add_window(wavelet)
    wavelet.add_argument("--count", type=int, default=1000, help="Random frequencies for inspect.")
    wavelet.add_argument("--seed", type=int, default=0, help="Frequency seed (default: 0).")
    wavelet.set_defaults(func=cmd_wavelet)

    transform = commands.add_parser("transform", help="Continuous wavelet transform of a test signal.")
    _add_matrix(transform)
    _add_window(transform)
    _add_signal(transform)
    transform.add_argument("--scales", default=None, help='Scale range "smin:smax:m" (default: covering box).')
    transform.add_argument("--out", default=None, help="Write the field in GAF1 format.")
    transform.add_argument("--slice-csv", default=None, dest="slice_csv", help="Write the s=0 slice as CSV.")
    transform.set_defaults(func=cmd_transform)

    maximal = commands.add_parser("maximal", help="Apply a maximal operator to a stored field.")
    maximal.add_argument("kind", choices=MAXIMAL_KINDS)
    _add_matrix(maximal, required=False)
    maximal.add_argument("--in", required=True, dest="input", help="Input field in GAF1 format.")
    maximal.add_argument("--out", default=None, help="Write the maximal function in GAF1 format.")
    maximal.add_argument("--beta", type=float, default=1.5, help="Peetre exponent (default: 1.5).")
    maximal.add_argument("--pruned", action="store_true", help="Peetre: skip offsets below --prune-ratio.")
    maximal.add_argument("--prune-ratio", type=float, default=1e-6, dest="prune_ratio",
                         help="Peetre weight cut-off in pruned mode (default: 1e-6).")
    maximal.add_argument("--centered", action="store_true", help="hl: only balls centered at the point.")
    maximal.add_argument("--j-min", type=int, default=None, dest="j_min", help="hl: smallest ball level.")
    maximal.add_argument("--j-max", type=int, default=None, dest="j_max", help="hl: largest ball level.")
    maximal.add_argument("--q-half-width", type=float, default=1.0, dest="q_half_width",
                         help="local: half-width of the neighborhood Q (default: 1).")
    maximal.add_argument("--q-spatial-step", type=float, default=0.5, dest="q_spatial_step",
                         help="local: spatial sampling step of Q (default: 0.5).")
    maximal.add_argument("--q-scale-step", type=float, default=0.5, dest="q_scale_step",
                         help="local: scale sampling step of Q (default: 0.5).")
    maximal.set_defaults(func=cmd_maximal)

    norm = commands.add_parser("norm", help="Evaluate one norm.")
    norm.add_argument("kind", choices=("tl", "peetre-cont", "peetre-disc", "seq", "coorbit"))
    _add_matrix(norm)
    _add_window(norm)
    _add_signal(norm)
    norm.add_argument("--params", default="p=2,q=2,alpha=0,beta=1.1", help="Exponents p, q, alpha, beta.")
    norm.add_argument("--step", type=float, default=0.25, help="Scale step of the continuous form.")
    norm.add_argument("--count", type=int, default=4, help="Coefficients of the random sequence (seq only).")
    norm.set_defaults(func=cmd_norm)

    equiv = commands.add_parser("equiv", help="Norm equivalence over the config battery.")
    equiv.add_argument("action", choices=("verify",))
    _add_campaign_overrides(equiv)
    equiv.set_defaults(func=cmd_equiv_verify)

    seq = commands.add_parser("seq", help="Sequence-space equivalence over random sparse sequences.")
    seq.add_argument("action", choices=("verify",))
    _add_campaign_overrides(seq)
    seq.set_defaults(func=cmd_seq_verify)

    weight = commands.add_parser("weight", help="The submultiplicative weight v.")
    weight.add_argument("action", choices=("eval", "check"))
    _add_matrix(weight)
    weight.add_argument("--point", default="0", help="Spatial coordinate y (eval).")
    weight.add_argument("--scale", type=float, default=0.0, help="Scale t (eval).")
    weight.add_argument("--mode", choices=("closedform", "bruteforce"), default="closedform")
    weight.add_argument("--count", type=int, default=100, help="Sample count (check).")
    weight.add_argument("--seed", type=int, default=0, help="Sample seed (check).")
    weight.set_defaults(func=cmd_weight)

    molecule = commands.add_parser("molecule", help="Molecule parameter conditions.")
    molecule.add_argument("action", choices=("check",))
    _add_matrix(molecule, required=False)
    molecule.add_argument("--params", default="p=2,q=2,alpha=0,beta=1.1", help="Exponents p, q, alpha, beta.")
    molecule.add_argument("--L", type=float, required=True, help="Spatial decay order, L > 1.")
    molecule.add_argument("--N", type=int, required=True, help="Vanishing moments, N >= 0.")
    molecule.add_argument("--delta", type=float, required=True, help="Interpolation parameter in (0, 1).")
    molecule.add_argument("--lambda-minus", type=float, default=None, dest="lambda_minus",
                          help="Spectral bound 1 < lambda_- < min |eig A|.")
    molecule.add_argument("--det-a", type=float, default=None, dest="det_a",
                          help="|det A| when no matrix is given.")
    molecule.set_defaults(func=cmd_molecule_check)

    envelope = commands.add_parser("envelope", help="Standard envelope tools.")
    envelope.add_argument("action", choices=("integrable",))
    _add_matrix(envelope)
    envelope.add_argument("--sigma", required=True, help='Scale rates "sigma1,sigma2".')
    envelope.add_argument("--L", type=float, required=True, help="Spatial decay exponent.")
    envelope.add_argument("--r", type=float, default=1.0, help="Exponent r in (0, 1] (default: 1).")
    envelope.set_defaults(func=cmd_envelope_integrable)

    campaign = commands.add_parser("campaign", help="Verification campaigns.")
    campaign.add_argument("action", choices=("run",))
    _add_campaign_overrides(campaign)
    campaign.add_argument("--only", default=None, help=f"Comma-separated suites out of {', '.join(SUITES)}.")
    campaign.set_defaults(func=cmd_campaign_run)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.ERROR
    else:
        level = logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    try:
        return args.func(args)
    except (ConfigError, OSError) as e:
        logger.error(f"Configuration error: {e}")
        print(f"[error] {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AnisowaveError as e:
        logger.error(f"Check aborted: {e}")
        print(f"[error] {e}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        print(f"[error] {e}", file=sys.stderr)
        return EXIT_CONFIG
