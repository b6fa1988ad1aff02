"""
Command-line surface: classify, nu, testfn, radial, cyl and break.

Each command reads the run config, validates its own arguments, computes
and writes CSV tables (plus an optional JSON mirror) into the output
directory. Exit codes: 0 success, 1 config error, 2 solver failure,
3 I/O failure.
"""

import argparse
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ..core.cylindrical_solver import (BREAK_COLUMNS, SweepGrids, break_sweep, cyl_descents,
                                       empirical_threshold, field_rows)
from ..core.descent import Tolerances
from ..core.errors import (ConfigError, OutputError, ParameterError, QuadratureError, SolverError,
                           SuiteError)
from ..core.exponents import TheoremHypotheses, classify_region, p_star_curve, theorem_applicability
from ..core.radial_solver import (RADIAL_COLUMNS, fit_level_scaling, level_sweep, profile_rows,
                                  report_row, solve_radial)
from ..core.testfn import TESTFN_COLUMNS, BumpSpec, testfn_sweep
from ..core.validation import ParameterValidator, require
from ..utils.config import RunConfig, load_config, resolve_output_dir
from ..utils.output import ResultWriter
from ..utils.validators import InputValidator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_IO = 3

NU_COLUMNS = ["N", "alpha", "p1", "p2", "nu", "applicable", "K_range", "error"]
CYL_COLUMNS = ["A", "K", "level", "m_A_grid", "iterations", "residual", "min_value", "deviation", "init"]


def _parse(text: Optional[str], fallback: List[float]) -> List[float]:
    if text is None:
        return fallback
    values, error = InputValidator.parse_values(text)
    if values is None:
        raise ConfigError(error)
    return values


def _tolerances(config: RunConfig) -> Tolerances:
    return config.tolerances.build()


def _sweep_grids(config: RunConfig) -> SweepGrids:
    rg, cg = config.radial_grid, config.cyl_grid
    return SweepGrids(radial_nodes=rg.nodes, radial_r_min=rg.r_min, radial_r_max=rg.r_max,
                      cyl_nodes=cg.nodes, cyl_r_min=cg.r_min, cyl_r_max=cg.r_max, cyl_kind=cg.kind)


def cmd_classify(args, config: RunConfig, writer: ResultWriter) -> int:
    """Region map over an (alpha, p) grid and samples of the p*_alpha curve."""
    cc = config.classify
    N = args.N if args.N is not None else config.problem.N
    alphas = _parse(args.alpha, list(np.linspace(cc.alpha_min, cc.alpha_max, cc.resolution)))
    ps = _parse(args.p, list(np.linspace(cc.p_min, cc.p_max, cc.resolution)))
    require(ParameterValidator.validate_dimension(N))

    rows = []
    for alpha in alphas:
        for p in ps:
            label = classify_region(N, alpha, p)
            rows.append({"alpha": float(alpha), "p": float(p), "label": label.region.value,
                         "citations": label.citation_string()})
    writer.write_table("region_map", ["alpha", "p", "label", "citations"], rows)

    curve = [{"alpha": a, "p_star": v} for a, v in p_star_curve(N, alphas)]
    writer.write_table("p_star_curve", ["alpha", "p_star"], curve)
    return EXIT_OK


def cmd_nu(args, config: RunConfig, writer: ResultWriter) -> int:
    """nu and theorem applicability over a range of dimensions."""
    if args.N_range is not None:
        Ns, error = InputValidator.parse_int_values(args.N_range)
        if Ns is None:
            raise ConfigError(error)
    else:
        Ns = list(config.N_list)
    alpha = args.alpha_value if args.alpha_value is not None else config.problem.alpha
    p1 = args.p1 if args.p1 is not None else config.problem.p1
    p2 = args.p2 if args.p2 is not None else config.problem.p2

    rows = []
    for N in Ns:
        row = {"N": N, "alpha": alpha, "p1": p1, "p2": p2, "nu": None, "applicable": False,
               "K_range": "", "error": ""}
        report = theorem_applicability(TheoremHypotheses(N, alpha, p1, p2))
        row["applicable"] = report.applicable
        if report.applicable:
            row["nu"] = report.nu
            row["K_range"] = " ".join(str(k) for k in report.k_range)
        else:
            row["error"] = report.reason
        rows.append(row)
    writer.write_table("nu", NU_COLUMNS, rows)
    return EXIT_OK


def cmd_testfn(args, config: RunConfig, writer: ResultWriter) -> int:
    """Test-function integrals, threshold A_K, endpoint energies and bound slopes."""
    pc, qc = config.problem, config.quadrature
    nonlinearity = pc.nonlinearity.build()
    spec = BumpSpec.for_nonlinearity(nonlinearity)
    A_values = _parse(args.A, config.testfn_A_list)

    summaries = []
    for K in config.K_list:
        sweep = testfn_sweep(spec, K, pc.N, pc.alpha, nonlinearity, A_values, qc.order, qc.panels)
        if qc.rtol is not None:
            for row in sweep.rows:
                if row["discrepancy"] > qc.rtol:
                    raise QuadratureError(f"change of variables check failed at A={row['A']:g}",
                                          row["discrepancy"])
        writer.write_table(f"testfn_K{K}", TESTFN_COLUMNS, sweep.rows)
        summaries.append({"K": K, "A_K": sweep.A_K, "ratio_slope": sweep.ratio_slope,
                          "bound_slope": sweep.bound_slope,
                          "expected_bound_slope": sweep.expected_bound_slope})
    writer.write_table("testfn_summary",
                       ["K", "A_K", "ratio_slope", "bound_slope", "expected_bound_slope"], summaries)
    return EXIT_OK


def cmd_radial(args, config: RunConfig, writer: ResultWriter) -> int:
    """Radial levels over A_list and the fitted A-exponent."""
    pc, rg = config.problem, config.radial_grid
    A_values = _parse(args.A, config.A_list)
    points = level_sweep(pc.build(), A_values, n=rg.nodes, r_min=rg.r_min, r_max=rg.r_max,
                         init_width=rg.init_width, tol=_tolerances(config))
    writer.write_table("radial", RADIAL_COLUMNS, [report_row(p.A, p.report, p.error) for p in points])

    solved = [(p.A, p.report.level) for p in points if p.ok]
    if len(solved) >= 3:
        fit = fit_level_scaling(solved, pc.N, pc.alpha, pc.p1, pc.p2)
        writer.write_table("radial_scaling",
                           ["slope", "intercept", "points", "existence_exponent", "radial_level_exponent"],
                           [{"slope": fit.slope, "intercept": fit.intercept, "points": fit.points,
                             "existence_exponent": fit.existence_exponent,
                             "radial_level_exponent": fit.radial_level_exponent}])
    if points and not solved:
        logger.error("no radial solve converged")
        return EXIT_SOLVER
    return EXIT_OK


def cmd_cyl(args, config: RunConfig, writer: ResultWriter) -> int:
    """K-symmetric ground states at the configured A for every K in K_list."""
    params = config.problem.build()
    tol = _tolerances(config)
    rg = config.radial_grid
    radial_u, _ = solve_radial(params, rg.nodes, rg.r_min, rg.r_max, rg.init_width, tol)

    rows = []
    for K in config.K_list:
        descents = cyl_descents(params, K, radial_u, _sweep_grids(config), tol)
        if not descents.runs:
            raise SolverError(f"no cylindrical descent converged for K={K}: "
                              + "; ".join(descents.failures))
        for label, _, report in descents.runs:
            rows.append({"A": params.A, "K": K, "level": report.level,
                         "m_A_grid": descents.radial_reference(),
                         "iterations": report.iterations, "residual": report.residual,
                         "min_value": report.min_value, "deviation": report.deviation,
                         "init": label})
        if config.output.field_dumps:
            _, u, _ = descents.lowest()
            writer.write_table(f"field_A{params.A:g}_K{K}", ["s", "t", "u"], field_rows(u))
    writer.write_table("cyl", CYL_COLUMNS, rows)
    return EXIT_OK


def cmd_break(args, config: RunConfig, writer: ResultWriter) -> int:
    """Symmetry-breaking sweep per K, field dumps, empirical thresholds and their maximum."""
    pc = config.problem
    report = theorem_applicability(TheoremHypotheses(pc.N, pc.alpha, pc.p1, pc.p2))
    if not report.applicable:
        logger.warning("multiplicity hypotheses fail (%s); sweeping anyway", report.reason)

    A_values = _parse(args.A, config.A_list)
    params = pc.build()
    dumps = config.output.field_dumps
    rows, thresholds, failures = [], [], 0
    for K in config.K_list:
        reports = break_sweep(params, K, A_values, _sweep_grids(config), _tolerances(config),
                              workers=config.workers, keep_fields=dumps)
        failures += sum(1 for r in reports if r.error)
        rows.extend(r.as_row() for r in reports)
        thresholds.append({"K": K, "A_tilde": empirical_threshold(reports)})
        for r in reports:
            if r.fields is None:
                continue
            radial_u, u = r.fields
            if K == config.K_list[0]:
                writer.write_table(f"radial_A{r.A:g}", ["r", "u"], profile_rows(radial_u))
            writer.write_table(f"field_A{r.A:g}_K{K}", ["s", "t", "u"], field_rows(u))
    writer.write_table("break", BREAK_COLUMNS, rows)

    A_star = max((t["A_tilde"] for t in thresholds), default=math.inf)
    thresholds.append({"K": "all", "A_tilde": A_star if math.isfinite(A_star) else "not reached"})
    writer.write_table("thresholds", ["K", "A_tilde"], thresholds)

    if rows and failures == len(rows):
        logger.error("every sweep point failed")
        return EXIT_SOLVER
    return EXIT_OK


COMMANDS: Dict[str, Callable] = {
    "classify": cmd_classify,
    "nu": cmd_nu,
    "testfn": cmd_testfn,
    "radial": cmd_radial,
    "cyl": cmd_cyl,
    "break": cmd_break,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symbreak",
        description="Radial and cylindrical ground states of -Lap u + A|x|^-alpha u = f(u)")
    parser.add_argument("--config", help="JSON run config")
    parser.add_argument("--out", help="output directory (overrides config and SYMBREAK_OUT)")
    parser.add_argument("--workers", type=int, help="parallel sweep workers")
    parser.add_argument("--seed", type=int, help="seed recorded in output headers")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="region map of the (alpha, p) plane")
    p.add_argument("--N", type=int)
    p.add_argument("--alpha", help="values: a,b,c or lo:hi:n")
    p.add_argument("--p", help="values: a,b,c or lo:hi:n")

    p = sub.add_parser("nu", help="multiplicity count over N")
    p.add_argument("--N", dest="N_range", help="e.g. 4..10 or 4,6,8")
    p.add_argument("--alpha", dest="alpha_value", type=float)
    p.add_argument("--p1", type=float)
    p.add_argument("--p2", type=float)

    for name, text in (("testfn", "test-function integrals and bounds"),
                       ("radial", "radial levels and A-scaling"),
                       ("cyl", "K-symmetric ground states at one A"),
                       ("break", "symmetry-breaking sweep")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--A", help="override the A list: a,b,c or lo:hi:n:log")
    return parser


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    update = {}
    if args.workers is not None:
        valid, error = InputValidator.validate_workers(args.workers)
        if not valid:
            raise ConfigError(error)
        update["workers"] = args.workers
    if args.seed is not None:
        valid, error = InputValidator.validate_seed(args.seed)
        if not valid:
            raise ConfigError(error)
        update["seed"] = args.seed
    return config.model_copy(update=update) if update else config


def configure_logging(verbose: bool = False) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and map failures onto exit codes."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        if args.config is not None:
            valid, error = InputValidator.validate_config_path(args.config)
            if not valid:
                raise ConfigError(error)
        config = _apply_overrides(load_config(args.config), args)
        out_dir = resolve_output_dir(config, args.out)
        valid, error = InputValidator.validate_output_dir(out_dir)
        if not valid:
            raise OutputError(error)
        writer = ResultWriter(out_dir, config.output.json_mirror,
                              meta={"command": args.command, "seed": config.seed})
        return COMMANDS[args.command](args, config, writer)
    except (ConfigError, ParameterError) as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (SolverError, QuadratureError) as exc:
        logger.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except OutputError as exc:
        logger.error("output failure: %s", exc)
        return EXIT_IO
    except SuiteError as exc:
        logger.error("%s", exc)
        return EXIT_SOLVER
