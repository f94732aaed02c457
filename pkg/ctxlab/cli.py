#!/usr/bin/env python3
"""
ctxlab command line: exact verification, state sweeps, shot simulation and
γ evaluation from published data. Every command emits one RunReport.
"""

import argparse
import logging
import math
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .config import ENSEMBLE_CHOICES, FORMAT_CHOICES, STATE_CHOICES, RunConfig, load_config
from .error_handling import (
    EXIT_CHECK_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    ArgumentError,
    ConfigError,
    CtxlabError,
    describe,
    exit_code_for,
)
from .inequalities import (
    CHI_NCR_BOUND,
    CHI_QM_VALUE,
    GAMMA_NCR_VALUE,
    GAMMA_QM_VALUE,
    compare_schemes,
    evaluate_from_data,
    witnesses_from_expectations,
)
from .measurement_sim import (
    EstimateReport,
    NoiseModel,
    agreement_pvalue,
    attenuation,
    c3_setup,
    estimate,
    estimate_chi,
    gamma_from_estimates,
    line_stream,
    r3_setup,
)
from .ncr_models import (
    NINE_VALUE_COUNT,
    SIX_VALUE_COUNT,
    check_untested_lines,
    count_all_relations_satisfied,
    count_joint_six_value_solutions,
    induced_chi_bound,
    ncr_bounds,
    parity_violations,
)
from .operator_algebra import ProductObservable
from .pm_square import (
    R2_LABEL_NOTE,
    Line,
    PeresMerminSquare,
    SquarePosition,
    build_square,
    cell_occurrences,
    commutator_norms,
    expected_sign_product,
    verify_eigen_relations,
)
from .reporting import RunReport
from .states import (
    RNG_NAME,
    DensityMatrix,
    Ensemble,
    RandomStateConfig,
    expectation_line,
    random_state,
    singlet,
    to_density,
)
from .sweep import partition, run_partitioned

logger = logging.getLogger(__name__)

PAULI_CONVENTION = {
    "I": "[[1, 0], [0, 1]]",
    "X": "[[0, 1], [1, 0]]",
    "Y": "[[0, -i], [i, 0]]",
    "Z": "[[1, 0], [0, -1]]",
    "tensor_order": "qubit 1 is the left (outer-block) Kronecker factor; basis |00>,|01>,|10>,|11>",
}
SEED_DERIVATION = "SeedSequence(entropy=seed, spawn_key=stream + (index,))"
AGREEMENT_SIGMAS = 4.0
AGREEMENT_PVALUE = math.erfc(AGREEMENT_SIGMAS / math.sqrt(2.0))
SCAN_CHUNK = 250


def _setup_logging(config: RunConfig) -> None:
    """Configure logging for one run; reports own stdout, logs go to stderr."""
    log_level = getattr(logging, config.log_level.upper(), logging.WARNING)
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if config.log_file:
        handlers.append(logging.FileHandler(config.log_file, mode='w', encoding='utf-8'))

    logging.basicConfig(
        level=log_level,
        format='%(asctime)s [%(levelname)s] %(message)s',
        handlers=handlers,
        force=True
    )
    logger.info(f"Logging configured at {logging.getLevelName(log_level)}")


def parse_fault(text: str) -> Tuple[SquarePosition, ProductObservable]:
    """Parse the fault-injection hook ``"row,col=LABEL"``, e.g. ``"3,3=XY"``."""
    try:
        where, label = text.split("=")
        return SquarePosition.parse(where), ProductObservable.parse(label)
    except (ValueError, ArgumentError) as e:
        raise ConfigError(f"Invalid fault {text!r} (expected 'row,col=LABEL'): {e}") from e


def _square_for(config: RunConfig) -> PeresMerminSquare:
    square = build_square()
    if config.fault:
        position, observable = parse_fault(config.fault)
        logger.warning(f"Injecting fault: {position} := {observable}")
        square = square.with_cell(position, observable)
    return square


def _new_report(command: str, config: RunConfig) -> RunReport:
    report = RunReport(command=command, config=config.echo())
    report.mark_started(config.record_timestamps)
    return report


def cmd_verify(config: RunConfig) -> RunReport:
    """Exact checks: operator identities, compatibility and the NCR scans."""
    report = _new_report("verify", config)
    square = _square_for(config)
    tol = config.tolerances.operator

    line_reports = verify_eigen_relations(square, tol)
    for r in line_reports:
        report.add_check(f"eigen_relation.{r.line}", f"{r.expected_sign:+d}I", "pass" if r.passed else "fail",
                         r.passed, r.max_deviation)
    report.add_check("eigen_relation.sign_product", -1, expected_sign_product(), expected_sign_product() == -1)

    norms = commutator_norms(square)
    for name, norm in norms.items():
        report.add_check(f"compatibility.{name}", 0.0, norm, norm <= tol, norm)

    occurrences = cell_occurrences()
    report.add_check("structure.cell_occurrences", 2, sorted(set(occurrences.values())),
                     all(n == 2 for n in occurrences.values()))

    chi, gamma = ncr_bounds()
    report.add_check("ncr.chi.assignments_scanned", NINE_VALUE_COUNT, chi.assignments_scanned,
                     chi.assignments_scanned == NINE_VALUE_COUNT)
    report.add_check("ncr.chi.max", CHI_NCR_BOUND, chi.max_value, chi.max_value == CHI_NCR_BOUND)
    satisfied = count_all_relations_satisfied()
    report.add_check("ncr.nine_value.all_relations_satisfied", 0, satisfied, satisfied == 0)
    parity = parity_violations()
    report.add_check("ncr.nine_value.parity_violations", 0, parity, parity == 0)

    report.add_check("ncr.gamma.assignments_scanned", SIX_VALUE_COUNT, gamma.assignments_scanned,
                     gamma.assignments_scanned == SIX_VALUE_COUNT)
    report.add_check("ncr.gamma.constant", GAMMA_NCR_VALUE, [gamma.min_value, gamma.max_value],
                     gamma.min_value == gamma.max_value == GAMMA_NCR_VALUE)
    joint = count_joint_six_value_solutions()
    report.add_check("ncr.six_value.joint_R3_C3_solutions", 0, joint, joint == 0)
    untested = check_untested_lines(square)
    report.add_check("ncr.six_value.untested_lines_hold", True, untested, untested)

    induced = induced_chi_bound()
    report.add_check("ncr.induced.chi_max", CHI_NCR_BOUND, induced.max_value, induced.max_value <= CHI_NCR_BOUND)

    schemes = compare_schemes()
    for s in schemes:
        report.add_check(f"scheme.{s.name}.margin", 2, s.margin, s.margin == 2)
    gamma_scheme = next(s for s in schemes if s.name == "gamma")
    report.add_check("scheme.gamma.observables", 5, gamma_scheme.observables, gamma_scheme.observables == 5)
    report.add_check("scheme.gamma.setups", 2, gamma_scheme.setups, gamma_scheme.setups == 2)

    report.results = {
        "square": square.layout(),
        "pauli_convention": PAULI_CONVENTION,
        "line_signs": {str(r.line): r.expected_sign for r in line_reports},
        "line_reports": line_reports,
        "commutator_norms": norms,
        "chi_bound": chi,
        "gamma_bound": gamma,
        "induced_chi_bound": induced,
        "schemes": [dict(name=s.name, lines=s.lines, observables=s.observables, setups=s.setups,
                         ncr_bound=s.ncr_bound, qm_value=s.qm_value, margin=s.margin) for s in schemes],
        "notes": [R2_LABEL_NOTE],
    }
    if config.fault:
        report.results["fault"] = config.fault
    report.mark_finished(config.record_timestamps)
    return report


def _ensembles(choice: str) -> List[Ensemble]:
    if choice == "both":
        return [Ensemble.HAAR_PURE, Ensemble.GINIBRE_MIXED]
    return [Ensemble(choice)]


def _scan_chunk(args) -> Dict[str, Any]:
    seed, ensemble, ensemble_index, chunk, state_tol = args
    worst_chi, worst_gamma = float(CHI_QM_VALUE), float(GAMMA_QM_VALUE)
    worst_index, worst_dev = chunk.start, -1.0
    samples = []
    for i in range(chunk.start, chunk.stop):
        state = random_state(RandomStateConfig(seed, ensemble, stream=(ensemble_index, i)), tol=state_tol)
        values = {line: expectation_line(state, line, tol=state_tol) for line in Line}
        chi, gamma = witnesses_from_expectations(values)
        d_chi, d_gamma = abs(chi - CHI_QM_VALUE), abs(gamma - GAMMA_QM_VALUE)
        if max(d_chi, d_gamma) > worst_dev:
            worst_index, worst_dev = i, max(d_chi, d_gamma)
        if d_chi > abs(worst_chi - CHI_QM_VALUE):
            worst_chi = chi
        if d_gamma > abs(worst_gamma - GAMMA_QM_VALUE):
            worst_gamma = gamma
        samples.append({"index": i, "chi": chi, "gamma": gamma, "purity": state.purity})
    return {"worst_chi": worst_chi, "worst_gamma": worst_gamma,
            "max_chi_deviation": abs(worst_chi - CHI_QM_VALUE),
            "max_gamma_deviation": abs(worst_gamma - GAMMA_QM_VALUE),
            "worst_index": worst_index, "worst_deviation": worst_dev, "samples": samples}


def cmd_scan(config: RunConfig) -> RunReport:
    """State-independence sweep: <χ> = 6 and <γ> = 3 for every sampled state."""
    report = _new_report("scan", config)
    tol = config.tolerances.scan
    per_ensemble = {}

    for ensemble in _ensembles(config.ensemble):
        ensemble_index = list(Ensemble).index(ensemble)
        chunks = partition(config.num_states, SCAN_CHUNK)
        logger.info(f"Scanning {config.num_states} {ensemble.value} states in {len(chunks)} chunks")
        parts = run_partitioned(
            _scan_chunk,
            [(config.seed, ensemble, ensemble_index, chunk, config.tolerances.state) for chunk in chunks],
            config.execution.workers,
        )
        worst_chi = max(parts, key=lambda p: p["max_chi_deviation"])["worst_chi"]
        worst_gamma = max(parts, key=lambda p: p["max_gamma_deviation"])["worst_gamma"]
        samples = [s for p in parts for s in p["samples"]]
        worst = max(parts, key=lambda p: p["worst_deviation"])
        per_ensemble[ensemble.value] = {
            "num_states": config.num_states,
            "worst_state_index": worst["worst_index"],
            "max_chi_deviation": abs(worst_chi - CHI_QM_VALUE),
            "max_gamma_deviation": abs(worst_gamma - GAMMA_QM_VALUE),
            "min_purity": min(s["purity"] for s in samples),
            "samples": samples[:10],
        }
        report.check_close(f"scan.{ensemble.value}.chi", CHI_QM_VALUE, worst_chi, tol,
                           detail=f"worst <chi> over {config.num_states} states")
        report.check_close(f"scan.{ensemble.value}.gamma", GAMMA_QM_VALUE, worst_gamma, tol,
                           detail=f"worst <gamma> over {config.num_states} states")

    report.results = {
        "ensembles": per_ensemble,
        "rng": RNG_NAME,
        "seed_derivation": SEED_DERIVATION,
        "chi_ncr_bound": CHI_NCR_BOUND,
        "gamma_ncr_value": GAMMA_NCR_VALUE,
    }
    report.mark_finished(config.record_timestamps)
    return report


def _simulation_state(config: RunConfig) -> DensityMatrix:
    if config.state == "singlet":
        return to_density(singlet(), config.tolerances.state)
    ensemble = Ensemble.GINIBRE_MIXED if config.ensemble == "ginibre_mixed" else Ensemble.HAAR_PURE
    return random_state(RandomStateConfig(config.seed, ensemble), tol=config.tolerances.state)


def _agreement(reports: Dict[Line, EstimateReport], noise: NoiseModel) -> Tuple[bool, float]:
    """Pooled wrong-sign count of ``reports`` against its exact binomial law."""
    pvalue = agreement_pvalue(reports, noise)
    return pvalue >= AGREEMENT_PVALUE, pvalue


def cmd_simulate(config: RunConfig) -> RunReport:
    """Monte-Carlo run of the R3 and C3 setups and the resulting γ."""
    report = _new_report("simulate", config)
    state = _simulation_state(config)
    noise = NoiseModel(config.flip_probability)
    factor = attenuation(noise.flip_probability)
    run = dict(shots=config.shots, seed=config.seed,
               block_size=config.execution.block_size, workers=config.execution.workers)

    r3 = estimate(state, r3_setup(), noise, stream=line_stream(Line.R3), **run)
    c3 = estimate(state, c3_setup(), noise, stream=line_stream(Line.C3), **run)
    gamma, sigma = gamma_from_estimates(r3, c3)

    for line, est, sign in ((Line.R3, r3, 1), (Line.C3, c3, -1)):
        ok, pvalue = _agreement({line: est}, noise)
        report.add_check(f"simulate.{line}.mean_product", sign * factor, est.mean_product, ok,
                         abs(est.mean_product - sign * factor),
                         detail=f"wrong-sign count binomial p = {pvalue:.3g} (threshold {AGREEMENT_PVALUE:.3g})")
    predicted_gamma = 1.0 + 2.0 * factor
    ok, pvalue = _agreement({Line.R3: r3, Line.C3: c3}, noise)
    report.add_check("simulate.gamma", predicted_gamma, gamma, ok, abs(gamma - predicted_gamma),
                     detail=f"pooled R3/C3 wrong-sign count binomial p = {pvalue:.3g} "
                            f"(threshold {AGREEMENT_PVALUE:.3g})")

    excess = gamma - GAMMA_NCR_VALUE
    violation = excess > config.violation_sigmas * sigma if sigma > 0 else excess > 0
    report.results = {
        "state": config.state,
        "flip_probability": noise.flip_probability,
        "attenuation": factor,
        "estimates": {str(Line.R3): r3, str(Line.C3): c3},
        "gamma": gamma,
        "sigma": sigma,
        "significance": _significance(excess, sigma),
        "violation": violation,
        "violation_threshold_sigmas": config.violation_sigmas,
        "gamma_ncr_value": GAMMA_NCR_VALUE,
        "gamma_qm_value": GAMMA_QM_VALUE,
        "rng": RNG_NAME,
        "seed_derivation": SEED_DERIVATION,
    }

    if config.full_witness:
        chi, chi_sigma, lines = estimate_chi(state, noise, **run)
        ok, pvalue = _agreement(lines, noise)
        report.add_check("simulate.chi", CHI_QM_VALUE * factor, chi, ok, abs(chi - CHI_QM_VALUE * factor),
                         detail=f"six-setup wrong-sign count binomial p = {pvalue:.3g} "
                                f"(threshold {AGREEMENT_PVALUE:.3g})")
        report.results["full_witness"] = {
            "chi": chi,
            "sigma": chi_sigma,
            "estimates": {str(line): est for line, est in lines.items()},
            "chi_ncr_bound": CHI_NCR_BOUND,
        }

    logger.info(f"gamma = {gamma:.6f} ± {sigma:.6f}; violation flagged: {violation}")
    report.mark_finished(config.record_timestamps)
    return report


def _significance(excess: float, sigma: float) -> Any:
    """(γ - 1)/σ; "exact" for a violation with zero error bars."""
    if sigma == 0.0:
        if excess > 0.0:
            return "exact"
        return -math.inf if excess < 0.0 else 0.0
    return excess / sigma


def cmd_report_from_data(
    r3_mean: float,
    r3_err: float,
    c3_mean: float,
    c3_err: float,
    config: Optional[RunConfig] = None,
) -> RunReport:
    """γ, σ and the violation significance from measured <R3>, <C3>."""
    config = config or RunConfig(command="report-from-data", r3=r3_mean, r3_err=r3_err, c3=c3_mean, c3_err=c3_err)
    report = _new_report("report-from-data", config)
    evaluation = evaluate_from_data(r3_mean, r3_err, c3_mean, c3_err)

    report.add_check("data.gamma_in_range", "[-1, 3]", evaluation.gamma, -1.0 <= evaluation.gamma <= 3.0)
    report.add_check("data.sigma_finite", True, evaluation.sigma, math.isfinite(evaluation.sigma))

    report.results = {
        "r3": {"mean": r3_mean, "error": r3_err},
        "c3": {"mean": c3_mean, "error": c3_err},
        "gamma": evaluation.gamma,
        "sigma": evaluation.sigma,
        "ncr_value": evaluation.ncr_value,
        "qm_prediction": evaluation.qm_prediction,
        "significance": "exact" if evaluation.exact else evaluation.significance,
        "violation": evaluation.violates(config.violation_sigmas),
        "violation_threshold_sigmas": config.violation_sigmas,
    }
    report.mark_finished(config.record_timestamps)
    return report


COMMAND_HANDLERS = {
    "verify": cmd_verify,
    "scan": cmd_scan,
    "simulate": cmd_simulate,
    "report-from-data": lambda cfg: cmd_report_from_data(cfg.r3, cfg.r3_err, cfg.c3, cfg.c3_err, cfg),
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser; option defaults are None so only given flags override config."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="Base seed (default: 42, or $CTXLAB_SEED)")
    common.add_argument("--shots", type=int, help="Shots per setup (default: 100000)")
    common.add_argument("--flip-prob", dest="flip_probability", type=float,
                        help="Readout flip probability q in [0, 0.5] (default: 0)")
    common.add_argument("--num-states", type=int, help="States per ensemble for scan (default: 1000)")
    common.add_argument("--ensemble", choices=ENSEMBLE_CHOICES, help="Random-state ensemble (default: both)")
    common.add_argument("--format", dest="output_format", choices=FORMAT_CHOICES, help="Report format (default: json)")
    common.add_argument("--out", dest="output_path", help="Write the report to this file instead of stdout")
    common.add_argument("--config", dest="config_file", help="YAML configuration file")
    common.add_argument("--log-level", help="Logging level (default: WARNING)")
    common.add_argument("--log-file", help="Also write logs to this file")
    common.add_argument("--workers", type=int, help="Worker threads for sweeps and shot blocks")
    common.add_argument("--block-size", type=int, help="Shots per independently seeded block")
    common.add_argument("--tol-operator", type=float, help="Operator identity tolerance (default: 1e-12)")
    common.add_argument("--tol-state", type=float, help="State invariant tolerance (default: 1e-10)")
    common.add_argument("--tol-scan", type=float, help="State sweep tolerance (default: 1e-9)")
    common.add_argument("--no-timestamps", dest="record_timestamps", action="store_const", const=False,
                        help="Omit timestamps so repeated runs serialize identically")

    parser = argparse.ArgumentParser(
        prog="ctxlab",
        description="Verify and simulate state-independent contextuality on the Peres-Mermin square"
    )
    parser.add_argument("--version", action="version", version=f"ctxlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", parents=[common], help="Run all exact checks")
    verify.add_argument("--inject-fault", dest="fault", metavar="ROW,COL=LABEL",
                        help="Test hook: replace one square cell, e.g. 3,3=XY")

    sub.add_parser("scan", parents=[common], help="Check <chi> = 6 and <gamma> = 3 over random states")

    simulate = sub.add_parser("simulate", parents=[common], help="Shot-level simulation of the R3 and C3 setups")
    simulate.add_argument("--state", choices=STATE_CHOICES, help="Input state (default: singlet)")
    simulate.add_argument("--violation-sigmas", type=float, help="Violation threshold in sigma (default: 5)")
    simulate.add_argument("--full-witness", action="store_const", const=True,
                          help="Also estimate chi from all six line setups")

    data = sub.add_parser("report-from-data", parents=[common], help="Evaluate gamma from measured <R3>, <C3>")
    data.add_argument("--r3", type=float, help="Measured <R3>")
    data.add_argument("--r3-err", type=float, help="Standard error of <R3>")
    data.add_argument("--c3", type=float, help="Measured <C3>")
    data.add_argument("--c3-err", type=float, help="Standard error of <C3>")
    data.add_argument("--violation-sigmas", type=float, help="Violation threshold in sigma (default: 5)")

    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = vars(args).copy()
    values.pop("config_file", None)
    tolerances = {
        "operator": values.pop("tol_operator", None),
        "state": values.pop("tol_state", None),
        "scan": values.pop("tol_scan", None),
    }
    execution = {
        "workers": values.pop("workers", None),
        "block_size": values.pop("block_size", None),
    }
    overrides = {k: v for k, v in values.items() if v is not None}
    if any(v is not None for v in tolerances.values()):
        overrides["tolerances"] = {k: v for k, v in tolerances.items() if v is not None}
    if any(v is not None for v in execution.values()):
        overrides["execution"] = {k: v for k, v in execution.items() if v is not None}
    return overrides


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

    try:
        config = load_config(config_file=args.config_file, cli_overrides=_overrides(args))
    except ConfigError as e:
        print(f"ctxlab: {e}", file=sys.stderr)
        return EXIT_USAGE

    _setup_logging(config)

    try:
        report = COMMAND_HANDLERS[config.command](config)
        report.write(config.output_format, config.output_path, stream=sys.stdout)
    except CtxlabError as e:
        logger.error(describe(e, config.command))
        print(f"ctxlab: {e}", file=sys.stderr)
        return e.exit_code
    except (ValueError, OSError) as e:
        logger.error(describe(e, config.command))
        print(f"ctxlab: {e}", file=sys.stderr)
        return exit_code_for(e)

    if not report.passed:
        for check in report.failed_checks():
            logger.error(f"FAILED {check.name}: expected {check.expected}, observed {check.observed}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
