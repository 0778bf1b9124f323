"""Experiment service - the five CLI experiments and their output files.

Exit codes: 0 success, 2 configuration error, 3 inequality violation,
4 bound violation, 5 inconclusive. A bound violation is only reported
against an exactly computed bound.
"""
import logging
import os

from halpern_rates import __version__, current_runtime
from halpern_rates.errors import ConfigurationError, DomainError, ExhaustedError
from halpern_rates.models.bigcount import BigCount
from halpern_rates.models.browder import FAMILY_COLUMNS, FAMILY_FORMAT
from halpern_rates.models.gfunction import GFunction
from halpern_rates.models.reports import ExperimentReport
from halpern_rates.models.trace import TRACE_COLUMNS, TRACE_FORMAT
from halpern_rates.services.browder_service import BrowderService
from halpern_rates.services.fuzz_service import ORACLES, FuzzService
from halpern_rates.services.geometry_service import GeometryService
from halpern_rates.services.iteration_service import IterationService
from halpern_rates.services.map_service import MapService
from halpern_rates.services.rate_service import RateService
from halpern_rates.services.schedule_service import ScheduleService
from halpern_rates.services.tower_service import TowerService
from halpern_rates.utils.export import write_csv, write_json

logger = logging.getLogger(__name__)

REPORT_FORMAT = "halpern-report/1"
LOG_ESTIMATE_DIGITS = 64

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INEQUALITY = 3
EXIT_BOUND = 4
EXIT_INCONCLUSIVE = 5


def _setup(cfg):
    ball = MapService.build_ball(cfg.space, cfg.ball)
    nonexpansive_map = MapService.build_map(cfg.map, ball)
    schedule = ScheduleService.build_schedule(cfg.schedule)
    u = MapService.resolve_point(ball, cfg.start, [0.5 * ball.radius])
    if not MapService.contains(ball, u):
        raise ConfigurationError(f"Start point {u} lies outside the ball")
    return ball, nonexpansive_map, schedule, u


def _digit_budget(cfg):
    return LOG_ESTIMATE_DIGITS if cfg.log_estimate else cfg.digit_budget


def _fits(count, limit):
    return count.is_exact and count.value <= limit


def _bound_verdict(empirical, bound):
    """'respected', 'violated' or 'estimate' for an empirical index against a bound."""
    if bound.is_estimate:
        return "estimate"
    return "respected" if empirical <= bound.value else "violated"


def _write_report(cfg, report):
    """Stamp and write the JSON report; returns its path."""
    payload = {
        "format": REPORT_FORMAT,
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        **report.to_dict(),
    }
    path = os.path.join(cfg.out_dir, f"{report.command}.json")
    write_json(path, payload)
    report.files.append(path)
    return path


def _moduli(schedule):
    return schedule.gamma, schedule.theta, schedule.alpha


def _tower(cfg, eps, kappa, M, schedule):
    budget = _digit_budget(cfg)
    if schedule.is_harmonic:
        return TowerService.sigma_harmonic(eps, cfg.g, kappa, M, digit_budget=budget)
    return TowerService.table1_tower(
        eps, cfg.g, kappa, M, schedule.theta_rule, schedule.alpha_modulus,
        schedule.gamma_modulus, digit_budget=budget,
    )


class ExperimentService:
    """Service orchestrating experiments from an ExperimentConfig."""

    @staticmethod
    def run(command, cfg):
        """Dispatch to run_<command>; configuration errors become exit code 2."""
        runners = {
            "asreg": ExperimentService.run_asreg,
            "meta": ExperimentService.run_meta,
            "browder": ExperimentService.run_browder,
            "fuzz": ExperimentService.run_fuzz,
            "rates": ExperimentService.run_rates,
        }
        if command not in runners:
            raise ConfigurationError(f"Unknown experiment '{command}'")
        try:
            return runners[command](cfg)
        except (ConfigurationError, DomainError) as exc:
            logger.error(f"{command}: {exc}")
            return ExperimentReport(
                command=command,
                exit_code=EXIT_CONFIG,
                summary=[f"configuration error: {exc}"],
                payload={"error": str(exc)},
            )

    @staticmethod
    def run_asreg(cfg):
        """Empirical stable indices of both regularity sequences against Φ̃ and Φ."""
        ball, T, schedule, u = _setup(cfg)
        kappa, M = ball.curvature, ball.diameter_bound
        gamma, theta, alpha = _moduli(schedule)

        rates = []
        for eps in cfg.eps:
            phi_tilde = RateService.phi_tilde(eps, kappa, M, gamma, theta)
            phi = RateService.phi(eps, kappa, M, gamma, theta, alpha)
            rates.append((eps, phi_tilde, phi))
        feasible = [
            row for row in rates if _fits(row[1], cfg.horizon) and _fits(row[2], cfg.horizon)
        ]
        if not feasible:
            smallest = min(row[2] for row in rates)
            raise ConfigurationError(
                f"No eps has Phi within the horizon {cfg.horizon}; smallest Phi is {smallest}"
            )

        N = max(max(row[1].value, row[2].value) for row in feasible)
        trace = IterationService.iterate(u, T, schedule, N)
        step, residual = IterationService.regularity_indices(trace)
        rows = []
        exit_code = EXIT_OK
        for eps, phi_tilde, phi in feasible:
            e = float(eps)
            step_index = IterationService.first_stable_index(step, e)
            residual_index = IterationService.first_stable_index(residual, e)
            # a run reaching past the bound that is still unstable is a violation
            step_ok = step_index is not None and step_index <= phi_tilde.value
            residual_ok = residual_index is not None and residual_index <= phi.value
            if not (step_ok and residual_ok):
                exit_code = EXIT_BOUND
            rows.append({
                "eps": eps,
                "phi_tilde": phi_tilde,
                "phi": phi,
                "step_index": step_index,
                "residual_index": residual_index,
                "verdict": "respected" if step_ok and residual_ok else "violated",
            })
        skipped = [{"eps": eps, "phi_tilde": pt, "phi": p} for eps, pt, p in rates
                   if (eps, pt, p) not in feasible]

        report = ExperimentReport(
            command="asreg",
            exit_code=exit_code,
            summary=[
                f"eps={row['eps']}: step index {row['step_index']} <= {row['phi_tilde']}, "
                f"residual index {row['residual_index']} <= {row['phi']} ({row['verdict']})"
                for row in rows
            ],
            payload={
                "N": N,
                "map": T.to_dict(),
                "schedule": schedule.to_dict(),
                "recurrence_residual": (
                    IterationService.check_recurrence(trace, schedule, M, kappa) if N >= 2 else None
                ),
                "rows": rows,
                "infeasible": skipped,
            },
        )
        trace_path = os.path.join(cfg.out_dir, "asreg_trace.csv")
        report.files.append(write_csv(trace_path, TRACE_COLUMNS, trace.rows(), TRACE_FORMAT))
        _write_report(cfg, report)
        return report

    @staticmethod
    def run_meta(cfg):
        """Empirical metastability index N_emp against the tower bound Σ."""
        ball, T, schedule, u = _setup(cfg)
        kappa, M = ball.curvature, ball.diameter_bound
        grid = cfg.eps_in(0, 2)
        # windows need every point in memory
        N = min(cfg.horizon, int(current_runtime().config["TRACE_CAP"]) - 1)
        trace = IterationService.iterate(u, T, schedule, N, streaming=False)

        rows = []
        exit_code = EXIT_OK
        for eps in grid:
            tower = _tower(cfg, eps, kappa, M, schedule)
            sigma = tower.sigma
            try:
                n_emp = IterationService.empirical_metastability(trace, eps, cfg.g)
            except ExhaustedError as exc:
                logger.warning(f"meta eps={eps}: {exc}")
                n_emp = None
            if n_emp is None:
                verdict = "inconclusive"
                if exit_code == EXIT_OK:
                    exit_code = EXIT_INCONCLUSIVE
            else:
                verdict = _bound_verdict(n_emp, sigma)
                if verdict == "estimate" and BigCount(n_emp) < sigma:
                    verdict = "respected (estimate)"
                if verdict == "violated":
                    exit_code = EXIT_BOUND
            rows.append({
                "eps": eps,
                "N_emp": n_emp,
                "Σ": sigma,
                "estimate": sigma.is_estimate,
                "verdict": verdict,
                "tower": tower,
            })

        report = ExperimentReport(
            command="meta",
            exit_code=exit_code,
            summary=[
                f"eps={row['eps']}: N_emp={row['N_emp']} vs Σ={row['Σ']} ({row['verdict']})"
                for row in rows
            ],
            payload={"N": trace.length, "g": cfg.g.to_dict(), "rows": rows},
        )
        _write_report(cfg, report)
        return report

    @staticmethod
    def run_browder(cfg):
        """Empirical Browder index K_emp against K(ε, g, M)."""
        ball, T, _, u = _setup(cfg)
        kappa, M = ball.curvature, ball.diameter_bound
        grid = cfg.eps_in(0, 1)
        budget = _digit_budget(cfg)
        tol = cfg.browder.get("tol")
        tol = None if tol is None else float(tol)
        default_depth = int(cfg.browder.get("depth", 64))
        if cfg.browder.get("u") is not None:
            u = MapService.resolve_point(ball, cfg.browder["u"], None)

        bounds = []
        for eps in grid:
            K = RateService.browder_K(eps, cfg.g, M, kappa, digit_budget=budget)
            depth = default_depth
            if K.is_exact:
                depth = max(depth, K.value + int(cfg.g(K.value)))
            bounds.append((eps, K, depth))
        depth = max(row[2] for row in bounds)
        cap = int(current_runtime().config["BROWDER_ITERATION_BUDGET"])
        if depth > cap:
            logger.warning(f"Browder depth {depth} capped at {cap}")
            depth = cap
        family = BrowderService.resolvent_family(u, T, depth, tol=tol)
        solver_tol = max(point.residual for point in family)
        monotone, largest_drop = BrowderService.check_family_monotone(
            family, u, solver_tol, kappa
        )

        rows = []
        exit_code = EXIT_OK
        for eps, K, _ in bounds:
            try:
                k_emp = BrowderService.empirical_browder_metastability(family, eps, cfg.g, kappa)
            except ExhaustedError as exc:
                logger.warning(f"browder eps={eps}: {exc}")
                k_emp = None
            if k_emp is None:
                verdict = "inconclusive"
                if exit_code == EXIT_OK:
                    exit_code = EXIT_INCONCLUSIVE
            else:
                verdict = _bound_verdict(k_emp, K)
                if verdict == "violated":
                    exit_code = EXIT_BOUND
            rows.append({
                "eps": eps,
                "K": K,
                "K_exponent": RateService.browder_K_exponent(eps, M, kappa),
                "K_emp": k_emp,
                "window_threshold": BrowderService.browder_window_threshold(eps, M, kappa.kappa),
                "verdict": verdict,
            })

        def family_rows():
            for point in family:
                yield (
                    point.index,
                    repr(float(point.t)),
                    repr(GeometryService.distance(u, point.z, kappa)),
                    repr(float(point.residual)),
                )

        report = ExperimentReport(
            command="browder",
            exit_code=exit_code,
            summary=[
                f"eps={row['eps']}: K_emp={row['K_emp']} vs K={row['K']} ({row['verdict']})"
                for row in rows
            ] + [f"d(u, z_i) monotone: {monotone}"],
            payload={
                "depth": depth,
                "monotone": monotone,
                "largest_drop": largest_drop,
                "rows": rows,
            },
        )
        family_path = os.path.join(cfg.out_dir, "browder_family.csv")
        report.files.append(write_csv(family_path, FAMILY_COLUMNS, family_rows(), FAMILY_FORMAT))
        _write_report(cfg, report)
        return report

    @staticmethod
    def run_fuzz(cfg, oracles=None, trials=None, workers=None):
        """Oracle campaigns; exit 3 on any violation, 5 when an oracle accepted nothing."""
        oracles = list(oracles or cfg.fuzz.get("oracles") or ORACLES)
        trials = trials if trials is not None else cfg.fuzz.get("trials")
        workers = workers if workers is not None else cfg.fuzz.get("workers")
        reports = FuzzService.run_all(oracles, trials=trials, seed=cfg.seed, workers=workers)

        exit_code = EXIT_OK
        if any(not r.passed for r in reports):
            exit_code = EXIT_INEQUALITY
        elif any(r.accepted == 0 for r in reports):
            exit_code = EXIT_INCONCLUSIVE

        report = ExperimentReport(
            command="fuzz",
            exit_code=exit_code,
            summary=[
                f"{r.oracle}: {r.accepted}/{r.trials} accepted, {r.skipped} skipped, "
                f"{r.oracle_errors} oracle errors, {r.violations} violations, "
                f"max residual {r.max_residual:.3e}"
                for r in reports
            ],
            payload={"oracles": reports},
        )
        for r in reports:
            path = os.path.join(cfg.out_dir, f"fuzz_{r.oracle}.json")
            report.files.append(write_json(path, {
                "format": REPORT_FORMAT,
                "version": __version__,
                **r.to_dict(),
            }))
        _write_report(cfg, report)
        return report

    @staticmethod
    def run_rates(cfg):
        """Closed-form rates and the tower for every eps of the grid."""
        ball = MapService.build_ball(cfg.space, cfg.ball)
        schedule = ScheduleService.build_schedule(cfg.schedule)
        kappa, M = ball.curvature, ball.diameter_bound
        gamma, theta, alpha = _moduli(schedule)
        budget = _digit_budget(cfg)
        with_tower = bool(cfg.rates.get("tower", True))

        rows = []
        for eps in cfg.eps:
            row = {
                "eps": eps,
                "Φ̃": RateService.phi_tilde(eps, kappa, M, gamma, theta),
                "Φ": RateService.phi(eps, kappa, M, gamma, theta, alpha),
            }
            if schedule.is_harmonic:
                row["Ψ"] = RateService.psi_harmonic(eps, kappa, M, digit_budget=budget)
            if eps < 1:
                row["K"] = RateService.browder_K(eps, cfg.g, M, kappa, digit_budget=budget)
            if eps < 2:
                row["proof_constants"] = RateService.proof_constants(eps, kappa, M)
                if with_tower:
                    row["tower"] = _tower(cfg, eps, kappa, M, schedule)
            rows.append(row)

        payload = {"schedule": schedule.to_dict(), "M": M, "rows": rows}
        if "P" in cfg.rates:
            P = cfg.rates["P"]
            payload["sequence_lemma"] = [
                {"eps": eps, "P": P, "Σ": RateService.sigma_sequence_lemma(eps, P, gamma, theta)}
                for eps in cfg.eps
            ]
        if cfg.aoyama:
            payload["aoyama"] = ExperimentService.aoyama_section(cfg.aoyama)

        summary = []
        for row in rows:
            line = f"eps={row['eps']}: Φ̃={row['Φ̃']} Φ={row['Φ']}"
            if "Ψ" in row:
                line += f" Ψ={row['Ψ']}"
            if "K" in row:
                line += f" K={row['K']}"
            if "tower" in row:
                line += f" Σ={row['tower'].sigma}"
            summary.append(line)
        if "aoyama" in payload:
            section = payload["aoyama"]
            summary.append(f"Θ={section['Θ']} Δ={section['Δ']}")

        report = ExperimentReport(command="rates", exit_code=EXIT_OK, summary=summary, payload=payload)
        _write_report(cfg, report)
        return report

    @staticmethod
    def aoyama_section(spec):
        """Θ and Δ for an ``aoyama`` section {eps, L, theta, psi, g}."""
        spec = dict(spec)
        try:
            eps, L = spec["eps"], spec["L"]
        except KeyError as exc:
            raise ConfigurationError(f"aoyama section needs {exc}") from exc
        theta = ScheduleService.build_theta(spec.get("theta"), default=None)
        psi = ScheduleService.build_modulus(spec.get("psi"), None)
        if psi is None:
            raise ConfigurationError("aoyama section needs psi")
        g = GFunction.from_spec(spec.get("g") or {"kind": "constant", "c": 0})
        Theta, Delta = RateService.aoyama_theta_delta(eps, L, theta, psi, g)
        return {"eps": eps, "L": L, "Θ": Theta, "Δ": Delta}
