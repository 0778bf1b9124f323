"""Fuzz service - seeded campaigns driving the inequality oracles.

Each trial draws a curvature and a scaled diameter from the campaign grid,
then samples configurations in a ball of radius M/2 around the pole of S^2
until the oracle's hypotheses hold or the attempt cap runs out. Trial
randomness derives from (seed, oracle index, trial index) only, so reports
do not depend on the worker count.
"""
import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Any, Dict, Optional

import numpy as np

from halpern_rates import create_runtime, current_runtime
from halpern_rates.errors import ConfigurationError, DomainError
from halpern_rates.models.ball import ConvexBall
from halpern_rates.models.curvature import Curvature, ModelPoint
from halpern_rates.models.maps import GeodesicPull, Rotation
from halpern_rates.models.reports import FuzzReport
from halpern_rates.models.schedule import ModuliSchedule
from halpern_rates.models.triangle import TriangleConfig
from halpern_rates.services.browder_service import BrowderService
from halpern_rates.services.geometry_service import GeometryService
from halpern_rates.services.iteration_service import IterationService
from halpern_rates.services.map_service import MapService
from halpern_rates.services.oracle_service import (
    ANGLE_TOLERANCE,
    BROWDER_TOLERANCE,
    SIN_SUM_TOLERANCE,
    TRIG_TOLERANCE,
    OracleService,
)
from halpern_rates.utils.sampling import make_rng

logger = logging.getLogger(__name__)

KAPPA_GRID = (0.5, 1.0, 4.0)
SCALED_DIAMETER_GRID = (0.2, 0.8, 1.4)

ORACLES = (
    "s_inequalities",
    "comparison_props",
    "lemma_contraction",
    "lemma_meta1",
    "lemma_E",
    "prop47",
    "sin_sum",
    "prop71",
    "lemma73",
    "cat_residual",
)

# Trace and family sizes for the oracles that need a Halpern run
TRACE_STEPS = 40
FAMILY_DEPTH = 6
PICARD_TOL = 1e-12
PICARD_CAP = 200_000


@dataclass
class Setting:
    """Curvature and ball drawn for one trial."""

    curvature: Curvature
    M: float
    ball: ConvexBall

    def to_dict(self):
        return {"kappa": self.curvature.kappa, "M": self.M}


@dataclass
class Outcome:
    """An accepted configuration: its residual and the excess over tolerance."""

    residual: float
    excess: float
    config: Dict[str, Any]


class RejectedDraw(Exception):
    """A drawn configuration misses the hypotheses of the oracle under test."""


@contextmanager
def hypotheses():
    """Turn domain errors raised while building a configuration into rejections."""
    try:
        yield
    except DomainError as exc:
        raise RejectedDraw(str(exc)) from exc


def draw_setting(rng):
    kappa = float(rng.choice(KAPPA_GRID))
    k = float(rng.choice(SCALED_DIAMETER_GRID))
    curvature = Curvature(kappa)
    M = k / curvature.sqrt_kappa
    pole = ModelPoint((0.0, 0.0, 1.0))
    return Setting(curvature=curvature, M=M, ball=ConvexBall(pole, M / 2, curvature))


def _points(rng, setting, count):
    with hypotheses():
        return [MapService.sample_point(setting.ball, rng) for _ in range(count)]


def _triangle(rng, setting, r=None, s=None):
    x, y, z = _points(rng, setting, 3)
    r = rng.random() if r is None else r
    s = rng.random() if s is None else s
    with hypotheses():
        return TriangleConfig(x, y, z, r, s, setting.curvature, setting.M)


def _outcome(residual, tolerance, config):
    return Outcome(residual=float(residual), excess=float(residual) - tolerance, config=config)


def _random_map(rng, setting):
    """Pull towards a random anchor or rotation about the pole, with equal odds."""
    with hypotheses():
        if rng.random() < 0.5:
            anchor = MapService.sample_point(setting.ball, rng)
            return GeodesicPull(setting.ball, anchor, 0.1 + 0.8 * rng.random())
        return Rotation(setting.ball, rng.uniform(-math.pi, math.pi))


# Campaigns: fn(rng, setting) -> Outcome, or None when the hypotheses fail


def _trial_s_inequalities(rng, setting):
    cfg = _triangle(rng, setting)
    res = OracleService.check_s_inequalities(cfg)
    one_sided = float(np.max(np.delete(res, 2)))
    residual = max(one_sided, abs(float(res[2])))
    return _outcome(residual, TRIG_TOLERANCE, cfg.to_dict())


def _trial_comparison_props(rng, setting):
    cfg = _triangle(rng, setting)
    residual = max(OracleService.check_comparison_props(cfg).values())
    return _outcome(residual, TRIG_TOLERANCE, cfg.to_dict())


def _trial_lemma_contraction(rng, setting):
    x, y, z = _points(rng, setting, 3)
    t = rng.random()
    if not 0.0 < t < 1.0:
        return None
    residual = OracleService.check_lemma_contraction(x, y, z, t, setting.curvature, setting.M)
    config = {
        "x": x.to_list(),
        "y": y.to_list(),
        "z": z.to_list(),
        "t": t,
        **setting.to_dict(),
    }
    return _outcome(residual, TRIG_TOLERANCE, config)


def _trial_lemma_meta1(rng, setting):
    x, y, z = _points(rng, setting, 3)
    with hypotheses():
        w = GeometryService.geodesic_point(x, z, rng.random(), setting.curvature)
    verdict = OracleService.check_lemma_meta1(x, y, z, w, setting.curvature)
    if verdict is None:
        return None
    config = {
        "x": x.to_list(),
        "y": y.to_list(),
        "z": z.to_list(),
        "w": w.to_list(),
        **setting.to_dict(),
    }
    return Outcome(
        residual=max(verdict.values()),
        excess=max(verdict["distance"] - TRIG_TOLERANCE, verdict["angle"] - ANGLE_TOLERANCE),
        config=config,
    )


def _trial_lemma_E(rng, setting):
    s = rng.random()
    if not 0.0 < s < 1.0:
        return None
    cfg = _triangle(rng, setting, s=s)
    res = OracleService.check_lemma_E(cfg)
    # strict positivity of 1 - L1 has no slack
    excess = max(res["upper"] - TRIG_TOLERANCE, res["ratio"] - TRIG_TOLERANCE, res["positivity"])
    return Outcome(residual=max(res.values()), excess=excess, config=cfg.to_dict())


def _trial_prop47(rng, setting):
    s = rng.random()
    if not 0.0 < s < 1.0:
        return None
    cfg = _triangle(rng, setting, s=s)
    q = MapService.sample_point(setting.ball, rng)
    res = OracleService.check_prop47(cfg, q)
    if res["ii"] is None:
        return None
    config = {**cfg.to_dict(), "q": q.to_list()}
    return _outcome(max(res["i"], res["ii"]), TRIG_TOLERANCE, config)


def _trial_sin_sum(rng, setting):
    a, b = rng.uniform(0.0, math.pi, size=2)
    return _outcome(OracleService.check_sin_sum(a, b), SIN_SUM_TOLERANCE, {"a": a, "b": b})


def _trial_prop71(rng, setting):
    T = _random_map(rng, setting)
    u = MapService.sample_point(setting.ball, rng)
    J = int(rng.integers(1, 9))
    schedule = ModuliSchedule.harmonic()
    trace = IterationService.iterate(u, T, schedule, TRACE_STEPS)
    point = BrowderService.solve_fixed_point(
        u, 1.0 / (J + 1), T, tol=PICARD_TOL * setting.M, max_iter=PICARD_CAP
    )
    report = OracleService.check_prop71(trace, point, schedule, setting.M, setting.curvature)
    config = {"map": T.to_dict(), "u": u.to_list(), "t": point.t, **setting.to_dict()}
    return _outcome(report.max_residual, BROWDER_TOLERANCE, config)


def _trial_lemma73(rng, setting):
    T = _random_map(rng, setting)
    u = MapService.sample_point(setting.ball, rng)
    family = BrowderService.resolvent_family(u, T, FAMILY_DEPTH, tol=PICARD_TOL * setting.M)
    i, j = (int(v) for v in rng.integers(0, FAMILY_DEPTH + 1, size=2))
    delta = rng.random()
    if not 0.0 < delta < 1.0:
        return None
    residual = OracleService.check_lemma73(
        family, i, j, delta, u, T, setting.curvature, setting.M
    )
    if residual is None:
        return None
    config = {
        "map": T.to_dict(),
        "u": u.to_list(),
        "i": i,
        "j": j,
        "delta": delta,
        **setting.to_dict(),
    }
    return _outcome(residual, BROWDER_TOLERANCE, config)


def _trial_cat_residual(rng, setting):
    x, y, z = _points(rng, setting, 3)
    s, t = rng.random(2)
    # d(p, q) <= d(p̄, q̄); on the model space itself both sides agree
    residual = -GeometryService.cat_inequality_residual(x, y, z, s, t, setting.curvature)
    config = {
        "x": x.to_list(),
        "y": y.to_list(),
        "z": z.to_list(),
        "s": s,
        "t": t,
        **setting.to_dict(),
    }
    return _outcome(residual, TRIG_TOLERANCE, config)


_CAMPAIGNS = {
    "s_inequalities": (_trial_s_inequalities, TRIG_TOLERANCE),
    "comparison_props": (_trial_comparison_props, TRIG_TOLERANCE),
    "lemma_contraction": (_trial_lemma_contraction, TRIG_TOLERANCE),
    "lemma_meta1": (_trial_lemma_meta1, TRIG_TOLERANCE),
    "lemma_E": (_trial_lemma_E, TRIG_TOLERANCE),
    "prop47": (_trial_prop47, TRIG_TOLERANCE),
    "sin_sum": (_trial_sin_sum, SIN_SUM_TOLERANCE),
    "prop71": (_trial_prop71, BROWDER_TOLERANCE),
    "lemma73": (_trial_lemma73, BROWDER_TOLERANCE),
    "cat_residual": (_trial_cat_residual, TRIG_TOLERANCE),
}


def _campaign_worker(job):
    """Pool entry point: rebuild the runtime, then run one campaign."""
    oracle, trials, seed, attempt_cap, config_name, overrides = job
    runtime = create_runtime(config_name, **overrides)
    with runtime.context():
        return FuzzService.run_campaign(oracle, trials, seed, attempt_cap=attempt_cap)


class FuzzService:
    """Service for randomized oracle campaigns."""

    @staticmethod
    def oracle_index(oracle):
        if oracle not in _CAMPAIGNS:
            raise ConfigurationError(
                f"Unknown oracle '{oracle}'; expected one of {', '.join(ORACLES)}"
            )
        return ORACLES.index(oracle) if oracle in ORACLES else len(ORACLES)

    @staticmethod
    def run_trial(oracle, rng, attempt_cap):
        """Rejection-sample one accepted configuration.

        A draw missing the oracle's hypotheses is a rejection. A domain error
        raised by the oracle itself on an accepted draw is counted apart.

        Returns:
            (outcome or None, rejected attempts, oracle errors)
        """
        trial, _ = _CAMPAIGNS[oracle]
        rejected = errors = 0
        for _ in range(attempt_cap):
            setting = draw_setting(rng)
            try:
                outcome = trial(rng, setting)
            except RejectedDraw:
                outcome = None
            except DomainError as exc:
                logger.debug(f"Oracle {oracle} raised on {setting.to_dict()}: {exc}")
                errors += 1
                continue
            if outcome is not None:
                return outcome, rejected, errors
            rejected += 1
        return None, rejected, errors

    @staticmethod
    def run_campaign(oracle, trials, seed, attempt_cap=None):
        """Run ``trials`` seeded trials of one oracle.

        Returns:
            FuzzReport with acceptance counts, the worst residual and the
            configuration that produced it
        """
        index = FuzzService.oracle_index(oracle)
        trials = int(trials)
        if trials < 1:
            raise ConfigurationError("trials must be at least 1")
        if attempt_cap is None:
            attempt_cap = int(current_runtime().config["FUZZ_ATTEMPT_CAP"])
        _, tolerance = _CAMPAIGNS[oracle]

        accepted = skipped = exhausted = violations = oracle_errors = 0
        max_residual = -math.inf
        worst: Optional[Outcome] = None
        for trial in range(trials):
            rng = make_rng([int(seed), index, trial])
            outcome, rejected, errors = FuzzService.run_trial(oracle, rng, attempt_cap)
            skipped += rejected
            oracle_errors += errors
            if outcome is None:
                exhausted += 1
                continue
            accepted += 1
            if outcome.excess > 0:
                violations += 1
            if worst is None or outcome.excess > worst.excess:
                worst = outcome
            max_residual = max(max_residual, outcome.residual)

        report = FuzzReport(
            oracle=oracle,
            trials=trials,
            accepted=accepted,
            skipped=skipped,
            exhausted=exhausted,
            violations=violations,
            max_residual=max_residual if accepted else 0.0,
            worst_config=worst.config if worst is not None else None,
            seed=int(seed),
            tolerance=tolerance,
            oracle_errors=oracle_errors,
        )
        if violations:
            logger.error(f"Oracle {oracle} violated on {violations} of {accepted} configurations")
        else:
            logger.info(f"Oracle {oracle}: {accepted} accepted, {skipped} skipped, no violations")
        if oracle_errors:
            logger.warning(f"Oracle {oracle} raised a domain error on {oracle_errors} draws")
        return report

    @staticmethod
    def run_all(oracles=None, trials=None, seed=None, workers=None, attempt_cap=None):
        """Run several campaigns, optionally on a process pool.

        Reports come back in the order of ``oracles`` whatever the worker count.
        """
        runtime = current_runtime()
        config = runtime.config
        oracles = list(oracles or ORACLES)
        if not oracles:
            raise ConfigurationError("Oracle list is empty")
        for oracle in oracles:
            FuzzService.oracle_index(oracle)
        trials = int(config["FUZZ_TRIALS"] if trials is None else trials)
        seed = int(config["DEFAULT_SEED"] if seed is None else seed)
        workers = int(config["WORKERS"] if workers is None else workers)

        if workers <= 1 or len(oracles) == 1:
            return [
                FuzzService.run_campaign(oracle, trials, seed, attempt_cap=attempt_cap)
                for oracle in oracles
            ]

        overrides = {key: config[key] for key in config if key.isupper()}
        jobs = [
            (oracle, trials, seed, attempt_cap, runtime.config_name, overrides)
            for oracle in oracles
        ]
        logger.info(f"Running {len(jobs)} campaigns on {workers} workers")
        with Pool(processes=min(workers, len(jobs))) as pool:
            return list(pool.imap(_campaign_worker, jobs))
