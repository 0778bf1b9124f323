"""Oracle service - executable forms of the comparison inequalities.

Every check returns LHS - RHS (so a value <= tolerance means the inequality
holds). Checks with a filtering hypothesis return None when the hypothesis
fails on the supplied configuration.
"""
import logging
import math
from fractions import Fraction

import numpy as np

from halpern_rates.errors import ContractViolationError, DomainError, ExhaustedError
from halpern_rates.models.bigcount import BigCount
from halpern_rates.models.reports import AoyamaReport, Prop71Report
from halpern_rates.models.schedule import EpsilonModulus
from halpern_rates.models.triangle import MIN_SIDE, SCQuantities
from halpern_rates.services.geometry_service import GeometryService, angle_between, slerp_vectors
from halpern_rates.services.map_service import MapService
from halpern_rates.services.rate_service import RateService
from halpern_rates.services.schedule_service import ScheduleService, cos_data

logger = logging.getLogger(__name__)

TRIG_TOLERANCE = 1e-9
BROWDER_TOLERANCE = 1e-8
SIN_SUM_TOLERANCE = 1e-12
ANGLE_TOLERANCE = 1e-6

S_RESIDUALS = ("s2_minus_s3", "s3_minus_s1", "sc_identity", "s2_s3_s4", "s3_s1_s5")


def _hav(a):
    """sin^2(a/2); works on floats and arrays."""
    return np.sin(np.asarray(a) / 2.0) ** 2 if isinstance(a, np.ndarray) else math.sin(a / 2.0) ** 2


def _angles_to(vectors, target):
    """Unscaled angles from each row of ``vectors`` to ``target``."""
    vectors = np.asarray(vectors, dtype=float)
    return 2.0 * np.arctan2(
        np.linalg.norm(vectors - target, axis=-1), np.linalg.norm(vectors + target, axis=-1)
    )


class OracleService:
    """Service for the comparison inequalities and the sequence lemmas."""

    # Triangle configurations

    @staticmethod
    def compute_sc(cfg):
        """S1..S5, C1, C2 (and L1, L2 when 0 < s < 1) of a TriangleConfig."""
        a = cfg.scaled
        xw, xv, xy, xz = a("x", "w"), a("x", "v"), a("x", "y"), a("x", "z")
        yw, zv = a("y", "w"), a("z", "v")
        L1 = L2 = None
        if 0.0 < cfg.s < 1.0:
            L1 = math.sin(xv) / math.sin(xz)
            L2 = math.sin(zv) / math.sin(xz)
        return SCQuantities(
            S1=math.sin(xw) * math.sin(xv),
            S2=math.sin(xy) * math.sin(xz),
            S3=math.sin(xw) * math.sin(xz),
            S4=math.sin(yw) * math.sin(xz),
            S5=math.sin(xw) * math.sin(zv),
            C1=math.cos(xw) * math.cos(xv),
            C2=math.cos(xy) * math.cos(xz),
            L1=L1,
            L2=L2,
        )

    @staticmethod
    def check_s_inequalities(cfg):
        """Residuals of the five S/C relations, in S_RESIDUALS order.

        The third entry is an identity and must vanish two-sided.
        """
        q = OracleService.compute_sc(cfg)
        a = cfg.scaled
        xw, xv, xy = a("x", "w"), a("x", "v"), a("x", "y")
        return np.array([
            q.S2 - q.S3 - q.S4 * math.cos(xw),
            q.S3 - q.S1 - q.S5 * math.cos(xv),
            q.S2 * q.C1 - q.S1 * q.C2 - (q.S4 * math.cos(xv) + q.S5 * math.cos(xy)),
            q.S2 - q.S3 - q.S4 * math.cos(xv) - 2 * q.S4 * (_hav(xv) - _hav(xw)),
            q.S3 - q.S1 - q.S5 * math.cos(xy) - 2 * q.S5 * (_hav(xy) - _hav(xv)),
        ])

    @staticmethod
    def split_bound(cfg, r=None, s=None):
        """Right-hand side of the parametric split bound on sin^2(d(w,v) sqrt(kappa)/2).

        ``r`` and ``s`` default to the configuration's own parameters.
        """
        r = cfg.r if r is None else float(r)
        s = cfg.s if s is None else float(s)
        k = cfg.scaled_diameter
        a = cfg.scaled
        sk = math.sin(k)
        return (
            math.sin((1 - r) * k) / sk * _hav(a("y", "z"))
            + math.sin(r * k) / sk * max(_hav(a("x", "v")) - _hav(a("x", "w")), 0.0)
            + math.sin(s * k) / sk * _hav(k)
        )

    @staticmethod
    def check_comparison_props(cfg):
        """Residuals of the comparison bound and both split bounds on d(w, v)."""
        q = OracleService.compute_sc(cfg)
        a = cfg.scaled
        xw, xv, xy, xz = a("x", "w"), a("x", "v"), a("x", "y"), a("x", "z")
        lhs = _hav(a("w", "v"))
        comparison = q.S1 / q.S2 * _hav(a("y", "z")) + 0.5 * (1 - q.C1) - q.S1 / (2 * q.S2) * (1 - q.C2)
        split = (
            math.sin(xw) / math.sin(xy) * _hav(a("y", "z"))
            + math.sin(a("y", "w")) / math.sin(xy) * (_hav(xv) - _hav(xw))
            + math.sin(a("z", "v")) / math.sin(xz) * _hav(xy)
        )
        return {
            "comparison": lhs - comparison,
            "split": lhs - split,
            "split_parametric": lhs - OracleService.split_bound(cfg),
        }

    @staticmethod
    def check_lemma_contraction(x, y, z, t, curvature, M=None):
        """Convexity of the distance along [x, z] and [y, z] at parameter t.

        d((1-t)x + tz, (1-t)y + tz) <= sin((1-t)M sqrt(kappa))/sin(M sqrt(kappa)) d(x, y),
        and the result is at most d(x, y). Returns the larger residual.
        """
        t = float(t)
        if not 0.0 < t < 1.0:
            raise DomainError(f"t = {t} outside (0, 1)")
        dist = GeometryService.distance
        dxy = dist(x, y, curvature)
        if M is None:
            M = max(dxy, dist(y, z, curvature), dist(z, x, curvature))
        if M > curvature.d_kappa / 2:
            raise DomainError(f"Side bound {M} exceeds D_kappa/2")
        k = M * curvature.sqrt_kappa
        p = slerp_vectors(x.direction, z.direction, t)
        q = slerp_vectors(y.direction, z.direction, t)
        lhs = angle_between(p, q) / curvature.sqrt_kappa
        factor = math.sin((1 - t) * k) / math.sin(k) if k > 0 else 1.0
        return max(lhs - factor * dxy, lhs - dxy)

    @staticmethod
    def check_lemma_meta1(x, y, z, w, curvature):
        """Distance and comparison-angle conclusions for w on [x, z].

        Returns {"distance": d(x,w) - d(x,y), "angle": pi/2 - angle at w̄},
        or None when the cosine hypothesis fails or w coincides with z.
        """
        dist = GeometryService.distance
        sk = curvature.sqrt_kappa
        dxy, dyz, dzx = dist(x, y, curvature), dist(y, z, curvature), dist(z, x, curvature)
        dxw, dwz, dyw = dist(x, w, curvature), dist(w, z, curvature), dist(y, w, curvature)
        if abs(dxw + dwz - dzx) > 1e-10:
            raise DomainError("w is not on the segment [x, z]")
        if dwz < MIN_SIDE:
            return None
        if math.cos(dyz * sk) < math.cos(dyw * sk) * math.cos(dwz * sk):
            return None
        angle_residual = 0.0
        if dxw >= MIN_SIDE:
            tri = GeometryService.comparison_triangle(dxy, dyz, dzx, curvature)
            wbar = GeometryService.geodesic_point(tri.xbar, tri.zbar, dxw / dzx, tri.curvature)
            angle = GeometryService.vertex_angle(wbar, tri.ybar, tri.xbar, tri.curvature)
            angle_residual = math.pi / 2 - angle
        return {"distance": dxw - dxy, "angle": angle_residual}

    @staticmethod
    def check_lemma_E(cfg):
        """Bounds on L1 for v strictly inside [x, z].

        Keys: "positivity" (L1 - 1, must be negative), "upper"
        (1 - L1 - L2 cos(d(x,v) sqrt(kappa))) and "ratio"
        (L1/(1 - L1) - 1/(s cos(M sqrt(kappa)))).
        """
        if not 0.0 < cfg.s < 1.0:
            raise DomainError(f"s = {cfg.s} outside (0, 1)")
        q = OracleService.compute_sc(cfg)
        k = cfg.scaled_diameter
        return {
            "positivity": q.L1 - 1.0,
            "upper": (1.0 - q.L1) - q.L2 * math.cos(cfg.scaled("x", "v")),
            "ratio": q.L1 / (1.0 - q.L1) - 1.0 / (cfg.s * math.cos(k)),
        }

    @staticmethod
    def check_prop47(cfg, q, s=None):
        """Bounds on sin^2(d(y,v) sqrt(kappa)/2) for v = s x + (1-s) z.

        Item "i" is unconditional. Item "ii" needs d(q,z) <= d(y,v) and
        d(x,y) <= d(x,v); it is None when either fails.
        """
        if s is not None and abs(float(s) - cfg.s) > 1e-15:
            raise ContractViolationError(f"s = {s} does not match the configuration (s = {cfg.s})")
        if not 0.0 < cfg.s < 1.0:
            raise DomainError(f"s = {cfg.s} outside (0, 1)")
        sc = OracleService.compute_sc(cfg)
        a = cfg.scaled
        sk = cfg.curvature.sqrt_kappa
        k = cfg.scaled_diameter
        lhs = _hav(a("y", "v"))
        item_i = lhs - (
            sc.L1 * _hav(a("y", "z")) + (1 - sc.L1) / 2 - 0.5 * math.cos(a("x", "y")) * sc.L2
        )
        dist = GeometryService.distance
        dqz = dist(q, cfg.z, cfg.curvature)
        gap = _hav(a("x", "y")) - _hav(a("x", "v"))
        item_ii = None
        if dqz <= cfg.d("y", "v") and gap <= 0.0:
            dyq = dist(cfg.y, q, cfg.curvature) * sk
            item_ii = lhs - (
                gap + (_hav(dyq) + math.sin(dyq / 2)) / (cfg.s * math.cos(k))
            )
        return {"i": item_i, "ii": item_ii}

    @staticmethod
    def check_sin_sum(a, b):
        """sin^2((a+b)/2) - sin^2(a/2) - sin^2(b/2) - sin(a)/2 for a, b in [0, pi]."""
        a, b = float(a), float(b)
        if not (0.0 <= a <= math.pi and 0.0 <= b <= math.pi):
            raise DomainError(f"({a}, {b}) outside [0, pi]^2")
        return _hav(a + b) - _hav(a) - _hav(b) - 0.5 * math.sin(a)

    # Halpern and Browder sequences

    @staticmethod
    def gamma_nt(u, z_t, x_next, curvature):
        """sin^2(d(u, z_t) sqrt(kappa)/2) - sin^2(d(u, x_{n+1}) sqrt(kappa)/2)."""
        dist = GeometryService.distance
        sk = curvature.sqrt_kappa
        return _hav(dist(u, z_t, curvature) * sk) - _hav(dist(u, x_next, curvature) * sk)

    @staticmethod
    def check_prop71(trace, browder, schedule, M, curvature):
        """Residuals of the three gamma_n^t bounds along a trace, n = 1..N-1.

        Item (i) is only evaluated where gamma_n^t >= 0.
        """
        t = float(browder.t)
        if not 0.0 < t < 1.0:
            raise DomainError(f"t = {t} outside (0, 1)")
        N = trace.length
        if N < 2:
            raise ContractViolationError("Trace needs at least 3 points")
        k, _, _ = cos_data(M, curvature)
        sk = curvature.sqrt_kappa
        X = trace.vectors()
        u = trace.u.direction
        z = browder.z.direction
        du = _angles_to(X, u)
        dz = _angles_to(X, z)
        res = np.asarray(trace.residual_distances) * sk
        n = np.arange(1, N)

        gamma = _hav(angle_between(u, z)) - _hav(du[n + 1])
        a_n = (_hav(res[n + 1]) + np.sin(res[n + 1] / 2)) / math.cos(k)
        res_ii = gamma - a_n / t
        mask = gamma >= 0
        res_i = gamma[mask] - (a_n[mask] / t - _hav(dz[n + 1][mask]))
        lam = schedule.values(2, N + 1)
        sin_k = math.sin(k)
        rhs_iv = (
            np.sin((1 - lam) * k) / sin_k * _hav(dz[n])
            + np.sin(lam * k) / sin_k * np.maximum(gamma, 0.0)
            + math.sin(t * k) / sin_k * _hav(k)
        )
        res_iv = _hav(dz[n + 1]) - rhs_iv
        report = Prop71Report(
            checked=int(n.size),
            item_i_checked=int(mask.sum()),
            max_residual_i=float(res_i.max()) if res_i.size else 0.0,
            max_residual_ii=float(res_ii.max()),
            max_residual_iv=float(res_iv.max()),
            tolerance=BROWDER_TOLERANCE,
        )
        if not report.passed:
            logger.error(f"gamma_n^t bounds violated: {report.to_dict()}")
        return report

    @staticmethod
    def check_gamma_limsup(trace, browder, schedule, M, curvature, eps):
        """gamma_n^t <= eps for every traced n from the limsup rate on.

        Returns a dict with the rate, the number of indices checked and the
        largest gamma_n^t among them; ``holds`` is vacuous when the rate lies
        beyond the trace.
        """
        if browder.index >= 1:
            t = Fraction(1, browder.index + 1)
        else:
            t = Fraction(repr(float(browder.t)))
        rate = RateService.limsup_rate(
            eps, curvature, M, t, schedule.gamma, schedule.theta, schedule.alpha
        )
        N = trace.length
        if rate.is_estimate or rate.value > N - 1:
            return {"rate": rate, "checked": 0, "max_gamma": None, "holds": True}
        u = trace.u.direction
        X = trace.vectors()
        n = np.arange(rate.value, N)
        gamma = _hav(angle_between(u, browder.z.direction)) - _hav(_angles_to(X[n + 1], u))
        max_gamma = float(gamma.max()) if gamma.size else None
        holds = max_gamma is None or max_gamma <= float(eps) + BROWDER_TOLERANCE
        return {"rate": rate, "checked": int(n.size), "max_gamma": max_gamma, "holds": holds}

    @staticmethod
    def check_lemma73(family, i, j, delta, u, nonexpansive_map, curvature, M):
        """Comparison of gamma_n^i with gamma_n^j under a gap hypothesis.

        Hypothesis: d(u, T z_i) - d(u, T z_j) <= delta/sqrt(kappa). The
        x_{n+1} terms cancel in gamma_n^i - gamma_n^j, so one evaluation
        covers every n. Returns None when the hypothesis fails.
        """
        delta = float(delta)
        if not 0.0 < delta < 1.0:
            raise DomainError(f"delta = {delta} outside (0, 1)")
        dist = GeometryService.distance
        sk = curvature.sqrt_kappa
        zi, zj = family[i].z, family[j].z
        tzi = MapService.apply(nonexpansive_map, zi)
        tzj = MapService.apply(nonexpansive_map, zj)
        if dist(u, tzi, curvature) - dist(u, tzj, curvature) > delta / sk:
            return None
        K = M * sk
        h = K / (2 * (j + 1))
        extra = (
            math.sin(h) ** 2
            + 2 * math.sin(h)
            + math.sin(delta / 2) ** 2
            + 2 * math.sin(delta / 2) * math.sin(K / 2)
        )
        diff = _hav(dist(u, zi, curvature) * sk) - _hav(dist(u, zj, curvature) * sk)
        return diff - extra

    @staticmethod
    def check_sequence_lemma(a, alpha, b, eps, P, gamma, theta, tol=1e-12):
        """a_n <= eps for n >= Sigma(eps, P, gamma, theta) on finite sequences.

        Sequences are indexed from n = 1 (``a[0]`` is a_1); ``alpha[m]`` is
        alpha_{m+1}. The recurrence a_{n+1} <= (1 - alpha_{n+1}) a_n + b_n and
        the bound a_n <= P are verified first.
        """
        a = np.asarray(a, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        b = np.asarray(b, dtype=float)
        m = a.size - 1
        if alpha.size < a.size or b.size < m:
            raise ContractViolationError("alpha and b must cover the a sequence")
        if m > 0:
            rec = a[1:] - ((1 - alpha[1:m + 1]) * a[:-1] + b[:m])
            if float(rec.max()) > tol:
                raise ContractViolationError(f"Recurrence violated by {float(rec.max())}")
        if float(a.max(initial=0.0)) > float(P) + tol:
            raise ContractViolationError(f"a_n exceeds the bound P = {P}")
        sigma = RateService.sigma_sequence_lemma(eps, P, gamma, theta)
        if sigma.is_estimate or sigma.value > a.size:
            return {"sigma": sigma, "checked": 0, "max_tail": None, "holds": True}
        tail = a[sigma.value - 1:]
        max_tail = float(tail.max())
        return {
            "sigma": sigma,
            "checked": int(tail.size),
            "max_tail": max_tail,
            "holds": max_tail <= float(eps) + tol,
        }

    @staticmethod
    def check_aoyama(s, alpha, t, delta, Theta, g, eps, tol=1e-10):
        """Window verdict s_n <= eps on [Theta, Theta + g(Theta)].

        Sequences start at n = 1 (``s[0]`` is s_1). The recurrence
        s_{n+1} <= (1 - alpha_n) s_n + alpha_n t_n + Delta is verified first.

        Raises:
            ContractViolationError: the sequences violate the recurrence
            ExhaustedError: the window runs past the supplied sequence
        """
        s = np.asarray(s, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        t = np.asarray(t, dtype=float)
        m = s.size - 1
        if alpha.size < m or t.size < m:
            raise ContractViolationError("alpha and t must cover the s sequence")
        d = float(delta) if isinstance(delta, (Fraction, float, int)) else 0.0
        recurrence = 0.0
        if m > 0:
            rec = s[1:] - ((1 - alpha[:m]) * s[:-1] + alpha[:m] * t[:m] + d)
            recurrence = float(rec.max())
        if recurrence > tol:
            raise ContractViolationError(f"Recurrence violated by {recurrence}")
        Theta = BigCount.coerce(Theta)
        if Theta.is_estimate or Theta.value > s.size:
            raise ExhaustedError(f"Theta = {Theta} lies beyond the {s.size} supplied terms")
        start = Theta.value
        stop = start + int(g(start))
        if stop > s.size:
            raise ExhaustedError(f"Window [{start}, {stop}] runs past the {s.size} supplied terms")
        max_in = float(s[start - 1:stop].max())
        return AoyamaReport(
            theta=Theta,
            delta=delta,
            window=[start, stop],
            max_in_window=max_in,
            eps=float(eps),
            holds=max_in <= float(eps) + tol,
            recurrence_residual=recurrence,
        )

    @staticmethod
    def halpern_aoyama_instance(trace, browder, schedule, M, curvature, eps, g):
        """Run check_aoyama on the sequences a Halpern trace induces.

        s_n = sin^2(d(x_n, z_J) sqrt(kappa)/2), alpha_n = mu_{n+1} and
        t_n = max(gamma_n^J / cos(M sqrt(kappa)), 0). theta is theta~ of the
        schedule and psi(eps/3) is the first traced index after which
        t_n <= eps/3.

        Raises:
            ExhaustedError: t_n never settles below eps/3 within the trace
            ContractViolationError: the Browder parameter is too large for
                the computed Delta
        """
        N = trace.length
        if N < 2:
            raise ContractViolationError("Trace needs at least 3 points")
        k, _, _ = cos_data(M, curvature)
        X = trace.vectors()
        u = trace.u.direction
        z = browder.z.direction
        t_param = float(browder.t)

        s = _hav(_angles_to(X[1:], z))
        alpha = ScheduleService.mu_values(schedule, 2, N + 1, M, curvature)
        gamma = _hav(angle_between(u, z)) - _hav(_angles_to(X[2:], u))
        t_seq = np.maximum(gamma / math.cos(k), 0.0)

        third = float(eps) / 3
        above = np.flatnonzero(t_seq > third)
        if above.size and above[-1] == t_seq.size - 1:
            raise ExhaustedError("t_n does not settle below eps/3 within the trace")
        psi_value = int(above[-1]) + 2 if above.size else 1
        L = Fraction(repr(_hav(k)))
        Theta, Delta = RateService.aoyama_theta_delta(
            eps,
            L,
            lambda n: ScheduleService.theta_tilde(schedule, n, M, curvature),
            EpsilonModulus.constant(psi_value),
            g,
        )
        own = math.sin(t_param * k) / math.sin(k) * _hav(k)
        if isinstance(Delta, Fraction) and own > float(Delta):
            raise ContractViolationError(
                f"Browder parameter t = {t_param} leaves a perturbation {own} above Delta = {float(Delta)}"
            )
        logger.info(f"Aoyama instance: psi = {psi_value}, Theta = {Theta}")
        return OracleService.check_aoyama(s, alpha, t_seq, Delta, Theta, g, eps)

