"""Seeded draws of points inside geodesic balls."""
import math

import numpy as np

from halpern_rates.services.geometry_service import tangent_basis


def make_rng(seed):
    """numpy Generator from an int seed or a sequence of ints."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_tangent(center, rng):
    """Uniform unit tangent direction at ``center``."""
    basis = tangent_basis(center)
    coeffs = rng.standard_normal(basis.shape[0])
    norm = float(np.linalg.norm(coeffs))
    while norm < 1e-12:
        coeffs = rng.standard_normal(basis.shape[0])
        norm = float(np.linalg.norm(coeffs))
    return coeffs @ basis / norm


def random_radius(radius, sqrt_kappa, dim, rng):
    """Radius with density proportional to the spherical area element.

    Proposes r = R u^(1/dim) (the flat density) and accepts with
    probability (sin(r sqrt_kappa) / (r sqrt_kappa))^(dim - 1).
    """
    while True:
        r = radius * rng.random() ** (1.0 / dim)
        x = r * sqrt_kappa
        ratio = 1.0 if x < 1e-12 else math.sin(x) / x
        if rng.random() <= ratio ** (dim - 1):
            return r


def random_vector_in_ball(center, radius, sqrt_kappa, dim, rng):
    """Raw unit vector of a random point within ``radius`` of ``center``."""
    v = random_tangent(center, rng)
    r = random_radius(radius, sqrt_kappa, dim, rng) * sqrt_kappa
    out = math.cos(r) * center + math.sin(r) * v
    return out / np.linalg.norm(out)
