"""Shared test utilities: independent oracles and tiny builders.

The oracles here deliberately avoid the library's solution paths so that
tests compare two independent routes to the same number.
"""

from __future__ import annotations

import numpy as np

from pointsel.geom import Ray, Vec3
from pointsel.pointing import PointingRay, Trajectory


def brute_force_nearest(a: Ray, b: Ray, span: float | None = None,
                        final_step: float = 1e-4) -> tuple[np.ndarray, float, float]:
    """Exhaustive grid minimization of |p1 - p2|^2 over (t1, t2).

    Stage-refined uniform grids over [-span, span]; the final stage step is
    below the 1e-3 comparison resolution.  Returns (midpoint, t1, t2).
    The default span is derived from the inputs alone: the optimum satisfies
    |t| <= |origin gap| / |d1 x d2|.
    """
    o1, d1 = a.origin.as_array(), a.direction.as_array()
    o2, d2 = b.origin.as_array(), b.direction.as_array()
    if span is None:
        gap = float(np.linalg.norm(o2 - o1))
        cross = float(np.linalg.norm(np.cross(d1, d2)))
        span = gap / max(cross, 1e-6) + 2.0

    lo1, hi1 = -span, span
    lo2, hi2 = -span, span
    step = span / 200.0
    best_t1 = best_t2 = 0.0
    while True:
        t1 = np.arange(lo1, hi1 + step / 2, step)
        t2 = np.arange(lo2, hi2 + step / 2, step)
        p1 = o1[None, :] + t1[:, None] * d1[None, :]
        p2 = o2[None, :] + t2[:, None] * d2[None, :]
        diff = p1[:, None, :] - p2[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        i, j = np.unravel_index(np.argmin(sq), sq.shape)
        best_t1, best_t2 = float(t1[i]), float(t2[j])
        if step <= final_step:
            break
        lo1, hi1 = best_t1 - 2 * step, best_t1 + 2 * step
        lo2, hi2 = best_t2 - 2 * step, best_t2 + 2 * step
        step = step / 50.0
        if step < final_step:
            step = final_step
    p1 = o1 + best_t1 * d1
    p2 = o2 + best_t2 * d2
    return 0.5 * (p1 + p2), best_t1, best_t2


def make_ray(origin: Vec3, direction: Vec3, n_samples: int = 2,
             spread: float = 0.001) -> PointingRay:
    """A minimal PointingRay value for geometry-level tests.

    The samples cluster at ``origin`` so the ray's origin property equals
    it up to ``spread``.
    """
    times = np.arange(n_samples, dtype=float)
    d = direction.as_array()
    positions = origin.as_array()[None, :] + np.arange(n_samples)[:, None] * spread * d[None, :]
    positions = positions - positions.mean(axis=0) + origin.as_array()[None, :]
    return PointingRay(
        direction=direction.normalized(),
        sample_positions=Trajectory(times=times, positions=positions),
        net_displacement=0.2,
        mean_speed=0.1,
        explained_variance_ratio=1.0,
    )


def single_sample_ray(position: Vec3, direction: Vec3) -> PointingRay:
    """PointingRay whose trajectory is one sample at ``position``."""
    traj = Trajectory(times=np.array([0.0]), positions=position.as_array()[None, :])
    return PointingRay(
        direction=direction.normalized(),
        sample_positions=traj,
        net_displacement=0.2,
        mean_speed=0.1,
        explained_variance_ratio=1.0,
    )


def random_unit(rng: np.random.Generator) -> Vec3:
    v = rng.standard_normal(3)
    return Vec3.from_array(v / np.linalg.norm(v))


def tilt_direction(direction: Vec3, rng: np.random.Generator, sigma: float) -> Vec3:
    """Tilt a unit vector by independent N(0, sigma) perpendicular components."""
    d = direction.as_array()
    helper = np.array([0.0, 1.0, 0.0]) if abs(d[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(d, helper)
    u /= np.linalg.norm(u)
    v = np.cross(d, u)
    t = rng.standard_normal(2) * sigma
    out = d + t[0] * u + t[1] * v
    return Vec3.from_array(out / np.linalg.norm(out))
