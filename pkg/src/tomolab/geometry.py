"""Lines through the unit disc: normal parametrization, rays, exit times."""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LineNormal",
    "Ray",
    "normal_to_ray",
    "ray_to_normal",
    "canonicalize",
    "exit_time",
    "chord_endpoints",
    "chord_half_length",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class LineNormal:
    """The line {x : x . v_theta = r} with v_theta = (cos theta, sin theta)."""

    r: float
    theta: float

    def canonical(self):
        return LineNormal(*canonicalize(self.r, self.theta))


@dataclass(frozen=True)
class Ray:
    """Point ``x`` and unit direction ``v``."""

    x: tuple
    v: tuple

    def __post_init__(self):
        x = tuple(float(c) for c in self.x)
        v = tuple(float(c) for c in self.v)
        if abs(np.hypot(*v) - 1.0) > 1e-12:
            raise ValueError(f"ray direction must be a unit vector, |v| = {np.hypot(*v)!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)

    def at(self, t):
        return (self.x[0] + t * self.v[0], self.x[1] + t * self.v[1])


def canonicalize(r, theta):
    """Representative with r >= 0, and theta in [0, pi) when r == 0."""
    theta = float(np.mod(theta, TWO_PI))
    r = float(r)
    if r < 0:
        r, theta = -r, float(np.mod(theta + np.pi, TWO_PI))
    if r == 0.0 and theta >= np.pi:
        theta -= np.pi
    if theta >= TWO_PI:
        theta = 0.0
    return r, theta


def normal_to_ray(r, theta):
    """Unit-speed ray with base point r*v_theta and direction (-sin theta, cos theta)."""
    c, s = np.cos(theta), np.sin(theta)
    return Ray((r * c, r * s), (-s, c))


def ray_to_normal(ray):
    """Canonical (r, theta) of the unoriented line carrying ``ray``.

    The normal angle is the direction rotated clockwise by pi/2, so a ray
    produced by :func:`normal_to_ray` maps back to its own (r, theta)
    before canonicalization; the flipped ray maps to (-r, theta + pi).
    """
    v1, v2 = ray.v
    theta = np.arctan2(-v1, v2)
    r = ray.x[0] * np.cos(theta) + ray.x[1] * np.sin(theta)
    return canonicalize(r, theta)


def exit_time(x, v):
    """Time for the ray from x (|x| <= 1) in unit direction v to leave the disc.

    Works elementwise on arrays whose last axis holds the two coordinates.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    xx = np.sum(x * x, axis=-1)
    if np.any(xx > 1.0 + 1e-12):
        raise ValueError("exit_time needs |x| <= 1")
    xv = np.sum(x * v, axis=-1)
    return -xv + np.sqrt(np.maximum(1.0 - xx + xv * xv, 0.0))


def chord_half_length(r):
    r = np.asarray(r, dtype=float)
    return np.sqrt(np.maximum(1.0 - r * r, 0.0))


def chord_endpoints(line):
    """Unit-circle intersections of a line, or None for |r| >= 1.

    Ordered along the direction (-sin theta, cos theta).
    """
    r, theta = line.r, line.theta
    if abs(r) >= 1.0:
        return None
    half = float(np.sqrt(1.0 - r * r))
    ray = normal_to_ray(r, theta)
    return ray.at(-half), ray.at(half)
