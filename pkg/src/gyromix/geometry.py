"""Poincare-ball primitives: Mobius addition, geodesic distance, exponential map.

Every kernel is a pure float64 function of its inputs, reduces over the last
axis, and broadcasts over arbitrary leading batch shapes.  Points live in the
open ball ``{x : c * ||x||^2 < 1}``.  Operations whose result can round onto
the boundary re-project it to the safety margin ``eps_ball``, because
``arctanh`` diverges there.

``c = 0`` selects the flat limits explicitly (vector addition for the
gyro-sum, ``2 * ||x - y||`` for the distance, identity for the map) rather
than evaluating the curved formulas at their removable singularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BallConfig",
    "DomainError",
    "ball_distance",
    "check_in_ball",
    "clip_norm",
    "cos_dist",
    "euclidean_limit_dist",
    "exp_map_0",
    "hyp_dist",
    "mobius_add",
    "project_to_ball",
]


class DomainError(ValueError):
    """An input lies outside the domain of a ball operation."""


@dataclass(frozen=True)
class BallConfig:
    """Curvature and numerical-safety settings shared by all ball operations.

    Attributes:
        c: curvature parameter, >= 0.  ``c = 0`` selects the Euclidean
            limit paths.
        r: clip radius for pre-map tangent vectors (used by the encoder's
            hyperbolic branch).
        eps_ball: boundary margin; projected points satisfy
            ``sqrt(c) * ||x|| <= 1 - eps_ball``.
    """

    c: float
    r: float = 2.3
    eps_ball: float = 1e-5

    def __post_init__(self):
        if not self.c >= 0.0:
            raise ValueError(f"BallConfig.c must be >= 0, got {self.c}")
        if not self.r > 0.0:
            raise ValueError(f"BallConfig.r must be > 0, got {self.r}")
        if not 0.0 < self.eps_ball < 1.0:
            raise ValueError(
                f"BallConfig.eps_ball must lie in (0, 1), got {self.eps_ball}"
            )

    @property
    def sqrt_c(self) -> float:
        return math.sqrt(self.c)


def _as_f64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


def _sqnorm(x: np.ndarray, keepdims: bool = False) -> np.ndarray:
    return np.sum(x * x, axis=-1, keepdims=keepdims)


def check_in_ball(x: np.ndarray, cfg: BallConfig, name: str = "x") -> None:
    """Raise :class:`DomainError` naming ``name`` if any point is outside the ball."""
    x = _as_f64(x)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} contains non-finite coordinates")
    if cfg.c > 0.0 and np.any(cfg.c * _sqnorm(x) >= 1.0):
        raise DomainError(
            f"{name} lies outside the open ball for c={cfg.c} "
            f"(requires c * ||x||^2 < 1)"
        )


def project_to_ball(x: np.ndarray, cfg: BallConfig) -> np.ndarray:
    """Rescale points onto ``sqrt(c) * ||x|| = 1 - eps_ball`` if they reach it.

    Interior points pass through unchanged; at ``c = 0`` there is no boundary.
    """
    x = _as_f64(x)
    if cfg.c == 0.0:
        return x
    limit = (1.0 - cfg.eps_ball) / cfg.sqrt_c
    norm = np.sqrt(_sqnorm(x, keepdims=True))
    scale = limit / np.where(norm >= limit, norm, limit)
    return x * scale


def mobius_add(x: np.ndarray, y: np.ndarray, cfg: BallConfig) -> np.ndarray:
    """Gyrovector addition ``x (+)_c y`` on the ball.

    At ``c = 0`` this is plain vector addition.  The result is re-projected
    inside the ball in case rounding pushed it onto the boundary.
    """
    x = _as_f64(x)
    y = _as_f64(y)
    if cfg.c == 0.0:
        return x + y
    check_in_ball(x, cfg, "x")
    check_in_ball(y, cfg, "y")
    c = cfg.c
    dot = np.sum(x * y, axis=-1, keepdims=True)
    xx = _sqnorm(x, keepdims=True)
    yy = _sqnorm(y, keepdims=True)
    num = (1.0 + 2.0 * c * dot + c * yy) * x + (1.0 - c * xx) * y
    den = 1.0 + 2.0 * c * dot + c * c * xx * yy
    return project_to_ball(num / den, cfg)


def hyp_dist(x: np.ndarray, y: np.ndarray, cfg: BallConfig) -> np.ndarray:
    """Geodesic distance ``(2 / sqrt(c)) * arctanh(sqrt(c) * ||-x (+)_c y||)``.

    Requires ``c > 0``; at ``c = 0`` callers must take the flat limit
    (:func:`euclidean_limit_dist`).  Finite for all valid inputs because the
    gyro-sum is kept ``eps_ball`` away from the boundary.
    """
    if cfg.c == 0.0:
        raise DomainError(
            "hyp_dist is undefined at c=0; use euclidean_limit_dist "
            "(the c->0 limit 2 * ||x - y||)"
        )
    x = _as_f64(x)
    y = _as_f64(y)
    check_in_ball(x, cfg, "x")
    check_in_ball(y, cfg, "y")
    gyro = mobius_add(-x, y, cfg)
    s = cfg.sqrt_c * np.sqrt(_sqnorm(gyro))
    if np.any(s >= 1.0):
        raise DomainError("||-x (+) y|| >= 1/sqrt(c) even after projection")
    d = (2.0 / cfg.sqrt_c) * np.arctanh(s)
    # Bitwise-identical inputs short-circuit to exact zero: rounding in the
    # gyro-sum numerator can otherwise leave a ~1e-16 residue.
    xb, yb = np.broadcast_arrays(x, y)
    same = np.all(xb == yb, axis=-1)
    return np.where(same, 0.0, d)


def euclidean_limit_dist(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """The ``c -> 0`` limit of the ball distance: ``2 * ||x - y||``."""
    diff = _as_f64(x) - _as_f64(y)
    return 2.0 * np.sqrt(_sqnorm(diff))


def ball_distance(x: np.ndarray, y: np.ndarray, cfg: BallConfig) -> np.ndarray:
    """Dispatch to :func:`hyp_dist` or its flat limit depending on ``cfg.c``."""
    if cfg.c == 0.0:
        return euclidean_limit_dist(x, y)
    return hyp_dist(x, y, cfg)


def exp_map_0(v: np.ndarray, cfg: BallConfig) -> np.ndarray:
    """Exponential map at the origin: ``tanh(sqrt(c)*||v||) * v / (sqrt(c)*||v||)``.

    Maps any finite tangent vector strictly inside the ball; ``v = 0`` maps to
    the origin and ``c = 0`` degenerates to the identity.
    """
    v = _as_f64(v)
    if not np.all(np.isfinite(v)):
        raise DomainError("exp_map_0: non-finite tangent vector")
    if cfg.c == 0.0:
        return v.copy()
    s = cfg.sqrt_c * np.sqrt(_sqnorm(v, keepdims=True))
    # tanh(s)/s -> 1 as s -> 0; for s below ~1e-8 tanh(s) == s in float64.
    safe = np.where(s == 0.0, 1.0, s)
    scale = np.where(s == 0.0, 1.0, np.tanh(safe) / safe)
    return project_to_ball(scale * v, cfg)


def clip_norm(v: np.ndarray, r: float) -> np.ndarray:
    """Clip each vector (last axis) to Euclidean norm at most ``r``."""
    if not r > 0.0:
        raise ValueError(f"clip radius must be > 0, got {r}")
    v = _as_f64(v)
    norm = np.sqrt(_sqnorm(v, keepdims=True))
    scale = np.where(norm > r, r / np.where(norm > r, norm, 1.0), 1.0)
    return v * scale


def cos_dist(zi: np.ndarray, zj: np.ndarray) -> np.ndarray:
    """Squared chord distance on the unit sphere: ``2 - 2 * cos(zi, zj)``.

    Both arguments are normalized internally, so the result is invariant
    under positive rescaling of either one.  Range [0, 4].
    """
    zi = _as_f64(zi)
    zj = _as_f64(zj)
    ni = np.sqrt(_sqnorm(zi, keepdims=True))
    nj = np.sqrt(_sqnorm(zj, keepdims=True))
    if np.any(ni == 0.0):
        raise DomainError("zi contains a zero-norm vector")
    if np.any(nj == 0.0):
        raise DomainError("zj contains a zero-norm vector")
    cos = np.sum((zi / ni) * (zj / nj), axis=-1)
    return 2.0 - 2.0 * np.clip(cos, -1.0, 1.0)
