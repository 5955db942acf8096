"""Closed-form split of the scalar command into pitch/yaw accelerations.

Given the affine constraint b_z * a_z + b_y * a_y = U, the allocator returns
the pair minimizing the weighted norm ||(a_z / c_z, a_y / c_y)||_ell, with
dedicated branches for ell in (1, inf), ell = 1 (single cheapest channel),
and ell = inf (equalized weighted magnitudes). A brute-force grid oracle is
included for verification; it scans the constraint line directly and owes
nothing to the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, ParameterError
from .kinematics import LateralAccel

EPS_DEN = 1e-12


@dataclass(frozen=True)
class AllocationProblem:
    """One instantaneous allocation: constraint row, command, weights, norm.

    ell selects the norm: 1.0, a finite value > 1, or math.inf.
    """

    b_z: float
    b_y: float
    command: float
    c_z: float = 1.0
    c_y: float = 1.0
    ell: float = 2.0

    def __post_init__(self) -> None:
        if self.c_z <= 0.0 or self.c_y <= 0.0:
            raise ParameterError("channel weights must be positive")
        if self.ell < 1.0:
            raise ParameterError(f"norm selector must be >= 1, got {self.ell}")


@dataclass(frozen=True)
class AllocationResult:
    accel: LateralAccel
    cost: float
    branch: str


def weighted_norm(a_z: float, a_y: float, c_z: float, c_y: float, ell: float) -> float:
    """||(a_z / c_z, a_y / c_y)||_ell for ell in [1, inf]."""
    x = abs(a_z) / c_z
    y = abs(a_y) / c_y
    if math.isinf(ell):
        return max(x, y)
    if ell == 1.0:
        return x + y
    m = max(x, y)
    if m == 0.0:
        return 0.0
    return m * ((x / m) ** ell + (y / m) ** ell) ** (1.0 / ell)


def _solve_p(bz: float, by: float, u: float, cz: float, cy: float,
             ell: float) -> tuple[float, float, str]:
    c = cy / cz
    mz = abs(bz)
    my = c * abs(by)
    top = max(mz, my)
    if top <= EPS_DEN:
        if abs(u) <= EPS_DEN:
            return 0.0, 0.0, "zero"
        raise DegenerateGeometryError(
            "both constraint coefficients vanished with a nonzero command"
        )
    q = 1.0 / (ell - 1.0)
    rz = mz / top
    ry = my / top
    denom = top * (rz ** (q + 1.0) + ry ** (q + 1.0))
    a_z = u * math.copysign(rz**q, bz) / denom
    a_y = u * c * math.copysign(ry**q, by) / denom
    return a_z, a_y, "p_norm"


def _solve_l1(bz: float, by: float, u: float, cz: float, cy: float
              ) -> tuple[float, float, str]:
    wz = abs(bz) * cz
    wy = abs(by) * cy
    if max(wz, wy) <= EPS_DEN * max(cz, cy):
        if abs(u) <= EPS_DEN:
            return 0.0, 0.0, "zero"
        raise DegenerateGeometryError(
            "both constraint coefficients vanished with a nonzero command"
        )
    # vertex with the lower weighted cost |u| / (|b| * c); ties go to pitch
    if wy > wz:
        return 0.0, u / by, "l1_yaw_vertex"
    return u / bz, 0.0, "l1_pitch_vertex"


def _solve_linf(bz: float, by: float, u: float, cz: float, cy: float
                ) -> tuple[float, float, str]:
    c = cy / cz
    if abs(by) <= EPS_DEN:
        if abs(bz) <= EPS_DEN:
            if abs(u) <= EPS_DEN:
                return 0.0, 0.0, "zero"
            raise DegenerateGeometryError(
                "both constraint coefficients vanished with a nonzero command"
            )
        return u / bz, 0.0, "linf_pitch_only"
    if abs(bz) <= EPS_DEN:
        return 0.0, u / by, "linf_yaw_only"
    if bz * by < 0.0:
        denom = bz - c * by
        if abs(denom) <= EPS_DEN:
            raise DegenerateGeometryError("equalization denominator vanished")
        return u / denom, -c * u / denom, "linf_opposed"
    denom = bz + c * by
    if abs(denom) <= EPS_DEN:
        raise DegenerateGeometryError("equalization denominator vanished")
    return u / denom, c * u / denom, "linf_aligned"


def _solve(bz: float, by: float, u: float, cz: float, cy: float,
           ell: float) -> tuple[float, float, str]:
    if math.isinf(ell):
        return _solve_linf(bz, by, u, cz, cy)
    if ell == 1.0:
        return _solve_l1(bz, by, u, cz, cy)
    return _solve_p(bz, by, u, cz, cy, ell)


def allocate(prob: AllocationProblem) -> AllocationResult:
    """Minimize the weighted ell-norm subject to the affine constraint."""
    a_z, a_y, branch = _solve(
        prob.b_z, prob.b_y, prob.command, prob.c_z, prob.c_y, prob.ell
    )
    return AllocationResult(
        accel=LateralAccel(a_z, a_y),
        cost=weighted_norm(a_z, a_y, prob.c_z, prob.c_y, prob.ell),
        branch=branch,
    )


def allocate_p(prob: AllocationProblem) -> AllocationResult:
    if not (1.0 < prob.ell < math.inf):
        raise ParameterError(f"allocate_p needs a finite norm > 1, got {prob.ell}")
    return allocate(prob)


def allocate_l1(prob: AllocationProblem) -> AllocationResult:
    if prob.ell != 1.0:
        raise ParameterError(f"allocate_l1 needs ell = 1, got {prob.ell}")
    return allocate(prob)


def allocate_linf(prob: AllocationProblem) -> AllocationResult:
    if not math.isinf(prob.ell):
        raise ParameterError(f"allocate_linf needs ell = inf, got {prob.ell}")
    return allocate(prob)


def oracle_allocate(
    prob: AllocationProblem, grid_n: int, a_max: float = 392.4
) -> AllocationResult:
    """Brute-force scan of the constraint line; verification only.

    a_z sweeps a uniform grid on [-a_max, a_max], a_y follows from the
    constraint, and the cheapest feasible pair wins. Needs |b_y| bounded away
    from zero, which random nondegenerate test problems guarantee.
    """
    if grid_n < 1000:
        raise ParameterError(f"grid_n must be at least 1000, got {grid_n}")
    if abs(prob.b_y) <= EPS_DEN:
        raise DegenerateGeometryError("oracle needs a nonzero yaw coefficient")
    a_z = np.linspace(-a_max, a_max, grid_n)
    a_y = (prob.command - prob.b_z * a_z) / prob.b_y
    x = np.abs(a_z) / prob.c_z
    y = np.abs(a_y) / prob.c_y
    if math.isinf(prob.ell):
        costs = np.maximum(x, y)
    elif prob.ell == 1.0:
        costs = x + y
    else:
        costs = (x**prob.ell + y**prob.ell) ** (1.0 / prob.ell)
    best = int(np.argmin(costs))
    return AllocationResult(
        accel=LateralAccel(float(a_z[best]), float(a_y[best])),
        cost=float(costs[best]),
        branch="oracle_grid",
    )


def saturate(a: LateralAccel, a_max: float) -> LateralAccel:
    """Componentwise clamp to [-a_max, a_max]."""
    if a_max <= 0.0:
        raise ParameterError(f"a_max must be positive, got {a_max}")
    return LateralAccel(
        min(a_max, max(-a_max, a.a_z)),
        min(a_max, max(-a_max, a.a_y)),
    )
