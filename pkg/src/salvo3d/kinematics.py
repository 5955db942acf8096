"""Per-interceptor spherical engagement state and its motion derivatives.

The target sits at the origin of the inertial frame. An interceptor is
described by its range to the target, the line-of-sight (LOS) elevation and
azimuth, and the lead elevation/azimuth of its velocity vector expressed in
the LOS frame. Speed is constant: the vehicle maneuvers only through lateral
acceleration in the pitch (z) and yaw (y) body channels, so the radial speed
component is whatever geometry leaves over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ParameterError

EPS_DEN = 1e-9       # guard for divisions by near-zero trig factors
R_MIN_GUARD = 0.1    # m; derivatives are not evaluated below this range


def wrap_angle(x: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return math.pi - (math.pi - x) % (2.0 * math.pi)


@dataclass
class InterceptorState:
    """Spherical engagement coordinates of one interceptor.

    r          -- range to target (m, > 0)
    los_elev   -- LOS elevation (rad)
    los_azim   -- LOS azimuth (rad)
    lead_elev  -- velocity elevation in the LOS frame (rad)
    lead_azim  -- velocity azimuth in the LOS frame (rad)
    speed      -- vehicle speed (m/s, constant over a run)
    """

    r: float
    los_elev: float
    los_azim: float
    lead_elev: float
    lead_azim: float
    speed: float

    def wrapped(self) -> "InterceptorState":
        """Copy with all four angles wrapped to (-pi, pi]."""
        return InterceptorState(
            self.r,
            wrap_angle(self.los_elev),
            wrap_angle(self.los_azim),
            wrap_angle(self.lead_elev),
            wrap_angle(self.lead_azim),
            self.speed,
        )


@dataclass(frozen=True)
class LateralAccel:
    """Commanded lateral acceleration pair (m/s^2): pitch (a_z), yaw (a_y)."""

    a_z: float
    a_y: float


@dataclass(frozen=True)
class TgoEstimate:
    """Time-to-go estimate with its uncertainty share and navigation gain."""

    t_go: float
    w: float
    nav_gain: float


def _state_rates(
    r: float,
    los_elev: float,
    lead_elev: float,
    lead_azim: float,
    speed: float,
    a_z: float,
    a_y: float,
) -> tuple[float, float, float, float, float]:
    """Core rate equations on plain floats; los_azim never enters the rates."""
    cos_le = math.cos(lead_elev)
    sin_le = math.sin(lead_elev)
    cos_la = math.cos(lead_azim)
    sin_la = math.sin(lead_azim)
    cos_el = math.cos(los_elev)
    sin_el = math.sin(los_elev)

    if abs(cos_el) < EPS_DEN:
        raise DomainError(
            f"LOS elevation {los_elev:.6f} rad is at the +-pi/2 pole; "
            "azimuth rate undefined"
        )
    if abs(cos_le) < EPS_DEN:
        raise DomainError(
            f"lead elevation {lead_elev:.6f} rad is at the +-pi/2 pole; "
            "lead azimuth rate undefined"
        )

    r_dot = -speed * cos_le * cos_la
    los_elev_dot = -speed * sin_le / r
    los_azim_dot = -speed * cos_le * sin_la / (r * cos_el)
    tan_le = sin_le / cos_le
    lead_elev_dot = (
        a_z / speed
        - los_azim_dot * sin_el * sin_la
        - los_elev_dot * cos_la
    )
    lead_azim_dot = (
        a_y / (speed * cos_le)
        + los_azim_dot * tan_le * cos_la * sin_el
        - los_azim_dot * cos_el
        - los_elev_dot * tan_le * sin_la
    )
    return r_dot, los_elev_dot, los_azim_dot, lead_elev_dot, lead_azim_dot


def state_derivatives(
    s: InterceptorState, u: LateralAccel
) -> tuple[float, float, float, float, float]:
    """Time derivatives (r, los_elev, los_azim, lead_elev, lead_azim).

    Raises DomainError when the state sits on a coordinate pole or the range
    is below the evaluation guard, and ParameterError for a nonpositive speed.
    """
    if s.speed <= 0.0:
        raise ParameterError(f"speed must be positive, got {s.speed}")
    if s.r <= R_MIN_GUARD:
        raise DomainError(
            f"range {s.r:.4f} m is below the {R_MIN_GUARD} m evaluation guard"
        )
    return _state_rates(
        s.r, s.los_elev, s.lead_elev, s.lead_azim, s.speed, u.a_z, u.a_y
    )


def effective_lead_angle(s: InterceptorState) -> float:
    """Combined lead angle sigma in [0, pi]: cos(sigma) = cos(azim)cos(elev)."""
    c = math.cos(s.lead_azim) * math.cos(s.lead_elev)
    return math.acos(min(1.0, max(-1.0, c)))


def time_to_go(s: InterceptorState, nav_gain: float, w: float = 0.0) -> TgoEstimate:
    """Remaining-flight-time estimate for a stationary target.

    t_go = (r / speed) * (1 + sin^2(sigma) / (4*nav_gain - 2)) + w
    """
    if nav_gain <= 2.0:
        raise ParameterError(f"nav gain must exceed 2, got {nav_gain}")
    if s.speed <= 0.0:
        raise ParameterError(f"speed must be positive, got {s.speed}")
    sigma = effective_lead_angle(s)
    sin2 = math.sin(sigma) ** 2
    t_go = (s.r / s.speed) * (1.0 + sin2 / (4.0 * nav_gain - 2.0)) + w
    return TgoEstimate(t_go=t_go, w=w, nav_gain=nav_gain)


def tgo_rate_coefficients(
    s: InterceptorState, nav_gain: float
) -> tuple[float, float, float]:
    """Affine decomposition of the time-to-go rate with w frozen.

    Returns (drift, b_z, b_y) such that
    d(t_go)/dt = drift + b_z * a_z + b_y * a_y.
    The pair (b_z, b_y) is the constraint row consumed by the allocator.
    """
    if nav_gain <= 2.0:
        raise ParameterError(f"nav gain must exceed 2, got {nav_gain}")
    sigma = effective_lead_angle(s)
    sin2 = math.sin(sigma) ** 2
    denom = 4.0 * nav_gain - 2.0
    drift = -math.cos(sigma) * (1.0 - sin2 / denom)
    scale = s.r / (s.speed**2 * denom)
    b_z = scale * math.sin(2.0 * s.lead_elev) * math.cos(s.lead_azim) ** 2
    b_y = scale * math.sin(2.0 * s.lead_azim) * math.cos(s.lead_elev)
    return drift, b_z, b_y


def lead_angle_rate(s: InterceptorState, u: LateralAccel) -> float:
    """Rate of the effective lead angle.

    sigma_dot = V sin(sigma)/r
              + sin(lead_elev)cos(lead_azim)/(V sin(sigma)) * a_z
              + sin(lead_azim)/(V sin(sigma)) * a_y

    On a collision course (sin(sigma) ~ 0) the geometry is an equilibrium:
    the rate is 0 when no acceleration is applied, and a DomainError is
    raised otherwise because the acceleration terms are singular there.
    """
    sigma = effective_lead_angle(s)
    sin_sigma = math.sin(sigma)
    if abs(sin_sigma) < EPS_DEN:
        if abs(u.a_z) < EPS_DEN and abs(u.a_y) < EPS_DEN:
            return 0.0
        raise DomainError(
            "lead angle rate singular on a collision course with nonzero "
            "acceleration"
        )
    return (
        s.speed * sin_sigma / s.r
        + math.sin(s.lead_elev) * math.cos(s.lead_azim) / (s.speed * sin_sigma) * u.a_z
        + math.sin(s.lead_azim) / (s.speed * sin_sigma) * u.a_y
    )
