"""Cooperative consensus command and the gain certificates behind it.

The protocol drives every interceptor's time-to-go estimate to a common value
within a configurable settling time, over any connected topology the switched
network can present. The command has two parts: a signed nonlinear sum over
neighbor disagreements, and a feedforward term that cancels the uncontrolled
drift of the time-to-go rate so the disagreement dynamics see only the
consensus sum (plus the uncertainty rate, absorbed by the robustness margin).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ParameterError
from .kinematics import InterceptorState, effective_lead_angle
from .topology import TopologyBounds

_SPOUGE_A = 12
_SPOUGE_C = None


def _spouge_coefficients() -> list[float]:
    global _SPOUGE_C
    if _SPOUGE_C is None:
        coeffs = [math.sqrt(2.0 * math.pi)]
        sign = 1.0
        fact = 1.0
        for k in range(1, _SPOUGE_A):
            coeffs.append(
                sign * (_SPOUGE_A - k) ** (k - 0.5) * math.exp(_SPOUGE_A - k) / fact
            )
            sign = -sign
            fact *= k
        _SPOUGE_C = coeffs
    return _SPOUGE_C


def gamma_positive(x: float) -> float:
    """Gamma function for x > 0 via a 12-term Spouge series.

    Relative error is below 1e-10 on the domain the gain bounds use.
    Arguments below 1 go through the recurrence gamma(x) = gamma(x + 1) / x.
    """
    if x <= 0.0:
        raise ParameterError(f"gamma argument must be positive, got {x}")
    if x < 1.0:
        return gamma_positive(x + 1.0) / x
    z = x - 1.0
    coeffs = _spouge_coefficients()
    acc = coeffs[0]
    for k in range(1, _SPOUGE_A):
        acc += coeffs[k] / (z + k)
    return (z + _SPOUGE_A) ** (z + 0.5) * math.exp(-(z + _SPOUGE_A)) * acc


@dataclass(frozen=True)
class GuidanceParams:
    """Consensus-law constants shared by the swarm.

    coeff_near / exp_near weight the term that dominates close to agreement
    (exp_near < 1/exp_outer), coeff_far / exp_far the one that dominates far
    from it (exp_far > 1/exp_outer); together they produce a settling time
    bounded by consensus_time independent of the initial disagreement.
    gains holds the per-interceptor multipliers; robust_gain is the extra
    margin that rejects a bounded uncertainty rate; sign_eps is the boundary
    layer half-width used to smooth the signum under fixed-step integration.
    """

    coeff_near: float = 1.0
    coeff_far: float = 5.0
    exp_near: float = 0.1
    exp_far: float = 2.0
    exp_outer: float = 2.0
    consensus_time: float = 3.0
    robust_gain: float = 0.0
    gains: tuple[float, ...] = field(default_factory=tuple)
    wdot_max: float = 0.0
    sign_eps: float = 1e-3

    def validate(self) -> None:
        if min(self.coeff_near, self.coeff_far, self.exp_near, self.exp_far,
               self.exp_outer) <= 0.0:
            raise ParameterError("consensus coefficients and exponents must be positive")
        if self.exp_outer * self.exp_near >= 1.0:
            raise ParameterError(
                "exponent constraint violated: exp_outer * exp_near must be < 1 "
                f"(got {self.exp_outer * self.exp_near})"
            )
        if self.exp_outer * self.exp_far <= 1.0:
            raise ParameterError(
                "exponent constraint violated: exp_outer * exp_far must be > 1 "
                f"(got {self.exp_outer * self.exp_far})"
            )
        if self.consensus_time <= 0.0:
            raise ParameterError("consensus_time must be positive")
        if self.robust_gain < 0.0:
            raise ParameterError("robust_gain must be nonnegative")
        if any(g <= 0.0 for g in self.gains):
            raise ParameterError("all interceptor gains must be positive")
        if self.sign_eps < 0.0:
            raise ParameterError("sign_eps must be nonnegative")


def settling_constant(p: GuidanceParams) -> float:
    """Scalar tying the protocol constants to the requested settling time.

    Gamma((1 - k*m)/(n - m)) * Gamma((k*n - 1)/(n - m))
    / (T * M^k * Gamma(k) * (n - m)) * (M/N)^((1 - k*m)/(n - m))
    with (M, N, m, n, k, T) = (coeff_near, coeff_far, exp_near, exp_far,
    exp_outer, consensus_time).
    """
    p.validate()
    m, n, k = p.exp_near, p.exp_far, p.exp_outer
    a = (1.0 - k * m) / (n - m)
    b = (k * n - 1.0) / (n - m)
    return (
        gamma_positive(a)
        * gamma_positive(b)
        / (p.consensus_time * p.coeff_near**k * gamma_positive(k) * (n - m))
        * (p.coeff_near / p.coeff_far) ** a
    )


def min_gain(p: GuidanceParams, bounds: TopologyBounds) -> float:
    """Smallest admissible per-interceptor gain for the switched graph set."""
    return settling_constant(p) * bounds.min_edges / bounds.min_lambda2


def min_mu(p: GuidanceParams, bounds: TopologyBounds) -> float:
    """Smallest admissible robustness margin for the configured rate bound."""
    if not p.gains:
        raise ParameterError("per-interceptor gains are not set")
    if p.wdot_max == 0.0:
        return 0.0
    return p.wdot_max / (min(p.gains) * math.sqrt(bounds.min_lambda2))


def smooth_sign(x: float, eps: float) -> float:
    """Saturated signum: linear inside the +-eps boundary layer."""
    if eps <= 0.0:
        return math.copysign(1.0, x) if x != 0.0 else 0.0
    return min(1.0, max(-1.0, x / eps))


def consensus_term(xi_diffs, p: GuidanceParams, gain: float) -> float:
    """Signed nonlinear sum over neighbor disagreements.

    xi_diffs holds (neighbor time-to-go - own time-to-go) for the currently
    active neighbor set; the unobservable common impact time cancels in the
    difference, so raw time-to-go differences are used directly. Each term
    pulls the agent toward the neighbor, which is the direction the
    incidence-form disagreement dynamics contract under.
    """
    total = 0.0
    for d in xi_diffs:
        ad = abs(d)
        mag = (p.coeff_near * ad**p.exp_near + p.coeff_far * ad**p.exp_far) ** p.exp_outer
        total += gain * (mag + p.robust_gain) * smooth_sign(d, p.sign_eps)
    return total


def effective_command(
    s: InterceptorState,
    xi_diffs,
    p: GuidanceParams,
    gain: float,
    nav_gain: float,
) -> float:
    """Scalar command U: consensus sum plus drift cancellation.

    The trailing term is the exact negative of the uncontrolled disagreement
    drift, so the closed-loop disagreement rate reduces to the consensus sum
    plus the uncertainty rate.
    """
    if nav_gain <= 2.0:
        raise ParameterError(f"nav gain must exceed 2, got {nav_gain}")
    sigma = effective_lead_angle(s)
    sin2 = math.sin(sigma) ** 2
    drift_cancel = -1.0 + math.cos(sigma) * (1.0 - sin2 / (4.0 * nav_gain - 2.0))
    return consensus_term(xi_diffs, p, gain) + drift_cancel


@dataclass(frozen=True)
class CertificationReport:
    """Per-condition verdicts for the sufficient consensus conditions."""

    settling_constant: float
    min_edges: int
    min_lambda2: float
    gain_bound: float
    gains: tuple[float, ...]
    gain_margins: tuple[float, ...]
    mu: float
    mu_bound: float
    wdot_max: float
    exponent_ok: bool
    passes: bool
    failures: tuple[str, ...]

    def to_text(self) -> str:
        lines = [
            "gain certification",
            f"  graph set: min edges = {self.min_edges}, "
            f"min lambda2 = {self.min_lambda2:.6f}",
            f"  settling constant = {self.settling_constant:.6f}",
            f"  required gain >= {self.gain_bound:.6f}",
        ]
        for i, (g, margin) in enumerate(zip(self.gains, self.gain_margins)):
            verdict = "ok" if margin >= 0.0 else "FAIL"
            lines.append(
                f"  interceptor {i + 1}: gain = {g:.6f} "
                f"(margin {margin:+.6f}) {verdict}"
            )
        mu_verdict = "ok" if self.mu >= self.mu_bound else "FAIL"
        lines.append(
            f"  robustness margin mu = {self.mu:.6f} "
            f"(required > {self.mu_bound:.6f} for wdot_max = {self.wdot_max:.6f}) "
            f"{mu_verdict}"
        )
        lines.append(f"  exponent constraints: {'ok' if self.exponent_ok else 'FAIL'}")
        lines.append(f"  overall: {'PASS' if self.passes else 'FAIL'}")
        for msg in self.failures:
            lines.append(f"  - {msg}")
        return "\n".join(lines)


def certify(p: GuidanceParams, bounds: TopologyBounds) -> CertificationReport:
    """Check every sufficient condition the consensus guarantee relies on."""
    failures: list[str] = []
    exponent_ok = True
    try:
        p.validate()
    except ParameterError as exc:
        exponent_ok = False
        failures.append(f"exponent constraint: {exc}")
    if exponent_ok:
        sc = settling_constant(p)
        bound = min_gain(p, bounds)
    else:
        sc = math.nan
        bound = math.inf
    margins = tuple(g - bound for g in p.gains)
    if not p.gains:
        failures.append("no interceptor gains configured")
    for i, margin in enumerate(margins):
        if margin < 0.0:
            failures.append(
                f"interceptor {i + 1} gain {p.gains[i]:.6f} below bound {bound:.6f}"
            )
    if exponent_ok and p.gains:
        mu_bound = min_mu(p, bounds)
    else:
        mu_bound = math.inf if p.wdot_max > 0.0 else 0.0
    if p.wdot_max > 0.0 and p.robust_gain <= mu_bound:
        failures.append(
            f"robustness margin {p.robust_gain:.6f} not above bound {mu_bound:.6f}"
        )
    return CertificationReport(
        settling_constant=sc,
        min_edges=bounds.min_edges,
        min_lambda2=bounds.min_lambda2,
        gain_bound=bound,
        gains=p.gains,
        gain_margins=margins,
        mu=p.robust_gain,
        mu_bound=mu_bound,
        wdot_max=p.wdot_max,
        exponent_ok=exponent_ok,
        passes=not failures,
        failures=tuple(failures),
    )
