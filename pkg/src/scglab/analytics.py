"""Closed-form expressions for the secure-connectivity model.

Degree means and their limits, the excluded-lens factor gamma, the mean
nearest-neighbor connectivity time with its criticality test, density-ratio
thresholds for percolation of both routing schemes, and the hop/delay bounds
those thresholds parameterize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scglab.model import ModelParams, validate

SUBCRITICAL_DELTA_EDGE = (8.0 / 9.0) ** 0.25


class NegativeArgument(ValueError):
    pass


class DegenerateDenominator(ValueError):
    pass


class DeltaOutOfRange(ValueError):
    pass


class SubcriticalDelta(ValueError):
    pass


@dataclass(frozen=True)
class BoundInputs:
    """Existential constants the percolation and delay bounds depend on.

    d is the witness distance, eps the closure probability in (0,1), delta the
    slack (admissible range 0 <= delta < log(1/(1-eps))), delta_cross the box
    crossing probability, and d_cross the box scale it is attained at.
    """

    d: float
    eps: float
    delta: float
    delta_cross: float = 0.98
    d_cross: float = 1.0

    def check_delta(self) -> None:
        if not 0 < self.eps < 1:
            raise DeltaOutOfRange(f"eps must be in (0,1), got {self.eps}")
        limit = math.log(1.0 / (1.0 - self.eps))
        if not 0 <= self.delta < limit:
            raise DeltaOutOfRange(
                f"delta must satisfy 0 <= delta < log(1/(1-eps)) = {limit:.6g}, "
                f"got {self.delta}")

    def check_crossing(self) -> None:
        if self.delta_cross <= SUBCRITICAL_DELTA_EDGE:
            raise SubcriticalDelta(
                f"crossing probability must exceed (8/9)^(1/4) ~ "
                f"{SUBCRITICAL_DELTA_EDGE:.6f}, got {self.delta_cross}")
        if self.d_cross <= 0:
            raise SubcriticalDelta("crossing box scale must be > 0")


def gamma_fn(x: float) -> float:
    """Fraction gamma(x) such that pi*gamma(x)*r^2 is the area of a disk of
    radius x*r centered distance r away, excluding the disk of radius r at the
    origin.

    Piecewise: the lens-difference expression below 2, x^2 - 1 at and above 2
    (the disks are then internally tangent or disjoint from the far cap);
    continuous at the branch point.
    """
    if x < 0:
        raise NegativeArgument(f"gamma_fn requires x >= 0, got {x}")
    if x >= 2.0:
        return x * x - 1.0
    lens = (x * x * math.acos(x / 2.0)
            + math.acos(1.0 - x * x / 2.0)
            - (x / 2.0) * math.sqrt(4.0 - x * x))
    return x * x - lens / math.pi


def _degree_mean(params: ModelParams, numerator_prob: float) -> float:
    d = params.lambda_l * params.p * params.beta_l ** 2 \
        + params.lambda_e * params.beta_e ** 2
    area = math.pi * params.eta ** 2
    if d <= 0.0:
        # lambda_e = beta_l = 0 (or p = 0): Taylor limit of the closed form.
        return params.lambda_l * numerator_prob * area
    return params.lambda_l * numerator_prob * (1.0 - math.exp(-d * area)) / d


def avg_out_degree(params: ModelParams) -> float:
    """Expected number of receivers a typical transmitter securely reaches."""
    validate(params)
    return _degree_mean(params, 1.0 - params.p)


def avg_in_degree(params: ModelParams) -> float:
    """Expected number of transmitters a typical receiver securely hears;
    equals avg_out_degree scaled by p/(1-p)."""
    validate(params)
    return _degree_mean(params, params.p)


def degree_limits(params: ModelParams) -> dict[str, float]:
    """Out-degree limits: interference-limited (eta -> inf) and noise-limited
    (beta_l -> 0)."""
    validate(params)
    d = params.lambda_l * params.p * params.beta_l ** 2 \
        + params.lambda_e * params.beta_e ** 2
    if d <= 0.0:
        raise DegenerateDenominator(
            "interference-limited regime needs lambda_l*p*beta_l^2 + "
            "lambda_e*beta_e^2 > 0")
    interference = params.lambda_l * (1.0 - params.p) / d
    de = params.lambda_e * params.beta_e ** 2
    if de <= 0.0:
        raise DegenerateDenominator("noise-limited regime needs lambda_e*beta_e^2 > 0")
    noise = (params.lambda_l * (1.0 - params.p)
             * (1.0 - math.exp(-de * math.pi * params.eta ** 2)) / de)
    return {"interference_limited": interference, "noise_limited": noise}


def nnc_denominator(params: ModelParams) -> float:
    """Criticality margin for nearest-neighbor connectivity time; the mean is
    finite iff this is positive."""
    return (params.lambda_l
            - params.lambda_e * params.beta_e ** 2
            - (params.p / (1.0 - params.p)) * params.lambda_l * gamma_fn(params.beta_l))


def mean_nnc_time(params: ModelParams) -> float:
    """Mean slots until a typical node securely connects to its nearest
    neighbor; inf in the subcritical regime.

    Criticality is decided by denominator positivity, which is what the
    underlying integral's convergence requires.
    """
    validate(params)
    if params.lambda_l <= 0:
        return math.inf
    denom = nnc_denominator(params)
    if denom <= 0.0:
        return math.inf
    return params.lambda_l / denom


def critical_ratio(params: ModelParams) -> float:
    """Density ratio lambda_l/lambda_e at which mean_nnc_time diverges,
    for the given p and betas; inf when no finite ratio is critical."""
    interference_margin = 1.0 - (params.p / (1.0 - params.p)) * gamma_fn(params.beta_l)
    if interference_margin <= 0 or params.beta_e == 0:
        return math.inf
    return params.beta_e ** 2 / interference_margin


def _tile_occupancy_term(exponent: float) -> float:
    """log(1/(1-exp(-exponent))); +inf at exponent 0, where the per-tile
    occupancy requirement becomes unbounded."""
    if exponent <= 0.0:
        return math.inf
    return math.log(1.0 / (1.0 - math.exp(-exponent)))


def _rho_nsp(beta_e: float, n_s: int, delta: float, c: float) -> float:
    if n_s < 1:
        raise ValueError("n_s must be >= 1")
    tiles = _tile_occupancy_term(delta / n_s)
    return (n_s + 2.0 * math.sqrt(3.0) * beta_e) \
        * (1.0 + 2.0 * math.sqrt(3.0) * beta_e) * tiles / c


def percolation_bound_nsp(params: ModelParams, inputs: BoundInputs) -> dict[str, float]:
    """Direct-path percolation condition: a giant component of eta/sqrt(3)
    paths exists with positive probability when lambda_l > multiplier * lambda_e.

    Returns the multiplier together with the tile count n_s and the closure
    constant C it was built from.
    """
    validate(params)
    inputs.check_delta()
    if inputs.d <= 0:
        raise ValueError("witness distance d must be > 0")
    n_s = max(1, math.ceil(inputs.d * math.sqrt(3.0) / params.eta))
    c = math.log(1.0 / (1.0 - inputs.eps)) - inputs.delta
    multiplier = _rho_nsp(params.beta_e, n_s, inputs.delta, c)
    # With no eavesdroppers the condition degenerates to lambda_l > 0.
    threshold = 0.0 if params.lambda_e == 0 else multiplier * params.lambda_e
    # Absolute per-tile occupancy requirement behind the ratio: vanishes like
    # 1/eta^2 as the link range grows.
    s_sq = params.eta ** 2 / 3.0
    occupancy = _tile_occupancy_term(inputs.delta / n_s) / s_sq
    return {"multiplier": multiplier, "n_s": float(n_s), "C": c,
            "threshold_lambda_l": threshold,
            "lambda_l_occupancy": occupancy}


def percolation_bound_sp(params: ModelParams, inputs: BoundInputs) -> dict[str, float]:
    """Split-path percolation condition lambda_l >= min(rho_sp, rho_nsp) * lambda_e."""
    validate(params)
    inputs.check_delta()
    if inputs.d <= 0:
        raise ValueError("witness distance d must be > 0")
    n_s = max(1, math.ceil(inputs.d * math.sqrt(3.0) / params.eta))
    c = math.log(1.0 / (1.0 - inputs.eps)) - inputs.delta
    rho_nsp = _rho_nsp(params.beta_e, n_s, inputs.delta, c)
    root3 = math.sqrt(3.0)
    tiles = _tile_occupancy_term(inputs.delta / (2.0 * (n_s + 4)))
    rho_sp = 4.0 * (1.0 + 2.0 * root3 * params.beta_e) \
        * (4.0 + root3 * params.beta_e) * tiles / c
    return {"rho_sp": rho_sp, "rho_nsp": rho_nsp,
            "threshold": min(rho_sp, rho_nsp), "n_s": float(n_s), "C": c}


def hop_bound(inputs: BoundInputs, eta: float) -> float:
    """Upper bound on the expected hop count between unit-separated nodes in
    the giant component, parameterized by the crossing constants."""
    inputs.check_crossing()
    if eta <= 0:
        raise ValueError("eta must be > 0")
    d4 = inputs.delta_cross ** 4
    packing = 12.0 * inputs.d_cross ** 2 / (math.pi * eta ** 2)
    return packing * (9.0 * d4 / (9.0 * d4 - 8.0)) + (1.0 + d4) / d4


def per_hop_delay_factor(params: ModelParams, scale: float) -> float:
    """exp(scale * eta^2 * (lambda_e*pi*beta_e^2 + lambda_l*(p/(1-p))*pi*gamma(beta_l)))."""
    exponent = scale * params.eta ** 2 * (
        params.lambda_e * math.pi * params.beta_e ** 2
        + params.lambda_l * (params.p / (1.0 - params.p)) * math.pi
        * gamma_fn(params.beta_l))
    return math.exp(exponent)


def delay_upper_bound(params: ModelParams, inputs: BoundInputs, scheme: str) -> float:
    """Upper bound on expected delay per unit distance in the giant component.

    scheme "nsp" (direct path, exponent scale 1/3) or "sp" (split path,
    exponent scale 1).
    """
    validate(params)
    if scheme not in ("nsp", "sp"):
        raise ValueError(f"scheme must be 'nsp' or 'sp', got {scheme!r}")
    scale = 1.0 / 3.0 if scheme == "nsp" else 1.0
    return per_hop_delay_factor(params, scale) * hop_bound(inputs, params.eta)


def delay_lower_bound_opt(params: ModelParams, d: float) -> float:
    """Lower bound on the expected delay of the optimum scheme over distance d,
    clamped at zero for sub-hop distances."""
    validate(params)
    if d <= 0:
        raise ValueError("distance must be > 0")
    hops = d / params.eta - 1.0
    factor = math.exp(params.eta ** 2 * params.lambda_l
                      * (params.p / (1.0 - params.p)) * math.pi
                      * gamma_fn(params.beta_l))
    return max(0.0, hops * factor)
