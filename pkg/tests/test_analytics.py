import math

import numpy as np
import pytest

from scglab import analytics
from scglab.analytics import (BoundInputs, DegenerateDenominator,
                              DeltaOutOfRange, NegativeArgument,
                              SubcriticalDelta, avg_in_degree, avg_out_degree,
                              critical_ratio, degree_limits,
                              delay_lower_bound_opt, delay_upper_bound,
                              gamma_fn, hop_bound, mean_nnc_time,
                              percolation_bound_nsp, percolation_bound_sp)
from scglab.model import ModelParams


def params(**kw) -> ModelParams:
    base = dict(lambda_l=1.0, lambda_e=0.1, p=0.5, eta=1.0, beta_l=0.2,
                beta_e=0.6)
    base.update(kw)
    return ModelParams(**base)


def lens_excluded_area_mc(x: float, n: int, seed: int) -> tuple[float, float]:
    """Monte Carlo area of B((1,0), x) \\ B(0,1), with its standard error."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    rad = x * np.sqrt(rng.uniform(0.0, 1.0, n))
    px = 1.0 + rad * np.cos(theta)
    py = rad * np.sin(theta)
    outside = (px * px + py * py) >= 1.0
    frac = outside.mean()
    disk_area = math.pi * x * x
    return disk_area * frac, disk_area * math.sqrt(frac * (1 - frac) / n)


class TestGamma:
    def test_endpoints(self):
        assert gamma_fn(0.0) == 0.0
        assert gamma_fn(2.0) == pytest.approx(3.0, abs=1e-12)
        assert gamma_fn(3.0) == 8.0

    def test_continuity_at_branch(self):
        assert gamma_fn(2.0 - 1e-9) == pytest.approx(gamma_fn(2.0), abs=1e-6)

    def test_known_value_at_one(self):
        assert gamma_fn(1.0) == pytest.approx(1.0 / 3.0 + math.sqrt(3.0) / (2 * math.pi),
                                              abs=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(NegativeArgument):
            gamma_fn(-0.1)

    @pytest.mark.parametrize("x", [0.3, 0.5, 1.0, 1.5, 1.9, 2.0, 2.5])
    def test_matches_lens_area_oracle(self, x):
        # pi * gamma(x) * r^2 is the area of B(z, x r) minus B(0, r) for
        # |z| = r; checked against uniform sampling in the offset disk.
        area, se = lens_excluded_area_mc(x, 1_000_000, seed=int(x * 10))
        assert abs(math.pi * gamma_fn(x) - area) < 4 * se


class TestDegrees:
    def test_no_ed_reduction(self):
        # lambda_e = 0 collapses to the eavesdropper-free expression.
        p = params(lambda_e=0.0)
        d = p.lambda_l * p.p * p.beta_l ** 2
        want = p.lambda_l * (1 - p.p) * (1 - math.exp(-d * math.pi * p.eta ** 2)) / d
        assert avg_out_degree(p) == pytest.approx(want, rel=1e-12)

    def test_interference_limit_value(self):
        # Large eta, unit factors: (1-p)/(p*beta_l^2) = 1 at p=1/2, beta_l=1.
        p = params(lambda_e=0.0, beta_l=1.0, beta_e=1.0, eta=1e3)
        assert avg_out_degree(p) == pytest.approx(1.0, rel=1e-9)

    def test_off_third_example(self):
        p = params(lambda_e=1.0, beta_l=1.0, beta_e=1.0, eta=1e3)
        assert avg_out_degree(p) == pytest.approx(1.0 / 3.0, rel=1e-9)

    def test_in_out_ratio_identity(self):
        for pv in (0.1, 0.25, 0.5, 0.6, 0.9):
            pr = params(p=pv)
            assert avg_in_degree(pr) / avg_out_degree(pr) == pytest.approx(
                pv / (1 - pv), rel=1e-12)

    def test_p_half_equalizes(self):
        pr = params(p=0.5)
        assert avg_in_degree(pr) == pytest.approx(avg_out_degree(pr), rel=1e-12)

    def test_p_zero_in_degree(self):
        assert avg_in_degree(params(p=0.0)) == 0.0

    def test_degenerate_denominator_uses_limit(self):
        p = params(lambda_e=0.0, beta_l=0.0)
        assert avg_out_degree(p) == pytest.approx(
            p.lambda_l * (1 - p.p) * math.pi * p.eta ** 2, rel=1e-12)

    def test_monotone_decreasing_in_lambda_e(self):
        values = [avg_out_degree(params(lambda_e=le))
                  for le in np.linspace(0.0, 5.0, 40)]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))

    def test_limits(self):
        p = params()
        lims = degree_limits(p)
        d = p.lambda_l * p.p * p.beta_l ** 2 + p.lambda_e * p.beta_e ** 2
        assert lims["interference_limited"] == pytest.approx(
            p.lambda_l * (1 - p.p) / d, rel=1e-12)
        # eta -> infinity converges to the interference-limited value.
        big = params(eta=1e3)
        gap = abs(avg_out_degree(big) - degree_limits(big)["interference_limited"])
        assert gap / degree_limits(big)["interference_limited"] < 1e-6

    def test_large_lambda_l_interference_plateau(self):
        p = params(lambda_l=1e6, lambda_e=1.0)
        want = (1 - p.p) / (p.p * p.beta_l ** 2)
        assert degree_limits(p)["interference_limited"] == pytest.approx(
            want, rel=1e-3)

    def test_large_lambda_e_kills_degree(self):
        p = params(lambda_e=1e9)
        assert degree_limits(p)["interference_limited"] < 1e-6
        assert degree_limits(p)["noise_limited"] < 1e-6

    def test_degenerate_limit_errors(self):
        with pytest.raises(DegenerateDenominator):
            degree_limits(params(lambda_e=0.0, beta_l=0.0))
        with pytest.raises(DegenerateDenominator):
            degree_limits(params(lambda_e=0.0))  # noise-limited needs EDs


class TestMeanNncTime:
    def test_trivial_one(self):
        for pv in (0.0, 0.3, 0.7):
            assert mean_nnc_time(params(p=pv, lambda_e=0.0, beta_l=0.0)) == 1.0

    def test_reference_value(self):
        p = params(lambda_l=1.0, lambda_e=1.0, beta_e=0.5, beta_l=0.0)
        assert mean_nnc_time(p) == pytest.approx(4.0 / 3.0, rel=1e-12)

    def test_subcritical_infinite(self):
        p = params(lambda_l=1.0, lambda_e=4.0, beta_e=0.5, beta_l=0.0, p=0.0)
        assert math.isinf(mean_nnc_time(p))

    def test_finite_iff_denominator_positive(self):
        for le in np.linspace(0.0, 4.0, 60):
            p = params(lambda_e=le)
            denom = analytics.nnc_denominator(p)
            assert math.isfinite(mean_nnc_time(p)) == (denom > 0)

    def test_finite_values_at_least_one(self):
        for ratio in (0.5, 1.0, 2.0, 10.0):
            p = params(lambda_e=1.0 / ratio)
            value = mean_nnc_time(p)
            assert math.isinf(value) or value >= 1.0

    def test_critical_ratio_increases_with_p(self):
        ratios = [critical_ratio(params(p=pv, beta_l=0.2, beta_e=0.6))
                  for pv in (0.25, 0.5, 0.75)]
        assert ratios[0] < ratios[1] < ratios[2]


class TestPercolationBounds:
    def test_nsp_hand_example(self):
        # beta_e = 0, one tile, delta = ln 2, eps = 3/4 gives multiplier 1.
        p = params(beta_e=0.0)
        got = percolation_bound_nsp(p, BoundInputs(d=0.5, eps=0.75,
                                                   delta=math.log(2.0)))
        assert got["n_s"] == 1
        assert got["multiplier"] == pytest.approx(1.0, rel=1e-12)

    def test_no_eds_reduces_to_positive_density(self):
        p = params(lambda_e=0.0, beta_e=0.0)
        got = percolation_bound_nsp(p, BoundInputs(d=0.5, eps=0.75,
                                                   delta=math.log(2.0)))
        assert got["threshold_lambda_l"] == 0.0

    def test_large_eta_absolute_threshold_vanishes(self):
        # n_s pins at 1, the ratio multiplier stays finite, and the absolute
        # per-tile density requirement collapses like 1/eta^2.
        inputs = BoundInputs(d=0.5, eps=0.75, delta=math.log(2.0))
        small = percolation_bound_nsp(params(eta=1.0), inputs)
        large = percolation_bound_nsp(params(eta=1e6), inputs)
        assert large["n_s"] == 1
        assert math.isfinite(large["multiplier"])
        assert large["lambda_l_occupancy"] < 1e-11 < small["lambda_l_occupancy"]

    def test_delta_out_of_range(self):
        with pytest.raises(DeltaOutOfRange):
            percolation_bound_nsp(params(), BoundInputs(d=1.0, eps=0.5,
                                                        delta=math.log(2.0) + 0.1))

    def test_sp_hand_example(self):
        p = params(beta_e=0.0)
        got = percolation_bound_sp(p, BoundInputs(d=0.5, eps=0.75,
                                                  delta=math.log(2.0)))
        want_sp = 16.0 * math.log(1.0 / (1.0 - 2 ** (-0.1))) / math.log(2.0)
        assert got["rho_nsp"] == pytest.approx(1.0, rel=1e-12)
        assert got["rho_sp"] == pytest.approx(want_sp, rel=1e-12)
        assert got["threshold"] == min(got["rho_sp"], got["rho_nsp"])

    def test_threshold_never_exceeds_nsp(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            eps = float(rng.uniform(0.05, 0.95))
            delta = float(rng.uniform(0.0, math.log(1 / (1 - eps)) * 0.99))
            inputs = BoundInputs(d=float(rng.uniform(0.2, 5.0)), eps=eps,
                                 delta=delta)
            p = params(beta_e=float(rng.uniform(0.0, 2.0)))
            got = percolation_bound_sp(p, inputs)
            assert got["threshold"] <= got["rho_nsp"]


class TestHopAndDelayBounds:
    def test_hop_bound_value(self):
        inputs = BoundInputs(d=1.0, eps=0.5, delta=0.1, delta_cross=1.0,
                             d_cross=1.0)
        assert hop_bound(inputs, eta=1.0) == pytest.approx(
            108.0 / math.pi + 2.0, rel=1e-12)

    def test_hop_bound_decreasing_in_delta(self):
        values = [hop_bound(BoundInputs(1.0, 0.5, 0.1, dc, 1.0), 1.0)
                  for dc in (0.975, 0.99, 1.0)]
        assert values[0] > values[1] > values[2]

    def test_subcritical_delta_rejected(self):
        with pytest.raises(SubcriticalDelta):
            hop_bound(BoundInputs(1.0, 0.5, 0.1, 0.97, 1.0), 1.0)
        # just above the edge is accepted
        hop_bound(BoundInputs(1.0, 0.5, 0.1, 0.9713, 1.0), 1.0)

    def test_delay_bound_reduces_to_hop_bound(self):
        p = params(lambda_e=0.0, beta_l=0.0)
        inputs = BoundInputs(1.0, 0.5, 0.1, 1.0, 1.0)
        for scheme in ("nsp", "sp"):
            assert delay_upper_bound(p, inputs, scheme) == pytest.approx(
                hop_bound(inputs, p.eta), rel=1e-12)

    def test_delay_bound_increasing_in_p(self):
        inputs = BoundInputs(1.0, 0.5, 0.1, 1.0, 1.0)
        values = [delay_upper_bound(params(p=pv), inputs, "nsp")
                  for pv in (0.1, 0.3, 0.5, 0.7)]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_scheme_exponent_ratio(self):
        p = params(lambda_e=0.3, beta_l=0.8)
        inputs = BoundInputs(1.0, 0.5, 0.1, 1.0, 1.0)
        hb = hop_bound(inputs, p.eta)
        log_nsp = math.log(delay_upper_bound(p, inputs, "nsp") / hb)
        log_sp = math.log(delay_upper_bound(p, inputs, "sp") / hb)
        assert log_sp == pytest.approx(3.0 * log_nsp, rel=1e-9)

    def test_delay_lower_bound(self):
        p = params(beta_l=0.0)
        assert delay_lower_bound_opt(p, p.eta) == 0.0
        assert delay_lower_bound_opt(p, 5.0) == pytest.approx(4.0, rel=1e-12)
        pr = params(beta_l=1.0, p=0.5, lambda_l=1.0)
        want = 9.0 * math.exp(math.pi * gamma_fn(1.0))
        assert delay_lower_bound_opt(pr, 10.0) == pytest.approx(want, rel=1e-12)
        # below one hop the bound clamps to zero
        assert delay_lower_bound_opt(pr, 0.5 * pr.eta) == 0.0
