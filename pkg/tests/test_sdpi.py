import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kernels, measures, random_kernel, random_measure
from renyi_sdpi import (
    CHI2,
    KL,
    LINF,
    TV,
    Hellinger,
    ProbabilityMeasure,
    Renyi,
    apply_kernel,
    bsc,
    identity,
    make_kernel,
    make_measure,
    rank_one,
    renyi,
    restrict,
    z_channel,
)
from renyi_sdpi.errors import (
    AlphabetTooLarge,
    DegenerateMeasure,
    DimensionMismatch,
    InvalidRadius,
    NotFullSupport,
    ParameterOutOfRange,
    UnsupportedKind,
)
from renyi_sdpi.sdpi import (
    LogOnePlus,
    Method,
    PairOfMeasures,
    Power,
    RowPair,
    SdpiEstimate,
    SearchConfig,
    Subset,
    brute_force_eta,
    eta_chi2_dd,
    eta_chi2_kernel,
    eta_dd,
    eta_di,
    eta_infty_dd,
    eta_infty_kernel,
    eta_infty_tv_bounds,
    eta_tv_kernel,
    evaluate_certificate,
    knapsack_sup,
    ldp_epsilon,
    support_structure,
    transformed_sdpi_compare,
    ultra_mixing_check,
)

FIG1_K = make_kernel([[0.5, 0.5], [0.1, 0.9]])
FIG1_MU = make_measure([0.9, 0.1])
UNIFORM2 = make_measure([0.5, 0.5])
EPS = [0.05, 0.1, 0.2, 0.25, 0.3, 0.45]
FAST = SearchConfig(restarts=8)


def assert_certificate_reproduces(est, K, mu=None):
    if est.method == Method.SPECTRAL or est.certificate is None:
        return
    kind = est.kind
    got = evaluate_certificate(est.certificate, K, kind, mu)
    assert got == pytest.approx(est.value, abs=1e-9)


class TestEstimateType:
    def test_bounds_are_checked(self):
        with pytest.raises(ValueError):
            SdpiEstimate(0.5, None, Method.CLOSED_FORM, 0.6, 1.0)
        with pytest.raises(ValueError):
            SdpiEstimate(1.2, None, Method.CLOSED_FORM, 0.0, 1.3)

    def test_to_dict(self):
        d = eta_tv_kernel(bsc(0.1)).to_dict()
        assert d["method"] == "ClosedForm"
        assert d["certificate"]["type"] == "RowPair"


class TestTvKernel:
    @pytest.mark.parametrize("eps", EPS + [0.7, 0.95])
    def test_bsc(self, eps):
        est = eta_tv_kernel(bsc(eps))
        assert est.value == pytest.approx(abs(1 - 2 * eps), abs=1e-12)
        assert est.lower_bound == est.upper_bound == est.value
        assert_certificate_reproduces(est, bsc(eps))

    @pytest.mark.parametrize("lam", [0.2, 0.5, 0.8])
    def test_z_channel(self, lam):
        assert eta_tv_kernel(z_channel(lam)).value == pytest.approx(lam, abs=1e-15)

    def test_rank_one(self):
        assert eta_tv_kernel(rank_one([0.3, 0.7])).value == 0.0


class TestInftyKernel:
    @pytest.mark.parametrize("eps", EPS + [0.6, 0.9])
    def test_bsc(self, eps):
        est = eta_infty_kernel(bsc(eps))
        assert est.value == pytest.approx(1 - min(eps / (1 - eps), (1 - eps) / eps), abs=1e-12)
        assert isinstance(est.certificate, RowPair)
        assert_certificate_reproduces(est, bsc(eps))

    @pytest.mark.parametrize("lam", [0.01, 0.3, 0.5, 0.99])
    def test_z_channel_is_one(self, lam):
        assert eta_infty_kernel(z_channel(lam)).value == 1.0

    def test_identity_and_rank_one(self):
        assert eta_infty_kernel(identity(3)).value == 1.0
        assert eta_infty_kernel(rank_one([0.2, 0.3, 0.5])).value == 0.0

    def test_ordered_pairs_matter(self):
        # K(y|x')/K(y|x) is not symmetric in (x, x'): both orders must be scanned
        K = make_kernel([[0.5, 0.5], [0.9, 0.1]])
        assert eta_infty_kernel(K).value == pytest.approx(1 - 0.1 / 0.5, abs=1e-15)


class TestInftyDistributionDependent:
    @pytest.mark.parametrize("eps", EPS + [0.7])
    def test_bsc_uniform(self, eps):
        est = eta_infty_dd(UNIFORM2, bsc(eps))
        assert est.value == pytest.approx(1 - math.log2(1 / max(eps, 1 - eps)), abs=1e-12)
        assert est.method == Method.SUBSET_ENUMERATION
        assert_certificate_reproduces(est, bsc(eps), UNIFORM2)

    def test_identity(self):
        assert eta_infty_dd(UNIFORM2, identity(2)).value == pytest.approx(1.0, abs=1e-15)

    def test_two_point_instance_by_hand(self):
        # A={0}: log(0.5/0.46)/log(1/0.9); A={1}: log(0.9/0.54)/log(1/0.1)
        expect = max(math.log(0.5 / 0.46) / math.log(1 / 0.9), math.log(0.9 / 0.54) / math.log(10))
        est = eta_infty_dd(FIG1_MU, FIG1_K)
        assert est.value == pytest.approx(expect, abs=1e-12)
        assert est.certificate == Subset((0,))

    def test_reference_with_zeros_uses_its_support(self, rng):
        K = random_kernel(rng, 4, 3)
        mu = make_measure([0.5, 0.0, 0.5, 0.0])
        est = eta_infty_dd(mu, K)
        sub = make_kernel(K.rows[[0, 2]])
        assert est.value == pytest.approx(eta_infty_dd(UNIFORM2, sub).value, abs=1e-14)
        assert set(est.certificate.A) <= {0, 2}
        assert_certificate_reproduces(est, K, mu)

    def test_errors(self):
        with pytest.raises(DegenerateMeasure):
            eta_infty_dd(make_measure([1, 0]), bsc(0.1))
        with pytest.raises(DimensionMismatch):
            eta_infty_dd(make_measure([1 / 3] * 3), bsc(0.1))
        big = make_measure(np.full(21, 1 / 21))
        with pytest.raises(AlphabetTooLarge):
            eta_infty_dd(big, identity(21))

    def test_matches_boundary_search(self, rng):
        for _ in range(10):
            n_in, n_out = rng.integers(2, 6, size=2)
            mu, K = random_measure(rng, n_in), random_kernel(rng, n_in, n_out)
            exact = eta_infty_dd(mu, K).value
            found = eta_dd(mu, K, Renyi("inf")).value
            assert found == pytest.approx(exact, abs=1e-6)


class TestKnapsack:
    def test_hand_example(self):
        value, nu = knapsack_sup(UNIFORM2, bsc(0.25), 0, math.log(1.5))
        assert value == pytest.approx(0.625, abs=1e-15)
        np.testing.assert_allclose(nu.weights, [0.75, 0.25], atol=1e-15)

    def test_large_radius_goes_to_best_row(self, rng):
        K = random_kernel(rng, 4, 3)
        mu = random_measure(rng, 4)
        for y in range(3):
            value, nu = knapsack_sup(mu, K, y, 50.0)
            best = int(np.argmax(K.rows[:, y]))
            assert nu.weights[best] == pytest.approx(1.0, abs=1e-12)
            assert value == pytest.approx(K.rows[best, y], abs=1e-12)

    def test_prefix_radii_give_conditionals(self, rng):
        K = random_kernel(rng, 5, 3)
        mu = random_measure(rng, 5)
        for y in range(3):
            order = np.argsort(-K.rows[:, y], kind="stable")
            for k in range(1, 5):
                A = order[:k]
                t = -math.log(mu.weights[A].sum())
                _, nu = knapsack_sup(mu, K, y, t)
                np.testing.assert_allclose(nu.weights, restrict(mu, A).weights, atol=1e-12)

    def test_radius_must_be_positive(self):
        with pytest.raises(InvalidRadius):
            knapsack_sup(UNIFORM2, bsc(0.1), 0, 0.0)


class TestChiSquared:
    @pytest.mark.parametrize("eps", EPS)
    def test_bsc_uniform(self, eps):
        assert eta_chi2_dd(UNIFORM2, bsc(eps)).value == pytest.approx((1 - 2 * eps) ** 2, abs=1e-12)
        assert eta_dd(UNIFORM2, bsc(eps), CHI2, FAST).value == pytest.approx((1 - 2 * eps) ** 2, abs=1e-9)

    def test_identity(self):
        assert eta_chi2_dd(make_measure([0.2, 0.3, 0.5]), identity(3)).value == pytest.approx(1.0, abs=1e-12)

    def test_two_point_instance(self):
        # frozen from a 1e-4 grid over the 1-simplex: 0.0579710144927...
        assert eta_chi2_dd(FIG1_MU, FIG1_K).value == pytest.approx(4 / 69, abs=1e-12)
        assert eta_dd(FIG1_MU, FIG1_K, CHI2, FAST).value == pytest.approx(4 / 69, abs=1e-9)

    @pytest.mark.parametrize("eps", [0.1, 0.3])
    def test_input_independent_bsc(self, eps):
        est = eta_chi2_kernel(bsc(eps))
        assert est.value == pytest.approx((1 - 2 * eps) ** 2, abs=1e-9)
        assert_certificate_reproduces(est, bsc(eps))


class TestDistributionDependentSearch:
    @pytest.mark.parametrize("kind", [Renyi(0.5), Renyi(2), Renyi(5), KL, Hellinger(0.5), Hellinger(3), TV, CHI2, LINF])
    def test_rank_one_kernel_gives_zero(self, kind):
        assert eta_dd(make_measure([0.2, 0.3, 0.5]), rank_one([0.4, 0.6], 3), kind, FAST).value == 0.0

    def test_order_infinity_bsc(self):
        v = eta_dd(UNIFORM2, bsc(0.25), Renyi("inf")).value
        assert v == pytest.approx(eta_infty_dd(UNIFORM2, bsc(0.25)).value, abs=1e-6)

    def test_seed_determinism(self, rng):
        mu, K = random_measure(rng, 4), random_kernel(rng, 4, 3)
        a = eta_dd(mu, K, Renyi(3), SearchConfig(seed=7))
        b = eta_dd(mu, K, Renyi(3), SearchConfig(seed=7))
        assert a.value == b.value and a.certificate == b.certificate

    def test_certificates_reproduce(self, rng):
        for kind in (Renyi(0.5), Renyi(2), Renyi(4), KL, Hellinger(3), TV, LINF, Renyi("inf"), CHI2):
            mu, K = random_measure(rng, 4), random_kernel(rng, 4, 3)
            est = eta_dd(mu, K, kind, FAST)
            assert est.lower_bound == est.value and est.upper_bound == 1.0
            assert_certificate_reproduces(est, K, mu)

    def test_local_lower_bound(self, rng):
        for kind in (Renyi(0.5), Renyi(3), KL, Hellinger(2.5)):
            mu, K = random_measure(rng, 3), random_kernel(rng, 3, 3)
            assert eta_dd(mu, K, kind, FAST).value >= eta_chi2_dd(mu, K).value - 1e-12

    def test_dimension_and_degenerate_errors(self):
        with pytest.raises(DimensionMismatch):
            eta_dd(make_measure([1 / 3] * 3), bsc(0.1), KL)
        with pytest.raises(DegenerateMeasure):
            eta_dd(make_measure([1, 0]), bsc(0.1), KL)

    @pytest.mark.parametrize("kind", [Renyi(0.5), Renyi(2), KL, Hellinger(3)])
    def test_matches_full_simplex_grid(self, kind, rng):
        for _ in range(3):
            mu, K = random_measure(rng, 3), random_kernel(rng, 3, 3)
            oracle = brute_force_eta(mu, K, kind, resolution=1 / 150).value
            got = eta_dd(mu, K, kind, FAST).value
            assert got >= oracle - 1e-9


class TestDistributionIndependent:
    @pytest.mark.parametrize("lam", [0.2, 0.5, 0.8])
    @pytest.mark.parametrize("alpha", [1.5, 2, 4])
    def test_z_channel_finite_orders(self, lam, alpha):
        est = eta_di(z_channel(lam), Renyi(alpha))
        assert est.value >= 1 - 1e-6
        assert_certificate_reproduces(est, z_channel(lam))

    @pytest.mark.parametrize("lam", [0.2, 0.5, 0.8])
    @pytest.mark.parametrize("alpha", [1.5, 2, 4])
    def test_z_channel_dirac_witnesses(self, lam, alpha):
        # delta_1 against (1-eps, eps): ratio is 1 + g(u)/u with u = log(1/eps)
        K, dirac = z_channel(lam), make_measure([0.0, 1.0])
        eps_grid = [10.0 ** -k for k in range(1, 9)]
        ratios = [renyi(apply_kernel(dirac, K), apply_kernel(make_measure([1 - e, e]), K), alpha)
                  / renyi(dirac, make_measure([1 - e, e]), alpha) for e in eps_grid]
        for e, r in zip(eps_grid, ratios):
            u = math.log(1 / e)
            g = math.log(lam + (1 - lam) ** alpha * (1 / e - lam) ** (1 - alpha)) / (alpha - 1)
            assert r == pytest.approx(1 + g / u, rel=1e-12)
        assert all(b > a for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] > lam and ratios[-1] < 1

    @pytest.mark.parametrize("lam", [0.2, 0.5, 0.8])
    def test_z_channel_order_infinity(self, lam):
        assert eta_di(z_channel(lam), Renyi("inf")).value == 1.0

    @pytest.mark.parametrize("eps", [0.1, 0.25, 0.4])
    def test_half_order_bsc(self, eps):
        # frozen from the binary-pair grid oracle at resolution 2e-3
        est = eta_di(bsc(eps), Renyi(0.5))
        assert est.value == pytest.approx((1 - 2 * eps) ** 2, abs=1e-9)
        assert est.details["crosscheck_ok"]

    @pytest.mark.parametrize("eps", EPS)
    def test_tv_bsc(self, eps):
        assert eta_di(bsc(eps), TV).value == pytest.approx(abs(1 - 2 * eps), abs=1e-12)

    def test_linf_unsupported(self):
        with pytest.raises(UnsupportedKind):
            eta_di(bsc(0.1), LINF)

    def test_rank_one(self):
        for kind in (Renyi(0.5), Renyi(2), KL, TV, CHI2, Renyi("inf"), Hellinger(2)):
            assert eta_di(rank_one([0.3, 0.7]), kind, FAST).value == 0.0

    @pytest.mark.parametrize("kind", [Renyi(2), Renyi(3), Hellinger(2.5)])
    def test_at_least_binary_oracle(self, kind, rng):
        for _ in range(3):
            K = random_kernel(rng, 3, 3)
            oracle = brute_force_eta(None, K, kind, resolution=1 / 200).value
            est = eta_di(K, kind)
            assert est.value >= oracle - 1e-9
            assert_certificate_reproduces(est, K)

    def test_below_dobrushin_for_small_orders(self, rng):
        for _ in range(20):
            K = random_kernel(rng, *rng.integers(2, 6, size=2))
            tv = eta_tv_kernel(K).value
            for a in (0, 0.25, 0.5, 1):
                assert eta_di(K, Renyi(a), SearchConfig(crosscheck=False)).value <= tv + 1e-6


class TestTvSandwich:
    @pytest.mark.parametrize("eps", [0.05, 0.2, 0.3, 0.45, 0.6, 0.9])
    def test_bsc_uniform(self, eps):
        lo, hi = eta_infty_tv_bounds(UNIFORM2, bsc(eps))
        tv = abs(1 - 2 * eps)
        assert lo == pytest.approx(tv / 2, abs=1e-9)
        assert hi == pytest.approx(min(1.0, 2 * tv), abs=1e-9)
        v = eta_infty_dd(UNIFORM2, bsc(eps)).value
        assert lo <= v + 1e-12 and v <= hi + 1e-12

    def test_nontrivial_window(self):
        assert eta_infty_tv_bounds(UNIFORM2, bsc(0.26))[1] < 1
        assert eta_infty_tv_bounds(UNIFORM2, bsc(0.24))[1] == 1.0

    def test_needs_full_support(self):
        with pytest.raises(NotFullSupport):
            eta_infty_tv_bounds(make_measure([1, 0, 0]), random_kernel(np.random.default_rng(0), 3, 2))
        lo, hi = eta_infty_tv_bounds(make_measure([0.5, 0.5, 0]), identity(3), require_lower=False)
        assert lo is None and hi == 1.0

    @settings(max_examples=30)
    @given(data=st.data())
    def test_brackets_random_instances(self, data):
        n = data.draw(st.integers(2, 5))
        mu, K = data.draw(measures(n=n)), data.draw(kernels(n_in=n, max_n=5))
        lo, hi = eta_infty_tv_bounds(mu, K, config=FAST)
        v = eta_infty_dd(mu, K).value
        assert lo <= v + 1e-9 <= hi + 2e-9


class TestStructure:
    @pytest.mark.parametrize("lam", [0.1, 0.5, 0.9])
    def test_z_channel(self, lam):
        assert support_structure(z_channel(lam)) == (False, True)

    def test_identity(self):
        assert support_structure(identity(2)) == (True, True)

    @pytest.mark.parametrize("eps", [0.01, 0.3, 0.99])
    def test_bsc(self, eps):
        assert support_structure(bsc(eps)) == (False, False)


class TestPrivacy:
    def test_rank_one(self):
        assert ldp_epsilon(rank_one([0.3, 0.7])) == 0.0

    def test_bsc(self):
        assert ldp_epsilon(bsc(0.25)) == pytest.approx(math.log(3), rel=1e-15)

    def test_z_channel(self):
        assert ldp_epsilon(z_channel(0.5)) == math.inf

    def test_ultra_mixing(self):
        assert ultra_mixing_check(bsc(0.25), 1 / 3)
        assert not ultra_mixing_check(bsc(0.25), 0.34)
        assert ultra_mixing_check(z_channel(0.5), 0.0)
        assert not ultra_mixing_check(z_channel(0.5), 1e-9)
        with pytest.raises(ParameterOutOfRange):
            ultra_mixing_check(bsc(0.1), 1.5)

    @given(K=kernels(zeros=True))
    def test_any_kernel_is_zero_mixing(self, K):
        assert ultra_mixing_check(K, 0.0)


class TestTransformedComparison:
    @pytest.mark.parametrize("alpha", [2, 4, 8])
    def test_concave_transform_raises_constant(self, alpha):
        h, r = transformed_sdpi_compare(FIG1_MU, FIG1_K, Hellinger(alpha), LogOnePlus(alpha - 1), FAST)
        assert r >= h - 1e-12

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    def test_convex_transform_lowers_constant(self, alpha):
        h, r = transformed_sdpi_compare(FIG1_MU, FIG1_K, Hellinger(alpha), LogOnePlus(alpha - 1), FAST)
        assert r <= h + 1e-12

    def test_transformed_values_match_direct_searches(self):
        h, r = transformed_sdpi_compare(FIG1_MU, FIG1_K, Hellinger(3), LogOnePlus(2))
        assert r == pytest.approx(eta_dd(FIG1_MU, FIG1_K, Renyi(3)).value, abs=1e-7)
        assert h == pytest.approx(eta_dd(FIG1_MU, FIG1_K, Hellinger(3)).value, abs=1e-7)

    def test_power_on_chi_squared(self, rng):
        for _ in range(5):
            mu, K = random_measure(rng, 3), random_kernel(rng, 3, 3)
            base, t = transformed_sdpi_compare(mu, K, CHI2, Power(0.5), FAST)
            assert t >= base - 1e-12

    def test_power_one_is_excluded(self):
        with pytest.raises(ParameterOutOfRange):
            Power(1)

    def test_order_zero_rejected(self):
        with pytest.raises(UnsupportedKind):
            transformed_sdpi_compare(FIG1_MU, FIG1_K, Renyi(0), LogOnePlus(1.0))


class TestOracle:
    def test_rank_one_is_zero(self):
        for res in (0.1, 0.01):
            assert brute_force_eta(None, rank_one([0.5, 0.5]), TV, res).value == 0.0
            assert brute_force_eta(UNIFORM2, rank_one([0.5, 0.5]), CHI2, res).value == 0.0

    def test_tv_exact_at_grid_points(self, rng):
        for _ in range(5):
            K = random_kernel(rng, 3, 3)
            assert brute_force_eta(None, K, TV, 0.5).value == pytest.approx(eta_tv_kernel(K).value, abs=1e-14)

    def test_infty_kernel(self, rng):
        for _ in range(50):
            K = random_kernel(rng, 3, 3)
            oracle = brute_force_eta(None, K, Renyi("inf"), 1e-3).value
            assert oracle == pytest.approx(eta_infty_kernel(K).value, abs=2e-3)

    def test_size_limits(self):
        with pytest.raises(AlphabetTooLarge):
            brute_force_eta(None, identity(6), TV)
        with pytest.raises(AlphabetTooLarge):
            brute_force_eta(make_measure([0.25] * 4), identity(4), KL)
        with pytest.raises(AlphabetTooLarge):
            brute_force_eta(make_measure([0.2] * 5), identity(5), CHI2)

    def test_certificates_reproduce(self, rng):
        mu, K = random_measure(rng, 3), random_kernel(rng, 3, 2)
        for kind in (Renyi(2), CHI2, TV):
            est = brute_force_eta(mu, K, kind, 0.01)
            assert evaluate_certificate(est.certificate, K, kind) == pytest.approx(est.value, abs=1e-9)
