import math

import numpy as np
import pytest
import scipy.special as sps
from hypothesis import given, settings
from hypothesis import strategies as st

from wright_lab.special_fn import (
    SeriesConvergenceError,
    WrightParams,
    bessel_I,
    bessel_identity_residual,
    log_gamma,
    mehrez_gap,
    wright_phi,
)

# ln Gamma reference values, mpmath at 50 digits
LOG_GAMMA_REF = [
    (0.001, 6.9071788853838536617),
    (0.01, 4.5994798780420217016),
    (0.1, 2.252712651734205902),
    (0.3, 1.0957979948180755606),
    (0.5, 0.57236494292470008707),
    (0.75, 0.20328095143129537148),
    (1.25, -0.098271836421813161464),
    (1.5, -0.12078223763524522235),
    (2.5, 0.28468287047291915963),
    (3.0, 0.69314718055994530942),
    (3.7, 1.4280723266653881292),
    (7.5, 7.5343642367587329552),
    (10.0, 12.801827480081469611),
    (23.25, 49.250964295452572186),
    (50.5, 146.51925549072062722),
    (100.0, 359.13420536957539878),
    (1234.5, 7550.5509010778948957),
    (10000.0, 82099.717496442377273),
    (250000.0, 2857298.7535418639871),
    (1000000.0, 12815504.56914761166),
]


class TestLogGamma:
    @pytest.mark.parametrize("x, expected", LOG_GAMMA_REF)
    def test_reference_values(self, x, expected):
        assert abs(log_gamma(x) - expected) <= 1e-13 * max(1.0, abs(expected))

    def test_trivial_points(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(2.0) == 0.0
        assert log_gamma(5) == pytest.approx(math.log(24), rel=1e-15)

    def test_half_is_log_sqrt_pi(self):
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            log_gamma(bad)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=1e6))
    def test_matches_stdlib(self, x):
        ref = math.lgamma(x)
        assert abs(log_gamma(x) - ref) <= 1e-13 * max(1.0, abs(ref))


class TestWrightPhi:
    def test_zero_argument(self):
        assert wright_phi(WrightParams(1, 1), 0.0).value == 1.0
        assert wright_phi(WrightParams(1, 3), 0.0).value == 0.5

    def test_bessel_i0_at_two(self):
        # sum 1/(k!)^2 (mpmath nsum)
        r = wright_phi(WrightParams(1, 1), 1.0)
        assert r.value == pytest.approx(2.2795853023360672674, rel=1e-12)
        assert r.converged and r.terms_used >= 1

    def test_tail_certificate(self):
        for z in (0.5, 3.0, 40.0, 900.0):
            p = WrightParams(1.0, 2.5)
            coarse = wright_phi(p, z, 1e-6)
            fine = wright_phi(p, z, 1e-8)
            assert abs(fine.value - coarse.value) <= coarse.tail_bound
            assert coarse.tail_bound <= 1e-6 * max(1.0, coarse.value)

    def test_large_argument_keeps_log_value(self):
        r = wright_phi(WrightParams(1.0, 2.0), 4e5)
        assert math.isinf(r.value)
        # phi_{1,2}(z) = I_1(2 sqrt z) / sqrt z
        w = 2 * math.sqrt(4e5)
        ref = math.log(sps.ive(1, w)) + w - 0.5 * math.log(4e5)
        assert r.log_value == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("rho, beta", [(0.0, 1.0), (-0.5, 1.0), (1.0, 0.0)])
    def test_invalid_params(self, rho, beta):
        with pytest.raises(ValueError):
            WrightParams(rho, beta)

    @pytest.mark.parametrize("tol", [0.0, 0.1, -1e-3])
    def test_invalid_tol(self, tol):
        with pytest.raises(ValueError):
            wright_phi(WrightParams(1, 1), 1.0, tol)

    def test_negative_z(self):
        with pytest.raises(ValueError):
            wright_phi(WrightParams(1, 1), -1.0)

    def test_iteration_cap(self):
        # tiny rho: terms behave like z^k/k!, which needs about e*z terms
        with pytest.raises(SeriesConvergenceError):
            wright_phi(WrightParams(1e-9, 1.0), 1e5)

    def test_general_rho_against_mpmath(self):
        import mpmath as mp
        mp.mp.dps = 30
        ref = mp.nsum(lambda k: mp.mpf(10) ** k / (mp.factorial(k) * mp.gamma(0.5 * k + 1.5)),
                      [0, mp.inf])
        assert wright_phi(WrightParams(0.5, 1.5), 10.0).value == pytest.approx(float(ref), rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.2, 3.0), st.floats(0.2, 6.0), st.floats(0.0, 200.0), st.floats(1e-3, 5.0))
    def test_positive_and_increasing(self, rho, beta, z, dz):
        p = WrightParams(rho, beta)
        a = wright_phi(p, z)
        b = wright_phi(p, z + dz)
        assert a.value > 0
        assert b.value > a.value


class TestBessel:
    def test_zero(self):
        assert bessel_I(0, 0).value == 1.0
        assert bessel_I(2, 0).value == 0.0

    def test_direct_sums(self):
        assert bessel_I(1, 2).value == pytest.approx(1.5906368546373290634, rel=1e-12)
        assert bessel_I(2, 2).value == pytest.approx(0.68894844769873820405, rel=1e-12)

    @pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 3.0, 4.5])
    @pytest.mark.parametrize("w", [0.1, 1.0, 7.0, 30.0])
    def test_against_scipy(self, nu, w):
        assert bessel_I(nu, w).value == pytest.approx(sps.iv(nu, w), rel=1e-11)

    def test_domain(self):
        with pytest.raises(ValueError):
            bessel_I(-1, 1.0)
        with pytest.raises(ValueError):
            bessel_I(1, -1.0)


class TestIdentities:
    @pytest.mark.parametrize("m", [1, 2, 3, 4, 5.5])
    @pytest.mark.parametrize("z", [0.1, 1.0, 10.0, 50.0])
    def test_bessel_identity(self, m, z):
        scale = wright_phi(WrightParams(1, m), z).value
        assert abs(bessel_identity_residual(m, z)) <= 1e-11 * scale

    @pytest.mark.parametrize("m, z", [(1, 4.0), (2, 1.0), (3, 2.5)])
    def test_spot_points(self, m, z):
        scale = wright_phi(WrightParams(1, m), z).value
        assert abs(bessel_identity_residual(m, z)) <= 1e-12 * scale

    def test_alternative_exponent_only_matches_at_m2(self):
        # (1/sqrt z)^{m/2} in place of z^{-(m-1)/2} coincides at m=2 only
        z = 4.0
        lhs = wright_phi(WrightParams(1, 2), z).value
        printed = z ** (-0.5) * bessel_I(1, 2 * math.sqrt(z)).value
        assert lhs == pytest.approx(printed, rel=1e-12)  # m=2: both exponents equal 1/2
        lhs3 = wright_phi(WrightParams(1, 3), z).value
        printed3 = (1 / math.sqrt(z)) ** 1.5 * bessel_I(2, 2 * math.sqrt(z)).value
        assert abs(lhs3 - printed3) > 1e-3 * lhs3

    @pytest.mark.parametrize("m", [0.5, 0.0])
    def test_residual_domain(self, m):
        with pytest.raises(ValueError):
            bessel_identity_residual(m, 1.0)


class TestMehrez:
    def test_vanishes_at_origin(self):
        assert abs(mehrez_gap(1, 1, 1e-12)) < 1e-11

    def test_reference(self):
        assert mehrez_gap(1, 2, 1) == pytest.approx(0.21273995923985265527, rel=1e-11)
        assert mehrez_gap(0.5, 1.5, 10) == pytest.approx(249.09893403002929997, rel=1e-11)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("beta", [0.5, 1.0, 3.0])
    @pytest.mark.parametrize("z", [0.1, 1.0, 10.0])
    def test_nonnegative(self, alpha, beta, z):
        lead = math.gamma(beta) * wright_phi(WrightParams(alpha, beta), z).value
        assert mehrez_gap(alpha, beta, z) >= -1e-12 * lead

    def test_domain(self):
        with pytest.raises(ValueError):
            mehrez_gap(0, 1, 1)


def test_concurrent_evaluation_is_deterministic():
    from concurrent.futures import ThreadPoolExecutor

    zs = np.linspace(0, 300, 64)
    p = WrightParams(1.0, 2.0)
    serial = [wright_phi(p, z).value for z in zs]
    with ThreadPoolExecutor(4) as pool:
        threaded = list(pool.map(lambda z: wright_phi(p, z).value, zs))
    assert serial == threaded
