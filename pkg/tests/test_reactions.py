import numpy as np
import pytest

from frontlab import adjust_for_truncation, make_logistic, make_polynomial, validate_kpp
from frontlab.errors import DegenerateAdjustmentError


class TestLogistic:
    def test_values(self, logistic):
        assert float(logistic.f(0.5)) == pytest.approx(0.25)
        assert float(logistic.f(0.0)) == 0.0
        assert float(logistic.f(1.0)) == 0.0
        assert logistic.df0 == 1.0
        assert logistic.df1 == -1.0
        assert logistic.lipschitz_K == 1.0
        assert logistic.cap_K0 == 1.0

    def test_ratio_nonincreasing(self, logistic):
        u = np.linspace(1e-6, 1.0, 1000)
        ratio = logistic.f(u) / u
        assert np.all(np.diff(ratio) <= 1e-12)

    def test_extension(self, logistic):
        assert float(logistic.f(-0.2)) == pytest.approx(-0.2)
        u = np.array([-0.5, -0.1, 0.1])
        np.testing.assert_allclose(logistic.f(u), [-0.5, -0.1, 0.1 * 0.9])

    def test_extension_continuity_at_zero(self, logistic):
        e = 1e-8
        left = float(logistic.f(-e)) / -e
        right = float(logistic.f(e)) / e
        assert left == pytest.approx(logistic.df0, abs=1e-7)
        assert right == pytest.approx(logistic.df0, abs=1e-7)


class TestValidateKpp:
    def test_logistic_all_pass(self, logistic):
        report = validate_kpp(logistic)
        assert report.all_pass, report.failed()

    def test_degenerate_slope_at_zero(self):
        # u^2 (1 - u) has f'(0) = 0
        r = make_polynomial([0.0, 0.0, 1.0, -1.0])
        report = validate_kpp(r)
        assert "df0_positive" in report.failed()

    def test_ratio_increasing_near_zero(self):
        # u (1 - u)(1 + 2u): f/u rises at 0 even though the endpoints behave
        r = make_polynomial([0.0, 1.0, 1.0, -2.0])
        report = validate_kpp(r)
        failed = report.failed()
        assert "ratio_nonincreasing" in failed
        assert "df0_positive" not in failed
        assert "df1_negative" not in failed

    def test_sample_floor(self, logistic):
        with pytest.raises(ValueError):
            validate_kpp(logistic, n_samples=10)


class TestAdjustForTruncation:
    def test_identity_at_full_mass(self, logistic):
        adj = adjust_for_truncation(logistic, 1.0)
        assert adj.eta_n == 1.0
        u = np.linspace(0, 1, 11)
        np.testing.assert_allclose(adj.f_n(u), logistic.f(u))

    @pytest.mark.parametrize("sigma", [0.9, 0.99])
    def test_logistic_eta_closed_form(self, logistic, sigma):
        # u(1-u) - (1-sigma) u = u (sigma - u) vanishes at sigma
        adj = adjust_for_truncation(logistic, sigma)
        assert adj.eta_n == pytest.approx(sigma, abs=1e-10)

    def test_eta_increases_with_sigma(self, logistic):
        etas = [adjust_for_truncation(logistic, s).eta_n for s in (0.7, 0.8, 0.9, 0.999)]
        assert all(b > a for a, b in zip(etas, etas[1:]))

    def test_fn_below_f(self, logistic):
        adj = adjust_for_truncation(logistic, 0.8)
        u = np.linspace(0.0, logistic.cap_K0, 500)
        assert np.all(adj.f_n(u) <= logistic.f(u) + 1e-15)

    def test_degenerate_mass_loss(self, logistic):
        with pytest.raises(DegenerateAdjustmentError):
            adjust_for_truncation(logistic, 1e-6)
        with pytest.raises(ValueError):
            adjust_for_truncation(logistic, 0.0)

    def test_unit_rescale_is_scaled_logistic(self, logistic):
        adj = adjust_for_truncation(logistic, 0.9)
        unit = adj.to_unit_reaction()
        v = np.linspace(0.0, 1.0, 200)
        np.testing.assert_allclose(unit.f(v), 0.9 * v * (1.0 - v), atol=1e-12)
        assert unit.df0 == pytest.approx(0.9)
        assert unit.df1 == pytest.approx(-0.9, abs=1e-6)
        assert validate_kpp(unit).all_pass
