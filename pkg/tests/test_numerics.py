import numpy as np
import pytest

from frontlab import UniformGrid, bisect, fit_slope, minimize_scalar, trapezoid
from frontlab.errors import BracketError


class TestUniformGrid:
    def test_nodes_reproducible(self):
        g = UniformGrid(-40.0, 0.0, 4000)
        nodes = g.nodes()
        assert nodes[0] == -40.0
        assert nodes[-1] == g.left + g.n_cells * g.spacing
        assert nodes[17] == g.left + 17 * g.spacing

    def test_invalid(self):
        with pytest.raises(ValueError):
            UniformGrid(1.0, 0.0, 10)
        with pytest.raises(ValueError):
            UniformGrid(0.0, 1.0, 1)


class TestTrapezoid:
    def test_constant_exact(self):
        for n in (2, 7, 100):
            g = UniformGrid(0.0, 1.0, n)
            assert trapezoid(np.ones(n + 1), g) == pytest.approx(1.0, abs=1e-15)

    def test_linear_exact(self):
        g = UniformGrid(0.0, 1.0, 10)
        assert trapezoid(g.nodes(), g) == pytest.approx(0.5, abs=1e-15)

    def test_quadratic_within_error_bound(self):
        g = UniformGrid(0.0, 1.0, 100)
        val = trapezoid(g.nodes() ** 2, g)
        assert abs(val - 1.0 / 3.0) <= 2e-5

    def test_linearity_in_input(self):
        g = UniformGrid(0.0, 2.0, 64)
        rng = np.random.default_rng(0)
        f, h = rng.normal(size=65), rng.normal(size=65)
        lhs = trapezoid(3.0 * f + 2.0 * h, g)
        rhs = 3.0 * trapezoid(f, g) + 2.0 * trapezoid(h, g)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_length_mismatch(self):
        g = UniformGrid(0.0, 1.0, 10)
        with pytest.raises(ValueError):
            trapezoid(np.ones(10), g)


class TestBisect:
    def test_affine(self):
        assert bisect(lambda c: c - 1.0, 0.0, 2.0, 1e-10) == pytest.approx(1.0, abs=1e-9)

    def test_sqrt2(self):
        root = bisect(lambda c: c * c - 2.0, 1.0, 2.0, 1e-12)
        assert root == pytest.approx(np.sqrt(2.0), abs=1e-10)

    def test_bad_bracket(self):
        with pytest.raises(BracketError):
            bisect(lambda c: c + 10.0, 0.0, 1.0, 1e-8)

    def test_bracket_choice_insensitive(self):
        r1 = bisect(lambda c: c**3 - 5.0, 0.0, 3.0, 1e-12)
        r2 = bisect(lambda c: c**3 - 5.0, 1.5, 1.8, 1e-12)
        assert abs(r1 - r2) <= 1e-10

    def test_accepts_infinite_values(self):
        G = lambda c: c - 1.0 if c < 1.5 else float("inf")
        assert bisect(G, 0.0, 2.0, 1e-10) == pytest.approx(1.0, abs=1e-9)


class TestMinimizeScalar:
    def test_parabola(self):
        x, v = minimize_scalar(lambda t: (t - 0.5) ** 2, 0.0, 1.0, 1e-12)
        assert x == pytest.approx(0.5, abs=1e-8)
        assert v == pytest.approx(0.0, abs=1e-15)

    def test_dispersion_objective(self):
        # analytic minimizer of 1/(t - t^3) on (0, 1) sits at 1/sqrt(3)
        x, v = minimize_scalar(lambda t: 1.0 / (t - t**3), 1e-6, 1.0 - 1e-6, 1e-12)
        assert x == pytest.approx(1.0 / np.sqrt(3.0), abs=1e-7)
        assert v == pytest.approx(3.0 * np.sqrt(3.0) / 2.0, rel=1e-10)

    def test_hyperbola(self):
        x, v = minimize_scalar(lambda t: t + 1.0 / t, 0.1, 10.0, 1e-12)
        assert x == pytest.approx(1.0, abs=1e-7)
        assert v == pytest.approx(2.0, rel=1e-12)

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            minimize_scalar(lambda t: t, 1.0, 1.0, 1e-8)


class TestFitSlope:
    def test_exact_line(self):
        assert fit_slope([0.0, 1.0, 2.0], [0.0, 2.0, 4.0]) == pytest.approx(2.0, abs=1e-14)

    def test_flat(self):
        assert fit_slope([0.0, 1.0], [5.0, 5.0]) == pytest.approx(0.0, abs=1e-14)

    def test_symmetric_noise_cancels(self):
        ts = np.array([0.0, 1.0, 2.0, 3.0])
        xs = 1.5 * ts
        xs[0] += 0.01
        xs[3] += 0.01
        # equal perturbations at symmetric leverage points cancel exactly
        assert fit_slope(ts, xs) == pytest.approx(1.5, abs=1e-12)

    def test_constant_shift_invariance(self):
        rng = np.random.default_rng(1)
        ts = np.sort(rng.uniform(0, 10, 20))
        ts += np.arange(20) * 1e-6  # enforce strict increase
        xs = rng.normal(size=20)
        assert fit_slope(ts, xs) == pytest.approx(fit_slope(ts, xs + 7.5), abs=1e-10)

    def test_degenerate_ts(self):
        with pytest.raises(ValueError):
            fit_slope([0.0, 0.0, 1.0], [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            fit_slope([0.0], [1.0])
