import numpy as np
import pytest

from delayfronts import (
    AccuracyError,
    DomainError,
    ModelParams,
    N_kernel,
    apply_N_operator,
    build_profile,
    minimal_speed,
    psi_kernel,
    roots_at_kappa,
    theta_kernel,
)
from delayfronts.chareq import eval_char_dz
from delayfronts.kernels import check_factorization

from conftest import sample_dkappa


class TestTheta:
    def test_pointwise_values(self):
        assert theta_kernel(0.0, -1.0) == 1.0
        assert theta_kernel(-0.3, -1.0) == 0.0
        mu2 = -1.7
        assert theta_kernel(1.0 / abs(mu2), mu2) == pytest.approx(np.e**-1, abs=1e-15)

    def test_vectorized(self):
        t = np.array([-1.0, 0.0, 2.0])
        np.testing.assert_allclose(theta_kernel(t, -0.5), [0.0, 1.0, np.exp(-1.0)])

    def test_needs_negative_mu2(self):
        with pytest.raises(DomainError):
            theta_kernel(0.0, 0.3)


class TestPsi:
    def test_left_limit_closed_form(self, toy12):
        c, h = 0.5, 1.0
        grid = psi_kernel(c, h, toy12)
        r = roots_at_kappa(c, h, toy12)
        amp = -(r.mu1 - r.mu2) / eval_char_dz(r.mu1, c, h, -1.0)
        i0 = grid.index_of_zero()
        # node at 0 stores the right limit amp + 1; one step earlier the tail
        assert grid.values[i0] == pytest.approx(amp + 1.0, abs=1e-14)
        assert grid.values[i0 - 1] == pytest.approx(
            amp * np.exp(r.mu1 * grid.t[i0 - 1]), abs=1e-14
        )

    def test_unit_jump(self, toy12):
        grid = psi_kernel(0.5, 1.0, toy12)
        i0 = grid.index_of_zero()
        left = grid.values[i0 - 1] * np.exp(grid.mu1 * (0.0 - grid.t[i0 - 1]))
        assert grid.values[i0] - left == pytest.approx(1.0, abs=1e-12)
        assert grid.jump_at_zero == 1.0

    def test_no_delay_limit_vanishes_forward(self, toy12):
        grid = psi_kernel(1.0, 0.0, toy12)
        pos = grid.t > 0.0
        assert np.all(grid.values[pos] == 0.0)
        neg = grid.t < 0.0
        assert np.all(grid.values[neg] < 0.0)

    def test_all_samples_negative(self, toy12):
        rng = np.random.default_rng(23)
        for c, h in sample_dkappa(rng, 15):
            grid = psi_kernel(c, h, toy12)
            assert grid.values.max() < 0.0, (c, h)

    @pytest.mark.parametrize("c,h", [(0.5, 1.0), (0.35, 2.0), (0.2, 3.0), (1.0, 0.5)])
    def test_forward_tail_ratio_plateau(self, toy12, c, h):
        grid = psi_kernel(c, h, toy12)
        mu3 = grid.mu3
        pred = (mu3 - grid.mu2) / eval_char_dz(mu3, c, h, -1.0)
        w = grid.t >= grid.t_max - 0.35 * grid.t_max
        ratio = grid.values[w] / np.exp(mu3 * grid.t[w])
        assert np.mean(ratio) == pytest.approx(pred, rel=5e-2)

    def test_outside_region_rejected(self, toy12):
        with pytest.raises(DomainError):
            psi_kernel(2.0, 1.0, toy12)  # c above the region boundary


class TestN:
    def test_no_delay_closed_form(self, toy12):
        # two-exponential convolution: -e^{mu1 t}/(mu1-mu2) backward,
        # -e^{mu2 t}/(mu1-mu2) forward, total mass 1/(mu1 mu2) = -1/2
        c = 1.0
        grid = N_kernel(c, 0.0, toy12)
        mu1, mu2 = 2.0, -1.0
        expected = np.where(
            grid.t < 0.0,
            -np.exp(mu1 * grid.t) / (mu1 - mu2),
            -np.exp(mu2 * grid.t) / (mu1 - mu2),
        )
        np.testing.assert_allclose(grid.values, expected, atol=2e-5)
        assert np.trapezoid(grid.values, grid.t) == pytest.approx(-0.5, abs=1e-4)

    def test_negative_and_normalized_on_draws(self, toy12):
        rng = np.random.default_rng(29)
        for c, h in sample_dkappa(rng, 15):
            grid = N_kernel(c, h, toy12)
            assert grid.values.max() < 0.0, (c, h)
            mass = np.trapezoid(grid.values, grid.t)
            assert mass == pytest.approx(-0.5, abs=1e-4), (c, h)

    def test_normalization_improves_under_refinement(self, toy12):
        c, h = 0.5, 1.0
        errs = []
        for m in (50, 100, 200):
            grid = N_kernel(c, h, toy12, step=c * h / m)
            errs.append(abs(np.trapezoid(grid.values, grid.t) + 0.5))
        assert errs[0] > errs[2]  # order >= 1 overall

    def test_coarse_step_raises_accuracy_error(self, toy12):
        with pytest.raises(AccuracyError):
            N_kernel(0.5, 1.0, toy12, step=0.5 * 1.0 / 4.0)


class TestApplyN:
    def test_equilibria_are_fixed_points(self, toy12):
        c, h = 0.5, 1.0
        t = np.arange(-10.0, 10.0, c * h / 150)
        out = apply_N_operator(t, np.full_like(t, 2.0), c, h, toy12)
        np.testing.assert_allclose(out, 2.0, atol=2e-3)
        out = apply_N_operator(t, np.zeros_like(t), c, h, toy12)
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_profile_is_a_fixed_point_on_window(self, toy12):
        h, k = 1.0, 1.2
        ck = 0.5  # inside the region, above the minimal speed 0.477
        prof = build_profile(ck, h, k)
        dt = prof.grid_step
        t = np.arange(-15.0, prof.terminal_time - 1.0, dt)
        vals = np.clip(prof(t), 0.0, 2.0)
        out = apply_N_operator(t, vals, ck, h, toy12)
        inner = (t > t[0] + 5.0) & (t < t[-1] - 5.0)
        assert np.max(np.abs(out[inner] - vals[inner])) < 1e-3

    def test_monotone_in_the_input(self, toy12):
        rng = np.random.default_rng(31)
        c, h = 0.5, 1.0
        t = np.arange(-8.0, 8.0, c * h / 150)
        for _ in range(20):
            lower = rng.uniform(0.0, 2.0, size=t.size)
            upper = np.clip(lower + rng.uniform(0.0, 0.5, size=t.size), 0.0, 2.0)
            upper = np.maximum(lower, upper)
            out_lo = apply_N_operator(t, lower, c, h, toy12)
            out_hi = apply_N_operator(t, upper, c, h, toy12)
            assert np.all(out_lo <= out_hi + 1e-10)

    def test_range_validation(self, toy12):
        t = np.linspace(0.0, 1.0, 11)
        with pytest.raises(DomainError):
            apply_N_operator(t, np.full_like(t, 2.5), 0.5, 1.0, toy12)


class TestFactorization:
    def test_exponential_eigenfunction(self, toy12):
        c, h = 0.5, 1.0
        dt = c * h / 200
        t = np.arange(-3.0, 3.0, dt)
        res = check_factorization(t, np.exp(0.4 * t), c, h, toy12)
        assert res < 5e-5

    def test_second_order_in_the_step(self, toy12):
        c, h = 0.5, 1.0
        residuals = []
        for m in (100, 200):
            dt = c * h / m
            t = np.arange(-4.0, 4.0, dt)
            residuals.append(check_factorization(t, np.sin(t), c, h, toy12))
        ratio = residuals[0] / residuals[1]
        assert 3.0 < ratio < 5.0

    def test_constant_function(self, toy12):
        # derivatives vanish, but the history-integral quadrature error
        # remains, so the bound matches the trapezoid scale
        c, h = 0.5, 1.0
        dt = c * h / 200
        t = np.arange(-3.0, 3.0, dt)
        res = check_factorization(t, np.ones_like(t), c, h, toy12)
        assert res < 1e-5
