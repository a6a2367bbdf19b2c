"""Tests for the Euler-Maruyama sampler and autocorrelation rate fits."""

import functools
import math

import numpy as np
import pytest

from fastmix.distributions import Beta
from fastmix.errors import BoundaryViolation, InsufficientDecay, NonFiniteState
from fastmix.optimal import synthesize
from fastmix.sim import (
    SimConfig,
    SimResult,
    estimate_rate,
    rate_from_acf,
    simulate,
    write_autocorr_csv,
    write_hist_csv,
)


@functools.lru_cache(maxsize=None)
def _dome_process():
    """Optimal process for the 6x(1-x) dome target (lambda1 = 4)."""
    return synthesize(Beta(1.0, 1.0))


@functools.lru_cache(maxsize=None)
def _dome_run():
    """One shared medium-length equilibrium run of the dome process."""
    cfg = SimConfig(dt=1e-3, n_steps=100000, n_paths=8, seed=11,
                    burn_in=4000)
    return simulate(_dome_process(), cfg)


def _ou_target():
    """Unit-rate Ornstein-Uhlenbeck as a bare (mu, var, support) triple."""
    mu = lambda x: -np.asarray(x, dtype=float)
    var = lambda x: np.ones_like(np.asarray(x, dtype=float))
    return (mu, var, (-np.inf, np.inf))


class TestSimConfig:
    """Run-configuration defaults and validation."""

    def test_defaults(self):
        """Only dt and n_steps are required; the rest have safe defaults."""
        cfg = SimConfig(dt=1e-3, n_steps=100)
        assert cfg.n_paths == 1
        assert cfg.seed == 0
        assert cfg.burn_in == 0
        assert cfg.boundary_mode == "reflect"

    def test_nonpositive_dt_rejected(self):
        """Zero or negative time steps are configuration errors."""
        with pytest.raises(ValueError):
            SimConfig(dt=0.0, n_steps=100)
        with pytest.raises(ValueError):
            SimConfig(dt=-1e-3, n_steps=100)

    def test_step_and_path_counts_validated(self):
        """At least one step and one path are required."""
        with pytest.raises(ValueError):
            SimConfig(dt=1e-3, n_steps=0)
        with pytest.raises(ValueError):
            SimConfig(dt=1e-3, n_steps=100, n_paths=0)

    def test_burn_in_bounds(self):
        """Burn-in must be non-negative and leave at least one sample."""
        with pytest.raises(ValueError):
            SimConfig(dt=1e-3, n_steps=100, burn_in=-1)
        with pytest.raises(ValueError):
            SimConfig(dt=1e-3, n_steps=100, burn_in=100)

    def test_unknown_boundary_mode_rejected(self):
        """Only the two documented boundary modes are accepted."""
        with pytest.raises(ValueError):
            SimConfig(dt=1e-3, n_steps=100, boundary_mode="bounce")


class TestDeterminism:
    """Seed handling: bitwise reproducibility and genuine seed separation."""

    def test_same_seed_is_bitwise_identical(self):
        """Two runs with identical config agree to the last bit."""
        cfg = SimConfig(dt=1e-3, n_steps=5000, n_paths=2, seed=42,
                        burn_in=500)
        a = simulate(_dome_process(), cfg)
        b = simulate(_dome_process(), cfg)
        assert a.m1_hat == b.m1_hat
        assert a.m2_hat == b.m2_hat
        assert np.array_equal(a.acf, b.acf)
        assert np.array_equal(a.hist_freq, b.hist_freq)

    def test_nearby_seeds_give_distinct_streams(self):
        """Seeds 1, 2, 3 must not share noise even with multiple paths.

        Per-path streams are keyed by the (seed, path index) pair, so no
        permutation of paths can make two different seeds coincide.
        """
        cfg = dict(dt=1e-3, n_steps=5000, n_paths=4, burn_in=500)
        means = [simulate(_dome_process(),
                          SimConfig(seed=s, **cfg)).m1_hat
                 for s in (1, 2, 3)]
        assert len(set(means)) == 3


class TestStationaryMoments:
    """Long-run sample statistics against the target law 6x(1-x)."""

    def test_sample_mean(self):
        """The equilibrium sample mean sits near the target mean 1/2."""
        res = _dome_run()
        assert abs(res.m1_hat - 0.5) < 0.02

    def test_sample_variance(self):
        """The equilibrium sample variance matches the target var 1/20."""
        res = _dome_run()
        var_hat = res.m2_hat - res.m1_hat ** 2
        assert 0.95 < var_hat / 0.05 < 1.05

    def test_sample_count(self):
        """n_samples counts retained steps times paths."""
        res = _dome_run()
        assert res.n_samples == (100000 - 4000) * 8

    def test_histogram_is_normalized_density(self):
        """Histogram frequencies integrate to one over the bins."""
        res = _dome_run()
        widths = np.diff(res.hist_edges)
        np.testing.assert_allclose(np.sum(res.hist_freq * widths), 1.0,
                                   rtol=1e-12)

    def test_histogram_within_support(self):
        """Reflected paths never leave [0, 1]."""
        res = _dome_run()
        assert res.hist_edges[0] >= 0.0
        assert res.hist_edges[-1] <= 1.0

    def test_histogram_close_to_target_density(self):
        """Total variation against 6x(1-x) is small at this run length."""
        res = _dome_run()
        mids = 0.5 * (res.hist_edges[:-1] + res.hist_edges[1:])
        widths = np.diff(res.hist_edges)
        target = 6.0 * mids * (1.0 - mids)
        tv = 0.5 * np.sum(np.abs(res.hist_freq - target) * widths)
        assert tv < 0.05


class TestAutocorrelation:
    """Shape of the slow-mode autocorrelation sequence."""

    def test_normalized_at_lag_zero(self):
        """The autocorrelation starts at exactly one."""
        res = _dome_run()
        assert res.acf[0] == 1.0

    def test_head_decays_monotonically(self):
        """Early lags decrease steadily before noise matters."""
        res = _dome_run()
        head = res.acf[:30]
        assert np.all(np.diff(head) < 0.0)

    def test_lags_are_consecutive_integers(self):
        """Lag axis is 0..max_lag inclusive."""
        res = _dome_run()
        assert res.acf_lags[0] == 0
        np.testing.assert_array_equal(np.diff(res.acf_lags), 1)

    def test_max_lag_override(self):
        """A small max_lag truncates the reported sequence."""
        cfg = SimConfig(dt=1e-3, n_steps=3000, n_paths=1, seed=5)
        res = simulate(_dome_process(), cfg, max_lag=10)
        assert res.acf.shape == (11,)
        assert res.acf_lags[-1] == 10


class TestRateRecovery:
    """Measured mixing rates against the analytic lambda1."""

    def test_optimal_process_rate(self):
        """The dome process mixes at lambda1 = 4 within 15 percent."""
        cfg = SimConfig(dt=1e-3, n_steps=100000, n_paths=8, seed=7,
                        burn_in=4000)
        est = estimate_rate(_dome_process(), cfg)
        lam = _dome_process().lambda1
        assert abs(est.rate - lam) / lam < 0.15

    def test_rate_stable_under_step_doubling(self):
        """Halving dt at fixed horizon moves the fitted rate only a little."""
        lam = _dome_process().lambda1
        fine = estimate_rate(_dome_process(),
                             SimConfig(dt=1e-3, n_steps=100000, n_paths=8,
                                       seed=7, burn_in=4000))
        coarse = estimate_rate(_dome_process(),
                               SimConfig(dt=2e-3, n_steps=50000, n_paths=8,
                                         seed=7, burn_in=2000))
        assert abs(coarse.rate - lam) / lam < 0.15
        assert abs(fine.rate - coarse.rate) < 0.15 * lam

    def test_bare_pair_target_rate(self):
        """A hand-built unit OU pair recovers rate 1 within 10 percent."""
        cfg = SimConfig(dt=1e-3, n_steps=200000, n_paths=8, seed=3,
                        burn_in=5000)
        est = estimate_rate(_ou_target(), cfg, x0=0.0)
        assert abs(est.rate - 1.0) < 0.10
        assert est.stderr >= 0.0
        assert est.fit_window[0] < est.fit_window[1]

    def test_pair_target_requires_x0(self):
        """Bare drift/variance targets have no default starting point."""
        cfg = SimConfig(dt=1e-3, n_steps=1000)
        with pytest.raises(ValueError):
            simulate(_ou_target(), cfg)


class TestBoundaryModes:
    """Reflecting versus reject-step handling of finite endpoints."""

    def _crossing_target(self, half_sq):
        """Flat density on (0, 1) with constant sigma^2/2 = half_sq."""
        mu = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        var = lambda x: np.full_like(np.asarray(x, dtype=float), half_sq)
        return (mu, var, (0.0, 1.0))

    def test_modes_differ_when_boundary_is_active(self):
        """With frequent crossings the two modes give different samples."""
        target = self._crossing_target(0.5)
        kw = dict(dt=0.01, n_steps=5000, n_paths=2, seed=9)
        ra = simulate(target, SimConfig(boundary_mode="reflect", **kw),
                      x0=0.5)
        rb = simulate(target, SimConfig(boundary_mode="reject-step", **kw),
                      x0=0.5)
        assert ra.m1_hat != rb.m1_hat

    def test_both_modes_stay_inside_support(self):
        """Neither mode lets a sample escape the interval."""
        target = self._crossing_target(0.5)
        kw = dict(dt=0.01, n_steps=5000, n_paths=2, seed=9)
        for mode in ("reflect", "reject-step"):
            res = simulate(target, SimConfig(boundary_mode=mode, **kw),
                           x0=0.5)
            assert res.hist_edges[0] >= 0.0
            assert res.hist_edges[-1] <= 1.0

    def test_reject_step_gives_up_after_many_tries(self):
        """A step that cannot stay inside raises a typed error."""
        target = self._crossing_target(5e8)
        cfg = SimConfig(dt=1.0, n_steps=3, n_paths=2, seed=0,
                        boundary_mode="reject-step")
        with pytest.raises(BoundaryViolation, match="rejected"):
            simulate(target, cfg, x0=0.5)

    def test_non_finite_state_is_typed(self):
        """A NaN drift is reported as a simulation failure, not a crash."""
        mu = lambda x: np.full_like(np.asarray(x, dtype=float), np.nan)
        var = lambda x: np.ones_like(np.asarray(x, dtype=float))
        cfg = SimConfig(dt=1e-3, n_steps=10)
        with pytest.raises(NonFiniteState):
            simulate((mu, var, (-np.inf, np.inf)), cfg, x0=0.0)


class TestRateFromAcf:
    """Log-linear fitting over the decaying band of the autocorrelation."""

    def test_exact_exponential(self):
        """A pure exponential sequence returns its rate almost exactly."""
        dt = 0.01
        lags = np.arange(500)
        rho = np.exp(-2.0 * lags * dt)
        est = rate_from_acf(lags, rho, dt)
        np.testing.assert_allclose(est.rate, 2.0, rtol=1e-9)

    def test_clipped_head_is_excluded(self):
        """Lags above the upper band edge never enter the fit.

        The sequence is 3 exp(-2 t) clipped at 1, so its head is flat and
        would wreck a fit that included it; the fitted rate is exact only
        if the fit starts at the first lag at or below 0.8.
        """
        dt = 0.01
        lags = np.arange(400)
        rho = np.minimum(1.0, 3.0 * np.exp(-2.0 * lags * dt))
        est = rate_from_acf(lags, rho, dt)
        np.testing.assert_allclose(est.rate, 2.0, rtol=1e-9)

    def test_noisy_tail_is_excluded(self):
        """Late lags that wander back above the lower edge are ignored."""
        dt = 0.01
        lags = np.arange(400)
        rho = np.exp(-2.0 * lags * dt)
        rho[260:] = 0.06 * (1 + np.cos(lags[260:]))  # noise back in band
        est = rate_from_acf(lags, rho, dt)
        np.testing.assert_allclose(est.rate, 2.0, rtol=1e-6)

    def test_never_decaying_sequence_raises(self):
        """A sequence that never reaches the band is a typed failure."""
        lags = np.arange(100)
        rho = np.full(100, 0.95)
        rho[0] = 1.0
        with pytest.raises(InsufficientDecay):
            rate_from_acf(lags, rho, 0.01)

    def test_too_few_lags_in_band_raises(self):
        """A cliff through the band leaves too few points to fit."""
        lags = np.arange(10)
        rho = np.array([1.0, 0.9, 0.6, 0.02, 0.01, 0.01, 0.005, 0.004,
                        0.003, 0.002])
        with pytest.raises(InsufficientDecay, match="lags"):
            rate_from_acf(lags, rho, 0.01)

    def test_custom_window(self):
        """The band edges are configurable."""
        dt = 0.01
        lags = np.arange(800)
        rho = np.exp(-2.0 * lags * dt)
        est = rate_from_acf(lags, rho, dt, window=(0.01, 0.5))
        np.testing.assert_allclose(est.rate, 2.0, rtol=1e-9)


class TestResultShape:
    """SimResult field consistency."""

    def test_fields_and_shapes(self):
        """Histogram and autocorrelation arrays have matching sizes."""
        cfg = SimConfig(dt=1e-3, n_steps=2000, n_paths=2, seed=1,
                        burn_in=100)
        res = simulate(_dome_process(), cfg, n_bins=25)
        assert isinstance(res, SimResult)
        assert res.hist_edges.shape == (26,)
        assert res.hist_freq.shape == (25,)
        assert res.acf.shape == res.acf_lags.shape
        assert res.n_samples == (2000 - 100) * 2
        assert math.isfinite(res.m1_hat) and math.isfinite(res.m2_hat)


class TestCsvWriters:
    """Plain-text artifact formats."""

    def test_autocorr_csv(self, tmp_path):
        """Lag file has an integer lag column and full-precision values."""
        path = tmp_path / "autocorr.csv"
        write_autocorr_csv(path, [0, 1, 2], [1.0, 0.5, 0.25])
        lines = path.read_text(encoding="utf-8").strip().split("\n")
        assert lines[0] == "lag,autocorr"
        assert lines[1] == "0,1"
        assert lines[2] == "1,0.5"
        assert lines[3] == "2,0.25"

    def test_hist_csv(self, tmp_path):
        """Histogram file carries bin edges and densities row by row."""
        path = tmp_path / "hist.csv"
        write_hist_csv(path, [0.0, 0.5, 1.0], [0.5, 1.5])
        lines = path.read_text(encoding="utf-8").strip().split("\n")
        assert lines[0] == "bin_lo,bin_hi,freq"
        assert lines[1] == "0,0.5,0.5"
        assert lines[2] == "0.5,1,1.5"
