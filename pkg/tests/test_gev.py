import math

import numpy as np
import pytest
from scipy.stats import genextreme

from lassozero.errors import FitFailed
from lassozero.gev import (
    GevParams,
    fit_gev,
    gev_cdf,
    gev_upper_quantile,
    qq_correlation,
)


def test_gumbel_quantile_closed_form():
    # with location 0 and scale 1, F(0) = exp(-1), so the upper quantile
    # at alpha = 1 - exp(-1) is exactly 0
    params = GevParams(0.0, 1.0, 0.0, 0.0)
    alpha = 1.0 - math.exp(-1.0)
    assert gev_upper_quantile(params, alpha) == pytest.approx(0.0, abs=1e-14)


def test_quantile_cdf_roundtrip():
    for shape in (-0.2, 0.0, 0.15):
        params = GevParams(1.3, 0.7, shape, 0.0)
        for alpha in (0.01, 0.2, 0.5, 0.9):
            x = gev_upper_quantile(params, alpha)
            assert gev_cdf(params, x) == pytest.approx(1.0 - alpha, abs=1e-12)


def test_shape_to_zero_limit_is_continuous():
    params_eps = GevParams(0.0, 1.0, 1e-8, 0.0)
    params_zero = GevParams(0.0, 1.0, 0.0, 0.0)
    for alpha in (0.01, 0.1, 0.5):
        assert abs(
            gev_upper_quantile(params_eps, alpha) - gev_upper_quantile(params_zero, alpha)
        ) < 1e-6


def test_fit_recovers_synthetic_parameters():
    # draws generated by an independent implementation (scipy's c = -shape)
    shape = 0.1
    x = genextreme.rvs(c=-shape, loc=0.0, scale=1.0, size=10_000, random_state=123)
    params = fit_gev(x)
    assert params.location == pytest.approx(0.0, abs=0.05)
    assert params.scale == pytest.approx(1.0, abs=0.05)
    assert params.shape == pytest.approx(shape, abs=0.05)
    # and the fitted law matches scipy's own max-likelihood quantiles
    q_scipy = genextreme.ppf(0.99, c=-params.shape, loc=params.location, scale=params.scale)
    assert gev_upper_quantile(params, 0.01) == pytest.approx(q_scipy, rel=1e-10)


def test_location_equivariance():
    x = genextreme.rvs(c=-0.05, loc=2.0, scale=0.5, size=3000, random_state=7)
    base = fit_gev(x)
    shifted = fit_gev(x + 10.0)
    assert shifted.location == pytest.approx(base.location + 10.0, abs=1e-5)
    assert shifted.scale == pytest.approx(base.scale, abs=1e-6)
    assert shifted.shape == pytest.approx(base.shape, abs=1e-6)


def test_constant_samples_fail():
    with pytest.raises(FitFailed):
        fit_gev(np.ones(100))


def test_too_few_samples_fail():
    with pytest.raises(FitFailed):
        fit_gev(np.arange(10.0))


def test_fit_improves_on_initializer_and_respects_support():
    x = genextreme.rvs(c=0.2, loc=5.0, scale=2.0, size=500, random_state=11)
    params = fit_gev(x)
    if abs(params.shape) > 1e-10:
        t = 1.0 + params.shape * (x - params.location) / params.scale
        assert np.all(t > 0)


def test_qq_correlation_on_well_specified_sample():
    x = genextreme.rvs(c=-0.1, loc=0.0, scale=1.0, size=2000, random_state=42)
    params = fit_gev(x)
    assert qq_correlation(params, x) > 0.99


def test_scale_must_be_positive():
    with pytest.raises(ValueError):
        GevParams(0.0, 0.0, 0.1, 0.0)
