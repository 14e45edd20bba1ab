import math

import numpy as np
import pytest

from deuteron_qc.errors import DomainError
from deuteron_qc.spline import fit_minimum_1d, fit_minimum_2d, smoother_matrix


def test_interpolates_exact_quadratic():
    x = np.linspace(-1, 2, 13)
    fit = fit_minimum_1d(x, (x - 0.37) ** 2 + 1.5)
    assert fit.location[0] == pytest.approx(0.37, abs=1e-3)
    assert fit.value == pytest.approx(1.5, abs=1e-5)
    assert fit.std_error == 0


def test_interpolates_cosine_minimum():
    x = np.linspace(-math.pi, math.pi, 13)
    fit = fit_minimum_1d(x, -np.cos(x - 0.2))
    assert fit.location[0] == pytest.approx(0.2, abs=2e-3)
    assert fit.value == pytest.approx(-1.0, abs=1e-3)


def test_minimum_at_boundary():
    x = np.linspace(0, 1, 6)
    fit = fit_minimum_1d(x, x)
    assert fit.location[0] == 0 and fit.value == 0


def test_rejects_short_or_unsorted():
    with pytest.raises(DomainError):
        fit_minimum_1d([0, 1, 2], [1, 0, 1])
    with pytest.raises(DomainError):
        fit_minimum_1d([0, 2, 1, 3], [1, 0, 1, 2])
    with pytest.raises(DomainError):
        fit_minimum_2d([0, 1, 2, 3], [0, 1, 2, 3], np.zeros((3, 4)))


def test_smoother_limits():
    x = np.linspace(0, 1, 8)
    y = np.sin(3 * x)
    w = np.ones(8)
    assert np.allclose(smoother_matrix(x, w, 0.0) @ y, y)
    # very large penalty leaves the least-squares line
    line = smoother_matrix(x, w, 1e6) @ y
    coeffs = np.polyfit(x, y, 1)
    assert np.allclose(line, np.polyval(coeffs, x), atol=1e-6)


def test_noisy_fit_is_unbiased_and_covers():
    x = np.linspace(-0.5, 0.5, 13)
    sigma = np.full(13, 0.02)
    errors, stds = [], []
    for seed in range(60):
        rng = np.random.default_rng(seed)
        y = 4 * (x - 0.1) ** 2 - 1.0 + rng.normal(0, 0.02, 13)
        fit = fit_minimum_1d(x, y, sigma)
        errors.append(fit.value + 1.0)
        stds.append(fit.std_error)
    errors, stds = np.array(errors), np.array(stds)
    assert abs(errors.mean()) < 3 * errors.std() / math.sqrt(60) + 0.005
    assert np.mean(np.abs(errors) <= 2 * stds) >= 0.8


def test_2d_exact_surface():
    x1 = np.linspace(-1, 1, 13)
    x2 = np.linspace(-2, 0, 13)
    g1, g2 = np.meshgrid(x1, x2, indexing="ij")
    y = (g1 - 0.21) ** 2 + 2 * (g2 + 1.3) ** 2 + 0.5 * (g1 - 0.21) * (g2 + 1.3) - 3.0
    fit = fit_minimum_2d(x1, x2, y)
    assert fit.location == pytest.approx((0.21, -1.3), abs=1e-3)
    assert fit.value == pytest.approx(-3.0, abs=1e-4)


def test_2d_noisy_surface():
    x1 = np.linspace(-0.5, 0.5, 13)
    x2 = np.linspace(-0.5, 0.5, 13)
    g1, g2 = np.meshgrid(x1, x2, indexing="ij")
    rng = np.random.default_rng(3)
    y = 3 * g1**2 + 2 * g2**2 - 2.0 + rng.normal(0, 0.02, g1.shape)
    fit = fit_minimum_2d(x1, x2, y, np.full(g1.shape, 0.02))
    assert abs(fit.value + 2.0) < 4 * fit.std_error + 0.01
    assert fit.std_error > 0
