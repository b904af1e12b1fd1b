"""Tests for Laplace / characteristic-function inversion."""

import math

import numpy as np
import pytest
from scipy import special as sp
from scipy import stats as st

from bessel_credit import transform as tr


BATTERY = list(tr.BUILTIN_BATTERY)


def test_invert_laplace_trivial_pairs():
    assert tr.invert_laplace(lambda s: 1.0 / s, 3.0) == pytest.approx(1.0, abs=1e-8)
    assert tr.invert_laplace(lambda s: 1.0 / (s + 0.7), 2.0) == pytest.approx(
        math.exp(-1.4), abs=1e-8
    )
    assert tr.invert_laplace(lambda s: 1.0 / s ** 2, 1.5) == pytest.approx(1.5, abs=1e-8)


@pytest.mark.parametrize("F,f,sigma0,name", BATTERY, ids=[b[3] for b in BATTERY])
def test_euler_battery(F, f, sigma0, name):
    lt = tr.LaplaceTransform(F, sigma0=sigma0)
    for t in np.linspace(0.1, 5.0, 25):
        assert tr.invert_laplace(lt, float(t)) == pytest.approx(f(t), abs=1e-8)


@pytest.mark.parametrize("F,f,sigma0,name", BATTERY, ids=[b[3] for b in BATTERY])
def test_stehfest_battery(F, f, sigma0, name):
    # real-node alternative; inherently coarser than the Bromwich route, and
    # coarser still on the super-exponentially decaying half-normal
    lt = tr.LaplaceTransform(F, sigma0=sigma0, supports_complex=False)
    tol = 2e-3 if name == "half-normal" else 1e-4
    for t in np.linspace(0.1, 5.0, 10):
        assert tr.invert_laplace(lt, float(t)) == pytest.approx(f(t), abs=tol)


def test_method_dispatch():
    lt = tr.LaplaceTransform(lambda s: 1.0 / (s + 1.0), supports_complex=False)
    # auto must route a real-only evaluator away from the Bromwich contour
    assert tr.invert_laplace(lt, 1.0) == pytest.approx(math.exp(-1.0), abs=1e-6)
    with pytest.raises(tr.InversionError):
        tr.invert_laplace(lt, 1.0, method="euler")
    with pytest.raises(ValueError):
        tr.invert_laplace(lambda s: 1.0 / s, 1.0, method="bogus")
    with pytest.raises(ValueError):
        tr.invert_laplace(lambda s: 1.0 / s, -2.0)


def test_error_estimate_reported():
    val, err = tr.invert_laplace(lambda s: 1.0 / (s + 1.0), 1.0, full_output=True)
    assert abs(val - math.exp(-1.0)) <= max(err, 1e-9)
    assert err < 1e-6


def test_cdf_from_laplace_point_mass():
    # step original: tested away from the jump; the Euler acceleration is
    # slow on discontinuous functions, so give it a longer plain series
    c = 2.0
    F = tr.LaplaceTransform(lambda s: np.exp(-c * s) / s)
    assert tr.cdf_from_laplace(F, 1.0, n0=60) == pytest.approx(0.0, abs=1e-3)
    assert tr.cdf_from_laplace(F, 3.0, n0=60) == pytest.approx(1.0, abs=1e-3)


def test_cdf_from_laplace_exponential_time():
    F = tr.LaplaceTransform(lambda s: 1.0 / (s * (1.0 + s)))
    assert tr.cdf_from_laplace(F, 1.0) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-8)
    # monotone in t and inside [0,1]
    grid = [tr.cdf_from_laplace(F, t) for t in np.linspace(0.05, 6.0, 40)]
    assert all(0.0 <= p <= 1.0 for p in grid)
    assert all(b - a >= -1e-9 for a, b in zip(grid, grid[1:]))


def test_monotone_cdf_grid():
    raw = np.array([0.0, 0.1, 0.09, 0.5, 0.45, 1.0000001])
    fixed = tr.monotone_cdf_grid(raw)
    assert np.all(np.diff(fixed) >= 0.0)
    assert fixed[0] == 0.0 and fixed[-1] == 1.0


# ---------------------------------------------------------------------------
# Gil-Pelaez
# ---------------------------------------------------------------------------

def _normal_cf(u):
    return np.exp(-0.5 * u * u)


def test_density_from_cf_normal():
    assert tr.density_from_cf(_normal_cf, 0.0) == pytest.approx(
        1.0 / math.sqrt(2.0 * math.pi), abs=1e-10
    )
    for x in [-1.3, 0.4, 2.5]:
        assert tr.density_from_cf(_normal_cf, x) == pytest.approx(
            st.norm.pdf(x), abs=1e-8
        )


def test_cdf_from_cf_normal():
    for x in [-2.0, -0.5, 0.0, 1.2815515655446004, 3.0]:
        assert tr.cdf_from_cf(_normal_cf, x) == pytest.approx(st.norm.cdf(x), abs=1e-8)


def test_density_integrates_to_one():
    # gamma(2,1) law via its characteristic function; Simpson on a grid fine
    # enough that discretization sits below the 1e-6 budget
    from scipy.integrate import simpson

    phi = tr.CharacteristicFunction(lambda u: (1.0 - 1j * u) ** -2.0)
    xs = np.linspace(1e-9, 32.0, 1601)
    dens = np.array([tr.density_from_cf(phi, float(x)) for x in xs])
    total = simpson(dens, x=xs)
    assert total == pytest.approx(1.0, abs=1e-6)
    assert np.all(dens >= 0.0)
    # spot values against the closed-form density
    for x in (0.5, 2.0, 7.0):
        assert tr.density_from_cf(phi, x) == pytest.approx(st.gamma(2).pdf(x), abs=1e-8)


def test_cf_point_mass_cdf():
    c = 1.5
    phi = tr.CharacteristicFunction(lambda u: np.exp(1j * u * c))
    # atom: segment sums alternate without decay; acceleration supplies the
    # principal value on either side of the jump
    assert tr.cdf_from_cf(phi, c - 1.0) == pytest.approx(0.0, abs=1e-6)
    assert tr.cdf_from_cf(phi, c + 1.0) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(tr.InversionError):
        tr.density_from_cf(phi, c)


def test_cf_validation():
    with pytest.raises(ValueError):
        tr.CharacteristicFunction(lambda u: 2.0 * np.exp(-u * u)).validate()
    with pytest.raises(ValueError):
        tr.CharacteristicFunction(lambda u: np.exp(u)).validate()
    tr.CharacteristicFunction(_normal_cf).validate()
