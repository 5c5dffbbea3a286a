"""Kernel and prior tests.

Frozen reference values were produced by independent oracles:
high-precision evaluation of the Gaussian cdf/pdf with mpmath at 40
digits (see _mpmath_oracle below for regeneration), and brute-force grid
minimization for the sparse-dimension function.
"""

import math

import numpy as np
import pytest

from riskfix.errors import DomainError
from riskfix.kernels import (
    DiscretePrior,
    kernel_G,
    kernel_H,
    normal_cdf,
    normal_pdf,
    prior_G,
    prior_H,
    psi_sparse,
    truncated_square_moment,
)


def _mpmath_oracle():  # pragma: no cover - regeneration helper
    """Regenerate the frozen cdf/G/H values.

    import mpmath as mp; mp.mp.dps = 40
    Phi = mp.ncdf; phi = mp.npdf
    G = lambda x: Phi(x) - x*phi(x) + x**2*Phi(-x)
    """


# (x, Phi(x)) at 40-digit precision, rounded to double.
CDF_TABLE = [
    (0.5, 0.6914624612740131),
    (1.0, 0.8413447460685429),
    (2.0, 0.9772498680518208),
    (5.0, 0.9999997133484281),
]

G_AT_1 = 0.7580292754808566  # mpmath oracle
H_AT_5 = 2.6730827669164075e-07  # mpmath oracle
TRUNC2_AT_07 = 0.2838961769112918  # mpmath quadrature of 2*int_g^inf (z-g)^2 phi(z) dz


class TestNormalCdf:
    def test_symmetry_at_zero(self):
        assert normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_pdf_at_zero(self):
        assert normal_pdf(0.0) == pytest.approx(0.3989422804014327, abs=1e-15)

    def test_central_band(self):
        # high-precision quadrature oracle of the Gaussian density
        assert normal_cdf(1.0) - normal_cdf(-1.0) == pytest.approx(
            0.6826894921370859, abs=1e-12
        )

    @pytest.mark.parametrize("x,expected", CDF_TABLE)
    def test_against_mpmath_table(self, x, expected):
        assert abs(normal_cdf(x) - expected) < 1e-12
        assert abs(normal_cdf(-x) - (1.0 - expected)) < 1e-12

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            normal_cdf(float("nan"))
        with pytest.raises(DomainError):
            normal_pdf(float("inf"))

    def test_vectorized(self):
        xs = np.linspace(-3, 3, 7)
        out = normal_cdf(xs)
        assert out.shape == xs.shape
        assert np.all(np.diff(out) > 0)


class TestKernels:
    def test_values_at_zero(self):
        assert kernel_G(0.0) == pytest.approx(0.5, abs=1e-15)
        assert kernel_H(0.0) == 0.0

    def test_G_at_one(self):
        assert kernel_G(1.0) == pytest.approx(G_AT_1, abs=1e-14)

    def test_H_at_five(self):
        assert kernel_H(5.0) == pytest.approx(H_AT_5, rel=1e-10)

    def test_G_tail_limit(self):
        g40 = kernel_G(40.0)
        assert 1.0 - 1e-12 <= g40 <= 1.0
        assert kernel_G(80.0) == 1.0
        assert kernel_H(80.0) == 0.0

    def test_negative_input_rejected(self):
        with pytest.raises(DomainError):
            kernel_G(-0.1)
        with pytest.raises(DomainError):
            kernel_H(np.array([1.0, -2.0]))

    def test_grid_bounds_and_identity(self):
        xs = np.linspace(0.0, 10.0, 10_001)
        g, h = kernel_G(xs), kernel_H(xs)
        assert np.all(g >= 0.5) and np.all(g <= 1.0)
        assert np.all(h >= 0.0)
        assert h.max() < 0.13
        assert np.max(np.abs(h - (normal_cdf(xs) - g))) < 1e-12

    def test_G_strictly_increasing(self):
        # Strict increase is checkable only while the true increment
        # 2x(1-Phi(x)) * 1e-3 stays above the 1e-12 accuracy contract
        # (G saturates to 1.0 in double precision near x ~ 7); beyond that
        # the grid must still be nondecreasing.
        xs = np.linspace(0.0, 10.0, 10_000)
        g = kernel_G(xs)
        assert np.all(np.diff(g) >= -1e-15)  # half-ulp noise at saturation
        strict = np.linspace(0.0, 5.0, 10_000)
        assert np.all(kernel_G(strict + 1e-3) > kernel_G(strict))

    def test_scaled_monotonicity(self):
        # x -> x^2 G(1/x) and x -> x^2 H(1/x) nondecreasing on (0, 10]
        xs = np.linspace(1e-2, 10.0, 2000)
        for kernel in (kernel_G, kernel_H):
            vals = xs**2 * kernel(1.0 / xs)
            assert np.all(np.diff(vals) >= -1e-12)

    def test_G_stability(self):
        xs = np.linspace(0.0, 10.0, 2000)
        g = kernel_G(xs)
        for delta in (0.01, 0.1):
            assert np.all(kernel_G((1.0 + delta) * xs) <= g * (1.0 + 8.0 * delta) + 1e-12)


class TestDiscretePrior:
    def test_validation(self):
        with pytest.raises(DomainError):
            DiscretePrior([(1.0, 0.4), (2.0, 0.4)])  # weights sum to 0.8
        with pytest.raises(DomainError):
            DiscretePrior([(-1.0, 1.0)])  # negative value
        with pytest.raises(DomainError):
            DiscretePrior([])

    def test_point_mass_at_zero(self):
        prior = DiscretePrior.point_mass(0.0)
        for omega in (0.1, 1.0, 7.0):
            assert prior_G(prior, omega) == pytest.approx(0.5, abs=1e-15)
            assert prior_H(prior, omega) == 0.0
        assert prior.mass_at_zero == 1.0

    def test_two_atom_mixture(self):
        prior = DiscretePrior([(0.0, 0.5), (5.0, 0.5)])
        expected = 0.5 * 0.5 + 0.5 * G_AT_1  # G evaluated at 5/5 = 1
        assert prior_G(prior, 5.0) == pytest.approx(expected, abs=1e-14)
        assert prior.mass_at_zero == 0.5

    def test_omega_domain(self):
        prior = DiscretePrior.point_mass(1.0)
        with pytest.raises(DomainError):
            prior_G(prior, 0.0)
        with pytest.raises(DomainError):
            prior_H(prior, -1.0)


def _psi_grid_oracle(rho: float, points: int = 400_001) -> float:
    """Brute-force grid minimization over gamma (independent of psi_sparse)."""
    gam = np.linspace(0.0, 20.0, points)
    vals = rho * (1.0 + gam * gam) + (1.0 - rho) * truncated_square_moment(gam)
    return float(vals.min())


class TestPsiSparse:
    def test_trivial_at_one(self):
        assert psi_sparse(1.0) == pytest.approx(1.0, abs=1e-10)

    def test_domain(self):
        for rho in (0.0, -0.5, 1.5):
            with pytest.raises(DomainError):
                psi_sparse(rho)

    def test_truncated_moment_against_quadrature(self):
        assert truncated_square_moment(0.7) == pytest.approx(TRUNC2_AT_07, abs=1e-14)

    def test_matches_grid_oracle(self):
        for rho in (0.005, 0.05, 0.3, 0.9):
            oracle = _psi_grid_oracle(rho)
            assert psi_sparse(rho) == pytest.approx(oracle, abs=5e-9)
            # golden section can only improve on the grid minimum
            assert psi_sparse(rho) <= oracle + 1e-12

    def test_nondecreasing_in_rho(self):
        rhos = np.linspace(0.02, 1.0, 50)
        vals = [psi_sparse(float(r)) for r in rhos]
        assert np.all(np.diff(vals) >= -1e-12)

    def test_sparse_dimension_bracket(self):
        # s-sparse vectors in dimension n: both n*psi(s/n) and
        # 2 s log(n/s) + 5s/4 upper-bound the descent-cone dimension, and the
        # lower bracket n*(psi - 2/sqrt(sn)) must sit below the other upper
        # bound.  At (s, n) = (5, 1000) the psi-based bound is the tighter
        # one (grid oracle: n*psi = 35.424...).
        s, n = 5, 1000
        n_psi = n * psi_sparse(s / n)
        assert n_psi == pytest.approx(35.4241301195908, abs=1e-5)
        loose = 2.0 * s * math.log(n / s) + 1.25 * s
        assert n_psi <= loose
        assert n * (psi_sparse(s / n) - 2.0 / math.sqrt(s * n)) <= loose
