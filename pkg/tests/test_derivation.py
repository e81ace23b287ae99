import numpy as np
import pytest

from ellipt_vne.derivation import (
    decompose_theta,
    derive_case1_coefficients,
    derive_case2_coefficients,
    derive_coefficients,
)
from ellipt_vne.errors import ClosureError, DerivationError, DomainError
from ellipt_vne.scenarios import d3_known, d3_variation, maxwell_bloch, three_level

CASE1_ZEROS = {"a_B", "a_X", "b_A", "b_X", "x_A", "x_B", "a_0", "b_0", "x_0"}


@pytest.mark.parametrize("lam,mu,w", [(1.0, 2.0, 1.0), (-0.5, 1.5, 2.0), (0.0, 1.0, 0.7)])
def test_case1_d3_known(lam, mu, w):
    s = d3_known(0.5, w, 0.3, lam, mu).system
    der = derive_case1_coefficients(s.A, s.B, s.X, s.theta, s.omega, s.k)
    assert set(der.forced_zeros) == CASE1_ZEROS
    assert der.max_forced < 1e-10
    assert der.constants["alpha"] == pytest.approx(w / (mu - lam), rel=1e-10)
    assert der.constants["beta"] == pytest.approx(w / (mu + lam), rel=1e-10)
    assert der.null_dim == 1
    # diagonal entries reproduce the theorem map at nu = b_B
    c = der.coefficients
    assert c["a_A"] == pytest.approx(mu + lam, abs=1e-10)
    assert c["x_X"] == pytest.approx(lam - mu, abs=1e-10)


def test_case1_nu_direction():
    s = d3_variation(1.0, 1.0, 0.0, 0.5).system
    der = derive_case1_coefficients(s.A, s.B, s.X, s.theta, s.omega, s.k, nu=4.0)
    c = der.coefficients
    assert (c["a_A"], c["b_B"], c["x_X"]) == pytest.approx((3.0, 4.0, 5.0), abs=1e-10)
    c0 = der.at_nu(0.0)
    assert (c0["a_A"], c0["b_B"], c0["x_X"]) == pytest.approx((-1.0, 0.0, 1.0), abs=1e-10)
    assert der.to_dict()["nu_convention"] == "nu = b_B"


@pytest.mark.parametrize("tau,delta", [(1.0, 1.0), (2.0, 0.5)])
def test_case2_maxwell_bloch(tau, delta):
    s = maxwell_bloch(tau, delta).system
    der = derive_case2_coefficients(s.A, s.C, s.D, s.theta0, s.t_coeffs, s.omega, s.k)
    x = tau * delta
    assert der.max_forced < 1e-10
    for key in ("c_A", "d_A", "d_C", "c_0"):
        assert abs(der.forced_zeros[key]) < 1e-10
    assert der.constants["alpha"] == pytest.approx(-2 / (x * (1 + x * x)), rel=1e-10)
    assert der.constants["delta"] == pytest.approx(-2 * x / (1 + x * x), rel=1e-10)
    assert der.constants["t_D"] == pytest.approx(-(1 + x * x) / 2, rel=1e-10)


def test_case2_three_level():
    s = three_level(0.5, 2.0, 1.0).system
    der = derive_case2_coefficients(s.A, s.C, s.D, s.theta0, s.t_coeffs, s.omega, s.k, nu=0.7)
    assert der.constants["alpha"] == pytest.approx(2.0, rel=1e-10)
    assert der.constants["delta"] == pytest.approx(1.0, rel=1e-10)
    # theta image matches the corrected formula -w/alpha + nu t_D
    assert der.coefficients["d_0"] == pytest.approx(s.with_nu(0.7).theta_image_coefficient(),
                                                    abs=1e-10)


def test_case2_rejects_theta_with_wrong_components():
    s = maxwell_bloch(1.0, 1.0).system
    with pytest.raises(DerivationError):
        derive_case2_coefficients(s.A, s.C, s.D, s.theta0, (0.1, 0.0, s.t_D), s.omega, s.k)


def test_case1_not_unique_at_k1():
    s = d3_known(1.0, 1.0, 0.0, 1.0, 2.0).system
    with pytest.raises(DerivationError):
        derive_case1_coefficients(s.A, s.B, s.X, s.theta, s.omega, s.k)


def test_dispatch_and_theta_decomposition():
    s = maxwell_bloch(1.0, 1.0).system
    t = decompose_theta(s.theta, s.theta0, s.A, s.C, s.D)
    assert t == pytest.approx((0.0, 0.0, s.t_D), abs=1e-12)
    der = derive_coefficients(2, {"A": s.A, "C": s.C, "D": s.D, "theta0": s.theta0,
                                  "theta": s.theta}, s.omega, s.k)
    assert der.case == 2
    with pytest.raises(ClosureError):
        decompose_theta(s.theta + 0.1 * np.eye(2), s.theta0, s.A, s.C, s.D)
    with pytest.raises(KeyError):
        derive_coefficients(2, {"A": s.A, "C": s.C, "D": s.D, "theta0": s.theta0}, 1.0, 1.0)
    with pytest.raises(DomainError):
        derive_coefficients(3, {}, 1.0, 1.0)
