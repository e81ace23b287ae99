import numpy as np
import pytest

from ellipt_vne.errors import (
    ClosureError,
    DegenerateConstantsError,
    DomainError,
    LinearDependenceError,
)
from ellipt_vne.operators import PAULI_X, PAULI_Y, PAULI_Z
from ellipt_vne.scenarios import d3_known, maxwell_bloch
from ellipt_vne.special_solutions import (
    Case1System,
    Case2System,
    case1_hamiltonian,
    case1_state,
    case2_state,
    case2_theta_shift,
    default_time_grid,
    fit_case1_constants,
    fit_case2_constants,
    theorem_residual,
)


def mb_ops(tau=1.0, delta=1.0):
    x = tau * delta
    n = 1 + x * x
    return x / n * PAULI_X, PAULI_Y / n, PAULI_Z / n


def pauli_case2(k):
    # A = s1, C = s2, D = k s3 closes with alpha = -2k, delta = -2/k
    return PAULI_X, PAULI_Y, k * PAULI_Z


def d3_ops(k=0.5, w=1.0, lam=1.0, mu=2.0, phi=0.0):
    return d3_known(k, w, phi, lam, mu).system


@pytest.mark.parametrize("k", [0.3, 0.8, 1.0])
def test_case2_constants_pauli(k):
    c = fit_case2_constants(*pauli_case2(k), k=k)
    assert c.values == pytest.approx((-2 * k, -2 / k), rel=1e-12)
    if k < 1:
        with pytest.raises(ClosureError, match="k\\^2"):
            fit_case2_constants(*mb_ops(), k=k)


def test_case2_constants_maxwell_bloch():
    # x = tau*Delta: alpha = -2/(x(1+x^2)), delta = -2x/(1+x^2)
    for tau, delta in [(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)]:
        x = tau * delta
        c = fit_case2_constants(*mb_ops(tau, delta), k=1.0)
        assert c.alpha == pytest.approx(-2 / (x * (1 + x * x)), rel=1e-12)
        assert c.delta == pytest.approx(-2 * x / (1 + x * x), rel=1e-12)
        assert c.fit_residual < 1e-14


def test_case1_constants_d3():
    s = d3_ops()
    assert (s.alpha, s.beta) == pytest.approx((1.0, 1 / 3), abs=1e-12)
    with pytest.raises(AttributeError):
        s.constants.delta


def test_case1_hand_built_su2():
    # Paulis scaled: i[B,X] = a A etc. give closed relations for suitable scales
    # A = a s1, B = s3/2, X = x s2 closes at k = 1 when a^2 + x^2 = 1/4
    a = x = 0.5 / np.sqrt(2)
    c = fit_case1_constants(a * PAULI_X, 0.5 * PAULI_Z, x * PAULI_Y, k=1.0)
    assert c.values == pytest.approx((1.0, 1.0))
    with pytest.raises(ClosureError):
        fit_case1_constants(0.5 * PAULI_X, 0.5 * PAULI_Z, 0.5 * PAULI_Y, k=1.0)


def test_closure_failure_names_relation():
    A, C, D = mb_ops()
    with pytest.raises(ClosureError) as exc:
        fit_case2_constants(A, C, D + 0.3 * A, k=1.0)
    assert exc.value.relation.startswith("i[")
    assert exc.value.residual > 1e-8


def test_dependent_operators():
    A, C, _ = mb_ops()
    with pytest.raises(LinearDependenceError):
        fit_case2_constants(A, C, 2 * A, k=1.0)


def test_degenerate_alpha_plus_beta():
    # i[B,X] = A and i[A,B] = -X give alpha = 1, beta = -1
    A, B, X = 0.5 * PAULI_X, 0.5 * PAULI_Z, -0.5 * PAULI_Y
    with pytest.raises((DegenerateConstantsError, ClosureError)):
        fit_case1_constants(A, B, X, k=1.0)


@pytest.mark.parametrize("k", [0.0, -0.2, 1.5])
def test_bad_modulus(k):
    with pytest.raises(DomainError):
        fit_case2_constants(*mb_ops(), k=k)


def test_theta_relation():
    k = 0.6
    A, C, D = pauli_case2(k)
    th0 = 0.5 * np.eye(2)
    s = Case2System.build(th0, A, C, D, omega=1.0, k=k)
    assert s.t_D == pytest.approx(case2_theta_shift(k, s.alpha, s.delta))
    assert np.allclose(s.theta, th0 + s.t_D * D)
    with pytest.raises(ClosureError, match="theta0"):
        Case2System.build(th0, A, C, D, omega=1.0, k=k, theta=th0)


def test_theta_must_be_central():
    s = d3_ops()
    with pytest.raises(ClosureError):
        Case1System.build(s.A, s.A, s.B, s.X, 1.0, 0.5)


def test_state_values_maxwell_bloch():
    s = maxwell_bloch(1.0, 1.0).system
    # at t = 0: rho = theta + A + D = 1/2 (I + s1)
    assert np.allclose(case2_state(s, 0.0), 0.5 * (np.eye(2) + PAULI_X))
    r = s.state(np.linspace(-3, 3, 7))
    assert r.shape == (7, 2, 2)
    assert np.allclose(np.trace(r, axis1=1, axis2=2), 1.0)


def test_derivative_matches_finite_differences():
    for s in (d3_ops(), maxwell_bloch(2.0, 0.5).system):
        t, h = 0.37, 1e-5
        fd = (s.state(t + h) - s.state(t - h)) / (2 * h)
        assert np.allclose(s.state_derivative(t), fd, atol=1e-9)


def test_state_derivative_at_zero_case1():
    s = d3_ops()
    assert np.allclose(s.state_derivative(0.0), s.omega * s.B)
    assert np.allclose(case1_state(s, 0.0), s.theta + s.A + s.X)


@pytest.mark.parametrize("nu", [-1.0, 0.0, 1.0, 2.5])
def test_theorem_residual_any_nu(nu):
    s1 = d3_ops().with_nu(nu)
    s2 = maxwell_bloch(1.0, 1.0, nu=nu).system
    for s in (s1, s2):
        assert theorem_residual(s, s.hamiltonian(), default_time_grid(s, 401)) < 1e-12


def test_hamiltonian_images_case1():
    s = d3_ops(lam=1.0, mu=2.0).with_nu(0.5)
    h = case1_hamiltonian(s)
    # H[A] = (nu + mu + lam) A, H[X] = (nu - mu + lam) X, H[B] = nu B
    assert np.allclose(h(s.A), 3.5 * s.A)
    assert np.allclose(h(s.B), 0.5 * s.B)
    assert np.allclose(h(s.X), -0.5 * s.X)
    assert np.allclose(h(s.theta), 0)


def test_hamiltonian_images_case2():
    s = maxwell_bloch(1.0, 1.0).system
    h = s.hamiltonian()
    # alpha = delta = -1, t_D = -1: H[A] = -2A, H[theta] = D
    assert np.allclose(h(s.A), -2 * s.A)
    assert np.allclose(h(s.theta), s.D)
    assert np.allclose(h(s.C), 0)


def test_wrong_map_has_large_residual():
    s = d3_ops()
    bad = s.with_nu(0.0).hamiltonian() * 1.1
    assert theorem_residual(s, bad, default_time_grid(s, 101)) > 1e-3


def test_periodicity():
    for k in (0.3, 0.7):
        for s in (d3_ops(k=k), Case2System.build(0.5 * np.eye(2), *pauli_case2(k), omega=1.3, k=k)):
            t = np.linspace(0, s.period, 23)
            assert np.max(np.abs(s.state(t + s.period) - s.state(t))) < 1e-12


def test_time_grid():
    s = maxwell_bloch(2.0, 1.0).system
    g = default_time_grid(s, 11)
    assert g[0] == pytest.approx(-20) and g[-1] == pytest.approx(20)
    s = d3_ops()
    assert default_time_grid(s, 11)[-1] == pytest.approx(2 * s.period)


def test_omega_must_be_nonzero():
    s = d3_ops()
    with pytest.raises(DomainError):
        Case1System.build(s.theta, s.A, s.B, s.X, 0.0, 0.5)
