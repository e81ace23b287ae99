"""Elliptic-function solutions of the nonlinear von Neumann equation.

Two families are supported. In *case 1*

    rho(t) = theta + cn(wt) A + sn(wt) B + dn(wt) X

with ``theta`` central and the closure relations

    i[B, X] = alpha A,   i[A, B] = k^2 beta X,   i[A, X] = -alpha beta/(alpha+beta) B.

In *case 2*

    rho(t) = theta + cn(wt) A + sn(wt) dn(wt) C + cn(wt)^2 D

with ``theta = theta0 + t_D D`` (``theta0`` central) and

    i[C, D] = alpha A,   i[A, C] = delta D,   i[A, D] = -k^2 delta C.

For each family the module validates operator tuples, extracts the
structure constants, evaluates rho(t) and its derivative in closed form, and
builds the state-dependent Hamiltonian ``H[.]`` for which rho(t) solves
``d rho/dt = i [rho, H[rho]]``. The gauge parameter ``nu`` is free in both
families.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .elliptic import check_modulus, jacobi_sncndn, period
from .errors import (
    ClosureError,
    DegenerateConstantsError,
    DomainError,
)
from .operators import (
    as_hermitian,
    check_independent,
    commutator,
    commutator_i,
    frobenius_inner,
    frobenius_norm,
    operator_map_from_action,
    span_coefficients,
)

CLOSURE_RTOL = 1e-8
CENTRAL_RTOL = 1e-10
THETA0_RTOL = 1e-10
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class StructureConstants:
    """Fitted constants ``(alpha, beta)`` (case 1) or ``(alpha, delta)`` (case 2).

    ``residuals`` maps each relation to its relative defect; ``fit_residual``
    is the largest of them.
    """

    case: int
    values: tuple
    fit_residual: float
    residuals: dict = field(default_factory=dict)

    @property
    def alpha(self):
        return self.values[0]

    @property
    def beta(self):
        if self.case != 1:
            raise AttributeError("beta is only defined for case 1")
        return self.values[1]

    @property
    def delta(self):
        if self.case != 2:
            raise AttributeError("delta is only defined for case 2")
        return self.values[1]


def _relative_defect(lhs, coef, target, p, q):
    """``|lhs - coef*target| / (|p| |q|)`` for ``lhs = i[p, q]``."""
    scale = frobenius_norm(p) * frobenius_norm(q)
    if scale == 0.0:
        return 0.0
    return frobenius_norm(lhs - coef * target) / scale


def _project(lhs, target):
    return frobenius_inner(target, lhs).real / frobenius_inner(target, target).real


def _positive_k(k):
    k = check_modulus(k)
    if k == 0.0:
        raise DomainError("the elliptic modulus must be positive")
    return k


def _check_closure(residuals, tol, case):
    for name, r in residuals.items():
        if not r <= tol:
            raise ClosureError(
                f"not a case-{case} system: relation {name} fails "
                f"(relative defect {r:.3e} > {tol:.1e})",
                relation=name,
                residual=r,
            )


def fit_case1_constants(A, B, X, k, tol=CLOSURE_RTOL):
    """Fit ``alpha`` and ``beta`` of the case-1 relations by projection.

    ``alpha`` is the Frobenius projection of ``i[B, X]`` on ``A`` and
    ``k^2 beta`` that of ``i[A, B]`` on ``X``. The third relation is then
    checked with the fitted values.

    Raises
    ------
    LinearDependenceError
        ``A, B, X`` are not linearly independent.
    ClosureError
        Some relation has a relative defect above ``tol``.
    DegenerateConstantsError
        ``alpha + beta == 0``, so the third relation is undefined.
    """
    k = _positive_k(k)
    A, B, X = (as_hermitian(o) for o in (A, B, X))
    check_independent([A, B, X], names=("A", "B", "X"))

    k_bx = commutator_i(B, X)
    k_ab = commutator_i(A, B)
    k_ax = commutator_i(A, X)
    alpha = _project(k_bx, A)
    beta = _project(k_ab, X) / (k * k)
    residuals = {
        "i[B,X] = alpha A": _relative_defect(k_bx, alpha, A, B, X),
        "i[A,B] = k^2 beta X": _relative_defect(k_ab, k * k * beta, X, A, B),
    }
    _check_closure(residuals, tol, 1)

    if abs(alpha + beta) <= DEGENERATE_RTOL * max(abs(alpha), abs(beta), 1e-300):
        raise DegenerateConstantsError(
            f"alpha + beta vanishes (alpha={alpha!r}, beta={beta!r})"
        )
    gamma = -alpha * beta / (alpha + beta)
    residuals["i[A,X] = -alpha beta/(alpha+beta) B"] = _relative_defect(
        k_ax, gamma, B, A, X
    )
    _check_closure(residuals, tol, 1)
    return StructureConstants(1, (alpha, beta), max(residuals.values()), residuals)


def fit_case2_constants(A, C, D, k, tol=CLOSURE_RTOL):
    """Fit ``alpha`` and ``delta`` of the case-2 relations.

    ``alpha`` comes from ``i[C, D]`` projected on ``A``, ``delta`` from
    ``i[A, C]`` projected on ``D``; ``i[A, D] = -k^2 delta C`` is checked.
    """
    k = _positive_k(k)
    A, C, D = (as_hermitian(o) for o in (A, C, D))
    check_independent([A, C, D], names=("A", "C", "D"))

    k_cd = commutator_i(C, D)
    k_ac = commutator_i(A, C)
    k_ad = commutator_i(A, D)
    alpha = _project(k_cd, A)
    delta = _project(k_ac, D)
    residuals = {
        "i[C,D] = alpha A": _relative_defect(k_cd, alpha, A, C, D),
        "i[A,C] = delta D": _relative_defect(k_ac, delta, D, A, C),
        "i[A,D] = -k^2 delta C": _relative_defect(k_ad, -k * k * delta, C, A, D),
    }
    _check_closure(residuals, tol, 2)
    return StructureConstants(2, (alpha, delta), max(residuals.values()), residuals)


def _check_central(z, ops, names, label):
    """Require ``[z, op] = 0`` for every op (relative to the norms)."""
    for name, op in zip(names, ops):
        scale = frobenius_norm(z) * frobenius_norm(op)
        defect = frobenius_norm(commutator(z, op))
        if scale and defect > CENTRAL_RTOL * scale:
            raise ClosureError(
                f"{label} does not commute with {name} (defect {defect:.3e})",
                relation=f"[{label},{name}] = 0",
                residual=defect / scale,
            )


def _combine(coefs, ops):
    """``sum_j coefs[j] * ops[j]`` for scalar or 1-d array coefficients."""
    coefs = [np.asarray(c, dtype=float) for c in coefs]
    if coefs[0].ndim == 0:
        return sum(float(c) * o for c, o in zip(coefs, ops))
    return sum(c[:, None, None] * o[None, :, :] for c, o in zip(coefs, ops))


def _nonzero(x, what):
    if x == 0.0:
        raise DegenerateConstantsError(f"{what} vanishes; the Hamiltonian is undefined")


@dataclass(frozen=True, eq=False)
class Case1System:
    """Validated operator tuple of case 1 together with its constants."""

    theta: np.ndarray
    A: np.ndarray
    B: np.ndarray
    X: np.ndarray
    omega: float
    k: float
    alpha: float
    beta: float
    nu: float = 0.0
    constants: StructureConstants = None

    @classmethod
    def build(cls, theta, A, B, X, omega, k, nu=0.0, tol=CLOSURE_RTOL):
        omega = float(omega)
        if omega == 0.0 or not np.isfinite(omega):
            raise DomainError("omega must be finite and non-zero")
        k = _positive_k(k)
        theta = as_hermitian(theta)
        A, B, X = (as_hermitian(o, theta.shape[0]) for o in (A, B, X))
        consts = fit_case1_constants(A, B, X, k, tol)
        _check_central(theta, (A, B, X), ("A", "B", "X"), "theta")
        return cls(theta, A, B, X, omega, k, consts.alpha, consts.beta, float(nu), consts)

    @property
    def dim(self):
        return self.theta.shape[0]

    @property
    def period(self):
        return period(self.k, self.omega)

    def with_nu(self, nu):
        return replace(self, nu=float(nu))

    def coefficient_functions(self, t):
        sn, cn, dn = jacobi_sncndn(self.omega * np.asarray(t, dtype=float), self.k)
        return sn, cn, dn

    def state(self, t):
        sn, cn, dn = self.coefficient_functions(t)
        ones = np.ones_like(np.asarray(cn, dtype=float))
        return _combine((ones, cn, sn, dn), (self.theta, self.A, self.B, self.X))

    def state_derivative(self, t):
        sn, cn, dn = self.coefficient_functions(t)
        w, k2 = self.omega, self.k**2
        return _combine(
            (-w * sn * dn, w * cn * dn, -w * k2 * sn * cn), (self.A, self.B, self.X)
        )

    def hamiltonian(self):
        """State-dependent Hamiltonian as an :class:`OperatorMap`.

        ``H[A] = (nu + w/beta) A``, ``H[B] = nu B``, ``H[X] = (nu - w/alpha) X``,
        ``H[theta] = 0`` and zero on the orthogonal complement of the span.
        """
        _nonzero(self.alpha, "alpha")
        _nonzero(self.beta, "beta")
        nu, w = self.nu, self.omega
        pairs = [
            (self.A, (nu + w / self.beta) * self.A),
            (self.B, nu * self.B),
            (self.X, (nu - w / self.alpha) * self.X),
        ]
        if frobenius_norm(self.theta) > 0.0:
            pairs.insert(0, (self.theta, np.zeros_like(self.theta)))
        return operator_map_from_action(self.dim, pairs)


def case2_theta_shift(k, alpha, delta):
    """Coefficient ``t_D`` in ``theta = theta0 + t_D D``."""
    return (1.0 - 2.0 * k * k) / (2.0 * k * k) - delta / (2.0 * alpha)


@dataclass(frozen=True, eq=False)
class Case2System:
    """Validated operator tuple of case 2 together with its constants."""

    theta0: np.ndarray
    theta: np.ndarray
    A: np.ndarray
    C: np.ndarray
    D: np.ndarray
    omega: float
    k: float
    alpha: float
    delta: float
    nu: float = 0.0
    t_coeffs: tuple = (0.0, 0.0, 0.0)
    constants: StructureConstants = None

    @classmethod
    def build(cls, theta0, A, C, D, omega, k, nu=0.0, theta=None, tol=CLOSURE_RTOL):
        """Validate the operators; derive ``theta`` from ``theta0`` if omitted.

        When ``theta`` is given, ``theta - theta0`` must equal ``t_D D`` with
        ``t_D`` fixed by the structure constants; otherwise a
        :class:`ClosureError` naming the ``theta0`` relation is raised.
        """
        omega = float(omega)
        if omega == 0.0 or not np.isfinite(omega):
            raise DomainError("omega must be finite and non-zero")
        k = _positive_k(k)
        theta0 = as_hermitian(theta0)
        A, C, D = (as_hermitian(o, theta0.shape[0]) for o in (A, C, D))
        consts = fit_case2_constants(A, C, D, k, tol)
        alpha, delta = consts.values
        _nonzero(alpha, "alpha")
        _nonzero(delta, "delta")
        _check_central(theta0, (A, C, D), ("A", "C", "D"), "theta0")

        t_d = case2_theta_shift(k, alpha, delta)
        expected = theta0 + t_d * D
        if theta is None:
            theta = expected
            t_coeffs = (0.0, 0.0, t_d)
        else:
            theta = as_hermitian(theta, theta0.shape[0])
            coef, resid = span_coefficients(theta - theta0, [A, C, D])
            scale = max(frobenius_norm(theta), 1.0)
            if resid > THETA0_RTOL * scale:
                raise ClosureError(
                    "theta - theta0 is not in span{A, C, D}",
                    relation="theta - theta0 in span{A,C,D}",
                    residual=resid / scale,
                )
            t_coeffs = tuple(float(c.real) for c in coef)
            defect = frobenius_norm(theta - expected)
            if defect > THETA0_RTOL * scale:
                raise ClosureError(
                    f"theta0 relation violated: theta - theta0 has coefficients "
                    f"{t_coeffs}, expected (0, 0, {t_d!r})",
                    relation="theta0 = theta - t_D D",
                    residual=defect / scale,
                )
        return cls(
            theta0, as_hermitian(theta), A, C, D, omega, k, alpha, delta,
            float(nu), t_coeffs, consts,
        )

    @property
    def dim(self):
        return self.theta.shape[0]

    @property
    def period(self):
        return period(self.k, self.omega)

    @property
    def t_D(self):
        return self.t_coeffs[2]

    def with_nu(self, nu):
        return replace(self, nu=float(nu))

    def coefficient_functions(self, t):
        return jacobi_sncndn(self.omega * np.asarray(t, dtype=float), self.k)

    def state(self, t):
        sn, cn, dn = self.coefficient_functions(t)
        ones = np.ones_like(np.asarray(cn, dtype=float))
        return _combine(
            (ones, cn, sn * dn, cn * cn), (self.theta, self.A, self.C, self.D)
        )

    def state_derivative(self, t):
        sn, cn, dn = self.coefficient_functions(t)
        w, k2 = self.omega, self.k**2
        return _combine(
            (-w * sn * dn, w * cn * (dn * dn - k2 * sn * sn), -2.0 * w * sn * cn * dn),
            (self.A, self.C, self.D),
        )

    def theta_image_coefficient(self):
        """``h`` in ``H[theta] = h D``: ``-w/alpha + nu t_D``.

        The ``nu`` term is what keeps the gauge freedom exact: it is the
        combination ``c_C t_D - d_0 = w/alpha`` required by the coefficient
        equations for every ``nu``.
        """
        return -self.omega / self.alpha + self.nu * self.t_D

    def hamiltonian(self):
        """State-dependent Hamiltonian as an :class:`OperatorMap`.

        ``H[A] = (nu + 2w/delta) A``, ``H[C] = nu C``, ``H[D] = nu D``,
        ``H[theta] = (-w/alpha + nu t_D) D`` and zero on the orthogonal
        complement of span{theta, A, C, D}.
        """
        _nonzero(self.alpha, "alpha")
        _nonzero(self.delta, "delta")
        nu, w = self.nu, self.omega
        pairs = [
            (self.theta, self.theta_image_coefficient() * self.D),
            (self.A, (nu + 2.0 * w / self.delta) * self.A),
            (self.C, nu * self.C),
            (self.D, nu * self.D),
        ]
        return operator_map_from_action(self.dim, pairs)


def case1_state(system, t):
    return system.state(t)


def case1_state_derivative(system, t):
    return system.state_derivative(t)


def case1_hamiltonian(system):
    return system.hamiltonian()


def case2_state(system, t):
    return system.state(t)


def case2_state_derivative(system, t):
    return system.state_derivative(t)


def case2_hamiltonian(system):
    return system.hamiltonian()


def vne_residual(rho, drho, hamiltonian):
    """Frobenius norm of ``d rho/dt - i [rho, H[rho]]`` for one sample."""
    h = hamiltonian(rho)
    return frobenius_norm(drho - 1j * (rho @ h - h @ rho))


def theorem_residual(system, hamiltonian, times):
    """Largest :func:`vne_residual` of the analytic solution over ``times``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    rhos = system.state(times)
    drhos = system.state_derivative(times)
    return max(vne_residual(r, d, hamiltonian) for r, d in zip(rhos, drhos))


def default_time_grid(system, n=801, periods=2, half_width=10.0):
    """Two periods ``[0, 2*4K/w]`` for k < 1, else ``[-10, 10]/w``."""
    p = system.period
    if p is None:
        w = abs(system.omega)
        return np.linspace(-half_width / w, half_width / w, n)
    return np.linspace(0.0, periods * p, n)
