"""Numerical re-derivation of the Hamiltonian coefficients.

Given the operators of a candidate solution, the Hamiltonian is unknown: it
is parametrised by its coefficients in the span of the three non-central
generators, e.g. ``H[A] = a_A A + b_A B + x_A X`` for case 1. Inserting the
ansatz into ``d rho/dt = i [rho, H[rho]]`` and collecting the linearly
independent products of sn, cn and dn yields a set of operator equations that
are *linear* in these coefficients. They are solved here by dense least
squares over the real and imaginary parts of every matrix entry.

The solution set of a genuine solution is a line parametrised by the free
gauge ``nu`` (``b_B`` for case 1, ``c_C`` for case 2). All other coefficients
must follow a forced pattern; the solver reports the magnitudes so the
pattern can be inspected, and recovers the structure constants from the
coefficient combinations.
"""

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .elliptic import check_modulus
from .errors import ClosureError, DerivationError, DomainError
from .operators import (
    as_hermitian,
    check_independent,
    commutator_i,
    frobenius_norm,
    span_coefficients,
)
from .special_solutions import fit_case1_constants, fit_case2_constants, _check_central

CONSISTENCY_RTOL = 1e-8
NULL_RTOL = 1e-9
FORCED_ATOL = 1e-10

# Generator labels and the letter used for coefficients in their span.
_CASE1_ROLES = ("A", "B", "X")
_CASE2_ROLES = ("A", "C", "D")


@dataclass(frozen=True)
class Derivation:
    """Result of a coefficient re-derivation.

    Attributes
    ----------
    case : int
    coefficients : dict
        Coefficient table at the requested ``nu``; keys like ``"a_A"``
        (coefficient of A in H[A]) and ``"a_0"`` (coefficient of A in
        H[theta]).
    nu_direction : dict
        Change of every coefficient per unit change of ``nu``.
    nu : float
    constants : dict
        Recovered structure constants (and ``t_D`` for case 2).
    forced_zeros : dict
        Coefficients (or combinations) the equations force to vanish.
    residual : float
        Relative least-squares residual of the linear system.
    null_dim : int
        Dimension of the solution family (1 for a genuine solution).
    """

    case: int
    coefficients: dict
    nu_direction: dict
    nu: float
    constants: dict
    forced_zeros: dict
    residual: float
    null_dim: int

    @property
    def max_forced(self):
        return max(abs(v) for v in self.forced_zeros.values())

    def at_nu(self, nu):
        coeffs = OrderedDict(
            (key, self.coefficients[key] + (nu - self.nu) * self.nu_direction[key])
            for key in self.coefficients
        )
        return coeffs

    def to_dict(self):
        return {
            "case": self.case,
            "nu": self.nu,
            "nu_convention": "nu = b_B" if self.case == 1 else "nu = c_C",
            "coefficients": dict(self.coefficients),
            "nu_direction": dict(self.nu_direction),
            "constants": dict(self.constants),
            "forced_zeros": dict(self.forced_zeros),
            "max_forced_zero": self.max_forced,
            "residual": self.residual,
            "null_dim": self.null_dim,
        }


def _unknown_keys(roles, with_theta):
    """Key ``"x_Y"`` = coefficient of generator x in H[Y]."""
    sources = list(roles) + (["0"] if with_theta else [])
    return [f"{r.lower()}_{src}" for src in sources for r in roles]


class _System:
    """Accumulates linear operator equations ``sum c_j * op_j = rhs``."""

    def __init__(self, ops, roles, theta, with_theta):
        self.ops = dict(zip(roles, ops))
        self.ops["0"] = theta
        self.roles = roles
        self.with_theta = with_theta
        self.keys = _unknown_keys(roles, with_theta)
        self.index = {key: i for i, key in enumerate(self.keys)}
        self.dim = ops[0].shape[0]
        self.rows = OrderedDict()

    def _blank(self):
        return np.zeros((self.dim * self.dim, len(self.keys)), dtype=complex)

    def term(self, label, weight, p, q):
        """Add ``weight * i[p, H[q]]``; ``p`` is a role or ``"0"`` (theta)."""
        if q == "0" and not self.with_theta:
            return
        lhs, rhs = self.rows.setdefault(label, [self._blank(), np.zeros(self.dim**2, complex)])
        for r in self.roles:
            key = f"{r.lower()}_{q}"
            col = commutator_i(self.ops[p], self.ops[r]).reshape(-1)
            lhs[:, self.index[key]] += weight * col

    def rhs(self, label, weight, role):
        lhs, rhs = self.rows.setdefault(label, [self._blank(), np.zeros(self.dim**2, complex)])
        rhs += weight * self.ops[role].reshape(-1)

    def merge(self, mapping):
        """Sum equations whose time functions coincide (e.g. cn = dn at k = 1)."""
        merged = OrderedDict()
        for label, (lhs, rhs) in self.rows.items():
            target = mapping.get(label, label)
            if target in merged:
                merged[target][0] = merged[target][0] + lhs
                merged[target][1] = merged[target][1] + rhs
            else:
                merged[target] = [lhs.copy(), rhs.copy()]
        self.rows = merged

    def solve(self, nu_key, nu):
        lhs = np.concatenate([row[0] for row in self.rows.values()])
        rhs = np.concatenate([row[1] for row in self.rows.values()])
        m = np.concatenate([lhs.real, lhs.imag])
        r = np.concatenate([rhs.real, rhs.imag])

        x, *_ = np.linalg.lstsq(m, r, rcond=None)
        scale = np.linalg.norm(r)
        residual = float(np.linalg.norm(m @ x - r) / scale) if scale else 0.0
        if residual > CONSISTENCY_RTOL:
            raise DerivationError(
                f"coefficient equations are inconsistent (relative residual "
                f"{residual:.3e}); the operators violate a hypothesis of the theorem",
                residual=residual,
            )

        _, s, vh = np.linalg.svd(m)
        rank = int(np.sum(s > NULL_RTOL * s[0]))
        null = vh[rank:]
        null_dim = null.shape[0]
        if null_dim != 1:
            raise DerivationError(
                f"expected a one-parameter solution family, found dimension {null_dim}",
                residual=residual,
            )
        n = null[0]
        j = self.index[nu_key]
        if abs(n[j]) < 1e-8 * np.max(np.abs(n)):
            raise DerivationError(f"solution family is not parametrised by {nu_key}")
        n = n / n[j]
        x = x - x[j] * n + nu * n
        coeffs = OrderedDict((key, float(x[i])) for i, key in enumerate(self.keys))
        direction = OrderedDict((key, float(n[i])) for i, key in enumerate(self.keys))
        return coeffs, direction, residual, null_dim


def _pad_theta(coeffs, roles):
    for r in roles:
        coeffs.setdefault(f"{r.lower()}_0", 0.0)
    return coeffs


def derive_case1_coefficients(A, B, X, theta, omega, k, nu=0.0):
    """Solve the case-1 coefficient equations for ``H[A], H[B], H[X], H[theta]``.

    Returns a :class:`Derivation` whose ``constants`` hold
    ``alpha = w/(b_B - x_X)`` and ``beta = w/(a_A - b_B)``.

    At ``k = 1`` the functions cn and dn coincide, the equations merge and
    the coefficients are no longer forced; a :class:`DerivationError` is
    raised in that case.
    """
    k = check_modulus(k)
    omega = float(omega)
    if omega == 0.0 or k == 0.0:
        raise DomainError("omega and k must be non-zero")
    A, B, X = (as_hermitian(o) for o in (A, B, X))
    theta = as_hermitian(theta, A.shape[0])
    fit_case1_constants(A, B, X, k)
    _check_central(theta, (A, B, X), ("A", "B", "X"), "theta")
    with_theta = frobenius_norm(theta) > 0.0

    eq = _System([A, B, X], _CASE1_ROLES, theta, with_theta)
    k2 = k * k
    # rho = theta + cn A + sn B + dn X; one equation per product of functions
    eq.term("1", 1.0, "0", "0")
    eq.term("1", 1.0, "B", "B")
    eq.term("1", 1.0 - k2, "X", "X")
    eq.term("cn^2", 1.0, "A", "A")
    eq.term("cn^2", -1.0, "B", "B")
    eq.term("cn^2", k2, "X", "X")
    for label, role in (("cn", "A"), ("sn", "B"), ("dn", "X")):
        eq.term(label, 1.0, "0", role)
        eq.term(label, 1.0, role, "0")
    eq.term("sn dn", 1.0, "B", "X")
    eq.term("sn dn", 1.0, "X", "B")
    eq.rhs("sn dn", -omega, "A")
    eq.term("cn dn", 1.0, "A", "X")
    eq.term("cn dn", 1.0, "X", "A")
    eq.rhs("cn dn", omega, "B")
    eq.term("sn cn", 1.0, "A", "B")
    eq.term("sn cn", 1.0, "B", "A")
    eq.rhs("sn cn", -k2 * omega, "X")
    if k == 1.0:
        eq.merge({"dn": "cn", "cn dn": "cn^2", "sn dn": "sn cn"})

    coeffs, direction, residual, null_dim = eq.solve("b_B", nu)
    coeffs = _pad_theta(coeffs, _CASE1_ROLES)
    direction = _pad_theta(direction, _CASE1_ROLES)
    forced = OrderedDict(
        (key, coeffs[key])
        for key in ("a_B", "a_X", "b_A", "b_X", "x_A", "x_B", "a_0", "b_0", "x_0")
    )
    alpha = omega / (coeffs["b_B"] - coeffs["x_X"])
    beta = omega / (coeffs["a_A"] - coeffs["b_B"])
    result = Derivation(
        1, coeffs, direction, float(nu), {"alpha": alpha, "beta": beta},
        forced, residual, null_dim,
    )
    _check_forced(result, omega)
    return result


def derive_case2_coefficients(A, C, D, theta0, t_coeffs, omega, k, nu=0.0):
    """Solve the case-2 coefficient equations.

    ``theta = theta0 + t_A A + t_C C + t_D D`` is the constant part of the
    candidate solution. The returned constants are
    ``delta = -2w/(c_C - a_A)``, ``alpha = w/(c_C t_D - d_0)`` and ``t_D``.
    A candidate with ``t_A`` or ``t_C`` non-zero admits no Hamiltonian and
    raises :class:`DerivationError`.
    """
    k = check_modulus(k)
    omega = float(omega)
    if omega == 0.0 or k == 0.0:
        raise DomainError("omega and k must be non-zero")
    A, C, D = (as_hermitian(o) for o in (A, C, D))
    theta0 = as_hermitian(theta0, A.shape[0])
    fit_case2_constants(A, C, D, k)
    _check_central(theta0, (A, C, D), ("A", "C", "D"), "theta0")
    t_a, t_c, t_d = (float(t) for t in t_coeffs)
    theta = theta0 + t_a * A + t_c * C + t_d * D
    with_theta = frobenius_norm(theta) > 0.0

    eq = _System([A, C, D], _CASE2_ROLES, theta, with_theta)
    k2 = k * k
    # rho = theta + cn A + sn dn C + cn^2 D, with sn^2 and dn^2 eliminated
    eq.term("1", 1.0, "0", "0")
    eq.term("1", 1.0 - k2, "C", "C")
    eq.term("cn^4", 1.0, "D", "D")
    eq.term("cn^4", -k2, "C", "C")
    eq.term("cn^2", 1.0, "0", "D")
    eq.term("cn^2", 1.0, "D", "0")
    eq.term("cn^2", 1.0, "A", "A")
    eq.term("cn^2", 2.0 * k2 - 1.0, "C", "C")
    eq.term("cn^2 sn dn", 1.0, "C", "D")
    eq.term("cn^2 sn dn", 1.0, "D", "C")
    eq.term("sn dn", 1.0, "0", "C")
    eq.term("sn dn", 1.0, "C", "0")
    eq.rhs("sn dn", -omega, "A")
    eq.term("cn^3", 1.0, "A", "D")
    eq.term("cn^3", 1.0, "D", "A")
    eq.rhs("cn^3", 2.0 * k2 * omega, "C")
    eq.term("cn", 1.0, "0", "A")
    eq.term("cn", 1.0, "A", "0")
    eq.rhs("cn", (1.0 - 2.0 * k2) * omega, "C")
    eq.term("cn sn dn", 1.0, "A", "C")
    eq.term("cn sn dn", 1.0, "C", "A")
    eq.rhs("cn sn dn", -2.0 * omega, "D")

    coeffs, direction, residual, null_dim = eq.solve("c_C", nu)
    coeffs = _pad_theta(coeffs, _CASE2_ROLES)
    direction = _pad_theta(direction, _CASE2_ROLES)
    forced = OrderedDict(
        (key, coeffs[key]) for key in ("a_C", "a_D", "c_A", "d_A", "d_C", "a_0", "c_0")
    )
    forced["c_D + k^2 d_C"] = coeffs["c_D"] + k2 * coeffs["d_C"]
    forced["d_D - c_C"] = coeffs["d_D"] - coeffs["c_C"]
    forced["t_A"] = t_a
    forced["t_C"] = t_c
    delta = -2.0 * omega / (coeffs["c_C"] - coeffs["a_A"])
    alpha = omega / (coeffs["c_C"] * t_d - coeffs["d_0"])
    result = Derivation(
        2, coeffs, direction, float(nu), {"alpha": alpha, "delta": delta, "t_D": t_d},
        forced, residual, null_dim,
    )
    _check_forced(result, omega)
    return result


def _check_forced(result, omega):
    tol = FORCED_ATOL * max(1.0, abs(omega), *(abs(v) for v in result.coefficients.values()))
    if result.max_forced > tol:
        worst = max(result.forced_zeros, key=lambda key: abs(result.forced_zeros[key]))
        raise DerivationError(
            f"forced coefficient {worst} = {result.forced_zeros[worst]:.3e} does not vanish"
        )


def decompose_theta(theta, theta0, A, C, D, rtol=1e-10):
    """Coefficients ``(t_A, t_C, t_D)`` with ``theta - theta0`` in span{A, C, D}."""
    coef, resid = span_coefficients(np.asarray(theta) - np.asarray(theta0), [A, C, D])
    scale = max(frobenius_norm(theta), 1.0)
    if resid > rtol * scale:
        raise ClosureError(
            "theta - theta0 is not in span{A, C, D}",
            relation="theta - theta0 in span{A,C,D}",
            residual=resid / scale,
        )
    return tuple(float(c.real) for c in coef)


def derive_coefficients(case, operators, omega, k, nu=0.0):
    """Dispatch on ``case`` with operators given by role name.

    Case 1 needs ``A, B, X`` and optionally ``theta``; case 2 needs
    ``A, C, D, theta0`` and either ``theta`` or ``t_coeffs``.
    """
    ops = dict(operators)
    if case == 1:
        A, B, X = ops["A"], ops["B"], ops["X"]
        theta = ops.get("theta")
        if theta is None:
            theta = np.zeros_like(np.asarray(A, dtype=complex))
        return derive_case1_coefficients(A, B, X, theta, omega, k, nu)
    if case == 2:
        A, C, D, theta0 = ops["A"], ops["C"], ops["D"], ops["theta0"]
        if "t_coeffs" in ops:
            t_coeffs = ops["t_coeffs"]
        elif "theta" in ops:
            check_independent([A, C, D], names=("A", "C", "D"))
            t_coeffs = decompose_theta(ops["theta"], theta0, A, C, D)
        else:
            raise KeyError("case 2 needs 'theta' or 't_coeffs'")
        return derive_case2_coefficients(A, C, D, theta0, t_coeffs, omega, k, nu)
    raise DomainError(f"case must be 1 or 2, got {case!r}")
