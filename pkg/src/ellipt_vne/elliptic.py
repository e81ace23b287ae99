"""Jacobi elliptic functions sn, cn, dn and the quarter period K(k).

All routines take the elliptic *modulus* ``k`` (not the parameter
``m = k**2``) and accept real arguments only. The degenerate moduli are
dispatched to closed forms: ``k = 0`` gives ``(sin, cos, 1)`` and ``k = 1``
gives ``(tanh, sech, sech)``.

For ``0 < k < 1`` the functions are evaluated with the descending Landen
transformation driven by the arithmetic-geometric mean (DLMF 22.20(ii)).
"""

import math
from typing import NamedTuple

import numpy as np

from .errors import DivergenceError, DomainError

_AGM_TOL = 1e-16
_AGM_MAX_ITER = 64


class EllipticTriple(NamedTuple):
    sn: float
    cn: float
    dn: float


def check_modulus(k):
    """Return ``k`` as a float after checking ``0 <= k <= 1``."""
    k = float(k)
    if not math.isfinite(k) or k < 0.0 or k > 1.0:
        raise DomainError(f"elliptic modulus must lie in [0, 1], got {k!r}")
    return k


def _agm_sequence(k):
    """Run the AGM from (1, k') and keep the a_n and c_n of every stage."""
    a = 1.0
    b = math.sqrt((1.0 - k) * (1.0 + k))
    c = k
    a_seq = [a]
    c_seq = [c]
    for _ in range(_AGM_MAX_ITER):
        if abs(c) <= _AGM_TOL * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        c_seq.append(c)
    return a_seq, c_seq


def jacobi_sncndn(u, k):
    """Evaluate ``(sn(u, k), cn(u, k), dn(u, k))``.

    Parameters
    ----------
    u : float or array_like
        Real argument(s); must be finite.
    k : float
        Elliptic modulus in ``[0, 1]``.

    Returns
    -------
    EllipticTriple
        Scalars for scalar ``u``, arrays of the shape of ``u`` otherwise.
    """
    k = check_modulus(k)
    scalar = np.ndim(u) == 0
    x = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("argument of the elliptic functions must be finite")

    if k == 0.0:
        sn, cn, dn = np.sin(x), np.cos(x), np.ones_like(x)
    elif k == 1.0:
        sech = 1.0 / np.cosh(x)
        sn, cn, dn = np.tanh(x), sech, sech.copy()
    else:
        a_seq, c_seq = _agm_sequence(k)
        n = len(a_seq) - 1
        phi = (2.0**n) * a_seq[n] * x
        for j in range(n, 0, -1):
            phi = 0.5 * (phi + np.arcsin(c_seq[j] / a_seq[j] * np.sin(phi)))
        sn = np.sin(phi)
        cn = np.cos(phi)
        # dn^2 = k'^2 + k^2 cn^2 is a sum of non-negative terms, so no
        # cancellation near k -> 1 (unlike 1 - k^2 sn^2).
        dn = np.sqrt((1.0 - k) * (1.0 + k) + (k * cn) ** 2)

    if scalar:
        return EllipticTriple(float(sn), float(cn), float(dn))
    return EllipticTriple(sn, cn, dn)


def jacobi_derivatives(triple, k):
    """Derivatives of sn, cn, dn with respect to the argument.

    Returns ``(cn*dn, -sn*dn, -k**2*sn*cn)``.
    """
    k = check_modulus(k)
    sn, cn, dn = triple
    return (cn * dn, -sn * dn, -(k * k) * sn * cn)


def complete_elliptic_K(k):
    """Quarter period ``K(k)`` of sn and cn (dn has period ``2K``).

    Raises
    ------
    DivergenceError
        At ``k = 1``, where the period is infinite.
    """
    k = check_modulus(k)
    if k == 1.0:
        raise DivergenceError("K(k) diverges at k = 1")
    if k == 0.0:
        return math.pi / 2.0
    a_seq, _ = _agm_sequence(k)
    return math.pi / (2.0 * a_seq[-1])


def period(k, omega=1.0):
    """Time period ``4K(k)/|omega|`` of ``sn(omega*t, k)``; ``None`` when k = 1."""
    k = check_modulus(k)
    if k == 1.0:
        return None
    return 4.0 * complete_elliptic_K(k) / abs(omega)
