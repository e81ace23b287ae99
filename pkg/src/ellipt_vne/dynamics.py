"""Numerical integration of the nonlinear von Neumann equation.

The state is advanced as a full complex matrix with an embedded
Runge-Kutta 5(4) pair (Dormand-Prince, via ``scipy.integrate.solve_ivp``).
Hermiticity is monitored, not re-imposed, so integrator defects stay visible.

The default relative tolerance is ``1e-10`` (absolute ``1e-12``); set
``ELLIPT_VNE_TOL`` in the environment to override the relative tolerance.
"""

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DimensionMismatchError, GaugeError, IntegrationError
from .operators import (
    OperatorMap,
    anticommutator,
    as_hermitian,
    frobenius_norm,
    unitary_exp,
)

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
COVARIANCE_RTOL = 1e-9
COVARIANCE_SAMPLES = 32


def default_tolerances():
    """``(rtol, atol)``, honouring ``ELLIPT_VNE_TOL``."""
    env = os.environ.get("ELLIPT_VNE_TOL")
    if env:
        rtol = float(env)
        if not rtol > 0.0:
            raise ValueError(f"ELLIPT_VNE_TOL must be positive, got {env!r}")
        return rtol, rtol * 1e-2
    return DEFAULT_RTOL, DEFAULT_ATOL


def vne_rhs(rho, hamiltonian):
    """``d rho/dt = -i [H[rho], rho]``."""
    rho = np.asarray(rho)
    if rho.shape != (hamiltonian.dim, hamiltonian.dim):
        raise DimensionMismatchError(
            f"state has shape {rho.shape}, map acts on dimension {hamiltonian.dim}"
        )
    h = hamiltonian(rho)
    return -1j * (h @ rho - rho @ h)


def euler_top_rhs(rho, h0):
    """``d rho/dt = -i [H0, rho^2]``."""
    rho = np.asarray(rho)
    h0 = np.asarray(h0)
    if rho.shape != h0.shape:
        raise DimensionMismatchError(f"shapes differ: {rho.shape} vs {h0.shape}")
    r2 = rho @ rho
    return -1j * (h0 @ r2 - r2 @ h0)


def euler_top_map(h0):
    """The linear map ``sigma -> {H0, sigma}`` whose von Neumann flow is the Euler top."""
    h0 = np.asarray(h0, dtype=complex)
    return OperatorMap.from_function(lambda s: anticommutator(h0, s), h0.shape[0])


class EulerTop:
    """Right-hand side marker for :func:`integrate`: ``i rho' = [H0, rho^2]``."""

    def __init__(self, h0):
        self.h0 = as_hermitian(h0)
        self.dim = self.h0.shape[0]

    def __call__(self, t, rho):
        return euler_top_rhs(rho, self.h0)


def _make_rhs(rhs):
    if isinstance(rhs, OperatorMap):
        return rhs.dim, lambda t, rho: vne_rhs(rho, rhs)
    if isinstance(rhs, EulerTop):
        return rhs.dim, rhs
    if callable(rhs):
        return None, rhs
    raise TypeError("rhs must be an OperatorMap, EulerTop or callable(t, rho)")


def _hermitian_part(a):
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


@dataclass
class Trajectory:
    """Sampled solution with per-sample diagnostics.

    ``reference`` optionally holds an analytic solution at the same times;
    ``residuals`` is then the Frobenius distance to it.
    """

    times: np.ndarray
    states: np.ndarray
    reference: np.ndarray = None
    nfev: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.ndim != 3 or self.states.shape[0] != self.times.shape[0]:
            raise DimensionMismatchError("need exactly one d x d state per time")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("trajectory times must be strictly increasing")
        if self.reference is not None:
            self.reference = np.asarray(self.reference, dtype=complex)
            if self.reference.shape != self.states.shape:
                raise DimensionMismatchError("reference must match the states")

    def __len__(self):
        return self.times.shape[0]

    @property
    def dim(self):
        return self.states.shape[1]

    @property
    def traces(self):
        return np.trace(self.states, axis1=1, axis2=2)

    @property
    def spectra(self):
        # eigenvalues of the Hermitian part; the anti-Hermitian defect is
        # reported separately by hermiticity_defects
        return np.linalg.eigvalsh(_hermitian_part(self.states))

    @property
    def hermiticity_defects(self):
        diff = self.states - np.conj(np.swapaxes(self.states, 1, 2))
        return np.max(np.abs(diff), axis=(1, 2))

    @property
    def residuals(self):
        if self.reference is None:
            return None
        return np.linalg.norm(self.states - self.reference, axis=(1, 2))

    def with_reference(self, reference):
        return Trajectory(self.times, self.states, reference, self.nfev)

    def interpolate(self, t):
        """Entrywise linear interpolation (second order in the sample spacing)."""
        if t <= self.times[0]:
            return self.states[0]
        if t >= self.times[-1]:
            return self.states[-1]
        j = int(np.searchsorted(self.times, t)) - 1
        t0, t1 = self.times[j], self.times[j + 1]
        w = (t - t0) / (t1 - t0)
        return (1.0 - w) * self.states[j] + w * self.states[j + 1]


@dataclass
class ConservationReport:
    max_trace_drift: float
    max_eigenvalue_drift: float
    max_hermiticity_defect: float
    max_residual: float = None
    initial_spectrum: list = field(default_factory=list)

    def to_dict(self):
        return {
            "max_trace_drift": self.max_trace_drift,
            "max_eigenvalue_drift": self.max_eigenvalue_drift,
            "max_hermiticity_defect": self.max_hermiticity_defect,
            "max_residual": self.max_residual,
            "initial_spectrum": list(self.initial_spectrum),
        }


def conservation_report(traj, index=0):
    """Drifts of trace and spectrum relative to sample ``index``."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    traces = traj.traces
    spectra = traj.spectra
    res = traj.residuals
    return ConservationReport(
        max_trace_drift=float(np.max(np.abs(traces - traces[index]))),
        max_eigenvalue_drift=float(np.max(np.abs(spectra - spectra[index]))),
        max_hermiticity_defect=float(np.max(traj.hermiticity_defects)),
        max_residual=None if res is None else float(np.max(res)),
        initial_spectrum=[float(x) for x in spectra[index]],
    )


def _solve_leg(fun, y0, t0, t_eval, rtol, atol, max_step):
    """Integrate from ``t0`` through the (monotone) ``t_eval``; returns (ys, nfev)."""
    if len(t_eval) == 0:
        return np.empty((0, y0.size), dtype=complex), 0
    t_end = t_eval[-1]
    if t_end == t0:
        return np.repeat(y0[None, :], len(t_eval), axis=0), 0
    sol = solve_ivp(
        fun, (t0, t_end), y0, method="RK45", t_eval=t_eval,
        rtol=rtol, atol=atol, max_step=max_step,
    )
    if sol.status != 0:
        last_t = sol.t[-1] if sol.t.size else t0
        last_y = sol.y[:, -1] if sol.y.size else y0
        raise IntegrationError(
            f"integration failed at t={last_t!r}: {sol.message}",
            last_time=float(last_t),
            last_state=last_y,
        )
    return sol.y.T, sol.nfev


def _integrate_flat(fun, y0, times, t0, rtol, atol, max_step):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-d array")
    if not np.all(np.isfinite(times)) or not np.isfinite(t0):
        raise ValueError("time span must be finite")
    if np.any(np.diff(times) <= 0.0):
        raise ValueError("times must be strictly increasing")
    d_rtol, d_atol = default_tolerances()
    rtol = d_rtol if rtol is None else rtol
    atol = d_atol if atol is None else atol

    fwd = times >= t0
    back = ~fwd
    out = np.empty((times.size, y0.size), dtype=complex)
    y_f, n_f = _solve_leg(fun, y0, t0, times[fwd], rtol, atol, max_step)
    y_b, n_b = _solve_leg(fun, y0, t0, times[back][::-1], rtol, atol, max_step)
    out[fwd] = y_f
    out[back] = y_b[::-1]
    # samples at exactly t0 carry the initial condition unchanged
    out[times == t0] = y0
    return out, n_f + n_b


def integrate(rho0, rhs, times, t0=None, rtol=None, atol=None, max_step=np.inf,
              reference=None):
    """Integrate ``i rho' = [H[rho], rho]`` (or another right-hand side).

    Parameters
    ----------
    rho0 : array_like
        Hermitian state at time ``t0``.
    rhs : OperatorMap, EulerTop or callable
        An :class:`OperatorMap` ``H`` selects the nonlinear von Neumann
        equation, :class:`EulerTop` the Euler-top form; any other callable is
        used as ``f(t, rho) -> d rho/dt``.
    times : array_like
        Strictly increasing output times; ``t0`` may lie inside the range,
        in which case the solver runs forwards and backwards from it.
    t0 : float, optional
        Time of ``rho0``; defaults to ``times[0]``.
    reference : callable, optional
        Analytic ``rho(t)``; stored for residual diagnostics.

    Raises
    ------
    IntegrationError
        When the step size underflows; carries the last accepted state.
    """
    rho0 = as_hermitian(rho0)
    dim, f = _make_rhs(rhs)
    d = rho0.shape[0]
    if dim is not None and dim != d:
        raise DimensionMismatchError(f"state dimension {d} but map dimension {dim}")
    times = np.asarray(times, dtype=float)
    if t0 is None:
        t0 = float(times[0])

    def fun(t, y):
        return f(t, y.reshape(d, d)).reshape(-1)

    try:
        ys, nfev = _integrate_flat(fun, rho0.reshape(-1).astype(complex), times,
                                   float(t0), rtol, atol, max_step)
    except IntegrationError as exc:
        if exc.last_state is not None:
            exc.last_state = np.asarray(exc.last_state).reshape(d, d)
        raise
    states = ys.reshape(-1, d, d)
    ref = None
    if reference is not None:
        ref = np.array([reference(t) for t in times])
    return Trajectory(times, states, ref, nfev)


@dataclass
class Propagator:
    """Solution of ``dU/dt = i U H[rho_t]`` with ``U(t0) = I``."""

    times: np.ndarray
    unitaries: np.ndarray
    t0: float = 0.0

    @property
    def unitarity_defects(self):
        u = self.unitaries
        eye = np.eye(u.shape[1])
        prod = u @ np.conj(np.swapaxes(u, 1, 2))
        return np.linalg.norm(prod - eye, axis=(1, 2))

    def reconstruct(self, rho0):
        """``U_t^* rho0 U_t`` at every sample."""
        u = self.unitaries
        return np.conj(np.swapaxes(u, 1, 2)) @ np.asarray(rho0) @ u


def integrate_propagator(source, hamiltonian, times, t0=None, rtol=None, atol=None,
                         max_step=np.inf):
    """Integrate the propagator equation along a given state history.

    ``source`` is either a callable ``t -> rho_t`` (preferred, e.g. an analytic
    solution) or a :class:`Trajectory`, which is linearly interpolated.
    """
    if isinstance(source, Trajectory):
        rho_at = source.interpolate
    elif callable(source):
        rho_at = source
    else:
        raise TypeError("source must be a Trajectory or a callable t -> rho")
    times = np.asarray(times, dtype=float)
    if t0 is None:
        t0 = float(times[0])
    d = hamiltonian.dim

    def fun(t, y):
        u = y.reshape(d, d)
        return (1j * u @ hamiltonian(rho_at(t))).reshape(-1)

    ys, _ = _integrate_flat(fun, np.eye(d, dtype=complex).reshape(-1), times,
                            float(t0), rtol, atol, max_step)
    return Propagator(times, ys.reshape(-1, d, d), float(t0))


@dataclass(frozen=True, eq=False)
class GaugeTransform:
    """Removal of a linear part ``Tr(sigma) H0`` from a Hamiltonian map.

    With ``sigma_t = e^{itH0} rho_t e^{-itH0}`` a solution ``rho_t`` under
    ``H`` becomes a solution ``sigma_t`` under ``K[s] = H[s] - Tr(s) H0``,
    provided ``H`` is covariant under conjugation by ``e^{itH0}``.
    """

    H0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "H0", as_hermitian(self.H0))

    @property
    def linear_part(self):
        return OperatorMap.trace_times(self.H0)

    def _u(self, t):
        return unitary_exp(self.H0, t)

    def forward_state(self, rho, t):
        u = self._u(t)
        return u @ rho @ u.conj().T

    def inverse_state(self, sigma, t):
        u = self._u(t)
        return u.conj().T @ sigma @ u

    def forward_derivative(self, rho, drho, t):
        sigma = self.forward_state(rho, t)
        return 1j * (self.H0 @ sigma - sigma @ self.H0) + self.forward_state(drho, t)

    def inverse_derivative(self, sigma, dsigma, t):
        rho = self.inverse_state(sigma, t)
        return -1j * (self.H0 @ rho - rho @ self.H0) + self.inverse_state(dsigma, t)

    def reduced_map(self, hamiltonian):
        """``K = H - Tr(.) H0``."""
        return hamiltonian - self.linear_part

    def full_map(self, reduced):
        """``H = K + Tr(.) H0``."""
        return reduced + self.linear_part


def covariance_defect(gauge, hamiltonian, times, states, samples=COVARIANCE_SAMPLES):
    """Worst relative violation of ``H[U rho U*] = U H[rho] U*`` over sampled times.

    Returns ``(defect, time)``.
    """
    times = np.asarray(times, dtype=float)
    idx = np.unique(np.linspace(0, len(times) - 1, min(samples, len(times))).astype(int))
    worst, worst_t = 0.0, None
    for j in idx:
        t, rho = times[j], states[j]
        lhs = hamiltonian(gauge.forward_state(rho, t))
        rhs = gauge.forward_state(hamiltonian(rho), t)
        scale = max(frobenius_norm(rhs), 1.0)
        defect = frobenius_norm(lhs - rhs) / scale
        if worst_t is None or defect > worst:
            worst, worst_t = defect, float(t)
    return worst, worst_t


def _check_covariance(gauge, hamiltonian, times, states, samples, tol):
    defect, t = covariance_defect(gauge, hamiltonian, times, states, samples)
    if defect > tol:
        raise GaugeError(
            f"covariance condition violated: defect {defect:.3e} at t={t!r}",
            defect=defect,
            time=t,
        )
    return defect


def gauge_forward(gauge, hamiltonian, times, states, samples=COVARIANCE_SAMPLES,
                  tol=COVARIANCE_RTOL):
    """Map ``(H, rho_t)`` to ``(K, sigma_t)`` after checking covariance.

    Raises
    ------
    GaugeError
        If the covariance condition fails on the sampled times.
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states)
    _check_covariance(gauge, hamiltonian, times, states, samples, tol)
    sigmas = np.array([gauge.forward_state(r, t) for t, r in zip(times, states)])
    return gauge.reduced_map(hamiltonian), sigmas


def gauge_inverse(gauge, reduced, times, sigmas, samples=COVARIANCE_SAMPLES,
                  tol=COVARIANCE_RTOL):
    """Map ``(K, sigma_t)`` back to ``(H, rho_t)`` with ``H = K + Tr(.) H0``."""
    times = np.asarray(times, dtype=float)
    full = gauge.full_map(reduced)
    rhos = np.array([gauge.inverse_state(s, t) for t, s in zip(times, sigmas)])
    _check_covariance(gauge, full, times, rhos, samples, tol)
    return full, rhos


def covariant_extension(gauge, pairs, samples=None, tol=COVARIANCE_RTOL):
    """Extend a map known on some generators to be covariant under ``e^{isH0}``.

    The map is fixed on the orbits ``U_s X U_s^*`` of the generators by
    ``H[U_s X U_s^*] = U_s H[X] U_s^*`` and is zero on the orthogonal
    complement of their span. Sampling ``s`` at ``2 d^2`` spread-out values
    covers every Bohr frequency of ``H0``.

    Raises
    ------
    GaugeError
        If no linear map reproduces all the sampled images, i.e. the given
        action is incompatible with covariance.
    """
    h0 = gauge.H0
    d = h0.shape[0]
    if samples is None:
        samples = 2 * d * d
    # incommensurate sample points so that no two Bohr frequencies alias
    svals = np.sqrt(2.0) * np.arange(samples) + 0.1 * np.arange(samples) ** 2
    gens, imgs = [], []
    for s in svals:
        u = unitary_exp(h0, s)
        uh = u.conj().T
        for x, hx in pairs:
            gens.append((u @ np.asarray(x) @ uh).reshape(-1))
            imgs.append((u @ np.asarray(hx) @ uh).reshape(-1))
    g = np.stack(gens, axis=1)
    im = np.stack(imgs, axis=1)
    m = im @ np.linalg.pinv(g, rcond=1e-10)
    scale = max(float(np.linalg.norm(im)), 1.0)
    defect = float(np.linalg.norm(m @ g - im)) / scale
    if defect > tol:
        raise GaugeError(
            f"action is not compatible with covariance (defect {defect:.3e})",
            defect=defect,
            time=None,
        )
    return OperatorMap(m, d)
