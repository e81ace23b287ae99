"""Dense operator algebra on small Hilbert spaces.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)``. Linear maps
``sigma -> H[sigma]`` on operator space are :class:`OperatorMap` objects
holding a ``(d*d, d*d)`` matrix that acts on row-major vectorized operators,
so ``vec(sigma) = sigma.reshape(-1)`` and ``Tr(sigma) = vec(I) . vec(sigma)``.

Hermiticity is checked, never enforced: an input that fails the check is
rejected instead of being symmetrized.
"""

import numpy as np

from .errors import DimensionMismatchError, LinearDependenceError, NotHermitianError

HERMITIAN_RTOL = 1e-12
INDEPENDENCE_RTOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _freeze(a):
    a.setflags(write=False)
    return a


def as_operator(a, dim=None):
    """Convert ``a`` to a finite square complex array (copied, read-only)."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise ValueError("operator entries must be finite")
    return _freeze(m)


def hermiticity_defect(a):
    """Largest entry of ``|a - a^*|``."""
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T)))


def is_hermitian(a, rtol=HERMITIAN_RTOL):
    a = np.asarray(a)
    scale = max(float(np.max(np.abs(a))), 1.0) if a.size else 1.0
    return hermiticity_defect(a) <= rtol * scale


def as_hermitian(a, dim=None, rtol=HERMITIAN_RTOL):
    """Like :func:`as_operator` but also require ``a == a^*`` within ``rtol``.

    The tolerance is relative to the largest entry magnitude (floored at 1).
    """
    m = as_operator(a, dim)
    if not is_hermitian(m, rtol):
        raise NotHermitianError(
            f"operator is not Hermitian (defect {hermiticity_defect(m):.3e})"
        )
    return m


def _same_dim(*ops):
    dims = {np.shape(o) for o in ops}
    if len(dims) != 1:
        raise DimensionMismatchError(f"operator shapes differ: {sorted(dims)}")


def commutator_i(a, b):
    """Return ``i(ab - ba)``, Hermitian whenever ``a`` and ``b`` are."""
    _same_dim(a, b)
    a = np.asarray(a)
    b = np.asarray(b)
    return 1j * (a @ b - b @ a)


def commutator(a, b):
    _same_dim(a, b)
    a = np.asarray(a)
    b = np.asarray(b)
    return a @ b - b @ a


def anticommutator(a, b):
    _same_dim(a, b)
    a = np.asarray(a)
    b = np.asarray(b)
    return a @ b + b @ a


def frobenius_inner(a, b):
    """``Tr(a^* b)``."""
    return complex(np.vdot(np.asarray(a), np.asarray(b)))


def frobenius_norm(a):
    return float(np.linalg.norm(np.asarray(a)))


def hermitian_eigh(a):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian ``a``."""
    m = as_hermitian(a)
    w, v = np.linalg.eigh(m)
    return w, v


def hermitian_spectrum(a):
    """Sorted real eigenvalues of a Hermitian operator."""
    w, _ = hermitian_eigh(a)
    return np.sort(w)


def unitary_exp(h, t):
    """``exp(i t h)`` for Hermitian ``h``, built from its eigendecomposition."""
    w, v = hermitian_eigh(h)
    return (v * np.exp(1j * t * w)) @ v.conj().T


def conjugate_by_exponential(a, h, t):
    """Return ``e^{ith} a e^{-ith}``."""
    _same_dim(a, h)
    u = unitary_exp(h, t)
    return u @ np.asarray(a) @ u.conj().T


def vec(a):
    return np.asarray(a).reshape(-1)


def unvec(v, dim):
    return np.asarray(v).reshape(dim, dim)


def generator_matrix(ops):
    """Stack vectorized operators as the columns of a ``(d*d, n)`` array."""
    _same_dim(*ops)
    return np.stack([vec(o) for o in ops], axis=1)


def independence_margin(ops):
    """Smallest over largest singular value of the stacked operators."""
    s = np.linalg.svd(generator_matrix(ops), compute_uv=False)
    if s[0] == 0.0:
        return 0.0
    return float(s[-1] / s[0])


def check_independent(ops, rtol=INDEPENDENCE_RTOL, names=None):
    margin = independence_margin(ops)
    if margin <= rtol:
        label = ", ".join(names) if names else f"{len(ops)} operators"
        raise LinearDependenceError(
            f"{label} are linearly dependent (singular value ratio {margin:.3e})"
        )
    return margin


def span_coefficients(target, ops):
    """Least-squares coefficients of ``target`` in span(ops) and the residual norm."""
    g = generator_matrix(ops)
    coef, *_ = np.linalg.lstsq(g, vec(target), rcond=None)
    resid = vec(target) - g @ coef
    return coef, float(np.linalg.norm(resid))


class OperatorMap:
    """Linear map on ``d x d`` operators, stored as a dense ``(d*d, d*d)`` matrix.

    Instances are immutable. Call them (or use :func:`apply_map`) to apply.
    """

    __slots__ = ("dim", "matrix")

    def __init__(self, matrix, dim=None):
        m = np.array(matrix, dtype=complex)
        n = m.shape[0]
        if dim is None:
            dim = int(round(np.sqrt(n)))
        if m.shape != (dim * dim, dim * dim):
            raise DimensionMismatchError(
                f"map matrix must be {dim * dim}x{dim * dim}, got {m.shape}"
            )
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "matrix", _freeze(m))

    def __setattr__(self, name, value):
        raise AttributeError("OperatorMap is immutable")

    def __call__(self, a):
        a = np.asarray(a)
        if a.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"map acts on {self.dim}x{self.dim} operators, got {a.shape}"
            )
        return unvec(self.matrix @ vec(a), self.dim)

    def __add__(self, other):
        if not isinstance(other, OperatorMap):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionMismatchError("cannot add maps of different dimension")
        return OperatorMap(self.matrix + other.matrix, self.dim)

    def __sub__(self, other):
        if not isinstance(other, OperatorMap):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionMismatchError("cannot subtract maps of different dimension")
        return OperatorMap(self.matrix - other.matrix, self.dim)

    def __mul__(self, scalar):
        return OperatorMap(complex(scalar) * self.matrix, self.dim)

    __rmul__ = __mul__

    def __repr__(self):
        return f"OperatorMap(dim={self.dim})"

    @classmethod
    def zero(cls, dim):
        return cls(np.zeros((dim * dim, dim * dim)), dim)

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim * dim), dim)

    @classmethod
    def from_function(cls, fn, dim):
        """Tabulate a linear function by applying it to every matrix unit."""
        cols = []
        for idx in range(dim * dim):
            e = np.zeros(dim * dim, dtype=complex)
            e[idx] = 1.0
            cols.append(vec(fn(unvec(e, dim))))
        return cls(np.stack(cols, axis=1), dim)

    @classmethod
    def from_kraus(cls, ops, coefficients):
        """``H[rho] = sum_jk lam_jk X_j^* rho X_k``."""
        ops = [np.asarray(o, dtype=complex) for o in ops]
        _same_dim(*ops)
        lam = np.asarray(coefficients, dtype=complex)
        if lam.shape != (len(ops), len(ops)):
            raise DimensionMismatchError("coefficient matrix must be n x n")
        dim = ops[0].shape[0]
        m = np.zeros((dim * dim, dim * dim), dtype=complex)
        for j, xj in enumerate(ops):
            for k, xk in enumerate(ops):
                if lam[j, k] != 0:
                    # vec(P rho Q) = (P kron Q^T) vec(rho) for row-major vec
                    m += lam[j, k] * np.kron(xj.conj().T, xk.T)
        return cls(m, dim)

    @classmethod
    def trace_times(cls, h0):
        """The map ``sigma -> Tr(sigma) h0``."""
        h0 = np.asarray(h0, dtype=complex)
        dim = h0.shape[0]
        return cls(np.outer(vec(h0), vec(np.eye(dim))), dim)


def apply_map(m, a):
    return m(a)


def operator_map_from_action(dim, pairs, complement_rule=None, rtol=INDEPENDENCE_RTOL):
    """Assemble a linear map from its images on a set of independent generators.

    Parameters
    ----------
    dim : int
        Hilbert-space dimension.
    pairs : sequence of (operator, image)
        The map sends each operator to its image.
    complement_rule : OperatorMap, optional
        Action on the orthogonal complement (Frobenius inner product) of the
        span of the generators. Defaults to zero.

    Raises
    ------
    LinearDependenceError
        If the generators are (numerically) linearly dependent.
    """
    gens = [as_operator(g, dim) for g, _ in pairs]
    imgs = [as_operator(h, dim) for _, h in pairs]
    check_independent(gens, rtol)
    g = generator_matrix(gens)
    im = generator_matrix(imgs)
    g_pinv = np.linalg.pinv(g)
    m = im @ g_pinv
    if complement_rule is not None:
        if complement_rule.dim != dim:
            raise DimensionMismatchError("complement rule has the wrong dimension")
        m = m + complement_rule.matrix @ (np.eye(dim * dim) - g @ g_pinv)
    return OperatorMap(m, dim)


def matrix_unit(dim, i, j):
    """``E_ij`` with zero-based indices."""
    e = np.zeros((dim, dim), dtype=complex)
    e[i, j] = 1.0
    return e
