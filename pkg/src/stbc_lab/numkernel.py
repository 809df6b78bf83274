"""Small dense linear-algebra kernel shared by the rest of the package.

Matrices are plain :class:`numpy.ndarray` objects (``complex128`` for the
complex carrier, ``float64`` for the real one).  Most functions accept
stacks of matrices along leading axes so the Monte Carlo harness can work
on whole blocks of trials at once.
"""

import numpy as np

__all__ = [
    "ShapeError",
    "SingularChannelError",
    "matmul",
    "hermitian",
    "det",
    "qr_real",
    "qr_real_batch",
    "kron",
    "vec",
    "realify",
]

# Relative threshold on |r_ii| below which a real system matrix is treated
# as rank deficient.
RANK_TOL = 1e-12


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible."""


class SingularChannelError(np.linalg.LinAlgError):
    """Raised when an equivalent channel matrix is numerically rank deficient."""


def matmul(a, b):
    """Matrix product ``a @ b`` with an explicit shape check."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def hermitian(a):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


def det(a):
    """Determinant of a square matrix (or a stack of them).

    Uses LAPACK's LU factorisation with partial pivoting.
    """
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ShapeError(f"det needs square matrices, got {a.shape}")
    if a.shape[-1] > 8:
        raise ShapeError("det is limited to matrices of size <= 8")
    return np.linalg.det(a)


def qr_real_batch(a):
    """Thin QR of a stack of real matrices with nonnegative ``diag(r)``.

    Parameters
    ----------
    a : ndarray, shape (..., m, n)
        Real matrices with ``m >= n``.

    Returns
    -------
    q1 : ndarray, shape (..., m, n)
    r : ndarray, shape (..., n, n)
    singular : ndarray of bool, shape (...)
        True where some ``|r_ii|`` falls below ``RANK_TOL * max|a|``.
    """
    a = np.asarray(a, dtype=float)
    m, n = a.shape[-2:]
    if m < n:
        raise ShapeError(f"qr_real needs rows >= cols, got {a.shape}")
    q, r = np.linalg.qr(a, mode="reduced")
    d = np.diagonal(r, axis1=-2, axis2=-1)
    sign = np.where(d < 0, -1.0, 1.0)
    # flip column j of q and row j of r together
    q = q * sign[..., None, :]
    r = r * sign[..., :, None]
    scale = np.abs(a).max(axis=(-2, -1))
    d = np.diagonal(r, axis1=-2, axis2=-1)
    singular = (d <= RANK_TOL * scale[..., None]).any(axis=-1)
    return q, r, singular


def qr_real(a):
    """Thin QR factorisation ``a = q1 @ r`` of a real matrix.

    The diagonal of ``r`` is made nonnegative so the factorisation is
    unique.  Raises :class:`SingularChannelError` for rank-deficient input.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ShapeError(f"qr_real expects a 2-D matrix, got {a.shape}")
    q, r, singular = qr_real_batch(a)
    if singular:
        raise SingularChannelError("matrix is numerically rank deficient")
    return q, r


def kron(a, b):
    """Kronecker product of two matrices."""
    return np.kron(np.asarray(a), np.asarray(b))


def vec(a):
    """Stack the columns of ``a`` into a single column vector."""
    a = np.asarray(a)
    if a.ndim == 1:
        a = a[:, None]
    return a.reshape(-1, order="F")[:, None]


def realify(a):
    """Stack real parts on top of imaginary parts.

    Applied to a column this is the usual real embedding of a complex
    vector.  Applied to a matrix it acts column by column, so for a real
    vector ``s`` we have ``realify(H @ s) == realify(H) @ s``.  Leading
    axes are treated as a batch.
    """
    a = np.asarray(a)
    if a.ndim == 1:
        a = a[:, None]
    return np.concatenate([a.real, a.imag], axis=-2).astype(float)
