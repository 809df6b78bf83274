"""Real-valued equivalent channel of a linear dispersion code.

For ``Y = X H + W`` with ``X = sum_k A_k x_k`` the received columns stack
into ``y = Hc s + w`` where column ``k`` of ``Hc`` is the stack of
``A_k h_i`` over receive antennas.  Stacking real over imaginary parts
gives a real system whose thin QR reduces ML detection to
``min ||y' - R s||^2`` with ``y' = Q1^T y~``.
"""

from dataclasses import dataclass

import numpy as np

from .clifford import CheckResult
from .numkernel import ShapeError, SingularChannelError, qr_real_batch, realify

__all__ = [
    "ChannelRealization",
    "EquivalentChannel",
    "complex_gaussian",
    "draw_channel",
    "equivalent_matrix",
    "build_equivalent",
    "build_equivalent_batch",
    "receive_vector",
    "pattern_check",
    "x1_pattern",
    "x2_pattern",
    "x32_pattern",
    "conditional_pattern",
]

PATTERN_TOL = 1e-9


def complex_gaussian(rng, shape, variance=1.0):
    """Circular complex Gaussian samples via the Box-Muller transform."""
    u1 = 1.0 - rng.random(shape)  # in (0, 1]
    u2 = rng.random(shape)
    radius = np.sqrt(-np.log(u1) * variance)
    return radius * np.exp(2j * np.pi * u2)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    H: np.ndarray
    seed: object = None
    trial: object = None


def draw_channel(rng, Nt, Nr, seed=None, trial=None):
    """Rayleigh channel with i.i.d. CN(0, 1) entries, shape ``(Nt, Nr)``."""
    return ChannelRealization(complex_gaussian(rng, (Nt, Nr)), seed, trial)


def equivalent_matrix(code, H):
    """Complex ``(Nr*T, 2K)`` matrix whose column k stacks ``A_k h_i``.

    ``H`` may carry leading batch axes: ``(..., Nt, Nr)``.
    """
    H = np.asarray(H)
    if H.shape[-2] != code.Nt:
        raise ShapeError(f"channel has {H.shape[-2]} rows, code has Nt={code.Nt}")
    twoK, T, Nt = code.weights.shape
    Nr = H.shape[-1]
    # (..., 2K*T, Nr) -> (..., Nr, T, 2K): receive antenna major, time minor
    cols = (code.weights.reshape(twoK * T, Nt) @ H).reshape(H.shape[:-2] + (twoK, T, Nr))
    cols = np.moveaxis(cols, -3, -1).swapaxes(-3, -2)
    return cols.reshape(H.shape[:-2] + (Nr * T, twoK))


def receive_vector(Y):
    """``realify(vec(Y))`` for ``Y`` of shape ``(..., T, Nr)``."""
    Y = np.asarray(Y)
    y = np.swapaxes(Y, -1, -2).reshape(Y.shape[:-2] + (-1, 1))
    return realify(y)[..., 0]


@dataclass(frozen=True, eq=False)
class EquivalentChannel:
    code: object
    Nr: int
    h_real: np.ndarray
    q1: np.ndarray
    r: np.ndarray

    def reduce(self, Y):
        """``y' = Q1^T realify(vec(Y))`` for a received block ``Y``."""
        return self.q1.T @ receive_vector(Y)


def build_equivalent_batch(code, H):
    """Vectorised :func:`build_equivalent` over leading axes of ``H``.

    Returns ``(h_real, q1, r, singular)`` arrays; no exception is raised
    for singular entries so the caller can redraw them.
    """
    H = np.asarray(H)
    Nr = H.shape[-1]
    if Nr * code.T < code.twoK / 2:
        raise ShapeError("need Nr*T >= K for a tall equivalent channel")
    h_real = realify(equivalent_matrix(code, H))
    q1, r, singular = qr_real_batch(h_real)
    return h_real, q1, r, singular


def build_equivalent(code, ch):
    """Real equivalent channel and its QR for one channel realisation."""
    H = ch.H if isinstance(ch, ChannelRealization) else np.asarray(ch)
    h_real, q1, r, singular = build_equivalent_batch(code, H)
    if singular:
        raise SingularChannelError("equivalent channel is rank deficient")
    return EquivalentChannel(code, H.shape[-1], h_real, q1, r)


def pattern_check(eq, pat, tol=PATTERN_TOL):
    """Check that ``R`` vanishes wherever the mask ``pat`` is False.

    ``eq`` may be an :class:`EquivalentChannel` or a bare ``R`` matrix.
    The reported violation is relative to ``max|R|``.
    """
    R = eq.r if isinstance(eq, EquivalentChannel) else np.asarray(eq)
    pat = np.asarray(pat, dtype=bool)
    if R.shape != pat.shape:
        raise ShapeError(f"R is {R.shape}, pattern is {pat.shape}")
    scale = np.abs(R).max()
    off = np.abs(R[~pat])
    worst = float(off.max() / scale) if off.size and scale > 0 else 0.0
    return CheckResult(worst < tol, worst)


def _fgd_block():
    """8x8 support of the conditionally decoded part of ``X1``."""
    a = np.eye(8, dtype=bool)
    a[0:4, 3] = True
    a[4:8, 7] = True
    return a


def conditional_pattern(n_outer):
    """Support ``[[A, B], [0, C]]`` with ``n_outer`` enumerated symbols."""
    n = 8 + n_outer
    pat = np.zeros((n, n), dtype=bool)
    pat[:8, :8] = _fgd_block()
    pat[:8, 8:] = True
    pat[8:, 8:] = np.triu(np.ones((n_outer, n_outer), dtype=bool))
    return pat


def x1_pattern():
    """Two decoupled groups, each conditioned on its last symbol."""
    return _fgd_block()


def x2_pattern():
    return conditional_pattern(8)


def x32_pattern():
    return conditional_pattern(4)
