"""Maximum-likelihood decoders for ``min ||y' - R s||^2`` over PAM symbols.

All decoders work on integer PAM levels and break metric ties in favour of
the lexicographically smallest symbol vector, so their decisions can be
compared exactly.

Node accounting: every evaluation of a partial Euclidean distance is one
visited node; in the fast decoders each conditioning hypothesis (a value
of ``x4`` or ``x8``) and each hard-slicer call also count as one node.
``leaf_count`` is the number of full-metric hypotheses, i.e. the quantity
bounded by the worst-case complexity.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mimo import PATTERN_TOL, conditional_pattern, pattern_check, x1_pattern

__all__ = [
    "DecodeResult",
    "DecoderError",
    "slicer",
    "slice_levels",
    "nearest_level",
    "exhaustive_ml",
    "sphere_decode",
    "fast_decode_x1",
    "fast_decode_x2",
    "fast_decode_x32",
    "fast_decode_x1_batch",
    "MAX_EXHAUSTIVE",
]

MAX_EXHAUSTIVE = 1 << 24
_TAIL_CHUNK = 1 << 16

# (inner symbols, conditioning symbol) of the two groups of X1
_X1_GROUPS = (((0, 1, 2), 3), ((4, 5, 6), 7))


class DecoderError(ValueError):
    """Raised when a decoder's preconditions are not met."""


@dataclass
class DecodeResult:
    s_hat: np.ndarray
    metric: float
    visited_nodes: int
    leaf_count: int
    fallback: bool = False


def _levels_of(constellation):
    if isinstance(constellation, (int, np.integer)):
        q = math.isqrt(int(constellation))
        return np.arange(-(q - 1), q, 2)
    return np.asarray(constellation.pam_levels)


def _round_half_away(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def slicer(z, M):
    """Nearest PAM level to ``z`` for square M-QAM, as an ``int``.

    ``sign(z) * min(|2 round((z - 1)/2) + 1|, sqrt(M) - 1)`` with
    ``sign(0) = +1`` and rounding half away from zero.
    """
    t = (z - 1.0) / 2.0
    r = math.floor(abs(t) + 0.5)
    if t < 0:
        r = -r
    mag = min(abs(2 * r + 1), math.isqrt(M) - 1)
    return mag if z >= 0 else -mag


def slice_levels(z, M):
    """Vectorised :func:`slicer`."""
    z = np.asarray(z, dtype=float)
    mag = np.minimum(np.abs(2 * _round_half_away((z - 1.0) / 2.0) + 1), math.isqrt(M) - 1)
    return np.where(z >= 0, mag, -mag).astype(int)


def nearest_level(z, M):
    """Brute-force nearest PAM level.

    Exact ties go away from zero, and to +1 at ``z = 0``.
    """
    z = np.asarray(z, dtype=float)
    levels = _levels_of(M)
    d = (z[..., None] - levels) ** 2
    dmin = d.min(axis=-1, keepdims=True)
    out = np.zeros(z.shape, dtype=int)
    taken = np.zeros(z.shape, dtype=bool)
    for i in sorted(range(len(levels)), key=lambda i: (-abs(levels[i]), -levels[i])):
        hit = (d[..., i] == dmin[..., 0]) & ~taken
        out = np.where(hit, levels[i], out)
        taken |= hit
    return out


def _check_R(R):
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise DecoderError(f"R must be square, got {R.shape}")
    if not np.all(np.diag(R) > 0):
        raise DecoderError("R must have a positive diagonal")
    return R


@lru_cache(maxsize=16)
def _grid(levels, n):
    grids = np.meshgrid(*([np.asarray(levels, dtype=float)] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def exhaustive_ml(yprime, R, constellation, twoK=None):
    """Brute-force ML over all ``sqrt(M)**2K`` candidates."""
    R = np.asarray(R, dtype=float)
    y = np.asarray(yprime, dtype=float).ravel()
    n = R.shape[1] if twoK is None else int(twoK)
    levels = tuple(int(v) for v in _levels_of(constellation))
    L = len(levels)
    total = L**n
    if total > MAX_EXHAUSTIVE:
        raise DecoderError(f"{total} candidates exceed the exhaustive limit {MAX_EXHAUSTIVE}")
    n_tail = min(n, int(math.log(_TAIL_CHUNK, L)))
    n_head = n - n_tail
    tail = _grid(levels, n_tail)
    tail_proj = tail @ R[:, n_head:].T
    best, best_s = math.inf, None
    heads = _grid(levels, n_head) if n_head else np.zeros((1, 0))
    for head in heads:
        resid = y - R[:, :n_head] @ head - tail_proj
        metric = np.einsum("ij,ij->i", resid, resid)
        i = int(np.argmin(metric))
        if metric[i] < best:
            best = float(metric[i])
            best_s = np.concatenate([head, tail[i]])
    return DecodeResult(best_s.astype(int), best, total, total)


class _Search:
    """Depth-first Schnorr-Euchner search over rows ``lo..hi-1`` of ``R``.

    ``inner`` (optional) returns ``(metric, symbols)`` for the rows below
    ``lo`` once the searched symbols are fixed.
    """

    def __init__(self, y, R, levels, lo, hi, inner=None, trace=None):
        self.y = [float(v) for v in y]
        self.R = np.asarray(R, dtype=float).tolist()
        self.levels = [int(v) for v in levels]
        self.lo, self.hi = lo, hi
        self.inner = inner
        self.trace = trace
        self.s = [0] * len(self.y)
        self.radius = math.inf
        self.best = None
        self.nodes = 0
        self.leaves = 0

    def run(self):
        if self.hi > self.lo:
            self._descend(self.hi - 1, 0.0)
        else:
            self._leaf(0.0)
        return self

    def _descend(self, i, pd):
        Ri = self.R[i]
        s = self.s
        acc = self.y[i]
        for j in range(i + 1, self.hi):
            acc -= Ri[j] * s[j]
        d = Ri[i]
        c = acc / d
        for v in sorted(self.levels, key=lambda v: (abs(c - v), v)):
            e = d * (c - v)
            dist = pd + e * e
            self.nodes += 1
            if dist > self.radius:
                if self.trace is not None:
                    self.trace.append((i, dist, "prune"))
                break
            s[i] = v
            if self.trace is not None:
                self.trace.append((i, dist, "visit"))
            if i == self.lo:
                self._leaf(dist)
            else:
                self._descend(i - 1, dist)

    def _leaf(self, dist):
        s = self.s
        if self.inner is not None:
            extra, inner_s = self.inner(s)
            for idx, v in inner_s.items():
                s[idx] = v
        else:
            extra = 0.0
            self.leaves += 1
        total = dist + extra
        cand = tuple(s)
        if total < self.radius or (total == self.radius and cand < self.best):
            self.radius = total
            self.best = cand
            if self.trace is not None:
                self.trace.append((self.lo, total, "update"))
        elif self.trace is not None:
            self.trace.append((self.lo, total, "leaf"))


def sphere_decode(yprime, R, constellation, twoK=None, trace=None):
    """Depth-first sphere decoder, infinite initial radius, SE ordering.

    ``trace``, if given, is a list that receives ``(level, distance,
    action)`` tuples with action in ``visit | prune | leaf | update``.
    """
    R = _check_R(R)
    n = R.shape[1] if twoK is None else int(twoK)
    y = np.asarray(yprime, dtype=float).ravel()
    search = _Search(y, R, _levels_of(constellation), 0, n, trace=trace).run()
    return DecodeResult(np.array(search.best, dtype=int), search.radius, search.nodes, search.leaves)


def _lex_smaller(a, b):
    return b is None or a < b


class _GroupSolver:
    """Conditional ML for the two X1 groups given the outer symbols."""

    def __init__(self, y, R, levels, M, n_outer, trace):
        self.y = np.asarray(y, dtype=float)
        self.R = np.asarray(R, dtype=float)
        self.Rl = self.R.tolist()
        self.levels = [int(v) for v in levels]
        self.M = M
        self.n_outer = n_outer
        self.trace = trace
        self.nodes = 0
        self.hypotheses = 0

    def __call__(self, s):
        y, Rl = self.y, self.Rl
        if self.n_outer:
            outer = np.asarray(s[8 : 8 + self.n_outer], dtype=float)
            b = (y[:8] - self.R[:8, 8:] @ outer).tolist()
        else:
            b = y[:8].tolist()
        total = 0.0
        chosen = {}
        for inner, c in _X1_GROUPS:
            best, best_sym = math.inf, None
            rcc = Rl[c][c]
            for v in self.levels:
                self.hypotheses += 1
                self.nodes += 1
                e = b[c] - rcc * v
                metric = e * e
                syms = []
                for i in inner:
                    rii = Rl[i][i]
                    z = (b[i] - Rl[i][c] * v) / rii
                    xi = slicer(z, self.M)
                    self.nodes += 1
                    e = rii * (z - xi)
                    metric += e * e
                    syms.append(xi)
                syms.append(v)
                if self.trace is not None:
                    self.trace.append((c, metric, "hypothesis"))
                cand = tuple(syms)
                if metric < best or (metric == best and _lex_smaller(cand, best_sym)):
                    best, best_sym = metric, cand
            total += best
            for idx, v in zip(inner + (c,), best_sym):
                chosen[idx] = v
        return total, chosen


def _fast_decode(yprime, R, constellation, n_outer, pattern, trace):
    R = _check_R(R)
    if R.shape[0] != 8 + n_outer:
        raise DecoderError(f"expected a {8 + n_outer}x{8 + n_outer} R, got {R.shape}")
    if not pattern_check(R, pattern, PATTERN_TOL).passed:
        res = sphere_decode(yprime, R, constellation, trace=trace)
        res.fallback = True
        return res
    levels = _levels_of(constellation)
    M = len(levels) ** 2
    y = np.asarray(yprime, dtype=float).ravel()
    solver = _GroupSolver(y, R, levels, M, n_outer, trace)
    search = _Search(y, R, levels, 8, 8 + n_outer, inner=solver, trace=trace).run()
    return DecodeResult(
        np.array(search.best, dtype=int),
        search.radius,
        search.nodes + solver.nodes,
        solver.hypotheses,
    )


def fast_decode_x1(yprime, R, constellation, trace=None):
    """ML decoding of ``X1``: two independent conditional scans of ``sqrt(M)`` values."""
    return _fast_decode(yprime, R, constellation, 0, x1_pattern(), trace)


def fast_decode_x2(yprime, R, constellation, trace=None):
    """ML decoding of ``X2``: sphere search over ``x9..x16``, conditional
    slicing of ``x1..x8`` at every outer leaf."""
    return _fast_decode(yprime, R, constellation, 8, conditional_pattern(8), trace)


def fast_decode_x32(yprime, R, constellation, trace=None):
    """As :func:`fast_decode_x2` with the outer layer ``x9..x12``."""
    return _fast_decode(yprime, R, constellation, 4, conditional_pattern(4), trace)


def _lex_less_rows(a, b):
    diff = a != b
    first = np.argmax(diff, axis=1)
    rows = np.arange(len(a))
    return diff.any(axis=1) & (a[rows, first] < b[rows, first])


def fast_decode_x1_batch(yprime, R, constellation):
    """Vectorised :func:`fast_decode_x1` over a batch of trials.

    Parameters
    ----------
    yprime : ndarray, shape (B, 8)
    R : ndarray, shape (B, 8, 8)

    Returns
    -------
    s_hat : ndarray of int, shape (B, 8)
    metric : ndarray, shape (B,)
    visited_nodes : ndarray of int, shape (B,)
    leaf_count : ndarray of int, shape (B,)
    fallback : ndarray of bool, shape (B,)
    """
    y = np.asarray(yprime, dtype=float)
    R = np.asarray(R, dtype=float)
    levels = _levels_of(constellation)
    q = len(levels)
    M = q * q
    B = len(y)
    s_hat = np.zeros((B, 8), dtype=int)
    metric = np.zeros(B)
    for inner, c in _X1_GROUPS:
        inner = list(inner)
        rcc = R[:, c, c]
        best = np.full(B, np.inf)
        best_sym = np.zeros((B, 4), dtype=int)
        for v in levels:
            m = (y[:, c] - rcc * v) ** 2
            rii = R[:, inner, inner]
            z = (y[:, inner] - R[:, inner, c] * v) / rii
            xi = slice_levels(z, M)
            m = m + np.sum((rii * (z - xi)) ** 2, axis=1)
            sym = np.concatenate([xi, np.full((B, 1), v)], axis=1)
            take = (m < best) | ((m == best) & _lex_less_rows(sym, best_sym))
            best = np.where(take, m, best)
            best_sym[take] = sym[take]
        s_hat[:, inner + [c]] = best_sym
        metric += best
    nodes = np.full(B, 2 * q * 4)
    leaves = np.full(B, 2 * q)
    # structural zeros of R, relative to max|R|
    mask = ~x1_pattern()
    scale = np.abs(R).max(axis=(1, 2))
    bad = np.abs(R[:, mask]).max(axis=1) >= PATTERN_TOL * scale
    for b in np.flatnonzero(bad):
        res = sphere_decode(y[b], R[b], constellation)
        s_hat[b], metric[b], nodes[b], leaves[b] = res.s_hat, res.metric, res.visited_nodes, res.leaf_count
    return s_hat, metric, nodes, leaves, bad
