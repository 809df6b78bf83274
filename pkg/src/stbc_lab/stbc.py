"""Concrete codes for four transmit antennas, QAM alphabets, coding gain
and worst-case decoding complexity.

Three linear dispersion codes are provided:

* :func:`x1_code` -- rate-1 fast-group-decodable code with constellation
  stretching (8 real symbols over 4 channel uses),
* :func:`x2_code` -- rate-2 code multiplexing two copies of ``X1`` through a
  unitary matrix (16 real symbols),
* :func:`x32_code` -- rate-3/2 code obtained by puncturing ``X2`` (12 real
  symbols).
"""

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .clifford import GroupStructure, generate
from .numkernel import det, hermitian

__all__ = [
    "K_OPT",
    "PHI_OPT",
    "LinearDispersionCode",
    "Constellation",
    "Complexity",
    "CodingGain",
    "IntractableError",
    "x1_code",
    "x2_code",
    "x32_code",
    "default_u",
    "constellation",
    "difference_alphabet",
    "coding_gain",
    "coding_gain_details",
    "worst_case_complexity",
]

K_OPT = math.sqrt(3 / 5)
PHI_OPT = math.atan(0.5)

UNITARY_TOL = 1e-10
# Gram determinants per call before coding_gain refuses to enumerate.
MAX_ENUMERATION = 50_000_000


@dataclass(frozen=True, eq=False)
class LinearDispersionCode:
    """``X(s) = sum_k s_k A_k`` with real symbols ``s_k``.

    ``weights`` has shape ``(2K, T, Nt)`` and already includes the
    stretching factor and the power normalisation ``norm_const``.
    """

    name: str
    T: int
    Nt: int
    weights: np.ndarray
    structure: GroupStructure
    stretch_k: float = 1.0
    norm_const: float = 1.0

    @property
    def twoK(self):
        return self.weights.shape[0]

    @property
    def rate(self):
        """Complex symbols per channel use."""
        return Fraction(self.twoK, 2 * self.T)

    def encode(self, s):
        """Codeword(s) for real symbol vector(s) ``s`` of shape ``(..., 2K)``."""
        s = np.asarray(s, dtype=float)
        if s.shape[-1] != self.twoK:
            raise ValueError(f"{self.name} encodes {self.twoK} real symbols, got {s.shape}")
        return np.tensordot(s, self.weights, axes=([-1], [0]))

    def unnormalized(self):
        """Same code with the power normalisation stripped."""
        return replace(self, weights=self.weights / self.norm_const, norm_const=1.0)

    def mean_entry_power(self, symbol_variance=1.0):
        """Average ``E|X_tn|^2`` for i.i.d. zero-mean real symbols."""
        return float(symbol_variance * np.sum(np.abs(self.weights) ** 2) / (self.T * self.Nt))


def _x1_matrix(s, k):
    x1, x2, x3, x4, x5, x6, x7, x8 = s
    ik = 1j * k
    return np.array(
        [
            [x1 + ik * x5, x2 + ik * x6, x3 + ik * x7, -ik * x4 - x8],
            [-x2 + ik * x6, x1 - ik * x5, -ik * x4 - x8, -x3 - ik * x7],
            [-x3 + ik * x7, ik * x4 + x8, x1 - ik * x5, x2 + ik * x6],
            [ik * x4 + x8, x3 - ik * x7, -x2 + ik * x6, x1 + ik * x5],
        ]
    )


X1_STRUCTURE = GroupStructure(
    groups=((0, 1, 2, 3), (4, 5, 6, 7)),
    inner_groups=(((0,), (1,), (2,)), ((4,), (5,), (6,))),
)


def x1_code(stretch_k=K_OPT):
    """Rate-1 FGD code for four antennas with stretching factor ``stretch_k``.

    Symbols ``x4..x7`` (0-based 3..6) are the stretched ones.  The factor
    ``sqrt(2 / (1 + k**2))`` keeps the mean power per antenna per slot at
    one for unit-energy QAM.
    """
    if not stretch_k > 0:
        raise ValueError(f"stretch factor must be positive, got {stretch_k}")
    c = math.sqrt(2.0 / (1.0 + stretch_k**2))
    weights = np.array([c * _x1_matrix(e, stretch_k) for e in np.eye(8)])
    return LinearDispersionCode(
        name="x1",
        T=4,
        Nt=4,
        weights=weights,
        structure=X1_STRUCTURE,
        stretch_k=float(stretch_k),
        norm_const=c,
    )


def default_u():
    """``j R_1`` for the four-antenna generator family."""
    return 1j * generate(2)[1]


def _check_unitary(u):
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError(f"U must be 4x4, got {u.shape}")
    err = np.abs(hermitian(u) @ u - np.eye(4)).max()
    if err >= UNITARY_TOL:
        raise ValueError(f"U is not unitary (max deviation {err:.3g})")
    return u


def x2_code(phi=PHI_OPT, u_choice=None, stretch_k=K_OPT):
    """Rate-2 code ``X1(x1..x8) + exp(j phi) X1(x9..x16) U``."""
    u = _check_unitary(default_u() if u_choice is None else u_choice)
    base = x1_code(stretch_k)
    second = np.exp(1j * phi) * (base.weights @ u)
    structure = GroupStructure(
        groups=X1_STRUCTURE.groups,
        inner_groups=X1_STRUCTURE.inner_groups,
        outer=tuple(range(8, 16)),
    )
    return LinearDispersionCode(
        name="x2",
        T=4,
        Nt=4,
        weights=np.concatenate([base.weights, second]),
        structure=structure,
        stretch_k=base.stretch_k,
        norm_const=base.norm_const,
    )


def x32_code(slots=(0, 1, 2, 3), phi=PHI_OPT, u_choice=None, stretch_k=K_OPT):
    """Rate-3/2 code: ``X2`` with four of the second-layer symbols punctured.

    ``slots`` are the (0-based) ``X1`` symbol positions of the second layer
    that carry ``x9..x12``; the others are held at zero.
    """
    slots = tuple(int(i) for i in slots)
    if len(slots) != 4 or len(set(slots)) != 4 or not all(0 <= i < 8 for i in slots):
        raise ValueError(f"need four distinct slots in 0..7, got {slots}")
    full = x2_code(phi, u_choice, stretch_k)
    weights = np.concatenate([full.weights[:8], full.weights[8:][list(slots)]])
    structure = GroupStructure(
        groups=X1_STRUCTURE.groups,
        inner_groups=X1_STRUCTURE.inner_groups,
        outer=tuple(range(8, 12)),
    )
    return replace(full, name="x32", weights=weights, structure=structure)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Square M-QAM seen as two Gray-labelled PAM axes."""

    M: int
    pam_levels: np.ndarray
    labels: np.ndarray
    scale: float

    @property
    def sqrt_m(self):
        return len(self.pam_levels)

    @property
    def bits_per_axis(self):
        return int(math.log2(self.sqrt_m))

    def bits_to_levels(self, bits):
        """Map ``(..., bits_per_axis)`` bit arrays (MSB first) to PAM levels."""
        bits = np.asarray(bits)
        weights = 1 << np.arange(self.bits_per_axis - 1, -1, -1)
        label = bits @ weights
        return self._level_of_label[label]

    def levels_to_bits(self, levels):
        levels = np.asarray(levels)
        idx = (levels.astype(int) + self.sqrt_m - 1) // 2
        label = self.labels[idx]
        shifts = np.arange(self.bits_per_axis - 1, -1, -1)
        return (label[..., None] >> shifts) & 1

    @property
    def _level_of_label(self):
        out = np.empty(self.sqrt_m, dtype=int)
        out[self.labels] = self.pam_levels
        return out


_SUPPORTED_M = (4, 16, 64)


def constellation(M):
    """Square QAM with Gray labelling per axis and unit-energy scale."""
    if M not in _SUPPORTED_M:
        raise ValueError(f"unsupported QAM size {M}; choose one of {_SUPPORTED_M}")
    q = math.isqrt(M)
    levels = np.arange(-(q - 1), q, 2)
    idx = np.arange(q)
    labels = idx ^ (idx >> 1)
    return Constellation(M=M, pam_levels=levels, labels=labels, scale=math.sqrt(3 / (2 * (M - 1))))


def difference_alphabet(M):
    """All differences of two PAM levels: ``0, +-2, ..., +-2(sqrt(M) - 1)``."""
    q = math.isqrt(M)
    pos = 2 * np.arange(1, q)
    return np.concatenate([[0], np.stack([pos, -pos], axis=1).ravel()])


class IntractableError(RuntimeError):
    """The requested coding-gain enumeration is too large."""


class CodingGain(NamedTuple):
    value: float
    root: float
    evaluations: int
    argmin: np.ndarray


def _digits(idx, base, ndigits):
    out = np.empty((len(idx), ndigits), dtype=np.int64)
    for p in range(ndigits - 1, -1, -1):
        out[:, p] = idx % base
        idx = idx // base
    return out


def _half_space_chunks(values, n, chunk):
    """Nonzero difference vectors whose first nonzero entry is positive."""
    L = len(values)
    pos = values[values > 0]
    for lead in range(n):
        tail = n - lead - 1
        per = L**tail
        for v in pos:
            for start in range(0, per, chunk):
                idx = np.arange(start, min(start + chunk, per), dtype=np.int64)
                block = np.zeros((len(idx), n))
                block[:, lead] = v
                if tail:
                    block[:, lead + 1 :] = values[_digits(idx, L, tail)]
                yield block


def _full_chunks(values, n, chunk):
    L = len(values)
    total = L**n
    for start in range(1, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield values[_digits(idx, L, n)]


def _gram_dets(weights, deltas):
    dx = np.tensordot(deltas, weights, axes=([1], [0]))
    gram = hermitian(dx) @ dx
    return det(gram)


def coding_gain_details(
    code,
    constellation,
    normalized=False,
    symmetric=True,
    samples=None,
    rng=None,
    chunk=1 << 16,
    max_evaluations=MAX_ENUMERATION,
):
    """Minimum of ``det(dX^H dX)`` over nonzero codeword differences.

    By linearity ``dX = encode(ds)`` with every ``ds_k`` drawn from
    :func:`difference_alphabet`.  With ``symmetric=True`` only one of each
    ``+-ds`` pair is visited.  ``samples`` switches to random sampling of
    that many difference vectors.
    """
    if not normalized:
        code = code.unnormalized()
    values = difference_alphabet(constellation.M).astype(float)
    n = code.twoK
    total = (len(values) ** n - 1) // (2 if symmetric else 1)

    if samples is not None:
        rng = np.random.default_rng(rng)

        def chunks():
            left = int(samples)
            while left > 0:
                m = min(chunk, left)
                block = values[rng.integers(0, len(values), size=(m, n))]
                block = block[np.any(block != 0, axis=1)]
                left -= m
                yield block

        source = chunks()
    elif total > max_evaluations:
        raise IntractableError(
            f"{total:.3e} difference vectors exceed the limit of {max_evaluations:.3e}; "
            "pass samples=... or raise max_evaluations"
        )
    elif symmetric:
        source = _half_space_chunks(values, n, chunk)
    else:
        source = _full_chunks(values, n, chunk)

    best = math.inf
    best_delta = None
    count = 0
    for block in source:
        if not len(block):
            continue
        d = _gram_dets(code.weights, block)
        count += len(block)
        if np.abs(d.imag).max() >= 1e-9 * max(1.0, np.abs(d.real).max()):
            raise ArithmeticError("Gram determinant has a non-negligible imaginary part")
        i = int(np.argmin(d.real))
        if d.real[i] < best:
            best = float(d.real[i])
            best_delta = block[i].copy()
    value = max(best, 0.0)
    return CodingGain(value, value ** (1.0 / code.Nt), count, best_delta)


def coding_gain(code, constellation, normalized=False, **kwargs):
    """Minimum Gram determinant of codeword differences (see :func:`coding_gain_details`)."""
    return coding_gain_details(code, constellation, normalized, **kwargs).value


@dataclass(frozen=True)
class Complexity:
    """Worst-case count ``sum(coef * M**exp)``, exponents in halves."""

    terms: tuple

    @property
    def coefficient(self):
        if len(self.terms) != 1:
            raise ValueError(f"{self} is not a single monomial")
        return self.terms[0][0]

    @property
    def exponent(self):
        if len(self.terms) != 1:
            raise ValueError(f"{self} is not a single monomial")
        return self.terms[0][1]

    def evaluate(self, M):
        return sum(c * M ** float(e) for c, e in self.terms)

    def __str__(self):
        parts = []
        for c, e in self.terms:
            if e == 0:
                parts.append(str(c))
            else:
                parts.append(f"{'' if c == 1 else c}M^{float(e):g}")
        return " + ".join(parts)


def worst_case_complexity(structure, M=None, conditional_orthogonal=None):
    """Worst-case number of ML metric evaluations for ``structure``.

    Each group contributes ``sqrt(M)**(n_i - k_i)`` times
    ``sum_j sqrt(M)**(n_ij - 1)``; the inner sum collapses to one when the
    inner groups are conditionally orthogonal (by default: whenever every
    inner group is a single symbol).  Outer symbols multiply everything by
    ``sqrt(M)**len(outer)``.  ``M`` is only used for validation; the result
    is symbolic in ``M``.
    """
    if M is not None and (M < 4 or math.isqrt(M) ** 2 != M):
        raise ValueError(f"M must be a square QAM size, got {M}")
    structure.validate()
    outer = Fraction(len(structure.outer), 2)
    acc = {}
    for n_i, k_i, inner in zip(structure.n, structure.k, structure.n_inner):
        base = Fraction(n_i - k_i, 2)
        collapse = conditional_orthogonal
        if collapse is None:
            collapse = all(x == 1 for x in inner)
        if inner and not collapse:
            for n_ij in inner:
                e = outer + base + Fraction(n_ij - 1, 2)
                acc[e] = acc.get(e, 0) + 1
        else:
            e = outer + base
            acc[e] = acc.get(e, 0) + 1
    terms = tuple((c, e) for e, c in sorted(acc.items(), reverse=True))
    return Complexity(terms)
