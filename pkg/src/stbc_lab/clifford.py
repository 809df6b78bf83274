"""Anticommuting generator families and multi-group decodability checks.

The square orthogonal design for ``2**a`` transmit antennas is spanned by
the identity and ``2a + 1`` matrices ``R_1 .. R_{2a+1}`` that are unitary,
anti-Hermitian and pairwise anticommuting.  From these we build the two
weight-matrix groups of a rate-1 fast-group-decodable code and check the
quadratic-form conditions that make the ML metric split into groups.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .numkernel import ShapeError, hermitian

__all__ = [
    "GeneratorSet",
    "GroupStructure",
    "CheckResult",
    "StructureReport",
    "generate",
    "delta_A",
    "delta_B",
    "partition_terms",
    "build_partition",
    "check_intergroup",
    "classify_structure",
    "UnsupportedSizeError",
]

MAX_A = 4
ALGEBRA_TOL = 1e-12
STRUCTURE_TOL = 1e-10

_SZ = np.diag([1.0, -1.0]).astype(complex)
_JX = np.array([[0, 1j], [1j, 0]])
_JY = np.array([[0, 1], [-1, 0]], dtype=complex)
_JZ = np.diag([1j, -1j])


class UnsupportedSizeError(ValueError):
    """Raised for antenna exponents outside the supported range."""


class CheckResult(NamedTuple):
    passed: bool
    max_violation: float


@dataclass(frozen=True)
class GeneratorSet:
    """``2a + 1`` anticommuting anti-Hermitian unitaries of size ``2**a``."""

    a: int
    matrices: tuple

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, i):
        """1-based access, so ``gens[1]`` is ``R_1``."""
        if not 1 <= i <= len(self.matrices):
            raise IndexError(i)
        return self.matrices[i - 1]

    @property
    def size(self):
        return 2**self.a

    def product(self, indices):
        """Left-to-right product ``R_{i1} R_{i2} ...`` (identity if empty)."""
        out = np.eye(self.size, dtype=complex)
        for i in indices:
            out = out @ self[i]
        return out

    def invariant_violations(self):
        """Largest deviation from unitarity, anti-Hermitianity and anticommutation."""
        eye = np.eye(self.size)
        unit = max(np.abs(hermitian(r) @ r - eye).max() for r in self.matrices)
        anti = max(np.abs(hermitian(r) + r).max() for r in self.matrices)
        comm = 0.0
        for r1, r2 in combinations(self.matrices, 2):
            comm = max(comm, np.abs(r1 @ r2 + r2 @ r1).max())
        return {"unitary": unit, "anti_hermitian": anti, "anticommute": comm}

    def is_valid(self, tol=ALGEBRA_TOL):
        return all(v < tol for v in self.invariant_violations().values())


def generate(a):
    """Return the generator family for ``2**a`` antennas.

    Built by the tensor-product recursion: every generator for ``2**(a-1)``
    antennas is tensored with ``diag(1, -1)``, and ``I (x) jX`` and
    ``I (x) jY`` are appended.
    """
    if not isinstance(a, (int, np.integer)) or not 1 <= a <= MAX_A:
        raise UnsupportedSizeError(f"a must be an integer in [1, {MAX_A}], got {a!r}")
    mats = [_JZ, _JY, _JX]
    for level in range(2, a + 1):
        eye = np.eye(2 ** (level - 1))
        mats = [np.kron(m, _SZ) for m in mats] + [np.kron(eye, _JX), np.kron(eye, _JY)]
    return GeneratorSet(int(a), tuple(np.ascontiguousarray(m) for m in mats))


def delta_A(a, m):
    """j-power exponent for the ``m``-fold products in the first group."""
    r, mm = a % 4, m % 4
    if r == 0:
        val = (mm - 1) * (mm - 2)
    elif r == 1:
        val = (mm * (mm - 1)) % 4
    elif r == 2:
        val = (mm * (mm - 3)) % 4
    else:
        val = (mm - 2) * (mm - 3)
    return val // 2


def delta_B(a, m):
    """j-power exponent for the ``m``-fold products in the second group."""
    r, mm = a % 4, m % 4
    val = {0: 2 - mm, 1: mm - 1, 2: mm, 3: 3 - mm}[r]
    return val // 2


def partition_terms(a):
    """Symbolic description of the two groups for ``2**a`` antennas.

    Each term is ``(jpow, indices)`` and stands for
    ``j**jpow * R_{indices[0]} R_{indices[1]} ...``; ``indices == ()`` is
    the identity.
    """
    if not isinstance(a, (int, np.integer)) or not 2 <= a <= MAX_A:
        raise UnsupportedSizeError(f"partition needs a in [2, {MAX_A}], got {a!r}")
    r = a % 4
    low = tuple(range(1, a + 1))
    high = tuple(range(a + 1, 2 * a + 2))

    g1 = [(0, ())] + [(0, (i,)) for i in low]
    g2 = [(0, (i,)) for i in high]

    # leading single products; rows 4n+1 and 4n+3 have none for the second group
    g1.append((1 if r in (0, 3) else 0, high))
    if r in (0, 2):
        g2.append((1 if r == 0 else 0, low))

    for m in range(1, a - 1):
        for ks in combinations(low, m):
            g1.append((delta_A(a, m), high + ks))
    for m in range(2 if r in (0, 2) else 1, a - 1, 2):
        for ks in combinations(high, m):
            g2.append((delta_B(a, m), low + ks))
    return g1, g2


def build_partition(gens):
    """Weight matrices of the two groups for the generator family ``gens``."""
    t1, t2 = partition_terms(gens.a)

    def realise(terms):
        return [(1j**p) * gens.product(idx) for p, idx in terms]

    return realise(t1), realise(t2)


def _pair_violation(ak, al):
    return np.abs(hermitian(ak) @ al + hermitian(al) @ ak).max()


def check_intergroup(setA, setB, tol=STRUCTURE_TOL):
    """Check ``A_k^H A_l + A_l^H A_k = 0`` for every ``A_k`` in setA, ``A_l`` in setB."""
    mats = [np.asarray(m) for m in list(setA) + list(setB)]
    if mats:
        shape = mats[0].shape
        if any(m.ndim != 2 or m.shape != shape or shape[0] != shape[1] for m in mats):
            raise ShapeError("check_intergroup needs square matrices of one size")
    worst = 0.0
    for ak in setA:
        for al in setB:
            worst = max(worst, _pair_violation(np.asarray(ak), np.asarray(al)))
    return CheckResult(bool(worst < tol), float(worst))


@dataclass(frozen=True)
class GroupStructure:
    """Decodability structure of a linear dispersion code.

    Symbol indices are 0-based.  ``outer`` lists symbols that a fast
    decoder enumerates exhaustively before the grouped part is decoded
    conditionally; ``groups`` are the mutually decoupled groups of the
    remaining symbols and ``inner_groups[i]`` the inner groups inside
    ``groups[i]`` (empty if the group has no inner structure).
    """

    groups: tuple
    inner_groups: tuple = ()
    outer: tuple = ()

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        inner = tuple(tuple(tuple(int(i) for i in s) for s in gi) for gi in self.inner_groups)
        if not inner:
            inner = tuple(() for _ in groups)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "inner_groups", inner)
        object.__setattr__(self, "outer", tuple(int(i) for i in self.outer))
        self.validate()

    def validate(self):
        if len(self.inner_groups) != len(self.groups):
            raise ValueError("one inner-group list is needed per group")
        seen = list(self.outer)
        for g in self.groups:
            seen.extend(g)
        if len(seen) != len(set(seen)) or sorted(seen) != list(range(len(seen))):
            raise ValueError("outer symbols and groups must partition 0..2K-1")
        for g, inner in zip(self.groups, self.inner_groups):
            flat = [i for s in inner for i in s]
            if len(flat) != len(set(flat)) or not set(flat) <= set(g):
                raise ValueError("inner groups must be disjoint subsets of their group")
            if inner and len(flat) >= len(g):
                raise ValueError("inner groups must leave at least one conditioning symbol")

    @property
    def twoK(self):
        return len(self.outer) + sum(len(g) for g in self.groups)

    @property
    def n(self):
        return tuple(len(g) for g in self.groups)

    @property
    def k(self):
        return tuple(sum(len(s) for s in inner) for inner in self.inner_groups)

    @property
    def n_inner(self):
        return tuple(tuple(len(s) for s in inner) for inner in self.inner_groups)


@dataclass
class StructureReport:
    passed: bool
    intergroup: dict = field(default_factory=dict)
    inner: dict = field(default_factory=dict)
    n: tuple = ()
    k: tuple = ()
    n_inner: tuple = ()

    @property
    def failures(self):
        bad = [("group", key) for key, res in self.intergroup.items() if not res.passed]
        bad += [("inner", key) for key, res in self.inner.items() if not res.passed]
        return bad


def classify_structure(code_weights, structure, tol=STRUCTURE_TOL):
    """Check a weight set against a declared (fast-)group structure.

    Inter-group pairs are keyed ``(i, j)`` by group index; inner pairs are
    keyed ``(i, m, n)``.  The report also carries the exponents needed by
    :func:`stbc_lab.stbc.worst_case_complexity`.
    """
    w = [np.asarray(m) for m in code_weights]
    inter = {}
    for i, j in combinations(range(len(structure.groups)), 2):
        inter[(i, j)] = check_intergroup(
            [w[x] for x in structure.groups[i]], [w[x] for x in structure.groups[j]], tol
        )
    inner = {}
    for i, groups in enumerate(structure.inner_groups):
        for m, n in combinations(range(len(groups)), 2):
            inner[(i, m, n)] = check_intergroup(
                [w[x] for x in groups[m]], [w[x] for x in groups[n]], tol
            )
    passed = all(r.passed for r in inter.values()) and all(r.passed for r in inner.values())
    return StructureReport(
        passed=passed,
        intergroup=inter,
        inner=inner,
        n=structure.n,
        k=structure.k,
        n_inner=structure.n_inner,
    )
