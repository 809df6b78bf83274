import time

import numpy as np
import pytest

from stbc_lab.clifford import (
    GroupStructure,
    UnsupportedSizeError,
    build_partition,
    check_intergroup,
    classify_structure,
    delta_A,
    delta_B,
    generate,
    partition_terms,
)
from stbc_lab.stbc import x1_code


@pytest.mark.parametrize("a", [1, 2, 3, 4])
def test_generate_invariants(a):
    g = generate(a)
    assert len(g) == 2 * a + 1
    assert all(m.shape == (2**a, 2**a) for m in g.matrices)
    for name, v in g.invariant_violations().items():
        assert v < 1e-12, name
    for r in g.matrices:
        assert np.allclose(r @ r, -np.eye(2**a))


@pytest.mark.parametrize("a", [0, 5, 2.0])
def test_generate_unsupported(a):
    with pytest.raises(UnsupportedSizeError):
        generate(a)


def test_canonical_a1():
    g = generate(1)
    assert np.array_equal(g[1], np.diag([1j, -1j]))
    assert np.array_equal(g[2], np.array([[0, 1], [-1, 0]]))
    assert np.array_equal(g[3], np.array([[0, 1j], [1j, 0]]))


@pytest.mark.parametrize(
    "fn,a,m,expected",
    [
        (delta_A, 3, 1, 1),
        (delta_A, 4, 1, 0),
        (delta_A, 4, 2, 0),
        (delta_B, 3, 1, 1),
        (delta_B, 4, 2, 0),
        (delta_B, 5, 1, 0),
    ],
)
def test_delta_table(fn, a, m, expected):
    assert fn(a, m) == expected


def test_delta_values_are_bits_in_supported_range():
    for a in range(2, 5):
        for m in range(1, a - 1):
            assert delta_A(a, m) in (0, 1)
            assert delta_B(a, m) in (0, 1)
    # the 4n+3 row is not reduced mod 4: j**3 = -j, a harmless sign
    assert delta_A(7, 4) == 3


def test_partition_a2_literal():
    g = generate(2)
    G1, G2 = build_partition(g)
    want1 = [np.eye(4), g[1], g[2], g[3] @ g[4] @ g[5]]
    want2 = [g[3], g[4], g[5], g[1] @ g[2]]
    assert all(np.allclose(x, y) for x, y in zip(G1, want1))
    assert all(np.allclose(x, y) for x, y in zip(G2, want2))


def test_partition_a3_matches_table_sizes():
    t1, t2 = partition_terms(3)
    assert len(t1) == len(t2) == 8
    # leading products carry j, the m = 1 terms carry j**delta = j
    assert t1[4] == (1, (4, 5, 6, 7))
    assert all(p == 1 for p, _ in t1[4:] + t2[4:])


def test_table_iii_four_antenna_row_also_valid():
    # the printed row uses a relabelled generator set; it passes too
    g = generate(2)
    G1 = [np.eye(4), g[2], g[4], g[1] @ g[3] @ g[5]]
    G2 = [g[1], g[3], g[5], g[2] @ g[4]]
    assert check_intergroup(G1, G2).passed


@pytest.mark.parametrize("a", [2, 3, 4])
def test_partition_decouples_and_rate_one(a):
    G1, G2 = build_partition(generate(a))
    res = check_intergroup(G1, G2)
    assert res.passed and res.max_violation < 1e-10
    assert len(G1) + len(G2) == 2 * 2**a
    vecs = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in G1 + G2])
    assert np.linalg.matrix_rank(vecs) == 2 * 2**a


def test_partition_wrong_j_power_fails():
    g = generate(3)
    t1, t2 = partition_terms(3)
    p, idx = t1[5]
    t1[5] = (p + 1, idx)
    G1 = [(1j**p) * g.product(i) for p, i in t1]
    G2 = [(1j**p) * g.product(i) for p, i in t2]
    assert not check_intergroup(G1, G2).passed


def test_partition_a1_unsupported():
    with pytest.raises(UnsupportedSizeError):
        build_partition(generate(1))


def test_check_intergroup_trivial():
    r1 = generate(2)[1]
    assert check_intergroup([np.eye(4)], [r1]).passed
    res = check_intergroup([np.eye(4)], [np.eye(4)])
    assert not res.passed and res.max_violation == pytest.approx(2.0)


def test_check_intergroup_shape_error():
    with pytest.raises(ValueError):
        check_intergroup([np.eye(2)], [np.eye(3)])


def test_classify_x1():
    code = x1_code()
    rep = classify_structure(code.weights, code.structure)
    assert rep.passed
    assert rep.n == (4, 4) and rep.k == (3, 3)
    assert rep.n_inner == ((1, 1, 1), (1, 1, 1))


def test_classify_alamouti():
    # Alamouti: [[x1 + j x2, x3 + j x4], [-x3 + j x4, x1 - j x2]]
    A = [
        np.array([[1, 0], [0, 1]]),
        np.array([[1j, 0], [0, -1j]]),
        np.array([[0, 1], [-1, 0]]),
        np.array([[0, 1j], [1j, 0]]),
    ]
    structure = GroupStructure(groups=((0,), (1,), (2,), (3,)))
    assert classify_structure(A, structure).passed


def test_classify_x1_bad_inner_group():
    code = x1_code()
    structure = GroupStructure(
        groups=((0, 1, 2, 3), (4, 5, 6, 7)),
        inner_groups=(((0,), (1,), (2,)), ((4, 3),) if False else ((5,), (6,), (4,))),
    )
    assert classify_structure(code.weights, structure).passed
    # x4 and x5 (0-based 3 and 4) placed in one inner group of the first group
    bad = GroupStructure(groups=((0, 1, 2, 3, 4), (5, 6, 7)), inner_groups=(((0,), (3, 4)), ()))
    rep = classify_structure(code.weights, bad)
    assert not rep.passed
    assert rep.failures


def test_group_structure_validation():
    with pytest.raises(ValueError):
        GroupStructure(groups=((0, 1), (1, 2)))
    with pytest.raises(ValueError):
        GroupStructure(groups=((0, 1),), inner_groups=(((0,), (1,)),))


def test_generation_is_fast():
    t = time.perf_counter()
    for a in range(1, 5):
        generate(a).invariant_violations()
    assert time.perf_counter() - t < 1.0
