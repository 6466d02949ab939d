from __future__ import annotations

import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from braidsector.braid import BraidWord, beta, compose, invert, power
from braidsector.fusion import monodromy, solve_twists
from braidsector.models import MODEL_NAMES, load_model
from braidsector.state_space import (
    Leaf,
    Node,
    SpectrumError,
    basis_change,
    basis_change_direct,
    braid_generator_map,
    braid_map,
    build_basis,
    composite_exchange_report,
    enumerate_shapes,
    f_move,
    left_comb,
    mirror_shape,
    pair_shape,
    realizing_flips,
    right_comb,
    shape_str,
    superselection_spectrum,
    uniqueness_search,
    verify_composite_exchange,
    verify_pure_square,
    vertex_product,
)

TOL = 1e-9


def W(text: str, n: int) -> BraidWord:
    return BraidWord.parse(text, n)


def catalan(m: int) -> int:
    return math.comb(2 * m, m) // (m + 1)


def contraction_dims(sys, shape, labels) -> dict[str, int]:
    """Per-charge dimension by contracting fusion coefficients along the tree."""
    if isinstance(shape, int):
        return {labels[shape]: 1}
    left = contraction_dims(sys, shape[0], labels)
    right = contraction_dims(sys, shape[1], labels)
    out: dict[str, int] = {}
    for (a, da), (b, db) in itertools.product(left.items(), right.items()):
        for c in sys.labels:
            if sys.n(a, b, c):
                out[c] = out.get(c, 0) + da * db * sys.n(a, b, c)
    return out


# -- shapes ------------------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 9))
def test_shape_counts_are_catalan(n):
    shapes = enumerate_shapes(n)
    assert len(shapes) == catalan(n - 1)
    assert len(set(shapes)) == len(shapes)


def test_shape_examples():
    assert len(enumerate_shapes(4)) == 5
    assert enumerate_shapes(2) == [(0, 1)]
    assert len(enumerate_shapes(5)) == 14
    with pytest.raises(ValueError):
        enumerate_shapes(0)
    assert left_comb(3) == ((0, 1), 2)
    assert right_comb(3) == (0, (1, 2))
    assert mirror_shape(left_comb(4)) == right_comb(4)
    assert pair_shape(4, 2) == ((0, (1, 2)), 3)
    assert shape_str(left_comb(3)) == "((0,1),2)"


# -- bases -------------------------------------------------------------------


def test_fibonacci_basis_dimensions(fib):
    assert len(build_basis(fib, left_comb(3), ["tau"] * 3, "0")) == 1
    assert len(build_basis(fib, left_comb(3), ["tau"] * 3, "tau")) == 2


def test_single_leaf_basis(models):
    for sys in models.values():
        for q in sys.labels:
            b = build_basis(sys, 0, [q])
            assert b.vectors == (Leaf(0, q),)
            assert b.vectors[0].charge == q


def test_basis_rejects_bad_input(fib):
    with pytest.raises(ValueError):
        build_basis(fib, left_comb(3), ["tau", "x", "tau"])
    with pytest.raises(ValueError):
        build_basis(fib, left_comb(2), ["tau"] * 3)


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_dimensions_match_contraction_on_every_shape(models, name):
    sys = models[name]
    for n in range(1, 5):
        for labels in itertools.product(sys.labels, repeat=n):
            ref = contraction_dims(sys, left_comb(n), labels)
            for shape in enumerate_shapes(n):
                b = build_basis(sys, shape, labels)
                assert contraction_dims(sys, shape, labels) == ref
                got = {q: len(b.vectors[sl]) for q, sl in b.charge_ranges.items()}
                assert got == ref
                assert sum(got.values()) == len(b)
                assert len(set(b.vectors)) == len(b)


def test_basis_order_is_root_first(ising):
    b = build_basis(ising, left_comb(4), ["sigma"] * 4)
    roots = [ising.labels.index(t.charge) for t in b.vectors]
    assert roots == sorted(roots)


# -- F-moves and basis changes -----------------------------------------------


def test_f_move_on_fibonacci_matches_f_block(fib):
    src = build_basis(fib, left_comb(3), ["tau"] * 3, "tau")
    M = f_move(fib, src, (), 1)
    assert M.target.shape == right_comb(3)
    blk = fib.fblock("tau", "tau", "tau", "tau")
    for j, t in enumerate(src.vectors):
        for i, u in enumerate(M.target.vectors):
            row = (t.left.charge, t.left.mult, t.mult)
            col = (u.right.charge, u.right.mult, u.mult)
            assert abs(M.matrix[i, j] - blk.entry(row, col)) < 1e-15


def test_f_move_round_trip(models):
    for sys in models.values():
        for labels in itertools.product(sys.labels, repeat=3):
            b = build_basis(sys, left_comb(3), labels)
            there = f_move(sys, b, (), 1)
            back = f_move(sys, there.target, (), -1)
            assert np.allclose((back @ there).matrix, np.eye(len(b)), atol=TOL)
            assert there.unitarity_residual() < TOL


def test_f_move_with_vacuum_is_identity(fib):
    for labels in (["0", "tau", "tau"], ["tau", "0", "tau"], ["tau", "tau", "0"]):
        b = build_basis(fib, left_comb(3), labels)
        M = f_move(fib, b, (), 1)
        assert np.allclose(np.abs(M.matrix), np.eye(len(b)), atol=1e-15)
        assert np.allclose(M.matrix, np.eye(len(b)), atol=1e-15)


def test_f_move_rejects_bad_vertex(fib):
    b = build_basis(fib, right_comb(3), ["tau"] * 3)
    with pytest.raises(ValueError):
        f_move(fib, b, (), 1)
    with pytest.raises(ValueError):
        f_move(fib, b, (0,), -1)


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_basis_change_is_path_independent(models, name):
    sys = models[name]
    n = 4
    shapes = enumerate_shapes(n)
    for labels in itertools.product(sys.labels, repeat=n):
        for s1, s2 in itertools.permutations(shapes, 2):
            a, b = build_basis(sys, s1, labels), build_basis(sys, s2, labels)
            comb = basis_change(sys, a, b)
            direct = basis_change_direct(sys, a, b)
            assert np.allclose(comb.matrix, direct.matrix, atol=TOL)


def test_basis_change_identity_and_round_trip(fib):
    labels = ["tau"] * 4
    shapes = enumerate_shapes(4)
    for s1, s2 in itertools.product(shapes, repeat=2):
        a, b = build_basis(fib, s1, labels), build_basis(fib, s2, labels)
        there = basis_change(fib, a, b)
        back = basis_change(fib, b, a)
        assert np.allclose((back @ there).matrix, np.eye(len(a)), atol=TOL)
    a = build_basis(fib, shapes[0], labels)
    assert np.array_equal(basis_change(fib, a, a).matrix, np.eye(len(a)))
    with pytest.raises(ValueError):
        basis_change(fib, a, build_basis(fib, shapes[0], ["tau", "tau", "0", "tau"]))


# -- braid generators and words ----------------------------------------------


def test_two_leaf_generator_is_diagonal_r(models):
    for sys in models.values():
        for a, b in itertools.product(sys.labels, repeat=2):
            basis = build_basis(sys, (0, 1), [a, b])
            M = braid_generator_map(sys, basis, 1, 1)
            want = np.diag([sys.r_phases(a, b, t.charge)[t.mult] for t in basis.vectors])
            assert np.allclose(M.matrix, want, atol=1e-15)


def test_generator_then_inverse_is_identity(models):
    for sys in models.values():
        for labels in itertools.product(sys.labels, repeat=3):
            b = build_basis(sys, left_comb(3), labels)
            for i in (1, 2):
                up = braid_generator_map(sys, b, i, 1)
                down = braid_generator_map(sys, up.target, i, -1)
                assert np.allclose((down @ up).matrix, np.eye(len(b)), atol=TOL)


def test_braiding_with_vacuum_is_trivial(models):
    for sys in models.values():
        for q in sys.labels:
            for labels, i in (([q, "0", q], 1), (["0", q, q], 1), ([q, q, "0"], 2)):
                b = build_basis(sys, left_comb(3), labels)
                M = braid_generator_map(sys, b, i, 1)
                assert np.allclose(M.matrix, np.eye(len(b)), atol=TOL)


def test_generator_index_checked(fib):
    b = build_basis(fib, left_comb(3), ["tau"] * 3)
    with pytest.raises(ValueError):
        braid_generator_map(fib, b, 3, 1)
    with pytest.raises(ValueError):
        braid_generator_map(fib, b, 1, 2)


def test_identity_word(fib):
    b = build_basis(fib, left_comb(3), ["tau"] * 3)
    assert np.array_equal(braid_map(fib, b, BraidWord(3)).matrix, np.eye(3))


def test_braid_relation_on_fibonacci(fib):
    b = build_basis(fib, left_comb(3), ["tau"] * 3)
    m1 = braid_map(fib, b, W("s1 s2 s1", 3))
    m2 = braid_map(fib, b, W("s2 s1 s2", 3))
    assert np.allclose(m1.matrix, m2.matrix, atol=TOL)


@st.composite
def braid_cases(draw, n_max=4, max_size=6):
    name = draw(st.sampled_from(MODEL_NAMES))
    sys = load_model(name)
    n = draw(st.integers(2, n_max))
    labels = draw(st.lists(st.sampled_from(sys.labels), min_size=n, max_size=n))
    letters = st.lists(st.tuples(st.integers(1, n - 1), st.sampled_from((1, -1))), max_size=max_size)
    a = BraidWord(n, tuple(draw(letters)))
    b = BraidWord(n, tuple(draw(letters)))
    shape = draw(st.sampled_from(enumerate_shapes(n)))
    return sys, build_basis(sys, shape, labels), a, b


@settings(max_examples=60, deadline=None)
@given(braid_cases())
def test_functor_laws(case):
    sys, basis, a, b = case
    mb = braid_map(sys, basis, b)
    ma = braid_map(sys, mb.target, a)
    mab = braid_map(sys, basis, compose(a, b))
    assert np.allclose(mab.matrix, (ma @ mb).matrix, atol=TOL)
    inv = braid_map(sys, mb.target, invert(b))
    assert np.allclose(inv.matrix, mb.matrix.conj().T, atol=TOL)
    assert mab.unitarity_residual() < TOL
    assert mab.cross_block_residual() < TOL


def _braid_relation_rewrites(w: BraidWord):
    """Words equal to ``w`` by one braid relation or one far commutation."""
    L = list(w.letters)
    for j in range(len(L) - 2):
        (i, s), (k, t), (i2, s2) = L[j : j + 3]
        if i == i2 and s == t == s2 and abs(i - k) == 1:
            yield BraidWord(w.n, tuple(L[:j] + [(k, s), (i, s), (k, s)] + L[j + 3 :]))
    for j in range(len(L) - 1):
        if abs(L[j][0] - L[j + 1][0]) >= 2:
            M = L[:]
            M[j], M[j + 1] = M[j + 1], M[j]
            yield BraidWord(w.n, tuple(M))


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_word_representative_independence(models, name):
    sys = models[name]
    words = [W("s1 s2 s1 s3 s2 s1", 4), W("s1 s3 s2 s1' s3", 4), W("s2 s3 s2 s1", 4)]
    for labels in itertools.product(sys.labels, repeat=4):
        b = build_basis(sys, left_comb(4), labels)
        for w in words:
            ref = braid_map(sys, b, w).matrix
            for v in _braid_relation_rewrites(w):
                assert np.allclose(braid_map(sys, b, v).matrix, ref, atol=TOL)


def test_block_map_json_dump(fib):
    b = build_basis(fib, left_comb(3), ["tau"] * 3)
    M = braid_map(fib, b, W("s1 s2", 3))
    d = json.loads(M.to_json())
    assert set(d) == {"source", "target", "entries"}
    assert d["source"]["shape"] == "((0,1),2)"
    assert len(d["entries"]) == len(b) ** 2
    back = np.array([complex(re, im) for re, im in d["entries"]]).reshape(len(b), len(b))
    assert np.array_equal(back, M.matrix)


# -- superselection phases ---------------------------------------------------


def test_two_leaf_spectrum_is_r(models):
    for sys in models.values():
        for a, b in itertools.product(sys.labels, repeat=2):
            ph = superselection_spectrum(sys, build_basis(sys, (0, 1), [a, b]))
            for q, z in ph.items():
                assert abs(z - sys.r_phases(a, b, q)[0]) < 1e-15


def test_fibonacci_vertex_products_agree(fib):
    r = fib.r_phases
    p1 = r("tau", "tau", "0")[0] * r("0", "tau", "tau")[0]
    p2 = r("tau", "tau", "tau")[0] * r("tau", "tau", "tau")[0]
    assert abs(p1 - p2) < TOL
    b = build_basis(fib, left_comb(3), ["tau"] * 3, "tau")
    ph = superselection_spectrum(fib, b)
    for t in b.vectors:
        assert abs(vertex_product(fib, t) - ph["tau"]) < TOL


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_spectrum_independent_of_ordering_and_shape(models, name):
    sys = models[name]
    for n in range(1, 5):
        for multiset in itertools.combinations_with_replacement(sys.labels, n):
            ref = None
            for labels in set(itertools.permutations(multiset)):
                for shape in enumerate_shapes(n):
                    ph = superselection_spectrum(sys, build_basis(sys, shape, labels))
                    if ref is None:
                        ref = ph
                    assert ph.keys() == ref.keys()
                    assert all(abs(ph[q] - ref[q]) < TOL for q in ph)


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_spectrum_squares_to_pure_braid_scalar(models, name):
    sys = models[name]
    th = solve_twists(sys)
    for n in range(1, 4):
        for labels in itertools.product(sys.labels, repeat=n):
            b = build_basis(sys, left_comb(n), labels)
            ph = superselection_spectrum(sys, b)
            prod = np.prod([th[q] for q in labels])
            for q, z in ph.items():
                assert abs(z**2 - th[q] / prod) < TOL
            assert verify_pure_square(sys, b, th)


def test_incoherent_data_is_rejected(ising):
    R = dict(ising.R)
    R[("sigma", "sigma", "psi")] = -R[("sigma", "sigma", "psi")]
    bent = ising.replace(R=R)
    with pytest.raises(SpectrumError):
        superselection_spectrum(bent, build_basis(bent, left_comb(3), ["sigma"] * 3))


def test_pure_square_examples(toric, fib, models):
    b = build_basis(toric, (0, 1), ["e", "m"])
    M = braid_map(toric, b, power(beta(2), 2))
    assert np.allclose(M.matrix, [[-1]], atol=TOL)
    assert verify_pure_square(toric, b)
    for sys in models.values():
        vac = build_basis(sys, left_comb(3), ["0"] * 3)
        assert np.allclose(braid_map(sys, vac, power(beta(3), 2)).matrix, np.eye(1))
        assert verify_pure_square(sys, vac)
    th = solve_twists(fib)
    b = build_basis(fib, left_comb(3), ["tau"] * 3, "tau")
    M = braid_map(fib, b, power(beta(3), 2))
    assert np.allclose(M.matrix, th["tau"] ** -2 * np.eye(2), atol=TOL)


def test_pure_square_detects_wrong_twists(fib):
    from braidsector.fusion import TwistAssignment

    wrong = TwistAssignment({"0": 1, "tau": -solve_twists(fib)["tau"]})
    assert not verify_pure_square(fib, build_basis(fib, left_comb(2), ["tau"] * 2), wrong)


def test_monodromy_pairings_agree(models):
    for sys in models.values():
        for a, b, c, d in itertools.product(sys.labels, repeat=4):
            vals = []
            for x, y, z in ((a, b, c), (b, c, a), (a, c, b)):
                for e in sys.labels:
                    if sys.n(x, y, e) and sys.n(e, z, d):
                        vals.append(monodromy(sys, x, y, e) * monodromy(sys, e, z, d))
            assert all(abs(v - vals[0]) < TOL for v in vals)


# -- composite exchange ------------------------------------------------------


def test_single_exchange_is_r(models):
    for sys in models.values():
        for a, b in itertools.product(sys.labels, repeat=2):
            rep = composite_exchange_report(sys, [a, b], 1, 1)
            assert rep.passed
            for (x, y, q), z in rep.single.items():
                assert abs(z - sys.r_phases(a, b, q)[0]) < TOL


def test_fibonacci_two_one_exchange(fib):
    rep = composite_exchange_report(fib, ["tau"] * 3, 2, 1)
    assert rep.passed
    r = fib.r_phases
    for (x, y, q), z in rep.single.items():
        assert abs(z - r(x, y, q)[0]) < TOL
        assert abs(rep.double[(x, y, q)] - z**2) < TOL
        assert abs(rep.inverse[(x, y, q)] - np.conj(z)) < TOL


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_composite_exchange_up_to_three(models, name):
    sys = models[name]
    for n in (2, 3):
        for labels in itertools.product(sys.labels, repeat=n):
            for k in range(1, n):
                assert verify_composite_exchange(sys, labels, k, n - k)


def test_composite_exchange_arguments(fib):
    with pytest.raises(ValueError):
        verify_composite_exchange(fib, ["tau"] * 3, 2, 2)
    with pytest.raises(ValueError):
        verify_composite_exchange(fib, ["tau"] * 3, 0, 3)


# -- uniqueness --------------------------------------------------------------


def test_flip_realizability():
    assert realizing_flips(left_comb(3), (2, 1, 0)) is not None
    assert realizing_flips(right_comb(3), (2, 1, 0)) is not None
    assert realizing_flips(left_comb(3), (1, 0, 2)) is not None
    assert realizing_flips(right_comb(3), (1, 0, 2)) is None


def test_uniqueness_two_strands(fib, ising):
    found = uniqueness_search([fib, ising], 2, 2)
    assert {str(w) for w in found} == {"s1", "s1'"}


def test_uniqueness_below_beta_length(fib, ising):
    assert uniqueness_search([fib, ising], 3, 2) == set()


def test_uniqueness_cap(fib):
    with pytest.raises(OverflowError):
        uniqueness_search(fib, 4, 8, word_cap=1000)
