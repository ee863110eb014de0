import math

import numpy as np
import pytest

from bundlecalc import bundle as bd
from bundlecalc import constructions as cs
from bundlecalc import norms
from bundlecalc.errors import AbsoluteContinuityError, DimensionMismatchError, TensorUndefinedError
from bundlecalc.mspace import MeasureSpace
from bundlecalc.norms import PolyGauge, Quadratic, WeightedLp, euclidean

from oracles import compression_by_loop, sphere_sup, tensor_gram_by_index, tensor_vector_by_index

L1 = WeightedLp(1, [1, 1])


def test_is_hilbert_examples():
    sp = MeasureSpace([1, 1])
    assert cs.is_hilbert_bundle(bd.Bundle(sp, [2, 1], [Quadratic([[2, 1], [1, 1]]), euclidean(1)]))
    assert not cs.is_hilbert_bundle(bd.Bundle(sp, [2, 1], [L1, euclidean(1)]))
    null = MeasureSpace([1, 0])
    assert cs.is_hilbert_bundle(bd.Bundle(null, [1, 2], [euclidean(1), L1]))


def test_dual_bundle_examples():
    sp = MeasureSpace([1, 1, 0])
    b = bd.Bundle(sp, [2, 2, 2], [euclidean(2), L1, Quadratic([[1, 0], [0, 0]])])
    db = cs.dual_bundle(b)
    np.testing.assert_allclose(db.norms[0].G, np.eye(2))
    assert norms.evaluate(db.norms[1], [3, -4]) == 4
    assert norms.evaluate(db.norms[2], [3, -4]) == 0  # degenerate fiber on a null atom
    d = cs.dual_bundle(bd.Bundle(MeasureSpace([1]), [2], [Quadratic(np.diag([4.0, 1.0]))]))
    np.testing.assert_allclose(d.norms[0].G, np.diag([0.25, 1.0]))
    sup = sphere_sup(lambda v: abs(np.array([1.0, 1.0]) @ v) / norms.evaluate(
        Quadratic(np.diag([4.0, 1.0])), v), n_angles=20000)
    assert norms.evaluate(d.norms[0], [1, 1]) == pytest.approx(sup, rel=1e-7)


def test_pairing_examples():
    sp = MeasureSpace([1, 1])
    b = bd.Bundle(sp, [2, 2], [L1, euclidean(2)])
    db = cs.dual_bundle(b)
    s = bd.section(b, [[3, -4], [3, 4]])
    np.testing.assert_array_equal(cs.dual_pairing(b, bd.zero_section(db), s), [0, 0])
    s_star = bd.section(db, [[1, 1], [0.6, 0.8]])
    pairing = cs.dual_pairing(b, s_star, s)
    assert pairing[0] == -1
    assert abs(pairing[0]) <= bd.section_norm(db, s_star)[0] * bd.section_norm(b, s)[0]
    # equality case on the Euclidean fiber
    assert pairing[1] == pytest.approx(bd.section_norm(db, s_star)[1] * bd.section_norm(b, s)[1])


def test_functional_from_basis_images():
    sp = MeasureSpace([1, 1, 0])
    b = bd.Bundle(sp, [2, 1, 2], [L1, euclidean(1), euclidean(2)])
    zero = cs.functional_from_basis_images(b, {(1, 0): [0, 0, 0], (2, 0): [0, 0, 0],
                                               (2, 1): [0, 0, 0]})
    assert all(not np.any(v) for v in zero.vectors)
    s_star = bd.section(cs.dual_bundle(b), [[1, -2], [3], [4, 5]])
    rebuilt = cs.functional_from_basis_images(b, cs.basis_images(b, s_star))
    for u, v in zip(rebuilt.vectors, s_star.vectors):
        np.testing.assert_array_equal(u, v)
    with pytest.raises(DimensionMismatchError):
        cs.functional_from_basis_images(b, {(1, 0): [0, 0, 0]})


def test_functional_from_images_on_line_bundle():
    sp = MeasureSpace([1, 2])
    b = bd.Bundle(sp, [1, 1], [euclidean(1), WeightedLp(1, [3])])
    out = cs.functional_from_basis_images(b, {(1, 0): [5, -7]})
    assert [v.tolist() for v in out.vectors] == [[5], [-7]]


def test_tensor_gram_example_against_index_formula():
    sp = MeasureSpace([1])
    b1 = bd.Bundle(sp, [2], [Quadratic(np.diag([1.0, 4.0]))])
    b2 = bd.Bundle(sp, [3], [euclidean(3)])
    tb = cs.tensor_bundle(b1, b2)
    assert tb.dims == (6,)
    np.testing.assert_array_equal(tb.norms[0].G, np.diag([1, 1, 1, 4, 4, 4]))
    np.testing.assert_array_equal(tb.norms[0].G, tensor_gram_by_index(np.diag([1.0, 4.0]), np.eye(3)))


def test_tensor_random_grams_against_index_formula():
    rng = np.random.default_rng(4)
    for _ in range(30):
        n, m = rng.integers(1, 4, size=2)
        A, B = rng.standard_normal((n, n)), rng.standard_normal((m, m))
        G1, G2 = A @ A.T, B @ B.T
        sp = MeasureSpace([1])
        tb = cs.tensor_bundle(bd.Bundle(sp, [n], [Quadratic(G1)]), bd.Bundle(sp, [m], [Quadratic(G2)]))
        np.testing.assert_allclose(tb.norms[0].G, tensor_gram_by_index(G1, G2), atol=1e-12)
        v, w = rng.standard_normal(n), rng.standard_normal(m)
        np.testing.assert_allclose(np.kron(v, w), tensor_vector_by_index(v, w), atol=0)


def test_tensor_unit_and_index():
    sp = MeasureSpace([1])
    G2 = np.array([[2.0, 1.0], [1.0, 3.0]])
    tb = cs.tensor_bundle(bd.Bundle(sp, [1], [euclidean(1)]), bd.Bundle(sp, [2], [Quadratic(G2)]))
    np.testing.assert_array_equal(tb.norms[0].G, G2)
    assert cs.tensor_index(4, 3) == (2, 1)
    assert [cs.tensor_index(k, 3) for k in range(1, 7)] == [
        (1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)]


def test_tensor_elementary_examples():
    sp = MeasureSpace([1])
    b1, b2 = bd.Bundle(sp, [2], [euclidean(2)]), bd.Bundle(sp, [3], [euclidean(3)])
    tb = cs.tensor_bundle(b1, b2)
    c = cs.tensor_elementary(b1, b2, bd.section(b1, [[1, 0]]), bd.section(b2, [[0, 1, 0]]))
    assert c.vectors[0].tolist() == [0, 1, 0, 0, 0, 0]
    assert bd.section_norm(tb, c)[0] == 1
    z = cs.tensor_elementary(b1, b2, bd.zero_section(b1), bd.section(b2, [[1, 2, 3]]))
    assert not np.any(z.vectors[0])
    a1, a2 = bd.Bundle(sp, [1], [euclidean(1)]), bd.Bundle(sp, [1], [euclidean(1)])
    c = cs.tensor_elementary(a1, a2, bd.section(a1, [[2]]), bd.section(a2, [[3]]))
    assert c.vectors[0].tolist() == [6]
    assert bd.section_norm(cs.tensor_bundle(a1, a2), c)[0] == 6


def test_tensor_refuses_non_hilbert_fibers():
    sp = MeasureSpace([1, 0])
    b_bad = bd.Bundle(sp, [2, 2], [L1, euclidean(2)])
    with pytest.raises(TensorUndefinedError):
        cs.tensor_bundle(b_bad, b_bad)
    # a non-Hilbert fiber on a null atom is tolerated
    b_ok = bd.Bundle(sp, [2, 2], [euclidean(2), L1])
    tb = cs.tensor_bundle(b_ok, b_ok)
    assert tb.dims == (4, 4)


def test_compression_examples():
    X = MeasureSpace([1, 1, 1, 1])
    Y = MeasureSpace([2, 3])
    f = cs.AtomMap(X, Y, [0, 0, 1, 1])
    assert cs.compression_constant(f) == 1.0
    assert cs.compression_constant(f) == compression_by_loop(X.weights, Y.weights, f.image)
    g = cs.AtomMap(MeasureSpace([1, 2]), MeasureSpace([1, 3, 5]), [2, 1])
    assert cs.compression_constant(g) <= 1
    h = cs.AtomMap(MeasureSpace([1, 1]), MeasureSpace([1, 0]), [0, 1])
    assert cs.compression_constant(h) == "unbounded"
    assert cs.compression_constant(cs.AtomMap(MeasureSpace([1, 0]), MeasureSpace([1, 0]), [0, 1])) == 1.0


def test_atom_map_validation():
    with pytest.raises(DimensionMismatchError):
        cs.AtomMap(MeasureSpace([1, 1]), MeasureSpace([1]), [0])
    with pytest.raises(DimensionMismatchError):
        cs.AtomMap(MeasureSpace([1]), MeasureSpace([1]), [3])


def test_pullback_examples():
    Y = MeasureSpace([2, 3])
    bY = bd.Bundle(Y, [2, 1], [L1, WeightedLp(3, [2])])
    ident = cs.AtomMap(Y, Y, [0, 1])
    pb = cs.pullback_bundle(ident, bY)
    assert pb.dims == bY.dims and pb.norms == bY.norms
    s = bd.section(bY, [[1, -2], [4]])
    assert [v.tolist() for v in cs.pullback_section(ident, bY, s).vectors] == [[1, -2], [4]]
    const = cs.AtomMap(MeasureSpace([1, 1, 1]), Y, [1, 1, 1])
    pc = cs.pullback_bundle(const, bY)
    assert pc.dims == (1, 1, 1) and all(n is bY.norms[1] for n in pc.norms)
    assert [v.tolist() for v in cs.pullback_section(const, bY, s).vectors] == [[4], [4], [4]]
    f = cs.AtomMap(MeasureSpace([1, 1, 1, 1]), Y, [0, 0, 1, 1])
    assert cs.pullback_bundle(f, bY).dims == (2, 2, 1, 1)
    pulled = cs.pullback_section(f, bY, s)
    np.testing.assert_array_equal(bd.section_norm(cs.pullback_bundle(f, bY), pulled),
                                  bd.section_norm(bY, s)[[0, 0, 1, 1]])
    assert cs.pullback_norm_defect(f, bY, s) == 0.0


def test_pullback_modes_and_errors():
    Y = MeasureSpace([1, 0])
    bY = bd.Bundle(Y, [1, 1], [euclidean(1), euclidean(1)])
    bad = cs.AtomMap(MeasureSpace([1, 1]), Y, [0, 1])
    for mode in ("strict", "ac"):
        with pytest.raises(AbsoluteContinuityError):
            cs.pullback_bundle(bad, bY, mode)
    with pytest.raises(ValueError):
        cs.pullback_bundle(cs.AtomMap(MeasureSpace([1]), Y, [0]), bY, "loose")
    with pytest.raises(DimensionMismatchError):
        cs.pullback_bundle(cs.AtomMap(MeasureSpace([1]), MeasureSpace([1]), [0]), bY)


def test_ac_mode_leaves_target_untouched():
    Y = MeasureSpace([0.001, 5.0])
    X = MeasureSpace([10.0, 10.0, 1.0])
    f = cs.AtomMap(X, Y, [0, 0, 1])
    before = Y.weights.copy()
    assert cs.compression_constant(f) == pytest.approx(20000.0)
    re = cs.reweighted_target(f)
    np.testing.assert_array_equal(re.weights, [20.0, 1.0])
    assert cs.compression_constant(cs.AtomMap(X, re, f.image)) <= 1.0
    bY = bd.Bundle(Y, [1, 2], [euclidean(1), L1])
    pb = cs.pullback_bundle(f, bY, "ac")
    assert pb.dims == (1, 1, 2)
    np.testing.assert_array_equal(Y.weights, before)


def test_polarization_scalar_product_matches_gram():
    sp = MeasureSpace([1, 1])
    G = np.array([[2.0, 0.3], [0.3, 1.0]])
    b = bd.Bundle(sp, [2, 1], [Quadratic(G), WeightedLp(2, [4])])
    s = bd.section(b, [[1, 2], [3]])
    t = bd.section(b, [[-1, 0.5], [2]])
    got = cs.polarization_scalar_product(b, s, t)
    np.testing.assert_allclose(got, [np.array([1, 2]) @ G @ [-1, 0.5], 4 * 3 * 2], atol=1e-12)
