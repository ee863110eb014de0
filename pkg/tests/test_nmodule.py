import math

import numpy as np
import pytest

from bundlecalc import bundle as bd
from bundlecalc import nmodule as nm
from bundlecalc import norms
from bundlecalc.errors import DimensionMismatchError, NoLiftError, NotAMorphismError
from bundlecalc.mspace import MeasureSpace
from bundlecalc.norms import PolyMax, Quadratic, WeightedLp, euclidean

from oracles import rref_pivots


@pytest.fixture
def three_atom():
    sp = MeasureSpace([1, 1, 1])
    return nm.PresentedModule(sp, 2, [Quadratic(np.zeros((2, 2))), Quadratic([[1, 0], [0, 0]]),
                                      Quadratic(np.eye(2))])


def test_module_validation():
    sp = MeasureSpace([1])
    with pytest.raises(TypeError):
        nm.PresentedModule(sp, 2, [WeightedLp(2, [1, 1])])
    with pytest.raises(DimensionMismatchError):
        nm.PresentedModule(sp, 2, [euclidean(3)])
    with pytest.raises(DimensionMismatchError):
        nm.PresentedModule(sp, 1, [euclidean(1), euclidean(1)])


def test_pnorm_examples():
    sp = MeasureSpace([1, 1])
    M = nm.PresentedModule(sp, 2, [PolyMax([[1, 1]]), Quadratic(np.zeros((2, 2)))])
    np.testing.assert_array_equal(nm.pnorm(M, nm.element(M, [[1, -1], [4, 5]])), [0, 0])
    np.testing.assert_array_equal(nm.pnorm(M, nm.element(M, [[1, 0], [4, 5]])), [1, 0])
    e = nm.element(M, [[2, 0.5], [1, 1]])
    np.testing.assert_allclose(nm.pnorm(M, nm.scale_element(M, [3, 3], e)), 3 * nm.pnorm(M, e))


def test_module_distance_examples(three_atom):
    M = three_atom
    u = nm.element(M, [[1, 2], [3, 4], [5, 6]])
    assert nm.module_distance(M, u, u) == 0.0
    # kernel-valued difference: coefficients differ but the elements agree
    v = nm.element(M, [[9, 9], [3, -7], [5, 6]])
    assert nm.module_distance(M, u, v) == 0.0
    assert nm.elements_ae_equal(M, u, v)
    # weights 3/7 and 7/3 give reference masses exactly 0.3 and 0.7
    sp = MeasureSpace([3 / 7, 7 / 3])
    L = nm.PresentedModule(sp, 1, [euclidean(1), euclidean(1)])
    a, b = nm.element(L, [[2], [0]]), nm.zero_element(L)
    assert nm.module_distance(L, a, b) == pytest.approx(0.3, abs=1e-15)
    # a null atom carries no reference mass
    sp = MeasureSpace([3 / 7, 0.0])
    L = nm.PresentedModule(sp, 1, [euclidean(1), euclidean(1)])
    assert nm.module_distance(L, nm.element(L, [[2], [5]]), nm.zero_element(L)) == 1.0


def test_decompose_examples(three_atom):
    dec = nm.decompose(three_atom)
    assert dec.dims == (0, 1, 2)
    assert dec.pieces == {0: {0}, 1: {1}, 2: {2}}
    assert dec.e_inf == frozenset()
    P = np.array([[0, 1], [1, 0]])
    swapped = nm.PresentedModule(three_atom.space, 2,
                                 [Quadratic(P @ s.G @ P) for s in three_atom.seminorms])
    assert nm.decompose(swapped).dims == dec.dims
    T = np.diag([3.0, 1.0])
    scaled = nm.PresentedModule(three_atom.space, 2,
                                [Quadratic(T @ s.G @ T) for s in three_atom.seminorms])
    assert nm.decompose(scaled).dims == dec.dims


def test_pivot_examples():
    sp = MeasureSpace([1, 1, 1])
    M = nm.PresentedModule(sp, 2, [Quadratic([[1, 0], [0, 0]]), Quadratic(np.eye(2)),
                                   Quadratic([[0, 0], [0, 1]])])
    assert nm.pivot_chart(M).pivots == ((0,), (0, 1), (1,))


def test_pivots_match_exact_row_reduction():
    rng = np.random.default_rng(8)
    for _ in range(200):
        g = int(rng.integers(1, 6))
        r = int(rng.integers(0, g + 1))
        A = rng.integers(-2, 3, size=(r, g))
        # integer entries: exact rational row reduction is the oracle
        for spec, rows in ((PolyMax(A.astype(float), n=g), A), (Quadratic((A.T @ A).astype(float)), A.T @ A)):
            M = nm.PresentedModule(MeasureSpace([1]), g, [spec])
            expected = rref_pivots(rows.tolist()) if rows.size else ()
            assert nm.pivot_chart(M).pivots[0] == expected
            assert nm.decompose(M).dims[0] == len(expected)


def test_reconstruct_examples(three_atom):
    b, iso = nm.reconstruct(three_atom)
    assert b.dims == (0, 1, 2)
    np.testing.assert_array_equal(b.norms[1].G, [[1]])
    np.testing.assert_array_equal(b.norms[2].G, np.eye(2))
    M = nm.PresentedModule(MeasureSpace([1]), 1, [PolyMax([[2]])])
    b, _ = nm.reconstruct(M)
    assert b.dims == (1,) and norms.evaluate(b.norms[0], [-3]) == 6


def test_reconstruct_bundle_form_is_isometric():
    sp = MeasureSpace([1, 2, 1])
    b = bd.Bundle(sp, [1, 2, 2], [WeightedLp(1, [2]), Quadratic([[2, 1], [1, 2]]),
                                  PolyMax([[1, 2], [0, 1], [1, -1]])])
    b2, iso = nm.reconstruct(nm.gamma_module(b))
    assert b2.dims == b.dims
    rng = np.random.default_rng(0)
    for _ in range(20):
        s = bd.section(b, [rng.standard_normal(d) for d in b.dims])
        e = nm.section_to_element(b, s)
        s2 = nm.iso_invert(iso, e)
        np.testing.assert_allclose(bd.section_norm(b2, s2), bd.section_norm(b, s), atol=1e-12)


def test_iso_examples(three_atom):
    b, iso = nm.reconstruct(three_atom)
    z = nm.iso_apply(iso, bd.zero_section(b))
    assert not np.any(z.coeffs)
    back = nm.iso_invert(iso, nm.zero_element(three_atom))
    assert all(not np.any(v) for v in back.vectors)
    e = nm.iso_apply(iso, bd.basis_section(b, 2, 1))
    np.testing.assert_array_equal(e.coeffs, [[0, 0], [0, 0], [0, 1]])
    # kernel part plus pivot part: only the pivot part survives
    e = nm.element(three_atom, [[4, 4], [2, 7], [1, 1]])
    s = nm.iso_invert(iso, e)
    assert [v.tolist() for v in s.vectors] == [[], [2.0], [1.0, 1.0]]
    np.testing.assert_allclose(nm.pnorm(three_atom, e), bd.section_norm(b, s))


def test_iso_invert_on_oblique_kernel():
    # kernel spanned by (1,-1): generator 0 alone is a local basis
    M = nm.PresentedModule(MeasureSpace([1]), 2, [PolyMax([[1, 1]])])
    b, iso = nm.reconstruct(M)
    assert iso.chart.pivots == ((0,),)
    s = nm.iso_invert(iso, nm.element(M, [[2, 5]]))
    assert s.vectors[0] == pytest.approx([7])
    assert nm.elements_ae_equal(M, nm.iso_apply(iso, s), nm.element(M, [[2, 5]]), atol=1e-12)


def test_gamma_module_examples():
    sp = MeasureSpace([1, 1])
    b = bd.Bundle(sp, [1, 2], [euclidean(1), WeightedLp(1, [1, 1])])
    M = nm.gamma_module(b)
    assert M.g == 3
    assert norms.kernel_basis(M.seminorms[0]).shape[0] == 2
    assert nm.decompose(M).dims == (1, 2)
    uni = bd.Bundle(sp, [2, 2], [euclidean(2), Quadratic([[2, 1], [1, 1]])])
    U = nm.gamma_module(uni)
    assert U.g == 2
    np.testing.assert_array_equal(U.seminorms[1].G, [[2, 1], [1, 1]])
    zero = nm.gamma_module(bd.Bundle(sp, [0, 0], [euclidean(0), euclidean(0)]))
    assert zero.g == 0 and nm.decompose(zero).dims == (0, 0)


def test_gamma_module_refuses_non_polyhedral_lp():
    b = bd.Bundle(MeasureSpace([1]), [2], [WeightedLp(3, [1, 1])])
    with pytest.raises(ValueError):
        nm.gamma_module(b)


def _pair():
    sp = MeasureSpace([1, 1, 0])
    b1 = bd.Bundle(sp, [2, 1, 2], [euclidean(2), WeightedLp(1, [2]), WeightedLp(1, [1, 1])])
    b2 = bd.Bundle(sp, [1, 2, 2], [euclidean(1), PolyMax([[1, 0], [0, 1]]), euclidean(2)])
    return sp, b1, b2


def test_gamma_hom_examples():
    sp, b1, _ = _pair()
    ident = nm.gamma_hom(bd.identity_morphism(b1))
    M = ident.source
    rng = np.random.default_rng(1)
    e = nm.element(M, rng.standard_normal((3, M.g)))
    assert nm.elements_ae_equal(M, nm.apply_hom(ident, e), e)
    zero = nm.gamma_hom(bd.bundle_morphism(b1, b1, [np.zeros((d, d)) for d in b1.dims]))
    assert not np.any(nm.apply_hom(zero, e).coeffs)


def test_gamma_hom_is_contractive_and_lifts_back():
    sp, b1, b2 = _pair()
    mats = [np.array([[0.3, -0.4]]), np.array([[0.2], [0.25]]), np.array([[7.0, 0], [0, 7.0]])]
    phi = bd.bundle_morphism(b1, b2, mats)
    Phi = nm.gamma_hom(phi)
    rng = np.random.default_rng(2)
    for _ in range(20):
        e = nm.element(Phi.source, rng.standard_normal((3, Phi.source.g)))
        out = nm.pnorm(Phi.target, nm.apply_hom(Phi, e))
        assert np.all(out[sp.positive] <= nm.pnorm(Phi.source, e)[sp.positive] + 1e-12)
    back = nm.lift_hom(Phi, b1, b2)
    for x in (0, 1):
        np.testing.assert_array_equal(back.mats[x], phi.mats[x])
    assert bd.morphisms_ae_equal(nm.lift_hom(nm.gamma_hom(bd.identity_morphism(b1)), b1, b1),
                                 bd.identity_morphism(b1))


def test_lift_hom_rejects_non_contractive():
    sp, b1, _ = _pair()
    M = nm.gamma_module(b1)
    big = nm.module_hom(M, M, [2 * np.eye(M.g)] * 3)
    assert big.kernel_respecting and not big.contractive
    with pytest.raises(NotAMorphismError):
        nm.lift_hom(big, b1, b1)
    # mixing blocks sends a kernel direction to a visible one
    mix = np.zeros((M.g, M.g))
    mix[0, 1] = 1.0
    bad = nm.module_hom(M, M, [mix] * 3)
    assert not bad.kernel_respecting
    with pytest.raises(NotAMorphismError):
        nm.lift_hom(bad, b1, b1)


def test_lift_through_examples():
    sp = MeasureSpace([1])
    P = nm.PresentedModule(sp, 1, [euclidean(1)])
    N = nm.PresentedModule(sp, 2, [euclidean(2)])
    f = nm.module_hom(N, P, [[[1.0, 0.0]]])
    g = nm.module_hom(P, P, [[[1.0]]])
    h = nm.lift_through(f, g)
    np.testing.assert_allclose(h.mats[0], [[1.0], [0.0]])
    ident = nm.module_hom(P, P, [[[1.0]]])
    g2 = nm.module_hom(P, P, [[[0.5]]])
    np.testing.assert_allclose(nm.lift_through(ident, g2).mats[0], [[0.5]])


def test_lift_through_null_atom_and_failure():
    sp = MeasureSpace([1, 0])
    P = nm.PresentedModule(sp, 1, [euclidean(1), euclidean(1)])
    N = nm.PresentedModule(sp, 1, [euclidean(1), euclidean(1)])
    f = nm.module_hom(N, P, [[[2.0]], [[0.0]]])
    g = nm.module_hom(P, P, [[[1.0]], [[1.0]]])
    h = nm.lift_through(f, g)
    assert nm.hom_defect(nm.compose_homs(f, h), g) <= 1e-12
    f_bad = nm.module_hom(N, P, [[[0.0]], [[1.0]]])
    with pytest.raises(NoLiftError):
        nm.lift_through(f_bad, g)


def test_lift_through_modulo_kernel():
    # P sees only the first coordinate; f need only be onto modulo that kernel
    sp = MeasureSpace([1])
    P = nm.PresentedModule(sp, 2, [Quadratic([[1, 0], [0, 0]])])
    N = nm.PresentedModule(sp, 1, [euclidean(1)])
    f = nm.module_hom(N, P, [[[1.0], [5.0]]])
    M = nm.PresentedModule(sp, 1, [euclidean(1)])
    g = nm.module_hom(M, P, [[[3.0], [-2.0]]])
    h = nm.lift_through(f, g)
    assert nm.hom_defect(nm.compose_homs(f, h), g) <= 1e-12
    np.testing.assert_allclose(h.mats[0], [[3.0]])


def test_lp_examples():
    sp = MeasureSpace([1, 1, 2])
    M = nm.PresentedModule(sp, 1, [euclidean(1)] * 3)
    e = nm.element(M, [[1], [2], [0]])
    assert nm.lp_norm(M, e, 2) == pytest.approx(math.sqrt(5))
    assert nm.lp_norm(M, e, math.inf) == 2
    assert nm.lp_norm(M, e, 1) == 3
    with pytest.raises(ValueError):
        nm.lp_norm(M, e, 0.5)
    L = nm.lp_restriction(M, 2)
    assert L.contains(e) and L.norm(e) == pytest.approx(math.sqrt(5))
    assert nm.l0_completion(L) is M
    b = bd.Bundle(sp, [1, 1, 1], [euclidean(1)] * 3)
    assert nm.gamma_p_membership(b, bd.section(b, [[1], [2], [0]]), 1)


def test_locality_and_glueing():
    sp = MeasureSpace([1, 1, 1])
    M = nm.PresentedModule(sp, 2, [euclidean(2)] * 3)
    u = nm.element(M, [[1, 2], [3, 4], [5, 6]])
    v = nm.element(M, [[7, 8], [9, 10], [11, 12]])
    g = nm.glue_elements(M, [({0}, u), ({1, 2}, v)])
    np.testing.assert_array_equal(g.coeffs, [[1, 2], [9, 10], [11, 12]])
    r = nm.restrict_element(M, u, {1})
    np.testing.assert_array_equal(r.coeffs, [[0, 0], [3, 4], [0, 0]])
    total = nm.add_elements(M, nm.restrict_element(M, u, {0}), nm.restrict_element(M, u, {1, 2}))
    assert nm.elements_ae_equal(M, total, u)
    one = nm.generator_element(M, 1)
    np.testing.assert_array_equal(one.coeffs, [[0, 1]] * 3)
