"""Finitely presented L0-normed L0-modules and the section functor.

A presented module has ``g`` generators; an element is an L0 combination of
them, stored as an ``(atom_count, g)`` coefficient array, and its pointwise
norm at an atom is a seminorm of the coefficient vector there. The seminorm
is Quadratic or PolyMax so its kernel is an exact null space.

The two directions of the bundle/module equivalence live here:
``reconstruct`` turns a module into a bundle plus a norm-preserving
isomorphism, ``gamma_module`` and ``gamma_hom`` present the sections of a
bundle (and the maps induced by bundle morphisms) as modules and homs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from . import norms
from .bundle import (Bundle, BundleMorphism, Section, bundle_morphism, check_section,
                     section_norm)
from .errors import DimensionMismatchError, NoLiftError, NotAMorphismError
from .mspace import MeasureSpace, reference_measure
from .norms import NormSpec, PolyMax, Quadratic, WeightedLp

KERNEL_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class PresentedModule:
    space: MeasureSpace
    g: int
    seminorms: Tuple[NormSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "g", int(self.g))
        specs = tuple(self.seminorms)
        if len(specs) != self.space.atom_count:
            raise DimensionMismatchError(
                "{} seminorms for {} atoms".format(len(specs), self.space.atom_count))
        for i, spec in enumerate(specs):
            if not isinstance(spec, (Quadratic, PolyMax)):
                raise TypeError("atom {}: module seminorms must be Quadratic or PolyMax, got {}".format(
                    i, type(spec).__name__))
            if spec.dim != self.g:
                raise DimensionMismatchError(
                    "atom {}: seminorm acts on R^{} but there are {} generators".format(i, spec.dim, self.g))
        object.__setattr__(self, "seminorms", specs)

    @property
    def atom_count(self) -> int:
        return self.space.atom_count


@dataclass(frozen=True, eq=False)
class Element:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 2:
            raise DimensionMismatchError("coefficients must be an (atoms, g) array")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class Decomposition:
    dims: Tuple[int, ...]

    @property
    def pieces(self) -> Dict[int, frozenset]:
        out: Dict[int, set] = {}
        for i, d in enumerate(self.dims):
            out.setdefault(d, set()).add(i)
        return {n: frozenset(s) for n, s in sorted(out.items())}

    @property
    def e_inf(self) -> frozenset:
        # a module with g generators has dimension <= g everywhere
        return frozenset()


@dataclass(frozen=True)
class PivotChart:
    pivots: Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True, eq=False)
class ModuleHom:
    source: PresentedModule
    target: PresentedModule
    mats: Tuple[np.ndarray, ...]
    kernel_respecting: bool
    contractive: bool
    method: str = "exact"


@dataclass(frozen=True, eq=False)
class Iso:
    module: PresentedModule
    bundle: Bundle
    chart: PivotChart


def element(M: PresentedModule, coeffs) -> Element:
    return Element(np.asarray(coeffs, dtype=float).reshape(M.atom_count, M.g))


def _check(M: PresentedModule, e: Element) -> Element:
    if e.coeffs.shape != (M.atom_count, M.g):
        raise DimensionMismatchError(
            "element has shape {}, module expects {}".format(e.coeffs.shape, (M.atom_count, M.g)))
    return e


def zero_element(M: PresentedModule) -> Element:
    return Element(np.zeros((M.atom_count, M.g)))


def generator_element(M: PresentedModule, j: int) -> Element:
    c = np.zeros((M.atom_count, M.g))
    c[:, j] = 1.0
    return Element(c)


def add_elements(M: PresentedModule, u: Element, v: Element) -> Element:
    return Element(_check(M, u).coeffs + _check(M, v).coeffs)


def scale_element(M: PresentedModule, f, e: Element) -> Element:
    return Element(M.space.field(f)[:, None] * _check(M, e).coeffs)


def restrict_element(M: PresentedModule, e: Element, members: Iterable[int]) -> Element:
    return scale_element(M, M.space.indicator(members), e)


def glue_elements(M: PresentedModule, pieces: Sequence[Tuple[Iterable[int], Element]]) -> Element:
    out = np.zeros((M.atom_count, M.g))
    seen: set = set()
    for members, e in pieces:
        members = M.space.borel_set(members)
        if seen & members:
            raise ValueError("glueing sets overlap on atoms {}".format(sorted(seen & members)))
        seen |= members
        idx = sorted(members)
        out[idx] = _check(M, e).coeffs[idx]
    return Element(out)


def pnorm(M: PresentedModule, e: Element) -> np.ndarray:
    _check(M, e)
    return np.array([norms.evaluate(spec, c) for spec, c in zip(M.seminorms, e.coeffs)])


def module_distance(M: PresentedModule, u: Element, v: Element) -> float:
    diff = Element(_check(M, u).coeffs - _check(M, v).coeffs)
    return float(reference_measure(M.space) @ np.minimum(pnorm(M, diff), 1.0))


def elements_ae_equal(M: PresentedModule, u: Element, v: Element, atol: float = 0.0) -> bool:
    diff = Element(_check(M, u).coeffs - _check(M, v).coeffs)
    return bool(np.all(pnorm(M, diff)[M.space.positive] <= atol))


def _rank(mat: np.ndarray, threshold: float) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(s > threshold))


def _threshold(mat: np.ndarray) -> float:
    if mat.size == 0:
        return 0.0
    top = np.linalg.norm(mat, 2)
    return norms.RANK_RTOL * top if top > 0 else math.inf


def decompose(M: PresentedModule) -> Decomposition:
    """Per-atom dimension ``g - dim ker``; the pieces E_n follow."""
    dims = []
    for spec in M.seminorms:
        K = norms.kernel_matrix(spec)
        dims.append(_rank(K, _threshold(K)))
    return Decomposition(tuple(dims))


def pivot_chart(M: PresentedModule, dec: Optional[Decomposition] = None) -> PivotChart:
    """Lexicographically least generator subsets forming local bases."""
    if dec is None:
        dec = decompose(M)
    pivots = []
    for spec, d in zip(M.seminorms, dec.dims):
        K = norms.kernel_matrix(spec)
        thr = _threshold(K)
        chosen: list = []
        for j in range(M.g):
            if len(chosen) == d:
                break
            if _rank(K[:, chosen + [j]], thr) > len(chosen):
                chosen.append(j)
        pivots.append(tuple(chosen))
    return PivotChart(tuple(pivots))


def _restrict_seminorm(spec: NormSpec, S: Sequence[int]) -> NormSpec:
    S = list(S)
    if not S:
        return Quadratic(np.zeros((0, 0)))
    if isinstance(spec, Quadratic):
        H = spec.G[np.ix_(S, S)]
        return Quadratic((H + H.T) / 2)
    return PolyMax(spec.A[:, S], n=len(S))


def reconstruct(M: PresentedModule) -> Tuple[Bundle, Iso]:
    """Bundle whose sections are isometric to ``M``, with the isomorphism."""
    dec = decompose(M)
    chart = pivot_chart(M, dec)
    specs = tuple(_restrict_seminorm(spec, S) for spec, S in zip(M.seminorms, chart.pivots))
    b = Bundle(M.space, dec.dims, specs)
    return b, Iso(M, b, chart)


def iso_apply(iso: Iso, s: Section) -> Element:
    """Section -> element: fiber coordinates become pivot coefficients."""
    check_section(iso.bundle, s)
    c = np.zeros((iso.module.atom_count, iso.module.g))
    for x, (S, v) in enumerate(zip(iso.chart.pivots, s.vectors)):
        c[x, list(S)] = v
    return Element(c)


def iso_invert(iso: Iso, e: Element) -> Section:
    """Element -> section: reduce modulo the kernel onto the pivot coordinates."""
    _check(iso.module, e)
    out = []
    for spec, S, c in zip(iso.module.seminorms, iso.chart.pivots, e.coeffs):
        if not S:
            out.append(np.zeros(0))
            continue
        K = norms.kernel_matrix(spec)
        y, *_ = np.linalg.lstsq(K[:, list(S)], K @ c, rcond=None)
        out.append(y)
    return Section(tuple(out))


def fiber_to_seminorm(spec: NormSpec) -> NormSpec:
    """Rewrite a fiber norm in one of the two families modules accept."""
    if isinstance(spec, (Quadratic, PolyMax)):
        return spec
    if isinstance(spec, WeightedLp) and spec.p == 2:
        return Quadratic(np.diag(spec.w))
    return norms.to_polymax(spec)


def block_offsets(b: Bundle) -> Dict[int, int]:
    """Offset of the generator block of each occurring dimension."""
    offsets, pos = {}, 0
    for n in b.distinct_dims():
        offsets[n] = pos
        pos += n
    return offsets


def _embed_block(spec: NormSpec, g: int, off: int) -> NormSpec:
    n = spec.dim
    spec = fiber_to_seminorm(spec)
    if isinstance(spec, Quadratic):
        G = np.zeros((g, g))
        G[off:off + n, off:off + n] = spec.G
        return Quadratic(G)
    A = np.zeros((spec.A.shape[0], g))
    A[:, off:off + n] = spec.A
    return PolyMax(A, n=g)


def gamma_module(b: Bundle) -> PresentedModule:
    """Sections of ``b`` presented by the constant basis sections.

    Generators are ``e^n_i`` for every occurring dimension n, in blocks of
    increasing n; on an atom of dimension n only the n-block is seen by the
    seminorm.
    """
    offsets = block_offsets(b)
    g = sum(offsets.keys())
    specs = tuple(_embed_block(spec, g, offsets[d]) for spec, d in zip(b.norms, b.dims))
    return PresentedModule(b.space, g, specs)


def section_to_element(b: Bundle, s: Section) -> Element:
    """Coefficients of a section against the constant basis sections."""
    check_section(b, s)
    offsets = block_offsets(b)
    g = sum(offsets.keys())
    c = np.zeros((b.atom_count, g))
    for x, (d, v) in enumerate(zip(b.dims, s.vectors)):
        c[x, offsets[d]:offsets[d] + d] = v
    return Element(c)


def apply_hom(Phi: ModuleHom, e: Element) -> Element:
    _check(Phi.source, e)
    return Element(np.stack([m @ c for m, c in zip(Phi.mats, e.coeffs)]))


def module_hom(source: PresentedModule, target: PresentedModule, mats, seed: int = 0) -> ModuleHom:
    """Wrap per-atom matrices as a hom, computing its regime flags.

    ``kernel_respecting``: each source kernel is sent into the target kernel,
    so the matrices define a map of modules. ``contractive``: in addition
    ``|Phi(v)| <= |v|`` holds a.e.
    """
    mats = tuple(np.array(m, dtype=float).reshape(target.g, source.g) for m in mats)
    if len(mats) != source.atom_count:
        raise DimensionMismatchError("{} matrices for {} atoms".format(len(mats), source.atom_count))
    respecting, contractive, method = True, True, "exact"
    pos = source.space.positive
    for x, (m, s1, s2) in enumerate(zip(mats, source.seminorms, target.seminorms)):
        if not pos[x]:
            continue
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        for k in norms.kernel_basis(s1):
            if norms.evaluate(s2, m @ k) > KERNEL_ATOL * scale:
                respecting = False
        if respecting:
            const, how = norms.operator_norm(m, s1, s2, seed=seed + x)
            if how != "exact":
                method = how
            if const > 1 + norms.LIPSCHITZ_SLACK:
                contractive = False
    for m in mats:
        m.setflags(write=False)
    return ModuleHom(source, target, mats, respecting, respecting and contractive, method)


def homs_ae_equal(Phi: ModuleHom, Psi: ModuleHom, atol: float = 1e-9) -> bool:
    """Equality as maps of modules: every generator goes to a.e.-equal images."""
    return hom_defect(Phi, Psi) <= atol


def hom_defect(Phi: ModuleHom, Psi: ModuleHom) -> float:
    """``max_j ess sup |(Phi - Psi)(generator_j)|``."""
    worst = 0.0
    pos = Phi.source.space.positive
    for x, (a, b, spec) in enumerate(zip(Phi.mats, Psi.mats, Phi.target.seminorms)):
        if not pos[x]:
            continue
        D = a - b
        for j in range(D.shape[1]):
            worst = max(worst, norms.evaluate(spec, D[:, j]))
    return worst


def gamma_hom(phi: BundleMorphism) -> ModuleHom:
    """Hom between section modules induced by a bundle morphism."""
    M1, M2 = gamma_module(phi.source), gamma_module(phi.target)
    off1, off2 = block_offsets(phi.source), block_offsets(phi.target)
    mats = []
    for m, n1, n2 in zip(phi.mats, phi.source.dims, phi.target.dims):
        big = np.zeros((M2.g, M1.g))
        big[off2[n2]:off2[n2] + n2, off1[n1]:off1[n1] + n1] = m
        big.setflags(write=False)
        mats.append(big)
    methods = {c.method for c in phi.certificates}
    method = "sampled" if "sampled" in methods else "exact"
    return ModuleHom(M1, M2, tuple(mats), True, True, method)


def lift_hom(Phi: ModuleHom, b1: Bundle, b2: Bundle, seed: int = 0) -> BundleMorphism:
    """Bundle morphism inducing ``Phi`` between the section modules of b1, b2.

    On ``E^1_n & E^2_m`` the j-th column is the m-block of the image of the
    constant basis section ``e^n_j``.
    """
    off1, off2 = block_offsets(b1), block_offsets(b2)
    if Phi.source.g != sum(off1) or Phi.target.g != sum(off2):
        raise DimensionMismatchError("hom is not between the section modules of the given bundles")
    if not Phi.kernel_respecting:
        raise NotAMorphismError("hom does not respect the seminorm kernels")
    mats = []
    for m, n1, n2 in zip(Phi.mats, b1.dims, b2.dims):
        mats.append(m[off2[n2]:off2[n2] + n2, off1[n1]:off1[n1] + n1])
    return bundle_morphism(b1, b2, mats, seed=seed)


def lift_through(f: ModuleHom, g: ModuleHom) -> ModuleHom:
    """Solve ``f o h = g`` for h, given f onto (modulo kernels).

    Per atom, every generator image of g is pulled back through f by the
    minimum-Euclidean-norm solution of the equation modulo P's kernel.
    """
    N, P = f.source, f.target
    M = g.source
    if g.target.g != P.g or g.target.atom_count != P.atom_count:
        raise DimensionMismatchError("f and g must share their codomain")
    if not (f.kernel_respecting and g.kernel_respecting):
        raise ValueError("lift_through needs kernel-respecting homs")
    pos = P.space.positive
    mats = []
    for x, (F, Gm, spec) in enumerate(zip(f.mats, g.mats, P.seminorms)):
        K = norms.kernel_matrix(spec)
        KF = K @ F
        if pos[x]:
            thr = _threshold(K)
            if _rank(KF, thr) < _rank(K, thr):
                raise NoLiftError("f is not onto modulo the kernel at atom {}".format(x))
        mats.append(np.linalg.pinv(KF, rcond=norms.RANK_RTOL) @ (K @ Gm) if K.size
                    else np.zeros((N.g, M.g)))
    return module_hom(M, N, mats)


def compose_homs(Phi: ModuleHom, Psi: ModuleHom) -> ModuleHom:
    """``Phi o Psi``."""
    mats = [a @ b for a, b in zip(Phi.mats, Psi.mats)]
    return module_hom(Psi.source, Phi.target, mats)


def lp_norm(M: PresentedModule, e: Element, p: float) -> float:
    """``(sum_x m(x) |e|(x)^p)^(1/p)``, the essential sup for p = inf."""
    return _lp(M.space, pnorm(M, e), p)


def gamma_p_membership(b: Bundle, s: Section, p: float) -> bool:
    return math.isfinite(_lp(b.space, section_norm(b, s), p))


def _lp(space: MeasureSpace, values: np.ndarray, p: float) -> float:
    p = float(p)
    if not p >= 1:
        raise ValueError("p must be >= 1, got {}".format(p))
    pos = space.positive
    if math.isinf(p):
        return float(np.max(values[pos], initial=0.0))
    return float(np.sum(space.weights[pos] * values[pos] ** p) ** (1.0 / p))


@dataclass(frozen=True, eq=False)
class LpModule:
    """Elements of a module whose pointwise norm lies in L^p."""
    module: PresentedModule
    p: float

    def contains(self, e: Element) -> bool:
        return math.isfinite(lp_norm(self.module, e, self.p))

    def norm(self, e: Element) -> float:
        return lp_norm(self.module, e, self.p)


def lp_restriction(M: PresentedModule, p: float) -> LpModule:
    if not float(p) >= 1:
        raise ValueError("p must be >= 1, got {}".format(p))
    return LpModule(M, float(p))


def l0_completion(L: LpModule) -> PresentedModule:
    """On a finite atomic space every element has finite L^p norm, so the
    completion is the ambient module and the embedding is the identity."""
    return L.module
