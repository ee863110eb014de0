"""Seeded random instances for the invariant suites."""
from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from . import norms
from .bundle import Bundle, BundleMorphism, Section, bundle_morphism
from .constructions import AtomMap
from .mspace import MeasureSpace
from .nmodule import Element, PresentedModule
from .norms import NormSpec, PolyGauge, PolyMax, Quadratic, WeightedLp

FAMILIES = ("quadratic", "wlp", "polymax", "polygauge")


def space(rng: np.random.Generator, atoms: int, null_frac: float = 0.15) -> MeasureSpace:
    w = rng.exponential(1.0, atoms)
    w[rng.random(atoms) < null_frac] = 0.0
    if not np.any(w > 0):
        w[rng.integers(atoms)] = 1.0
    return MeasureSpace(w)


def norm(rng: np.random.Generator, n: int, family: str, degenerate: bool = False,
         polyhedral_p: bool = False) -> NormSpec:
    """A random norm on R^n, or a seminorm with nontrivial kernel if asked.

    ``polyhedral_p`` limits WeightedLp exponents to 1, 2 and inf, the ones
    a presented module can carry.
    """
    rank = int(rng.integers(0, n)) if degenerate and n > 0 else n
    if family == "quadratic":
        B = rng.standard_normal((rank + (0 if degenerate else 1), n))
        if degenerate:
            B = B[:rank]
        return Quadratic(B.T @ B)
    if family == "wlp":
        ps = [1.0, 2.0, math.inf] if polyhedral_p else [1.0, 1.5, 2.0, 3.0, math.inf]
        p = ps[rng.integers(len(ps))]
        w = rng.uniform(0.5, 2.0, n)
        if degenerate:
            w[rng.permutation(n)[: n - rank]] = 0.0
        return WeightedLp(p, w)
    if family == "polymax":
        if degenerate:
            R = rng.standard_normal((rank, n))
            return PolyMax(rng.standard_normal((rank + int(rng.integers(0, 3)), rank)) @ R, n=n)
        return PolyMax(rng.standard_normal((n + int(rng.integers(0, 3)), n)), n=n)
    if family == "polygauge":
        return PolyGauge(rng.standard_normal((n + int(rng.integers(0, 3)), n)), n=n)
    raise ValueError(family)


def bundle(rng: np.random.Generator, sp: MeasureSpace, max_dim: int = 3,
           families: Sequence[str] = FAMILIES, min_dim: int = 0,
           null_degenerate: bool = True, polyhedral_p: bool = False) -> Bundle:
    dims, specs = [], []
    for x in range(sp.atom_count):
        d = int(rng.integers(min_dim, max_dim + 1))
        fam = families[rng.integers(len(families))]
        degenerate = (null_degenerate and sp.weights[x] == 0 and fam != "polygauge"
                      and d > 0 and rng.random() < 0.5)
        dims.append(d)
        specs.append(norm(rng, d, fam, degenerate, polyhedral_p))
    return Bundle(sp, dims, specs)


def hilbert_bundle(rng: np.random.Generator, sp: MeasureSpace, max_dim: int = 3) -> Bundle:
    dims, specs = [], []
    for _ in range(sp.atom_count):
        d = int(rng.integers(0, max_dim + 1))
        if rng.random() < 0.25:
            specs.append(WeightedLp(2.0, rng.uniform(0.5, 2.0, d)))
        else:
            specs.append(norm(rng, d, "quadratic"))
        dims.append(d)
    return Bundle(sp, dims, specs)


def section(rng: np.random.Generator, b: Bundle, scale: float = 1.0) -> Section:
    return Section(tuple(scale * rng.standard_normal(d) for d in b.dims))


def module(rng: np.random.Generator, sp: MeasureSpace, g: int) -> PresentedModule:
    """Mixed Quadratic/PolyMax seminorms of random rank on R^g."""
    specs = []
    for _ in range(sp.atom_count):
        rank = int(rng.integers(0, g + 1))
        R = rng.standard_normal((rank, g))
        if rng.random() < 0.5:
            specs.append(Quadratic(R.T @ R))
        else:
            C = rng.standard_normal((rank + int(rng.integers(0, 3)), rank))
            specs.append(PolyMax(C @ R, n=g))
    return PresentedModule(sp, g, specs)


def definite_module(rng: np.random.Generator, sp: MeasureSpace, g: int) -> PresentedModule:
    specs = []
    for _ in range(sp.atom_count):
        if rng.random() < 0.5:
            specs.append(norm(rng, g, "quadratic"))
        else:
            specs.append(norm(rng, g, "polymax"))
    return PresentedModule(sp, g, specs)


def element(rng: np.random.Generator, M: PresentedModule, scale: float = 1.0) -> Element:
    return Element(scale * rng.standard_normal((M.atom_count, M.g)))


def contractive_matrix(rng: np.random.Generator, src: NormSpec, dst: NormSpec,
                       margin: float = 0.9, seed: int = 0) -> np.ndarray:
    """Random matrix with Lipschitz constant at most ``margin`` (src -> dst)."""
    m = rng.standard_normal((dst.dim, src.dim))
    if m.size == 0:
        return m
    # send the src kernel to zero so the constant is finite
    K = norms.kernel_basis(src)
    if K.shape[0]:
        m = m @ (np.eye(src.dim) - K.T @ K)
    const, _ = norms.operator_norm(m, src, dst, seed=seed)
    if const > margin:
        m = m * (margin / const)
    return m


def morphism(rng: np.random.Generator, b1: Bundle, b2: Bundle, seed: int = 0) -> BundleMorphism:
    mats = [contractive_matrix(rng, s1, s2, seed=seed + x)
            for x, (s1, s2) in enumerate(zip(b1.norms, b2.norms))]
    return bundle_morphism(b1, b2, mats, seed=seed)


def atom_map(rng: np.random.Generator, source: MeasureSpace, target: MeasureSpace,
             injective: Optional[bool] = None) -> AtomMap:
    """Random map that never sends positive mass to a null target atom."""
    n_src, n_tgt = source.atom_count, target.atom_count
    pos_targets = np.flatnonzero(target.weights > 0)
    if injective and n_src <= len(pos_targets):
        image = rng.permutation(pos_targets)[:n_src]
    else:
        image = rng.choice(pos_targets, size=n_src)
        null_src = np.flatnonzero(source.weights == 0)
        # null source atoms may land anywhere, including on null targets
        if null_src.size:
            image[null_src] = rng.integers(0, n_tgt, size=null_src.size)
    return AtomMap(source, target, image)
