"""Hilbert detection, tensor products, duals and pullbacks of bundles."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, Tuple, Union

import numpy as np

from . import norms
from .bundle import Bundle, Section, check_section, same_space, section_norm
from .errors import (AbsoluteContinuityError, DimensionMismatchError,
                     TensorUndefinedError)
from .mspace import MeasureSpace
from .norms import Quadratic


def is_hilbert_bundle(b: Bundle, seed: int = 0, tol: float = 1e-9) -> bool:
    """True iff every positive-weight fiber norm comes from a scalar product."""
    for i, spec in enumerate(b.norms):
        if b.space.weights[i] > 0:
            ok, _ = norms.polarization_is_hilbert(spec, tol=tol, seed=seed + i)
            if not ok:
                return False
    return True


def hilbert_grams(b: Bundle, seed: int = 0, tol: float = 1e-9) -> Tuple[np.ndarray, ...]:
    """Per-atom Gram matrices of a Hilbert bundle.

    Null atoms whose norm fails polarization get the zero Gram matrix.
    """
    grams = []
    for i, spec in enumerate(b.norms):
        if isinstance(spec, Quadratic):
            grams.append(spec.G)
            continue
        if isinstance(spec, norms.WeightedLp) and spec.p == 2:
            grams.append(np.diag(spec.w))
            continue
        ok, G = norms.polarization_is_hilbert(spec, tol=tol, seed=seed + i)
        if not ok:
            if b.space.weights[i] > 0:
                raise TensorUndefinedError(
                    "fiber norm at atom {} is not induced by a scalar product".format(i))
            G = np.zeros((spec.dim, spec.dim))
        grams.append(G)
    return tuple(grams)


def dual_bundle(b: Bundle) -> Bundle:
    """Fiberwise dual norms; a degenerate fiber gets the zero seminorm."""
    duals = []
    for spec in b.norms:
        if norms.is_norm(spec):
            duals.append(norms.dual(spec))
        else:
            duals.append(norms.zero_seminorm(spec.dim))
    return Bundle(b.space, b.dims, tuple(duals))


def dual_pairing(b: Bundle, s_star: Section, s: Section) -> np.ndarray:
    check_section(b, s_star)
    check_section(b, s)
    return np.array([float(u @ v) for u, v in zip(s_star.vectors, s.vectors)])


def basis_images(b: Bundle, s_star: Section) -> Dict[Tuple[int, int], np.ndarray]:
    """Pairing of a dual section with every constant basis section.

    Keys are ``(n, i)`` with ``0 <= i < n`` for each occurring dimension n.
    """
    check_section(b, s_star)
    out = {}
    for n in b.distinct_dims():
        for i in range(n):
            out[(n, i)] = np.array([u[i] if d == n else 0.0
                                    for u, d in zip(s_star.vectors, b.dims)])
    return out


def functional_from_basis_images(b: Bundle, images: Mapping[Tuple[int, int], np.ndarray]) -> Section:
    """The dual section whose pairings with the constant basis sections are ``images``."""
    expected = {(n, i) for n in b.distinct_dims() for i in range(n)}
    given = {(int(n), int(i)) for n, i in images}
    if given != expected:
        raise DimensionMismatchError(
            "need exactly one image per constant basis section {}, got {}".format(
                sorted(expected), sorted(given)))
    fields = {(int(n), int(i)): b.space.field(f) for (n, i), f in images.items()}
    vectors = []
    for x, d in enumerate(b.dims):
        vectors.append(np.array([fields[(d, i)][x] for i in range(d)]))
    return Section(tuple(vectors))


def tensor_index(k: int, m: int) -> Tuple[int, int]:
    """1-based component pair (j, l) carried by tensor coordinate k (1-based)."""
    j = -(-k // m)
    return j, k - m * j + m


def tensor_bundle(b1: Bundle, b2: Bundle, seed: int = 0) -> Bundle:
    """Tensor product of two Hilbert bundles over the same space.

    Fiber dimension is ``n*m`` and the Gram matrix is the Kronecker product of
    the factor Grams, coordinate ``(j-1)*m + l`` pairing ``e_j`` with ``f_l``.
    """
    if not same_space(b1.space, b2.space):
        raise DimensionMismatchError("tensor factors must live over the same space")
    g1 = hilbert_grams(b1, seed=seed)
    g2 = hilbert_grams(b2, seed=seed)
    dims = tuple(n * m for n, m in zip(b1.dims, b2.dims))
    specs = []
    for A, B in zip(g1, g2):
        K = np.kron(A, B)
        specs.append(Quadratic((K + K.T) / 2))
    return Bundle(b1.space, dims, tuple(specs))


def tensor_elementary(b1: Bundle, b2: Bundle, s1: Section, s2: Section) -> Section:
    check_section(b1, s1)
    check_section(b2, s2)
    hilbert_grams(b1)
    hilbert_grams(b2)
    return Section(tuple(np.kron(v, w) for v, w in zip(s1.vectors, s2.vectors)))


@dataclass(frozen=True, eq=False)
class AtomMap:
    source: MeasureSpace
    target: MeasureSpace
    image: Tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(y) for y in self.image)
        if len(image) != self.source.atom_count:
            raise DimensionMismatchError(
                "map lists {} images for {} source atoms".format(len(image), self.source.atom_count))
        bad = [y for y in image if not 0 <= y < self.target.atom_count]
        if bad:
            raise DimensionMismatchError("image indices {} out of range".format(sorted(set(bad))))
        object.__setattr__(self, "image", image)

    def pushforward(self) -> np.ndarray:
        """Pushforward of the source measure, as weights on the target."""
        return np.bincount(np.array(self.image, dtype=int), weights=self.source.weights,
                           minlength=self.target.atom_count).astype(float)


def compression_constant(f: AtomMap) -> Union[float, str]:
    """Least C with ``f_* m_X <= C m_Y``, or ``"unbounded"``."""
    fw = f.pushforward()
    w = f.target.weights
    if np.any((fw > 0) & (w == 0)):
        return "unbounded"
    pos = w > 0
    return float(np.max(fw[pos] / w[pos], initial=0.0))


def reweighted_target(f: AtomMap) -> MeasureSpace:
    """Target measure replaced by the pushforward where the latter is positive.

    The result is equivalent to the original target measure when the
    pushforward is absolutely continuous, and dominates the pushforward, so f
    has compression constant at most 1 for it.
    """
    fw = f.pushforward()
    w = f.target.weights
    if np.any((fw > 0) & (w == 0)):
        raise AbsoluteContinuityError("the pushforward charges a null set of the target")
    return MeasureSpace(np.where(fw > 0, fw, w), f.target.labels)


def pullback_bundle(f: AtomMap, bY: Bundle, mode: str = "strict") -> Bundle:
    if not same_space(f.target, bY.space):
        raise DimensionMismatchError("bundle does not live on the target of the map")
    if mode == "strict":
        if compression_constant(f) == "unbounded":
            raise AbsoluteContinuityError("map is not of bounded compression")
    elif mode == "ac":
        reweighted_target(f)
    else:
        raise ValueError("mode must be 'strict' or 'ac', got {!r}".format(mode))
    dims = tuple(bY.dims[y] for y in f.image)
    specs = tuple(bY.norms[y] for y in f.image)
    return Bundle(f.source, dims, specs)


def pullback_section(f: AtomMap, bY: Bundle, s: Section, mode: str = "strict") -> Section:
    pullback_bundle(f, bY, mode)
    check_section(bY, s)
    return Section(tuple(s.vectors[y] for y in f.image))


def pullback_norm_defect(f: AtomMap, bY: Bundle, s: Section, mode: str = "strict") -> float:
    """Max over source atoms of ``| |f*s|(x) - |s|(f(x)) |``."""
    pulled = pullback_bundle(f, bY, mode)
    lhs = section_norm(pulled, pullback_section(f, bY, s, mode))
    rhs = section_norm(bY, s)[list(f.image)]
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


def polarization_scalar_product(b: Bundle, s: Section, t: Section) -> np.ndarray:
    """Pointwise scalar product ``(|s+t|^2 - |s-t|^2) / 4`` of two sections."""
    check_section(b, s)
    check_section(b, t)
    out = []
    for spec, u, v in zip(b.norms, s.vectors, t.vectors):
        out.append((norms.evaluate(spec, u + v) ** 2 - norms.evaluate(spec, u - v) ** 2) / 4.0)
    return np.array(out)

