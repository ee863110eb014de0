"""Measurable Banach bundles over finite atomic spaces.

Every atom ``x`` carries a fiber ``R^d(x)`` with a norm; the pieces
``E_n = {x : d(x) = n}`` are implicit in the per-atom storage. Sections are
per-atom vectors, morphisms are per-atom matrices that are 1-Lipschitz on
every positive-weight atom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from . import norms
from .errors import DimensionMismatchError, NotAMorphismError, OverlapError
from .mspace import MeasureSpace, reference_measure
from .norms import NormSpec


@dataclass(frozen=True, eq=False)
class Bundle:
    space: MeasureSpace
    dims: Tuple[int, ...]
    norms: Tuple[NormSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "norms", tuple(self.norms))

    @property
    def atom_count(self) -> int:
        return self.space.atom_count

    def piece(self, n: int) -> frozenset:
        """The set ``E_n`` of atoms with fiber dimension n."""
        return frozenset(i for i, d in enumerate(self.dims) if d == n)

    def distinct_dims(self) -> List[int]:
        return sorted(set(self.dims))


@dataclass(frozen=True, eq=False)
class Section:
    vectors: Tuple[np.ndarray, ...]

    def __post_init__(self):
        vecs = []
        for v in self.vectors:
            a = np.array(v, dtype=float).reshape(-1)
            a.setflags(write=False)
            vecs.append(a)
        object.__setattr__(self, "vectors", tuple(vecs))

    def __len__(self):
        return len(self.vectors)


@dataclass
class ValidationReport:
    valid: bool
    problems: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def atoms(self) -> List[int]:
        return sorted({i for i, _ in self.problems})


def same_space(a: MeasureSpace, b: MeasureSpace) -> bool:
    return a is b or (a.atom_count == b.atom_count and np.array_equal(a.weights, b.weights))


def validate_bundle(b: Bundle) -> ValidationReport:
    problems = []
    n_atoms = b.atom_count
    if len(b.dims) != n_atoms:
        problems.append((-1, "{} dims for {} atoms".format(len(b.dims), n_atoms)))
    if len(b.norms) != n_atoms:
        problems.append((-1, "{} norms for {} atoms".format(len(b.norms), n_atoms)))
    for i, (d, spec) in enumerate(zip(b.dims, b.norms)):
        if d < 0:
            problems.append((i, "negative fiber dimension {}".format(d)))
            continue
        if spec.dim != d:
            problems.append((i, "norm acts on R^{} but the fiber is R^{}".format(spec.dim, d)))
            continue
        if b.space.weights[i] > 0 and not norms.is_norm(spec):
            problems.append((i, "fiber seminorm is degenerate on a positive-weight atom"))
    return ValidationReport(not problems, problems)


def check_section(b: Bundle, s: Section) -> Section:
    if len(s.vectors) != b.atom_count:
        raise DimensionMismatchError(
            "section has {} atoms, bundle has {}".format(len(s.vectors), b.atom_count))
    for i, (v, d) in enumerate(zip(s.vectors, b.dims)):
        if v.size != d:
            raise DimensionMismatchError(
                "section vector at atom {} has length {}, fiber is R^{}".format(i, v.size, d))
    return s


def section(b: Bundle, vectors: Iterable[Sequence[float]]) -> Section:
    return check_section(b, Section(tuple(vectors)))


def zero_section(b: Bundle) -> Section:
    return Section(tuple(np.zeros(d) for d in b.dims))


def section_norm(b: Bundle, s: Section) -> np.ndarray:
    check_section(b, s)
    return np.array([norms.evaluate(spec, v) for spec, v in zip(b.norms, s.vectors)])


def constant_section(b: Bundle, n: int, v) -> Section:
    """The section equal to ``v`` on ``E_n`` and to zero elsewhere."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != n:
        raise DimensionMismatchError("constant vector has length {}, expected {}".format(v.size, n))
    return Section(tuple(v if d == n else np.zeros(d) for d in b.dims))


def basis_section(b: Bundle, n: int, i: int) -> Section:
    """Constant section of the i-th canonical basis vector of R^n (0-based i)."""
    return constant_section(b, n, np.eye(n)[i])


def add_sections(b: Bundle, s: Section, t: Section) -> Section:
    check_section(b, s)
    check_section(b, t)
    return Section(tuple(u + v for u, v in zip(s.vectors, t.vectors)))


def scale_section(b: Bundle, f, s: Section) -> Section:
    """Multiply a section by an L0 function, atom by atom."""
    check_section(b, s)
    f = b.space.field(f)
    return Section(tuple(c * v for c, v in zip(f, s.vectors)))


def restrict_section(b: Bundle, s: Section, members: Iterable[int]) -> Section:
    return scale_section(b, b.space.indicator(members), s)


def gamma_distance(b: Bundle, s: Section, t: Section) -> float:
    """Truncated integral ``sum_x m'(x) min(|s - t|(x), 1)``."""
    diff = Section(tuple(u - v for u, v in zip(check_section(b, s).vectors,
                                                check_section(b, t).vectors)))
    return float(reference_measure(b.space) @ np.minimum(section_norm(b, diff), 1.0))


def glue(b: Bundle, pieces: Sequence[Tuple[Iterable[int], Section]]) -> Section:
    """Glue sections prescribed on pairwise disjoint sets; zero off their union."""
    out = [np.zeros(d) for d in b.dims]
    seen: set = set()
    for members, s in pieces:
        members = b.space.borel_set(members)
        if seen & members:
            raise OverlapError("glueing sets overlap on atoms {}".format(sorted(seen & members)))
        seen |= members
        check_section(b, s)
        for i in members:
            out[i] = s.vectors[i]
    return Section(tuple(out))


@dataclass(frozen=True, eq=False)
class BundleMorphism:
    source: Bundle
    target: Bundle
    mats: Tuple[np.ndarray, ...]
    certificates: Tuple[norms.LipschitzCertificate, ...]


def bundle_morphism(source: Bundle, target: Bundle, mats, seed: int = 0) -> BundleMorphism:
    """Build a morphism, certifying 1-Lipschitz fiber maps on positive-weight atoms."""
    if not same_space(source.space, target.space):
        raise DimensionMismatchError("morphisms need a common base space; use a pullback")
    mats = tuple(np.array(m, dtype=float).reshape(d2, d1)
                 for m, d1, d2 in zip(mats, source.dims, target.dims))
    if len(mats) != source.atom_count:
        raise DimensionMismatchError("{} matrices for {} atoms".format(len(mats), source.atom_count))
    certs = []
    for i, (m, s1, s2) in enumerate(zip(mats, source.norms, target.norms)):
        cert = norms.lipschitz_le_one(m, s1, s2, seed=seed + i)
        if source.space.weights[i] > 0 and not cert.verdict:
            raise NotAMorphismError(
                "fiber map at atom {} has Lipschitz constant {:.6g} > 1".format(i, cert.constant))
        certs.append(cert)
    for m in mats:
        m.setflags(write=False)
    return BundleMorphism(source, target, mats, tuple(certs))


def identity_morphism(b: Bundle) -> BundleMorphism:
    return bundle_morphism(b, b, [np.eye(d) for d in b.dims])


def apply_morphism(phi: BundleMorphism, s: Section) -> Section:
    check_section(phi.source, s)
    return Section(tuple(m @ v for m, v in zip(phi.mats, s.vectors)))


def compose(phi: BundleMorphism, psi: BundleMorphism) -> BundleMorphism:
    """``phi o psi``; psi is applied first."""
    if psi.target is not phi.source and psi.target.dims != phi.source.dims:
        raise DimensionMismatchError("morphisms are not composable")
    mats = tuple(a @ b for a, b in zip(phi.mats, psi.mats))
    return bundle_morphism(psi.source, phi.target, mats)


def morphisms_ae_equal(phi: BundleMorphism, psi: BundleMorphism, atol: float = 1e-12) -> bool:
    pos = phi.source.space.positive
    for i, (a, b) in enumerate(zip(phi.mats, psi.mats)):
        if pos[i] and (a.shape != b.shape or np.max(np.abs(a - b), initial=0.0) > atol):
            return False
    return True


def quantize(b: Bundle, s: Section, eps: float) -> Section:
    """Round a section to a simple section within ``eps`` in the Gamma distance.

    On an atom of dimension n whose fiber norm is bounded by k|.|_2, each
    coordinate is rounded to the dyadic grid of spacing at most
    ``eps / (k 2^(n+k) sqrt(n))``, so the per-atom error stays below
    ``eps / 2^(n+k+1)``.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    check_section(b, s)
    out = []
    for spec, v in zip(b.norms, s.vectors):
        n = v.size
        if n == 0:
            out.append(v)
            continue
        k = max(1, math.ceil(norms.euclid_upper(spec)))
        log_bound = math.log2(eps) - math.log2(k) - (n + k) - 0.5 * math.log2(n)
        j = math.floor(log_bound)
        top = float(np.abs(v).max())
        # grid finer than float resolution: v is already on it
        if top == 0 or j <= math.frexp(top)[1] - 53:
            out.append(v)
            continue
        out.append(np.ldexp(np.round(np.ldexp(v, -j)), j))
    return Section(tuple(out))
