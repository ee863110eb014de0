"""Finite-dimensional norms and seminorms in four closed-form families.

``Quadratic``   sqrt(v^T G v) for a symmetric PSD Gram matrix G
``WeightedLp``  (sum_i w_i |v_i|^p)^(1/p); for p = inf, max_i w_i |v_i|
``PolyMax``     max_i |<a_i, v>| over the rows of A
``PolyGauge``   the gauge of conv(+-V), i.e. min{sum|lam| : V^T lam = v}

The families are closed under duality (Quadratic and WeightedLp map to
themselves, PolyMax and PolyGauge swap), so every fiber of a bundle has an
exact dual and, for the degenerate ones, an exact linear-algebra kernel.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .errors import DegenerateNormError, DimensionMismatchError

RANK_RTOL = 1e-10
LIPSCHITZ_SLACK = 1e-9
MAX_SIGN_DIM = 8


def _matrix(x, cols: Optional[int] = None) -> np.ndarray:
    a = np.array(x, dtype=float)
    if a.size == 0:
        a = a.reshape(0, cols if cols is not None else 0)
    if a.ndim != 2:
        raise DimensionMismatchError("expected a 2-D array, got shape {}".format(a.shape))
    a.setflags(write=False)
    return a


def numerical_rank(mat: np.ndarray) -> int:
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def null_space(mat: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of the null space, one basis vector per row."""
    if n == 0:
        return np.zeros((0, 0))
    if mat.size == 0 or not np.any(mat):
        return np.eye(n)
    return scipy.linalg.null_space(mat, rcond=RANK_RTOL).T


@dataclass(frozen=True, eq=False)
class Quadratic:
    G: np.ndarray

    def __post_init__(self):
        G = _matrix(self.G)
        if G.shape[0] != G.shape[1]:
            raise DimensionMismatchError("Gram matrix must be square, got {}".format(G.shape))
        scale = max(1.0, float(np.abs(G).max())) if G.size else 1.0
        if not np.allclose(G, G.T, rtol=0, atol=1e-12 * scale):
            raise ValueError("Gram matrix must be symmetric")
        n = G.shape[0]
        # coordinates with an identically zero row are exact kernel directions;
        # decompose only the rest so block-structured Grams keep exact zeros
        live = np.flatnonzero(np.any(G != 0, axis=1)) if n else np.zeros(0, int)
        lam, U = np.linalg.eigh(G[np.ix_(live, live)]) if live.size else (np.zeros(0), np.zeros((0, 0)))
        if lam.size and lam.min() < -1e-9 * scale:
            raise ValueError("Gram matrix must be positive semidefinite")
        keep = lam > RANK_RTOL * lam.max() if lam.size and lam.max() > 0 else np.zeros(lam.size, bool)
        # G ~ factor^T factor with the sub-threshold spectrum dropped, so that
        # kernel vectors evaluate to ~1e-16 instead of sqrt(rounding noise)
        factor = np.zeros((int(keep.sum()), n))
        factor[:, live] = np.sqrt(lam[keep])[:, None] * U[:, keep].T
        kernel = np.vstack([U[:, ~keep].T @ np.eye(n)[live], np.eye(n)[np.setdiff1d(np.arange(n), live)]]) \
            if n else np.zeros((0, 0))
        for a in (factor, kernel):
            a.setflags(write=False)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "factor", factor)
        object.__setattr__(self, "kernel", kernel)

    @property
    def dim(self) -> int:
        return self.G.shape[0]


@dataclass(frozen=True, eq=False)
class WeightedLp:
    p: float
    w: np.ndarray

    def __post_init__(self):
        p = float(self.p)
        if not p >= 1:
            raise ValueError("p must lie in [1, inf], got {}".format(self.p))
        w = np.array(self.w, dtype=float).reshape(-1)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "w", w)

    @property
    def dim(self) -> int:
        return self.w.size


@dataclass(frozen=True, eq=False)
class PolyMax:
    """Max of absolute values of finitely many linear functionals (rows of A)."""
    A: np.ndarray
    n: Optional[int] = None

    def __post_init__(self):
        A = _matrix(self.A, self.n)
        if self.n is not None and A.shape[1] != self.n:
            raise DimensionMismatchError("rows have length {}, expected {}".format(A.shape[1], self.n))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "n", A.shape[1])

    @property
    def dim(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True, eq=False)
class PolyGauge:
    """Norm whose unit ball is the symmetric hull of the rows of V."""
    V: np.ndarray
    n: Optional[int] = None

    def __post_init__(self):
        V = _matrix(self.V, self.n)
        if self.n is not None and V.shape[1] != self.n:
            raise DimensionMismatchError("points have length {}, expected {}".format(V.shape[1], self.n))
        if numerical_rank(V) < V.shape[1]:
            raise DegenerateNormError("gauge generators must span R^{}".format(V.shape[1]))
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "n", V.shape[1])

    @property
    def dim(self) -> int:
        return self.V.shape[1]


NormSpec = Union[Quadratic, WeightedLp, PolyMax, PolyGauge]


def euclidean(n: int) -> Quadratic:
    return Quadratic(np.eye(n))


def zero_seminorm(n: int) -> Quadratic:
    return Quadratic(np.zeros((n, n)))


def _vector(spec: NormSpec, v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != spec.dim:
        raise DimensionMismatchError("vector of length {} for a norm on R^{}".format(v.size, spec.dim))
    return v


def _gauge(V: np.ndarray, v: np.ndarray) -> float:
    m, n = V.shape
    if not np.any(v):
        return 0.0
    c = np.ones(2 * m)
    A_eq = np.hstack([V.T, -V.T])
    res = linprog(c, A_eq=A_eq, b_eq=v, bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError("gauge LP failed: {}".format(res.message))
    # Polish with the dual vertex: the active constraints |<v_j,u>| = 1 pin u.
    u = np.asarray(res.eqlin.marginals, dtype=float)
    Vu = V @ u
    active = np.abs(Vu) >= 1 - 1e-6
    if np.any(active):
        u2, *_ = np.linalg.lstsq(V[active], np.sign(Vu[active]), rcond=None)
        if np.max(np.abs(V @ u2)) <= 1 + 1e-13:
            lower = float(v @ u2)
            if abs(lower - res.fun) <= 1e-7 * max(1.0, abs(res.fun)):
                return lower
    return float(res.fun)


def evaluate(spec: NormSpec, v) -> float:
    v = _vector(spec, v)
    if v.size == 0:
        return 0.0
    if isinstance(spec, Quadratic):
        return float(np.linalg.norm(spec.factor @ v))
    if isinstance(spec, WeightedLp):
        if math.isinf(spec.p):
            return float(np.max(spec.w * np.abs(v)))
        if spec.p == 1:
            return float(spec.w @ np.abs(v))
        # scale out the largest entry to avoid overflow for big p
        a = np.abs(v) * spec.w ** (1.0 / spec.p)
        top = a.max()
        if top == 0:
            return 0.0
        return float(top * np.sum((a / top) ** spec.p) ** (1.0 / spec.p))
    if isinstance(spec, PolyMax):
        if spec.A.shape[0] == 0:
            return 0.0
        return float(np.max(np.abs(spec.A @ v)))
    if isinstance(spec, PolyGauge):
        return _gauge(spec.V, v)
    raise TypeError("not a NormSpec: {!r}".format(spec))


def kernel_matrix(spec: NormSpec) -> np.ndarray:
    """Matrix whose null space is the kernel of the seminorm.

    For Quadratic this is the spectral factor of G, which has the same null
    space and rank as G and half its condition number exponent.
    """
    if isinstance(spec, Quadratic):
        return spec.factor
    if isinstance(spec, PolyMax):
        return spec.A
    if isinstance(spec, WeightedLp):
        return np.diag(spec.w)
    if isinstance(spec, PolyGauge):
        return np.eye(spec.dim)
    raise TypeError("not a NormSpec: {!r}".format(spec))


def kernel_basis(spec: NormSpec) -> np.ndarray:
    """Orthonormal basis (as rows) of ``{v : evaluate(spec, v) == 0}``."""
    if isinstance(spec, PolyGauge):
        return np.zeros((0, spec.dim))
    if isinstance(spec, WeightedLp):
        return np.eye(spec.dim)[spec.w == 0]
    if isinstance(spec, Quadratic):
        return spec.kernel
    return null_space(kernel_matrix(spec), spec.dim)


def is_norm(spec: NormSpec) -> bool:
    return kernel_basis(spec).shape[0] == 0


def dual(spec: NormSpec) -> NormSpec:
    """Dual norm ``u -> sup_v |<u,v>| / spec(v)`` in closed form."""
    if not is_norm(spec):
        raise DegenerateNormError("a seminorm has no dual norm on the same space")
    if spec.dim == 0:
        return Quadratic(np.zeros((0, 0)))
    if isinstance(spec, Quadratic):
        Ginv = np.linalg.inv(spec.G)
        return Quadratic((Ginv + Ginv.T) / 2)
    if isinstance(spec, WeightedLp):
        p, w = spec.p, spec.w
        if p == 1:
            return WeightedLp(math.inf, 1.0 / w)
        if math.isinf(p):
            return WeightedLp(1.0, 1.0 / w)
        q = p / (p - 1.0)
        return WeightedLp(q, w ** (-q / p))
    if isinstance(spec, PolyMax):
        return PolyGauge(spec.A)
    if isinstance(spec, PolyGauge):
        return PolyMax(spec.V)
    raise TypeError("not a NormSpec: {!r}".format(spec))


def euclid_upper(spec: NormSpec) -> float:
    """A constant K with ``evaluate(spec, v) <= K * |v|_2`` for every v."""
    if spec.dim == 0:
        return 0.0
    if isinstance(spec, Quadratic):
        return math.sqrt(max(float(np.linalg.eigvalsh(spec.G).max()), 0.0))
    if isinstance(spec, PolyMax):
        if spec.A.shape[0] == 0:
            return 0.0
        return float(np.linalg.norm(spec.A, axis=1).max())
    if isinstance(spec, WeightedLp):
        p, w = spec.p, spec.w
        if math.isinf(p):
            return float(w.max())
        if p >= 2:
            return float((w ** (1.0 / p)).max())
        # Hoelder with exponents 2/p and 2/(2-p); equality is attainable
        r = 2.0 / (2.0 - p)
        return float(np.sum(w ** r) ** (1.0 / r)) ** (1.0 / p)
    if isinstance(spec, PolyGauge):
        # lam = pinv(V^T) v is feasible, and sum|lam| <= sqrt(m) |lam|_2
        m = spec.V.shape[0]
        return math.sqrt(m) * float(np.linalg.norm(np.linalg.pinv(spec.V.T), 2))
    raise TypeError("not a NormSpec: {!r}".format(spec))


def polarization_gram(spec: NormSpec) -> np.ndarray:
    n = spec.dim
    eye = np.eye(n)
    sq = np.array([evaluate(spec, eye[i]) ** 2 for i in range(n)])
    G = np.diag(sq)
    for i, j in itertools.combinations(range(n), 2):
        G[i, j] = G[j, i] = (evaluate(spec, eye[i] + eye[j]) ** 2 - sq[i] - sq[j]) / 2.0
    return G


def polarization_is_hilbert(spec: NormSpec, trials: int = 32, tol: float = 1e-9,
                            seed: int = 0) -> Tuple[bool, Optional[np.ndarray]]:
    """Decide whether the norm comes from a scalar product.

    The candidate Gram matrix is recovered by polarization on basis pairs and
    then tested against direct evaluation on the pairs ``e_i +- e_j`` and on
    ``trials`` seeded random vectors.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = spec.dim
    G = polarization_gram(spec)
    eye = np.eye(n)
    probes = [eye[i] + eye[j] for i, j in itertools.combinations(range(n), 2)]
    probes += [eye[i] - eye[j] for i, j in itertools.combinations(range(n), 2)]
    rng = np.random.default_rng(seed)
    probes += list(rng.standard_normal((trials, n)))
    for v in probes:
        direct = evaluate(spec, v) ** 2
        if abs(direct - float(v @ G @ v)) > tol * (1.0 + direct):
            return False, None
    return True, G


def complement_reduction(spec: NormSpec) -> Tuple[NormSpec, np.ndarray]:
    """Restrict a seminorm to the orthogonal complement of its kernel.

    Returns ``(reduced, Q)`` where Q has orthonormal columns spanning the
    complement and ``evaluate(reduced, a) == evaluate(spec, Q @ a)``; the
    reduced seminorm is a genuine norm.
    """
    n = spec.dim
    K = kernel_basis(spec)
    if K.shape[0] == 0:
        return spec, np.eye(n)
    if isinstance(spec, WeightedLp):
        keep = spec.w > 0
        return WeightedLp(spec.p, spec.w[keep]), np.eye(n)[:, keep]
    Q = null_space(K, n).T if K.shape[0] < n else np.zeros((n, 0))
    if isinstance(spec, Quadratic):
        H = Q.T @ spec.G @ Q
        return Quadratic((H + H.T) / 2), Q
    if isinstance(spec, PolyMax):
        return PolyMax(spec.A @ Q, n=Q.shape[1]), Q
    raise TypeError("not a NormSpec: {!r}".format(spec))


def unit_ball_vertices(spec: NormSpec) -> Optional[np.ndarray]:
    """Vertices (rows) of the unit ball when it is a polytope of modest size.

    Only defined for genuine norms; returns None when the ball is not a
    polytope or the enumeration would be too large.
    """
    n = spec.dim
    if n == 0 or not is_norm(spec):
        return None
    if isinstance(spec, PolyGauge):
        return np.vstack([spec.V, -spec.V])
    if isinstance(spec, WeightedLp):
        if spec.p == 1:
            return np.vstack([np.diag(1.0 / spec.w), -np.diag(1.0 / spec.w)])
        if math.isinf(spec.p) and n <= MAX_SIGN_DIM:
            signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
            return signs / spec.w
        return None
    if isinstance(spec, PolyMax):
        # the ball {|Av| <= 1} is the polar of conv(+-A): its vertices are
        # the facet normals of that hull
        if n == 1:
            top = np.abs(spec.A).max()
            return np.array([[1.0 / top], [-1.0 / top]])
        return _facet_normals(spec.A)
    return None


def _facet_normals(points: np.ndarray) -> np.ndarray:
    hull = ConvexHull(np.vstack([points, -points]))
    normals = hull.equations[:, :-1] / (-hull.equations[:, -1:])
    return np.unique(np.round(normals, 14), axis=0)


def to_polymax(spec: NormSpec) -> PolyMax:
    """Rewrite a polyhedral norm as a max of functionals."""
    n = spec.dim
    if isinstance(spec, PolyMax):
        return spec
    if n == 0:
        return PolyMax(np.zeros((0, 0)), n=0)
    if isinstance(spec, WeightedLp):
        if math.isinf(spec.p):
            return PolyMax(np.diag(spec.w), n=n)
        if spec.p == 1 and n <= 12:
            signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
            return PolyMax(signs[: max(1, len(signs) // 2)] * spec.w, n=n)
    if isinstance(spec, PolyGauge):
        if n == 1:
            return PolyMax(np.array([[1.0 / np.abs(spec.V).max()]]))
        return PolyMax(_facet_normals(spec.V))
    raise ValueError("{} is not representable as a max of finitely many functionals".format(
        type(spec).__name__))


@dataclass(frozen=True)
class LipschitzCertificate:
    verdict: bool
    method: str  # "exact" or "sampled"
    constant: float


def operator_norm(M, src: NormSpec, dst: NormSpec, seed: int = 0,
                  samples: int = 2000) -> Tuple[float, str]:
    """``sup_v dst(Mv) / src(v)`` and how it was obtained.

    Kernel directions of ``src`` contribute ``inf`` unless M sends them into
    the kernel of ``dst``.
    """
    M = np.asarray(M, dtype=float).reshape(dst.dim, src.dim)
    if src.dim == 0 or dst.dim == 0:
        return 0.0, "exact"
    K = kernel_basis(src)
    scale = max(1.0, float(np.abs(M).max()))
    for k in K:
        if evaluate(dst, M @ k) > 1e-10 * scale:
            return math.inf, "exact"
    src, Q = complement_reduction(src)
    M = M @ Q
    if src.dim == 0:
        return 0.0, "exact"

    src_gram = _gram_of(src)
    dst_gram = _gram_of(dst)
    if src_gram is not None and dst_gram is not None:
        H = M.T @ dst_gram @ M
        lam = scipy.linalg.eigh((H + H.T) / 2, src_gram, eigvals_only=True)
        return math.sqrt(max(float(lam.max()), 0.0)), "exact"

    verts = unit_ball_vertices(src)
    if verts is not None:
        return max(evaluate(dst, M @ x) for x in verts), "exact"

    rows = _rows_of(dst)
    if rows is not None:
        if rows.shape[0] == 0:
            return 0.0, "exact"
        ds = dual(src)
        return max(evaluate(ds, M.T @ a) for a in rows), "exact"

    def ratio(v):
        den = evaluate(src, v)
        return evaluate(dst, M @ v) / den if den > 0 else 0.0

    rng = np.random.default_rng(seed)
    starts = rng.standard_normal((samples, src.dim))
    values = np.array([ratio(v) for v in starts])
    best = float(values.max())
    # polish the most promising samples; the ratio is smooth off a null set
    for i in np.argsort(values)[-3:]:
        res = scipy.optimize.minimize(lambda v: -ratio(v), starts[i], method="Nelder-Mead",
                                      options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        best = max(best, -float(res.fun))
    return best, "sampled"


def _gram_of(spec: NormSpec) -> Optional[np.ndarray]:
    if isinstance(spec, Quadratic):
        return spec.G
    if isinstance(spec, WeightedLp) and spec.p == 2:
        return np.diag(spec.w)
    return None


def _rows_of(spec: NormSpec) -> Optional[np.ndarray]:
    if isinstance(spec, PolyMax):
        return spec.A
    if isinstance(spec, WeightedLp) and math.isinf(spec.p):
        return np.diag(spec.w)
    # polyhedral balls given by vertices are also a finite max of functionals
    if isinstance(spec, PolyGauge) or (isinstance(spec, WeightedLp) and spec.p == 1
                                       and spec.dim <= MAX_SIGN_DIM):
        return to_polymax(spec).A
    return None


def lipschitz_le_one(M, src: NormSpec, dst: NormSpec, seed: int = 0) -> LipschitzCertificate:
    M = np.asarray(M, dtype=float)
    if M.shape != (dst.dim, src.dim):
        raise DimensionMismatchError(
            "matrix of shape {} cannot map R^{} to R^{}".format(M.shape, src.dim, dst.dim))
    const, method = operator_norm(M, src, dst, seed=seed)
    return LipschitzCertificate(bool(const <= 1 + LIPSCHITZ_SLACK), method, const)
