"""Finite atomic measure spaces.

A space is a finite list of atoms carrying nonnegative weights. Null sets are
exactly the sets of zero-weight atoms, so "almost everywhere" means "on every
positive-weight atom". Scalar fields (elements of L0) are plain 1-D float
arrays of length ``atom_count`` and Borel sets are frozensets of atom indices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidSpaceError

BorelSet = frozenset


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    weights: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size == 0:
            raise InvalidSpaceError("a measure space needs at least one atom")
        if not np.all(np.isfinite(w)):
            raise InvalidSpaceError("weights must be finite")
        if np.any(w < 0):
            raise InvalidSpaceError("weights must be nonnegative")
        if not np.any(w > 0):
            raise InvalidSpaceError("the measure must not vanish identically")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.labels is not None:
            labels = tuple(str(lab) for lab in self.labels)
            if len(labels) != w.size:
                raise InvalidSpaceError(
                    "got {} labels for {} atoms".format(len(labels), w.size))
            object.__setattr__(self, "labels", labels)

    @property
    def atom_count(self) -> int:
        return int(self.weights.size)

    @property
    def positive(self) -> np.ndarray:
        """Boolean mask of positive-weight atoms."""
        return self.weights > 0

    def borel_set(self, members: Iterable[int]) -> frozenset:
        out = frozenset(int(i) for i in members)
        bad = [i for i in out if not 0 <= i < self.atom_count]
        if bad:
            raise DimensionMismatchError(
                "atom indices {} out of range for {} atoms".format(sorted(bad), self.atom_count))
        return out

    def indicator(self, members: Iterable[int]) -> np.ndarray:
        chi = np.zeros(self.atom_count)
        chi[list(self.borel_set(members))] = 1.0
        return chi

    def measure(self, members: Iterable[int]) -> float:
        return float(sum(self.weights[i] for i in self.borel_set(members)))

    def field(self, values: Sequence[float]) -> np.ndarray:
        f = np.asarray(values, dtype=float).reshape(-1)
        if f.size != self.atom_count:
            raise DimensionMismatchError(
                "field has {} values, space has {} atoms".format(f.size, self.atom_count))
        return f

    def ae_equal(self, f, g, atol: float = 0.0) -> bool:
        f, g = self.field(f), self.field(g)
        return bool(np.all(np.abs(f - g)[self.positive] <= atol))


def reference_measure(space: MeasureSpace) -> np.ndarray:
    """Probability vector equivalent to the measure of ``space``.

    Each atom gets mass proportional to w/(1+w), which stays bounded for huge
    weights and vanishes exactly on the null atoms.
    """
    w = space.weights
    if not np.any(w > 0):
        raise InvalidSpaceError("all weights are zero")
    r = w / (1.0 + w)
    return r / r.sum()


def l0_distance(f, g, space: MeasureSpace) -> float:
    """Distance metrizing convergence in measure.

    Evaluates ``inf_{delta>0} delta + m(|f-g| > delta)`` exactly: the bracket is
    a step function plus the identity, so the infimum sits at the 0+ limit or
    at one of the finitely many values of ``|f-g|``.
    """
    f, g = space.field(f), space.field(g)
    pos = space.positive
    diff = np.abs(f - g)[pos]
    w = space.weights[pos]
    best = float(w[diff > 0].sum())
    for delta in np.unique(diff[diff > 0]):
        best = min(best, float(delta) + float(w[diff > delta].sum()))
    return best


def essential_union(family: Iterable[Iterable[int]], space: MeasureSpace) -> frozenset:
    out: frozenset = frozenset()
    for members in family:
        out = out | space.borel_set(members)
    return out


def restrict(f, members: Iterable[int]) -> np.ndarray:
    """Multiply a field by the indicator of a set."""
    f = np.asarray(f, dtype=float).reshape(-1)
    idx = sorted(set(int(i) for i in members))
    if idx and not (0 <= idx[0] and idx[-1] < f.size):
        raise DimensionMismatchError("set {} out of range for {} atoms".format(idx, f.size))
    out = np.zeros_like(f)
    out[idx] = f[idx]
    return out
