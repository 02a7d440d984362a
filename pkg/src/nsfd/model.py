"""
Autonomous dynamical systems dy/dt = f(y) together with the metadata the
structure-preserving schemes need: the positivity bound ``alpha`` such that
f(y) + alpha * y >= 0 on the nonnegative orthant, known equilibria and a
conservation-law declaration.

States are plain float arrays of shape ``(n,)``.  Right-hand sides are also
expected to accept a batch of states of shape ``(k, n)`` and act row-wise;
every built-in model does.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericalDomainError, UsageError

__all__ = [
    "ConservationDecl",
    "DynamicalModel",
    "C1Report",
    "as_state",
    "eval_rhs",
    "check_condition_C1",
    "grid_samples",
    "total_population",
]

C1_TOL = 1e-12

_KINDS = ("none", "dcl", "gcl", "scl")


@dataclass(frozen=True)
class ConservationDecl:
    """Which conservation law the total (or a partial) population obeys.

    ``dcl``: d(sum y)/dt = 0.  ``gcl``: d(sum y)/dt = a1 - b1 * sum y.
    ``scl``: one of the two applied to the compartments listed in
    ``indices`` (1-based compartment numbers), described by ``inner``.
    """

    kind: str = "none"
    a1: float | None = None
    b1: float | None = None
    indices: tuple[int, ...] = ()
    inner: ConservationDecl | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UsageError(f"unknown conservation kind {self.kind!r}")
        if self.kind == "gcl":
            if self.a1 is None or self.b1 is None or not (self.a1 > 0 and self.b1 > 0):
                raise UsageError(f"GCL requires a1 > 0 and b1 > 0, got a1={self.a1}, b1={self.b1}")
        if self.kind == "scl":
            if self.inner is None or self.inner.kind not in ("dcl", "gcl"):
                raise UsageError("SCL must wrap a DCL or GCL declaration")
            if len(set(self.indices)) != len(self.indices) or len(self.indices) < 2:
                raise UsageError(f"SCL needs at least 2 distinct compartments, got {self.indices}")
            if min(self.indices) < 1:
                raise UsageError(f"SCL compartment numbers are 1-based, got {self.indices}")

    @classmethod
    def none(cls) -> ConservationDecl:
        return cls("none")

    @classmethod
    def dcl(cls) -> ConservationDecl:
        return cls("dcl")

    @classmethod
    def gcl(cls, a1: float, b1: float) -> ConservationDecl:
        return cls("gcl", a1=float(a1), b1=float(b1))

    @classmethod
    def scl(cls, indices: Sequence[int], inner: ConservationDecl) -> ConservationDecl:
        return cls("scl", indices=tuple(int(i) for i in indices), inner=inner)

    @property
    def law(self) -> ConservationDecl:
        """The DCL/GCL that actually governs the (sub)population."""
        return self.inner if self.kind == "scl" else self


def as_state(y, dim: int | None = None, batch: bool = False) -> np.ndarray:
    """Convert ``y`` to a finite float array, validating its trailing dimension."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 and not (batch and arr.ndim == 2):
        raise UsageError(f"state must be a 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.shape[-1] != dim:
        raise UsageError(f"state has length {arr.shape[-1]}, model dimension is {dim}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"state contains non-finite entries: {arr}")
    return arr


def _frozen(y) -> np.ndarray:
    arr = np.array(y, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DynamicalModel:
    name: str
    dim: int
    rhs: Callable[[np.ndarray], np.ndarray]
    alpha: float
    analytic_jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    known_equilibria: tuple[np.ndarray, ...] = ()
    conservation: ConservationDecl = field(default_factory=ConservationDecl)
    # Operating box (lo, hi) used for sampling checks of condition (C1).
    box: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise UsageError(f"dim must be a positive integer, got {self.dim}")
        if not np.isfinite(self.alpha):
            raise UsageError(f"alpha must be finite, got {self.alpha}")
        eqs = tuple(_frozen(e) for e in self.known_equilibria)
        for e in eqs:
            if e.shape != (self.dim,):
                raise UsageError(f"equilibrium {e} does not match dimension {self.dim}")
        object.__setattr__(self, "known_equilibria", eqs)
        object.__setattr__(self, "params", dict(self.params))
        if self.box is not None:
            lo, hi = (tuple(float(v) for v in b) for b in self.box)
            if len(lo) != self.dim or len(hi) != self.dim:
                raise UsageError("operating box does not match model dimension")
            object.__setattr__(self, "box", (lo, hi))
        if self.conservation.kind == "scl" and max(self.conservation.indices) > self.dim:
            raise UsageError(f"SCL compartments {self.conservation.indices} exceed dimension {self.dim}")

    def __call__(self, y) -> np.ndarray:
        return eval_rhs(self, y)


def eval_rhs(model: DynamicalModel, y) -> np.ndarray:
    """Evaluate f(y); a single state or a ``(k, n)`` batch."""
    y = as_state(y, model.dim, batch=True)
    with np.errstate(all="ignore"):
        out = np.asarray(model.rhs(y), dtype=float)
    if out.shape != y.shape:
        raise UsageError(f"{model.name}: rhs returned shape {out.shape} for state shape {y.shape}")
    if not np.all(np.isfinite(out)):
        raise NumericalDomainError(f"{model.name}: non-finite rhs at y={y.tolist()}")
    return out


@dataclass
class C1Report:
    violations: list[np.ndarray]
    checked: int

    @property
    def ok(self) -> bool:
        return not self.violations


def check_condition_C1(model: DynamicalModel, samples, tol: float = C1_TOL) -> C1Report:
    """Spot-check f(y) + alpha * y >= 0 on nonnegative sample states.

    Returns the samples where some component falls below ``-tol``.
    """
    pts = as_state(np.atleast_2d(np.asarray(samples, dtype=float)), model.dim, batch=True)
    if np.any(pts < 0):
        raise UsageError("condition (C1) samples must be nonnegative")
    vals = eval_rhs(model, pts) + model.alpha * pts
    bad = np.any(vals < -tol, axis=1)
    return C1Report(violations=[p.copy() for p in pts[bad]], checked=len(pts))


def grid_samples(model: DynamicalModel, count: int = 1000) -> np.ndarray:
    """About ``count`` points on a tensor grid over the model's operating box."""
    if model.box is None:
        lo, hi = (0.0,) * model.dim, (10.0,) * model.dim
    else:
        lo, hi = model.box
    per_axis = max(2, int(round(count ** (1.0 / model.dim))))
    axes = [np.linspace(a, b, per_axis) for a, b in zip(lo, hi)]
    return np.array(list(itertools.product(*axes)), dtype=float)


def total_population(y, decl: ConservationDecl) -> float:
    """Sum of all compartments, or of the declared subset for an SCL."""
    y = as_state(y)
    if decl.kind == "scl":
        idx = np.asarray(decl.indices) - 1
        if idx.max() >= y.size:
            raise UsageError(f"SCL compartments {decl.indices} out of range for state of length {y.size}")
        return float(y[idx].sum())
    return float(y.sum())
