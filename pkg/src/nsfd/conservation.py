"""
Conservation-law checks on trajectories.

A direct law keeps the total population P_T constant.  A generalized law
dP_T/dt = a1 - b1 P_T drives it monotonically to a1/b1; any scheme of the
form y_{k+1} = y_k + Phi f(y_k) turns it into the linear recursion
P_{k+1} = P_k + Phi (a1 - b1 P_k), which is exact when
Phi = (1 - exp(-b1 dt)) / b1 and monotone when b1 Phi <= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import UsageError
from .integrators import SchemeSpec, Trajectory
from .model import ConservationDecl

__all__ = [
    "ConservationReport",
    "population_series",
    "check_dcl",
    "check_gcl",
    "check_conservation",
    "gcl_exact_value",
    "gcl_discrete_value",
    "gcl_multiplier",
    "is_exact_gcl_scheme",
]

MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class ConservationReport:
    kind: str
    max_deviation: float
    monotone: bool | None = None
    limit_error: float | None = None
    # Max |P_k - exact(t_k)|, reported only for the exact schemes.
    exact_deviation: float | None = None


def population_series(states, decl: ConservationDecl) -> np.ndarray:
    """P_T (or the SCL partial sum) for every row of ``states``."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    if decl.kind == "scl":
        idx = np.asarray(decl.indices) - 1
        if idx.max() >= states.shape[1]:
            raise UsageError(f"SCL compartments {decl.indices} out of range for dimension {states.shape[1]}")
        return states[:, idx].sum(axis=1)
    return states.sum(axis=1)


def check_dcl(traj: Trajectory, decl: ConservationDecl) -> ConservationReport:
    if decl.law.kind != "dcl":
        raise UsageError(f"check_dcl needs a DCL (or SCL over a DCL), got {decl.kind}")
    P = population_series(traj.states, decl)
    return ConservationReport(kind=decl.kind, max_deviation=float(np.max(np.abs(P - P[0]))))


def gcl_exact_value(a1: float, b1: float, P0: float, t):
    """Solution of dP/dt = a1 - b1 P with P(0) = P0."""
    if not b1 > 0:
        raise UsageError(f"b1 must be positive, got {b1}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise UsageError("time must be nonnegative")
    value = a1 / b1 + (P0 - a1 / b1) * np.exp(-b1 * t)
    return float(value) if value.ndim == 0 else value


def gcl_multiplier(b1: float, Phi: float) -> float:
    """Contraction factor 1 - b1 Phi of the discrete total population."""
    return 1.0 - b1 * Phi


def gcl_discrete_value(a1: float, b1: float, P0: float, Phi: float, k):
    """Closed form of P_{k+1} = P_k + Phi (a1 - b1 P_k) as a geometric sum."""
    q = gcl_multiplier(b1, Phi)
    k = np.asarray(k)
    if q == 1.0:
        geom = k.astype(float)
    else:
        geom = (1.0 - q ** k) / (1.0 - q)
    value = a1 * Phi * geom + q ** k * P0
    return float(value) if np.ndim(value) == 0 else value


def is_exact_gcl_scheme(scheme: SchemeSpec, decl: ConservationDecl) -> bool:
    """True for the two schemes that reproduce the linear law exactly."""
    law = decl.law
    if law.kind != "gcl" or scheme.phi is None:
        return False
    phi = scheme.phi
    if scheme.kind == "nsfd" and phi.kind == "exact-gcl":
        return math.isclose(phi.m, scheme.m) and math.isclose(phi.b1, law.b1)
    if scheme.kind == "nonstd-euler" and phi.kind == "exact-linear":
        return math.isclose(phi.b1, law.b1)
    return False


def check_gcl(traj: Trajectory, decl: ConservationDecl, scheme: SchemeSpec | None = None) -> ConservationReport:
    """Measure monotone convergence of P_T to a1/b1; never asserts."""
    law = decl.law
    if law.kind != "gcl":
        raise UsageError(f"check_gcl needs a GCL (or SCL over a GCL), got {decl.kind}")
    scheme = traj.scheme if scheme is None else scheme
    a1, b1 = law.a1, law.b1
    limit = a1 / b1
    P = population_series(traj.states, decl)
    dev = P - limit
    tol = MONOTONE_TOL * max(abs(P[0]), abs(limit))
    same_sign = np.all(dev >= -tol) or np.all(dev <= tol)
    shrinking = np.all(np.diff(np.abs(dev)) <= tol)
    exact_dev = None
    if is_exact_gcl_scheme(scheme, decl):
        exact = gcl_exact_value(a1, b1, P[0], traj.times)
        exact_dev = float(np.max(np.abs(P - exact)))
    return ConservationReport(
        kind=decl.kind,
        max_deviation=float(np.max(np.abs(P - P[0]))),
        monotone=bool(same_sign and shrinking),
        limit_error=float(abs(P[-1] - limit)),
        exact_deviation=exact_dev,
    )


def check_conservation(traj: Trajectory, decl: ConservationDecl) -> ConservationReport | None:
    law = decl.law
    if law.kind == "dcl":
        return check_dcl(traj, decl)
    if law.kind == "gcl":
        return check_gcl(traj, decl)
    return None
