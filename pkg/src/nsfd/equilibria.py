"""
Equilibrium search and classification, and the step-size-independent
thresholds of the NSFD scheme.

For the scheme y_{k+1} = y_k + phi/(1 + m phi) f(y_k) the package computes

* ``m_P = max(alpha, 0)``: positivity for every step size,
* ``m_S = max(-|lam|^2 / (2 Re lam))`` over the spectra at the
  asymptotically stable equilibria: local stability for every step size,
* ``m_GCL = b1``: monotone convergence of a generalized conservation law,

and the matching upper bounds on the denominator of the nonstandard Euler
scheme (the ``m = 0`` special case): ``phi_P = 1/alpha``,
``phi_S = min(-2 Re lam / |lam|^2)`` and ``phi_GCL = 1/b1``.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .exceptions import HyperbolicityError, NSFDError, UsageError
from .linalg import eigenvalues, jacobian
from .model import ConservationDecl, DynamicalModel, as_state, eval_rhs

__all__ = [
    "Stability",
    "EquilibriumReport",
    "ThresholdReport",
    "newton",
    "default_seeds",
    "find_equilibria",
    "classify",
    "hyperbolic_tolerance",
    "threshold_m_P",
    "threshold_m_S",
    "threshold_m_GCL",
    "threshold_phi_P",
    "threshold_phi_S",
    "threshold_phi_GCL",
    "m_S_from_eigenvalues",
    "phi_S_from_eigenvalues",
    "compute_thresholds",
    "discrete_jacobian",
]

logger = logging.getLogger(__name__)

EQUILIBRIUM_TOL = 1e-8
NEWTON_TOL = 1e-12
DEDUP_TOL = 1e-8


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    NON_HYPERBOLIC = "non-hyperbolic"


@dataclass(frozen=True)
class EquilibriumReport:
    point: np.ndarray
    eigenvalues: tuple[complex, ...]
    classification: Stability
    hyperbolic: bool


@dataclass(frozen=True)
class ThresholdReport:
    m_P: float
    m_S: float
    m_GCL: float | None
    phi_P: float
    phi_S: float
    phi_GCL: float | None

    @property
    def m_required(self) -> float:
        return max(v for v in (self.m_P, self.m_S, self.m_GCL) if v is not None)

    @property
    def phi_required(self) -> float:
        """Strict upper bound on phi(dt) for the nonstandard Euler scheme."""
        return min(v for v in (self.phi_P, self.phi_S, self.phi_GCL) if v is not None)


def _inf_norm(y) -> float:
    return float(np.max(np.abs(y)))


def newton(model: DynamicalModel, seed, max_iter: int = 100, max_halvings: int = 30):
    """Damped Newton iteration on f(y) = 0.

    Returns ``(root, None)`` on success or ``(None, reason)`` when the seed
    has to be abandoned.
    """
    try:
        y = as_state(seed, model.dim).copy()
        fy = eval_rhs(model, y)
    except NSFDError as exc:
        return None, f"rhs undefined at seed: {exc}"
    for it in range(max_iter):
        res = _inf_norm(fy)
        if res <= NEWTON_TOL * (1.0 + _inf_norm(y)):
            return y, None
        try:
            J = jacobian(model, y)
            step = np.linalg.solve(J, -fy)
        except np.linalg.LinAlgError:
            return None, f"singular Jacobian at iteration {it}, y={y.tolist()}"
        except NSFDError as exc:
            return None, f"Jacobian failed at iteration {it}: {exc}"
        lam = 1.0
        for _ in range(max_halvings + 1):
            trial = y + lam * step
            try:
                f_trial = eval_rhs(model, trial)
            except NSFDError:
                f_trial = None
            if f_trial is not None and _inf_norm(f_trial) < res:
                break
            lam *= 0.5
        else:
            return None, f"line search failed at iteration {it}, residual {res:.3e}"
        y, fy = trial, f_trial
    if _inf_norm(fy) <= NEWTON_TOL * (1.0 + _inf_norm(y)):
        return y, None
    return None, f"no convergence in {max_iter} iterations, residual {_inf_norm(fy):.3e}"


def default_seeds(model: DynamicalModel) -> list[np.ndarray]:
    """Three points per axis over [0, 10]^n."""
    axis = (0.0, 5.0, 10.0)
    return [np.array(p) for p in itertools.product(axis, repeat=model.dim)]


def _dedup(points: Iterable[np.ndarray]) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for p in points:
        if all(_inf_norm(p - q) > DEDUP_TOL * (1.0 + _inf_norm(q)) for q in out):
            out.append(np.asarray(p, dtype=float))
    return out


def find_equilibria(model: DynamicalModel, seeds: Sequence | None = None) -> list[np.ndarray]:
    """Known equilibria of ``model`` plus the Newton roots reached from ``seeds``."""
    seeds = default_seeds(model) if seeds is None else seeds
    roots = []
    for seed in seeds:
        root, reason = newton(model, seed)
        if root is None:
            logger.info("%s: seed %s skipped (%s)", model.name, np.asarray(seed).tolist(), reason)
        else:
            roots.append(root)
    return _dedup(list(model.known_equilibria) + roots)


def hyperbolic_tolerance(lam: complex) -> float:
    return 1e-9 * (1.0 + abs(lam))


def classify(model: DynamicalModel, point) -> EquilibriumReport:
    point = as_state(point, model.dim)
    res = _inf_norm(eval_rhs(model, point))
    if res > EQUILIBRIUM_TOL * (1.0 + _inf_norm(point)):
        raise UsageError(f"{model.name}: {point.tolist()} is not an equilibrium (|f| = {res:.3e})")
    eigs = tuple(eigenvalues(jacobian(model, point)))
    hyperbolic = all(abs(e.real) > hyperbolic_tolerance(e) for e in eigs)
    if any(e.real > hyperbolic_tolerance(e) for e in eigs):
        kind = Stability.UNSTABLE
    elif all(e.real < -hyperbolic_tolerance(e) for e in eigs):
        kind = Stability.STABLE
    else:
        kind = Stability.NON_HYPERBOLIC
    return EquilibriumReport(point=point, eigenvalues=eigs, classification=kind, hyperbolic=hyperbolic)


def _stable_spectrum(model: DynamicalModel, equilibria) -> list[complex]:
    spectrum = []
    for point in equilibria:
        rep = classify(model, point)
        if not rep.hyperbolic:
            raise HyperbolicityError(
                f"{model.name}: equilibrium {rep.point.tolist()} is non-hyperbolic "
                f"(eigenvalues {list(rep.eigenvalues)}); condition (C2) does not hold"
            )
        if rep.classification is Stability.STABLE:
            spectrum.extend(rep.eigenvalues)
    return spectrum


def m_S_from_eigenvalues(eigs) -> float:
    """max of -|lam|^2 / (2 Re lam); 0 for an empty set."""
    return max((-abs(e) ** 2 / (2.0 * e.real) for e in map(complex, eigs)), default=0.0)


def phi_S_from_eigenvalues(eigs) -> float:
    return min((-2.0 * e.real / abs(e) ** 2 for e in map(complex, eigs)), default=math.inf)


def threshold_m_P(alpha: float) -> float:
    return max(float(alpha), 0.0)


def threshold_m_S(model: DynamicalModel, equilibria=None) -> float:
    equilibria = model.known_equilibria if equilibria is None else equilibria
    return m_S_from_eigenvalues(_stable_spectrum(model, equilibria))


def threshold_m_GCL(decl: ConservationDecl) -> float | None:
    law = decl.law
    return law.b1 if law.kind == "gcl" else None


def threshold_phi_P(alpha: float) -> float:
    return math.inf if alpha <= 0 else 1.0 / alpha


def threshold_phi_S(model: DynamicalModel, equilibria=None) -> float:
    equilibria = model.known_equilibria if equilibria is None else equilibria
    return phi_S_from_eigenvalues(_stable_spectrum(model, equilibria))


def threshold_phi_GCL(decl: ConservationDecl) -> float | None:
    b1 = threshold_m_GCL(decl)
    return None if b1 is None else 1.0 / b1


def compute_thresholds(model: DynamicalModel, equilibria=None) -> ThresholdReport:
    """All thresholds at once; equilibria default to the model's declared ones."""
    equilibria = model.known_equilibria if equilibria is None else equilibria
    spectrum = _stable_spectrum(model, equilibria)
    return ThresholdReport(
        m_P=threshold_m_P(model.alpha),
        m_S=m_S_from_eigenvalues(spectrum),
        m_GCL=threshold_m_GCL(model.conservation),
        phi_P=threshold_phi_P(model.alpha),
        phi_S=phi_S_from_eigenvalues(spectrum),
        phi_GCL=threshold_phi_GCL(model.conservation),
    )


def discrete_jacobian(model: DynamicalModel, point, m: float, phi_value: float) -> np.ndarray:
    """Jacobian I + phi/(1 + m phi) J_C of one NSFD step at ``point``."""
    if not phi_value > 0:
        raise UsageError(f"denominator value must be positive, got {phi_value}")
    denom = 1.0 + m * phi_value
    if not denom > 0:
        raise UsageError(f"scheme denominator 1 + m*phi = {denom} is not positive (m={m}, phi={phi_value})")
    return np.eye(model.dim) + (phi_value / denom) * jacobian(model, point)
