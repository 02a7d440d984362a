"""
Fixed-step integrators: the generalized NSFD scheme

    (y_{k+1} - y_k) / phi(dt) = f(y_k) + m y_k - m y_{k+1},

i.e. y_{k+1} = y_k + phi/(1 + m phi) f(y_k), the nonstandard Euler scheme
y_{k+1} = y_k + phi(dt) f(y_k), and the classical explicit Euler,
explicit trapezoidal (RK2) and four-stage Runge-Kutta baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NSFDError, NumericalDomainError, UsageError
from .model import DynamicalModel, as_state

__all__ = [
    "DenominatorSpec",
    "SchemeSpec",
    "Trajectory",
    "denominator_value",
    "exact_gcl_singularity",
    "renormalized_denominator",
    "nsfd_step",
    "nonstd_euler_step",
    "classical_step",
    "integrate",
    "CLASSICAL_KINDS",
]

SINGULARITY_GAP = 1e-9
CLASSICAL_KINDS = ("euler", "rk2", "rk4")


@dataclass(frozen=True)
class DenominatorSpec:
    """Denominator function phi(dt) = dt + O(dt^2).

    identity: dt.  exponential: (1 - exp(-tau dt)) / tau.
    exact-linear: (1 - exp(-b1 dt)) / b1, exact for dP/dt = a1 - b1 P.
    exact-gcl: phi* / (1 - m phi*) with phi* the exact-linear value; makes
    the NSFD scheme with parameter m exact for the same linear law.
    """

    kind: str = "identity"
    tau: float | None = None
    m: float | None = None
    b1: float | None = None

    def __post_init__(self):
        if self.kind == "identity":
            return
        if self.kind == "exponential":
            if self.tau is None or not self.tau > 0:
                raise UsageError(f"exponential denominator needs tau > 0, got {self.tau}")
        elif self.kind in ("exact-linear", "exact-gcl"):
            if self.b1 is None or not self.b1 > 0:
                raise UsageError(f"{self.kind} denominator needs b1 > 0, got {self.b1}")
            if self.kind == "exact-gcl" and (self.m is None or not math.isfinite(self.m)):
                raise UsageError(f"exact-gcl denominator needs a finite m, got {self.m}")
        else:
            raise UsageError(f"unknown denominator kind {self.kind!r}")

    @classmethod
    def identity(cls) -> DenominatorSpec:
        return cls("identity")

    @classmethod
    def exponential(cls, tau: float) -> DenominatorSpec:
        return cls("exponential", tau=float(tau))

    @classmethod
    def exact_linear(cls, b1: float) -> DenominatorSpec:
        return cls("exact-linear", b1=float(b1))

    @classmethod
    def exact_gcl(cls, m: float, b1: float) -> DenominatorSpec:
        return cls("exact-gcl", m=float(m), b1=float(b1))

    def __call__(self, dt: float) -> float:
        return denominator_value(self, dt)

    @property
    def label(self) -> str:
        if self.kind == "exponential":
            return f"exp(tau={self.tau:g})"
        if self.kind == "exact-linear":
            return f"exact-linear(b1={self.b1:g})"
        if self.kind == "exact-gcl":
            return f"exact-gcl(m={self.m:g} b1={self.b1:g})"
        return "identity"


def exact_gcl_singularity(m: float, b1: float) -> float | None:
    """Step size where 1 - m phi*(dt) vanishes, or None if it never does."""
    if not b1 < m:
        return None
    return -math.log1p(-b1 / m) / b1


def denominator_value(spec: DenominatorSpec, dt: float) -> float:
    if not dt > 0:
        raise UsageError(f"step size must be positive, got {dt}")
    if spec.kind == "identity":
        return float(dt)
    if spec.kind == "exponential":
        value = -math.expm1(-spec.tau * dt) / spec.tau
    else:
        value = -math.expm1(-spec.b1 * dt) / spec.b1
        if spec.kind == "exact-gcl":
            sing = exact_gcl_singularity(spec.m, spec.b1)
            if sing is not None and abs(dt - sing) <= SINGULARITY_GAP:
                raise NumericalDomainError(
                    f"{spec.label} is singular at dt={dt} (pole at dt={sing})")
            value = value / (1.0 - spec.m * value)
    if not (math.isfinite(value) and value > 0):
        raise NumericalDomainError(f"{spec.label} gives non-positive value {value} at dt={dt}")
    return value


@dataclass(frozen=True)
class SchemeSpec:
    kind: str
    m: float | None = None
    phi: DenominatorSpec | None = None

    def __post_init__(self):
        if self.kind == "nsfd":
            if self.m is None or not math.isfinite(self.m):
                raise UsageError(f"NSFD scheme needs a finite m, got {self.m}")
            if self.phi is None:
                object.__setattr__(self, "phi", DenominatorSpec.identity())
        elif self.kind == "nonstd-euler":
            if self.phi is None:
                raise UsageError("nonstandard Euler scheme needs a denominator function")
        elif self.kind not in CLASSICAL_KINDS:
            raise UsageError(f"unknown scheme {self.kind!r}")

    @classmethod
    def nsfd(cls, m: float, phi: DenominatorSpec | None = None) -> SchemeSpec:
        return cls("nsfd", m=float(m), phi=phi)

    @classmethod
    def nonstd_euler(cls, phi: DenominatorSpec) -> SchemeSpec:
        return cls("nonstd-euler", phi=phi)

    @classmethod
    def euler(cls) -> SchemeSpec:
        return cls("euler")

    @classmethod
    def rk2(cls) -> SchemeSpec:
        return cls("rk2")

    @classmethod
    def rk4(cls) -> SchemeSpec:
        return cls("rk4")

    @property
    def label(self) -> str:
        if self.kind == "nsfd":
            return f"nsfd(m={self.m:g} phi={self.phi.label})"
        if self.kind == "nonstd-euler":
            return f"nonstd-euler(phi={self.phi.label})"
        return self.kind

    def effective_denominator(self, dt: float) -> float:
        """Phi such that one step is y + Phi f(y); classical schemes: dt."""
        if self.kind == "nsfd":
            return renormalized_denominator(self.m, denominator_value(self.phi, dt))
        if self.kind == "nonstd-euler":
            return denominator_value(self.phi, dt)
        return float(dt)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    scheme: SchemeSpec
    model_name: str
    dt: float
    diverged: bool = False
    failed_step: int | None = None
    message: str = ""

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def renormalized_denominator(m: float, phi_value: float) -> float:
    if not phi_value > 0:
        raise UsageError(f"denominator value must be positive, got {phi_value}")
    denom = 1.0 + m * phi_value
    if not denom > 0:
        raise UsageError(f"scheme denominator 1 + m*phi = {denom} is not positive (m={m}, phi={phi_value})")
    return phi_value / denom


def _finite(model: DynamicalModel, y: np.ndarray) -> np.ndarray:
    if not np.isfinite(y).all():
        raise NumericalDomainError(f"{model.name}: non-finite state {y.tolist()}")
    return y


# Raw steppers skip per-stage checks: a non-finite stage always propagates
# into the returned state, which the caller checks once.
def _euler(f, y, dt):
    return y + dt * f(y)


def _rk2(f, y, dt):
    k1 = f(y)
    k2 = f(y + dt * k1)
    return y + 0.5 * dt * (k1 + k2)


def _rk4(f, y, dt):
    h2 = 0.5 * dt
    k1 = f(y)
    k2 = f(y + h2 * k1)
    k3 = f(y + h2 * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


_CLASSICAL = {"euler": _euler, "rk2": _rk2, "rk4": _rk4}


def nonstd_euler_step(model: DynamicalModel, y, phi_value: float) -> np.ndarray:
    """y + phi f(y) for a state or a batch of states."""
    if not phi_value > 0:
        raise UsageError(f"denominator value must be positive, got {phi_value}")
    y = as_state(y, model.dim, batch=True)
    with np.errstate(all="ignore"):
        return _finite(model, _euler(model.rhs, y, phi_value))


def nsfd_step(model: DynamicalModel, y, m: float, phi_value: float) -> np.ndarray:
    """y + phi/(1 + m phi) f(y) for a state or a batch of states."""
    return nonstd_euler_step(model, y, renormalized_denominator(m, phi_value))


def classical_step(kind: str, model: DynamicalModel, y, dt: float) -> np.ndarray:
    """One explicit Euler, explicit trapezoidal (RK2) or classical RK4 step."""
    if not dt > 0:
        raise UsageError(f"step size must be positive, got {dt}")
    if kind not in CLASSICAL_KINDS:
        raise UsageError(f"unknown classical scheme {kind!r}")
    y = as_state(y, model.dim, batch=True)
    with np.errstate(all="ignore"):
        return _finite(model, _CLASSICAL[kind](model.rhs, y, dt))


def integrate(model: DynamicalModel, scheme: SchemeSpec, y0, dt: float, steps: int) -> Trajectory:
    """Run ``steps`` fixed steps of size ``dt`` from ``y0``.

    A step that fails numerically ends the run early; the trajectory then
    holds the states computed so far and ``diverged`` is set.
    """
    if not dt > 0:
        raise UsageError(f"step size must be positive, got {dt}")
    if int(steps) != steps or steps < 0:
        raise UsageError(f"steps must be a nonnegative integer, got {steps}")
    steps = int(steps)
    y = as_state(y0, model.dim).copy()
    states = np.empty((steps + 1, model.dim))
    states[0] = y
    if scheme.kind in CLASSICAL_KINDS:
        stepper, h = _CLASSICAL[scheme.kind], float(dt)
    else:
        # phi is evaluated once per run.
        stepper, h = _euler, scheme.effective_denominator(dt)
    f = model.rhs
    isfinite = np.isfinite
    failed = None
    message = ""
    with np.errstate(all="ignore"):
        for k in range(1, steps + 1):
            try:
                y = stepper(f, y, h)
            except NSFDError as exc:
                failed, message = k, f"step {k}: {exc}"
                break
            if not isfinite(y).all():
                failed, message = k, f"step {k}: non-finite state {y.tolist()}"
                break
            states[k] = y
    count = steps + 1 if failed is None else failed
    return Trajectory(
        times=np.arange(count) * dt,
        states=states[:count],
        scheme=scheme,
        model_name=model.name,
        dt=float(dt),
        diverged=failed is not None,
        failed_step=failed,
        message=message,
    )
