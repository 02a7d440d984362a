"""
Built-in models: single-species population growth with three birth
functions, a Beddington-DeAngelis predator-prey system, a vaccination model
with treatment, and a synthetic two-compartment SIS model whose total
population is exactly conserved.

All right-hand sides act row-wise on ``(k, n)`` batches as well as on single
states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .exceptions import NumericalDomainError, UsageError
from .model import ConservationDecl, DynamicalModel

__all__ = [
    "BirthFunction",
    "single_species",
    "predator_prey",
    "vaccination",
    "reproduction_number",
    "sis_dcl",
    "VACCINATION_DEFAULTS",
]


@dataclass(frozen=True)
class BirthFunction:
    """Per-capita birth rate B(N), decreasing on (0, inf).

    B1: b * exp(-a N).  B2: p / (q + N**n).  B3: A / N + c.
    """

    kind: str
    a: float = 0.0
    b: float = 0.0
    p: float = 0.0
    q: float = 0.0
    n: float = 0.0
    A: float = 0.0
    c: float = 0.0

    @classmethod
    def exponential(cls, a: float = 1.0, b: float = 12.0) -> BirthFunction:
        return cls("B1", a=float(a), b=float(b))

    @classmethod
    def rational(cls, p: float, q: float, n: float) -> BirthFunction:
        return cls("B2", p=float(p), q=float(q), n=float(n))

    @classmethod
    def hyperbolic(cls, A: float, c: float) -> BirthFunction:
        return cls("B3", A=float(A), c=float(c))

    def validate(self, d: float) -> None:
        if self.kind == "B1":
            ok = self.a > 0 and self.b > d
            msg = "B1 needs a > 0 and b > d"
        elif self.kind == "B2":
            ok = self.p > 0 and self.q > 0 and self.n > 0 and self.p > self.q * d
            msg = "B2 needs p, q, n > 0 and p > q*d"
        elif self.kind == "B3":
            ok = self.A > 0 and d > self.c > 0
            msg = "B3 needs A > 0 and d > c > 0"
        else:
            raise UsageError(f"unknown birth function kind {self.kind!r}")
        if not ok:
            raise UsageError(f"{msg} (got {self}, d={d})")

    def __call__(self, N):
        N = np.asarray(N, dtype=float)
        if self.kind == "B1":
            return self.b * np.exp(-self.a * N)
        if self.kind == "B2":
            return self.p / (self.q + N ** self.n)
        return self.A / N + self.c

    def derivative(self, N):
        N = np.asarray(N, dtype=float)
        if self.kind == "B1":
            return -self.a * self.b * np.exp(-self.a * N)
        if self.kind == "B2":
            return -self.p * self.n * N ** (self.n - 1) / (self.q + N ** self.n) ** 2
        return -self.A / N**2

    def positive_equilibrium(self, d: float) -> float:
        """The N* > 0 with B(N*) = d."""
        if self.kind == "B1":
            return -math.log(d / self.b) / self.a
        if self.kind == "B2":
            return (self.p / d - self.q) ** (1.0 / self.n)
        return self.A / (d - self.c)


def single_species(birth: BirthFunction | None = None, d: float = 1.0) -> DynamicalModel:
    """dN/dt = B(N) N - d N; defaults to B1 with a = d = 1, b = 12."""
    birth = BirthFunction.exponential() if birth is None else birth
    d = float(d)
    if not d > 0:
        raise UsageError(f"death rate d must be positive, got {d}")
    birth.validate(d)
    n_star = birth.positive_equilibrium(d)

    if birth.kind == "B1":
        a, b = birth.a, birth.b

        def rhs(y):
            return b * np.exp(-a * y) * y - d * y

        def jac(y):
            e = b * np.exp(-a * y[0])
            return [[e - a * e * y[0] - d]]

    elif birth.kind == "B2":
        p, q, n = birth.p, birth.q, birth.n

        def rhs(y):
            return p * y / (q + y**n) - d * y

        def jac(y):
            yn = y[0] ** n
            return [[p / (q + yn) - p * n * yn / (q + yn) ** 2 - d]]

    else:
        A, c = birth.A, birth.c

        def rhs(y):
            # B(N) N = A + c N is only admitted on N > 0.
            if np.any(y <= 0):
                raise NumericalDomainError(f"single-species B3 is undefined at N <= 0 (y={np.asarray(y).tolist()})")
            return A + (c - d) * y

        def jac(y):
            return [[c - d]]

    equilibria = [[n_star]] if birth.kind == "B3" else [[0.0], [n_star]]
    lo = 1e-6 if birth.kind == "B3" else 0.0
    return DynamicalModel(
        name=f"single-species-{birth.kind}",
        dim=1,
        rhs=rhs,
        alpha=d,
        analytic_jacobian=jac,
        known_equilibria=tuple(equilibria),
        conservation=ConservationDecl.none(),
        box=((lo,), (max(10.0, 2.0 * n_star),)),
        params={"d": d, **{k: v for k, v in birth.__dict__.items() if k != "kind" and v}},
    )


def predator_prey(A: float = 6.0, D: float = 5.0, E: float = 7.0) -> DynamicalModel:
    """Prey with linear growth, predator with Beddington-DeAngelis response.

    dx/dt = x - A x y / (1 + x + y),  dy/dt = E x y / (1 + x + y) - D y.
    """
    A, D, E = float(A), float(D), float(E)
    if not (A > 0 and D > 0 and E > 0):
        raise UsageError(f"predator-prey parameters must be positive, got A={A}, D={D}, E={E}")
    if A == E:
        raise UsageError("predator-prey with A == E violates condition (C2): equilibria are not hyperbolic")

    def rhs(y):
        x, v = y[..., 0], y[..., 1]
        r = x * v / (1.0 + x + v)
        return np.stack([x - A * r, E * r - D * v], axis=-1)

    def jac(y):
        x, v = y
        s = 1.0 + x + v
        rx = v * (1.0 + v) / s**2
        rv = x * (1.0 + x) / s**2
        return [[1.0 - A * rx, -A * rv], [E * rx, E * rv - D]]

    equilibria = [[0.0, 0.0]]
    denom = A * E - A * D - E
    if denom > 0:
        y_star = E / denom
        equilibria.append([A * D * y_star / E, y_star])
    return DynamicalModel(
        name="predator-prey",
        dim=2,
        rhs=rhs,
        alpha=max(A - 1.0, D),
        analytic_jacobian=jac,
        known_equilibria=tuple(equilibria),
        box=((0.0, 0.0), (10.0, 10.0)),
        params={"A": A, "D": D, "E": E},
    )


VACCINATION_DEFAULTS = {
    "Pi": 700.0,
    "beta1": 1e-4,
    "beta2": 1e-6,
    "mu": 0.03,
    "alpha_star": 0.95,
    "c": 8.0,
    "xi": 0.95,
}


def reproduction_number(Pi, beta1, beta2, mu, alpha_star, c, xi) -> float:
    return (c * beta1 * Pi / ((mu + alpha_star) * (mu + xi))
            + c * beta2 * Pi * xi / (mu * (mu + alpha_star) * (mu + xi)))


def _endemic_equilibria(Pi, beta1, beta2, mu, alpha_star, c, xi) -> list[list[float]]:
    # Eliminate S and V with the S- and V-equations; what is left is the
    # infected balance divided by I, which has no cancellation at I -> 0.
    def sv(i):
        g = c * i / (1.0 + i)
        s = (Pi + alpha_star * i) / (beta1 * g + xi + mu)
        return s, xi * s / (beta2 * g + mu)

    def balance(i):
        s, v = sv(i)
        return c / (1.0 + i) * (beta1 * s + beta2 * v) - (alpha_star + mu)

    grid = np.geomspace(1e-9, Pi / mu, 2000)
    vals = np.array([balance(i) for i in grid])
    roots = []
    for k in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        i = brentq(balance, grid[k], grid[k + 1], xtol=1e-14, rtol=1e-15)
        s, v = sv(i)
        roots.append([s, v, i])
    return roots


def vaccination(Pi=700.0, beta1=1e-4, beta2=1e-6, mu=0.03, alpha_star=0.95, c=8.0, xi=0.95) -> DynamicalModel:
    """Susceptible / vaccinated / infected model with preventive vaccine and treatment.

    Defaults are the parameters of the worked example (R0 = 0.7677).  The
    total population obeys d(S+V+I)/dt = Pi - mu (S+V+I).
    """
    p = dict(Pi=float(Pi), beta1=float(beta1), beta2=float(beta2), mu=float(mu),
             alpha_star=float(alpha_star), c=float(c), xi=float(xi))
    if any(not v > 0 for v in p.values()):
        raise UsageError(f"vaccination parameters must be positive, got {p}")
    r0 = reproduction_number(**p)
    if abs(r0 - 1.0) <= 1e-9:
        raise UsageError(f"R0 = {r0} is 1: condition (C2) fails (non-hyperbolic disease-free equilibrium)")
    Pi, b1, b2, mu, al, c, xi = (p[k] for k in ("Pi", "beta1", "beta2", "mu", "alpha_star", "c", "xi"))

    def rhs(y):
        S, V, I = y[..., 0], y[..., 1], y[..., 2]
        g = c * I / (1.0 + I)
        inf_s = b1 * g * S
        inf_v = b2 * g * V
        return np.stack([
            Pi - inf_s - xi * S + al * I - mu * S,
            xi * S - inf_v - mu * V,
            inf_s + inf_v - al * I - mu * I,
        ], axis=-1)

    def jac(y):
        S, V, I = y
        g = c * I / (1.0 + I)
        dg = c / (1.0 + I) ** 2
        return [
            [-b1 * g - xi - mu, 0.0, -b1 * dg * S + al],
            [xi, -b2 * g - mu, -b2 * dg * V],
            [b1 * g, b2 * g, b1 * dg * S + b2 * dg * V - al - mu],
        ]

    dfe = [Pi / (xi + mu), xi * Pi / (mu * (xi + mu)), 0.0]
    hi = 1.5 * Pi / mu
    return DynamicalModel(
        name="vaccination",
        dim=3,
        rhs=rhs,
        alpha=max(c * b1 + xi + mu, c * b2 + mu, al + mu),
        analytic_jacobian=jac,
        known_equilibria=tuple([dfe] + _endemic_equilibria(**p)),
        conservation=ConservationDecl.gcl(a1=Pi, b1=mu),
        box=((0.0,) * 3, (hi,) * 3),
        params={**p, "R0": r0},
    )


def sis_dcl(beta: float = 0.5, gamma: float = 1.0, bound: float = 100.0, total: float = 10.0) -> DynamicalModel:
    """dS/dt = -beta S I + gamma I,  dI/dt = beta S I - gamma I.

    ``alpha = max(gamma, beta * bound)`` makes condition (C1) hold on the
    operating box [0, bound]^2 only.  Every state with I = 0 or
    S = gamma / beta is an equilibrium; the two on the level set
    S + I = ``total`` are declared.  They are non-hyperbolic, as for any
    system with an exact conservation law.
    """
    beta, gamma, bound, total = float(beta), float(gamma), float(bound), float(total)
    if not (beta > 0 and gamma > 0 and bound > 0 and total > 0):
        raise UsageError("sis-dcl parameters must be positive")

    def rhs(y):
        S, I = y[..., 0], y[..., 1]
        flow = beta * S * I - gamma * I
        return np.stack([-flow, flow], axis=-1)

    def jac(y):
        S, I = y
        return [[-beta * I, -beta * S + gamma], [beta * I, beta * S - gamma]]

    equilibria = [[total, 0.0]]
    s_star = gamma / beta
    if total > s_star:
        equilibria.append([s_star, total - s_star])
    return DynamicalModel(
        name="sis-dcl",
        dim=2,
        rhs=rhs,
        alpha=max(gamma, beta * bound),
        analytic_jacobian=jac,
        known_equilibria=tuple(equilibria),
        conservation=ConservationDecl.dcl(),
        box=((0.0, 0.0), (bound, bound)),
        params={"beta": beta, "gamma": gamma, "bound": bound, "total": total},
    )
