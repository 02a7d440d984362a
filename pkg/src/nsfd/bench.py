"""
Benchmark harness: model/scheme construction from flat configuration,
RK4 reference solutions, error tables, threshold reports, trajectory files
and equilibrium listings.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import csvio
from .conservation import ConservationReport, check_conservation, population_series
from .equilibria import (
    ThresholdReport,
    classify,
    compute_thresholds,
    find_equilibria,
    threshold_m_GCL,
    threshold_m_P,
)
from .exceptions import ConvergenceError, HyperbolicityError, UsageError
from .integrators import SchemeSpec, DenominatorSpec, Trajectory, integrate
from .model import DynamicalModel, as_state
from .models import BirthFunction, predator_prey, single_species, sis_dcl, vaccination

__all__ = [
    "MODEL_NAMES",
    "DEFAULT_Y0",
    "TABLE_DTS",
    "ErrorRow",
    "RunConfig",
    "build_model",
    "build_scheme",
    "default_m",
    "table_schemes",
    "reference_solution",
    "compute_errors",
    "run_table",
    "run_thresholds",
    "run_simulation",
    "run_conservation",
    "run_equilibria",
]

logger = logging.getLogger(__name__)

TABLE_DTS = (1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
GRID_TOL = 1e-9


def _single_species(p: dict) -> DynamicalModel:
    kind = str(p.pop("birth", "B1")).upper()
    d = float(p.pop("d", 1.0))
    if kind == "B1":
        birth = BirthFunction.exponential(a=p.pop("a", 1.0), b=p.pop("b", 12.0))
    elif kind == "B2":
        birth = BirthFunction.rational(p=p.pop("p", 2.0), q=p.pop("q", 1.0), n=p.pop("n", 1.0))
    elif kind == "B3":
        birth = BirthFunction.hyperbolic(A=p.pop("A", 2.0), c=p.pop("c", 0.5))
    else:
        raise UsageError(f"birth must be one of B1, B2, B3, got {kind!r}")
    return single_species(birth, d)


_BUILDERS = {
    "single-species": (_single_species, None),
    "predator-prey": (lambda p: predator_prey(**p), ("A", "D", "E")),
    "vaccination": (lambda p: vaccination(**p), ("Pi", "beta1", "beta2", "mu", "alpha_star", "c", "xi")),
    "sis-dcl": (lambda p: sis_dcl(**p), ("beta", "gamma", "bound", "total")),
}

MODEL_NAMES = tuple(_BUILDERS)

DEFAULT_Y0 = {
    "single-species": (2.0,),
    "predator-prey": (4.5, 1.0),
    "vaccination": (5000.0, 20000.0, 1000.0),
    "sis-dcl": (8.0, 2.0),
}


def build_model(name: str, params: Mapping[str, object] | None = None) -> DynamicalModel:
    if name not in _BUILDERS:
        raise UsageError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
    builder, allowed = _BUILDERS[name]
    p = {}
    for key, value in (params or {}).items():
        if key == "birth":
            p[key] = value
            continue
        try:
            p[key] = float(value)
        except (TypeError, ValueError):
            raise UsageError(f"parameter {key}={value!r} is not a number") from None
    if allowed is not None:
        unknown = set(p) - set(allowed)
        if unknown:
            raise UsageError(f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}")
        return builder(p)
    model = builder(p)
    if p:
        raise UsageError(f"unknown parameter(s) for {name}: {', '.join(sorted(p))}")
    return model


@dataclass
class RunConfig:
    model: str = "single-species"
    params: dict = field(default_factory=dict)
    scheme: str = "nsfd"
    m: float | None = None
    phi: str = "identity"
    tau: float | None = None
    b1: float | None = None
    dt: float = 0.1
    steps: int | None = None
    horizon: float | None = None
    y0: Sequence[float] | None = None
    out: str | None = None
    ref_dt: float = 1e-5

    def __post_init__(self):
        if not self.dt > 0:
            raise UsageError(f"--dt must be positive, got {self.dt}")
        if self.steps is not None and self.steps < 0:
            raise UsageError(f"--steps must be nonnegative, got {self.steps}")
        if self.horizon is not None and self.horizon < 0:
            raise UsageError(f"--horizon must be nonnegative, got {self.horizon}")
        if not self.ref_dt > 0:
            raise UsageError(f"--ref-dt must be positive, got {self.ref_dt}")

    def build_model(self) -> DynamicalModel:
        return build_model(self.model, self.params)

    def initial_state(self, model: DynamicalModel) -> np.ndarray:
        y0 = DEFAULT_Y0.get(self.model) if self.y0 is None else self.y0
        return as_state(y0, model.dim)

    def step_count(self) -> int:
        if self.steps is not None:
            return int(self.steps)
        if self.horizon is not None:
            return _grid_count(self.horizon, self.dt, "--horizon / --dt")
        return 100


def _grid_count(span: float, step: float, what: str) -> int:
    ratio = span / step
    count = round(ratio)
    if abs(ratio - count) > GRID_TOL * max(1.0, abs(ratio)):
        raise UsageError(f"{what} = {ratio} is not an integer")
    return int(count)


def default_m(model: DynamicalModel) -> float:
    """m_required; without (C2) only the positivity and GCL bounds apply."""
    try:
        return compute_thresholds(model).m_required
    except HyperbolicityError as exc:
        m = max(threshold_m_P(model.alpha), threshold_m_GCL(model.conservation) or 0.0)
        logger.info("%s; default m = %g from positivity/conservation only", exc, m)
        return m


def build_scheme(config: RunConfig, model: DynamicalModel) -> SchemeSpec:
    kind = config.scheme
    if kind in ("euler", "rk2", "rk4"):
        return SchemeSpec(kind)
    m = config.m
    if kind == "nsfd" and m is None:
        m = default_m(model)
    phi = _build_phi(config, model, m if kind == "nsfd" else 0.0)
    if kind == "nsfd":
        return SchemeSpec.nsfd(m, phi)
    if kind == "nonstd-euler":
        return SchemeSpec.nonstd_euler(phi)
    raise UsageError(f"unknown scheme {kind!r}")


def _build_phi(config: RunConfig, model: DynamicalModel, m: float) -> DenominatorSpec:
    kind = config.phi
    if kind == "identity":
        return DenominatorSpec.identity()
    if kind == "exp":
        if config.tau is None:
            raise UsageError("--phi exp needs --tau")
        return DenominatorSpec.exponential(config.tau)
    if kind in ("exact-linear", "exact-gcl"):
        b1 = config.b1
        if b1 is None:
            law = model.conservation.law
            if law.kind != "gcl":
                raise UsageError(f"--phi {kind} needs --b1 (model {model.name} declares no GCL)")
            b1 = law.b1
        if kind == "exact-linear":
            return DenominatorSpec.exact_linear(b1)
        return DenominatorSpec.exact_gcl(m, b1)
    raise UsageError(f"unknown denominator {kind!r}")


def table_schemes(m: float = 1.5, tau: float = 1.5) -> list[SchemeSpec]:
    """The three schemes compared in the single-species error tables."""
    return [
        SchemeSpec.nsfd(m, DenominatorSpec.identity()),
        SchemeSpec.nonstd_euler(DenominatorSpec.exponential(tau)),
        SchemeSpec.euler(),
    ]


@dataclass(frozen=True)
class ErrorRow:
    dt: float
    scheme: str
    error: float
    error_T: float
    diverged: bool = False


def reference_solution(model: DynamicalModel, y0, T: float, dt_ref: float = 1e-5) -> Trajectory:
    """RK4 on the fine grid k * dt_ref covering [0, T]."""
    if not dt_ref > 0:
        raise UsageError(f"reference step must be positive, got {dt_ref}")
    steps = _grid_count(T, dt_ref, "T / dt_ref")
    ref = integrate(model, SchemeSpec.rk4(), y0, dt_ref, steps)
    if ref.diverged:
        raise ConvergenceError(f"reference RK4 run diverged: {ref.message}")
    return ref


def compute_errors(traj: Trajectory, ref: Trajectory, label: str | None = None) -> ErrorRow:
    """Max-norm and summed errors over grid points k >= 1."""
    label = traj.scheme.label if label is None else label
    stride = _grid_count(traj.dt, ref.dt, "dt / dt_ref")
    if stride < 1:
        raise UsageError(f"trajectory step {traj.dt} is finer than reference step {ref.dt}")
    last = (len(traj) - 1) * stride
    if last > len(ref) - 1:
        raise UsageError("trajectory extends beyond the reference solution")
    if traj.diverged:
        return ErrorRow(traj.dt, label, math.inf, math.inf, diverged=True)
    if len(traj) < 2:
        return ErrorRow(traj.dt, label, 0.0, 0.0)
    diff = traj.states[1:] - ref.states[stride:last + 1:stride]
    norms = np.max(np.abs(diff), axis=1)
    return ErrorRow(traj.dt, label, float(norms.max()), float(norms.sum()))


def run_table(model: DynamicalModel | None = None, y0=(2.0,), horizon: float = 10.0,
              dts: Sequence[float] = TABLE_DTS, ref_dt: float = 1e-5,
              schemes: Sequence[SchemeSpec] | None = None, reference: Trajectory | None = None,
              out=None) -> list[ErrorRow]:
    """Error table of ``schemes`` against an RK4 reference, one row per (dt, scheme)."""
    model = single_species() if model is None else model
    schemes = table_schemes() if schemes is None else list(schemes)
    ref = reference_solution(model, y0, horizon, ref_dt) if reference is None else reference
    rows = []
    for dt in dts:
        steps = _grid_count(horizon, dt, "horizon / dt")
        for scheme in schemes:
            try:
                traj = integrate(model, scheme, y0, dt, steps)
            except UsageError as exc:
                logger.warning("dt=%g %s rejected: %s", dt, scheme.label, exc)
                rows.append(ErrorRow(dt, scheme.label, math.nan, math.nan, diverged=True))
                continue
            rows.append(compute_errors(traj, ref))
    if out is not None:
        write_error_table(rows, out, {"model": model.name, "y0": list(map(float, y0)),
                                      "horizon": horizon, "ref_scheme": "rk4", "ref_dt": ref_dt})
    return rows


def write_error_table(rows: Sequence[ErrorRow], out, metadata: Mapping | None = None) -> None:
    csvio.write_csv(out, ["dt", "scheme", "error", "error_T", "diverged"],
                    [(r.dt, r.scheme, r.error, r.error_T, r.diverged) for r in rows], metadata)


def run_thresholds(model: DynamicalModel, out=None) -> ThresholdReport:
    report = compute_thresholds(model)
    if out is not None:
        rows = [
            ("m_P", report.m_P), ("m_S", report.m_S), ("m_GCL", report.m_GCL),
            ("m_required", report.m_required),
            ("phi_P", report.phi_P), ("phi_S", report.phi_S), ("phi_GCL", report.phi_GCL),
            ("phi_required", report.phi_required),
        ]
        csvio.write_csv(out, ["quantity", "value"], rows, {"model": model.name, "alpha": model.alpha})
    return report


def _scheme_metadata(model: DynamicalModel, scheme: SchemeSpec, dt: float, steps: int) -> dict:
    meta = {"model": model.name, "scheme": scheme.kind, "label": scheme.label}
    if scheme.kind == "nsfd":
        meta["m"] = scheme.m
    if scheme.phi is not None:
        meta["phi"] = scheme.phi.label
        meta["phi_value"] = scheme.phi(dt)
    meta["dt"] = dt
    meta["steps"] = steps
    return meta


def run_simulation(config: RunConfig, model: DynamicalModel | None = None) -> Trajectory:
    """Integrate per ``config`` and write the trajectory CSV to ``config.out``."""
    model = config.build_model() if model is None else model
    scheme = build_scheme(config, model)
    steps = config.step_count()
    traj = integrate(model, scheme, config.initial_state(model), config.dt, steps)
    write_trajectory(traj, model, config.out if config.out is not None else "-",
                     _scheme_metadata(model, scheme, config.dt, steps))
    return traj


def write_trajectory(traj: Trajectory, model: DynamicalModel, out, metadata: Mapping | None = None) -> None:
    meta = dict(metadata or {})
    meta["diverged"] = traj.diverged
    if traj.diverged:
        meta["failed_step"] = traj.failed_step
        meta["message"] = traj.message
    header = ["step", "t"] + [f"y{i + 1}" for i in range(model.dim)]
    columns = [np.arange(len(traj)), traj.times, *traj.states.T]
    if model.conservation.kind != "none":
        header.append("P_T")
        columns.append(population_series(traj.states, model.conservation))
    rows = ([int(c[0])] + [float(v) for v in c[1:]] for c in zip(*columns))
    csvio.write_csv(out, header, rows, meta, fmt=csvio.STATE_FMT)


def run_conservation(config: RunConfig, model: DynamicalModel | None = None) -> ConservationReport:
    model = config.build_model() if model is None else model
    if model.conservation.kind == "none":
        raise UsageError(f"model {model.name} declares no conservation law")
    scheme = build_scheme(config, model)
    steps = config.step_count()
    traj = integrate(model, scheme, config.initial_state(model), config.dt, steps)
    report = check_conservation(traj, model.conservation)
    meta = _scheme_metadata(model, scheme, config.dt, steps)
    meta["diverged"] = traj.diverged
    rows = [("kind", report.kind), ("max_deviation", report.max_deviation),
            ("monotone", report.monotone), ("limit_error", report.limit_error),
            ("exact_deviation", report.exact_deviation)]
    csvio.write_csv(config.out if config.out is not None else "-", ["quantity", "value"], rows, meta)
    return report


def run_equilibria(model: DynamicalModel, seeds=None, out=None):
    points = find_equilibria(model, seeds)
    reports = [classify(model, p) for p in points]
    if out is not None:
        header = ["index"] + [f"y{i + 1}" for i in range(model.dim)] + ["classification", "hyperbolic", "eigenvalues"]
        rows = []
        for i, rep in enumerate(reports):
            eigs = ";".join(f"{e.real:.14e}{e.imag:+.14e}j" for e in rep.eigenvalues)
            rows.append([i, *map(float, rep.point), rep.classification.value, rep.hyperbolic, eigs])
        csvio.write_csv(out, header, rows, {"model": model.name})
    return reports
