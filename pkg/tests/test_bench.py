import math

import numpy as np
import pytest

from nsfd import csvio
from nsfd.bench import (
    RunConfig,
    build_model,
    build_scheme,
    compute_errors,
    reference_solution,
    run_conservation,
    run_equilibria,
    run_simulation,
    run_table,
    run_thresholds,
    write_trajectory,
)
from nsfd.exceptions import UsageError
from nsfd.integrators import SchemeSpec, integrate
from nsfd.model import DynamicalModel
from nsfd.models import vaccination

DECAY = DynamicalModel("decay", 1, lambda y: -y, alpha=1.0, known_equilibria=[[0.0]])

# Reference error tables (T = 10, N(0) = 2): columns NSFD, N. Euler, S. Euler.
TABLE1 = {
    1.0: (0.053229803837052, 0.200391028658851, 1.895818024330166),
    1e-1: (0.002547712779198, 0.010718671314132, 0.025728835277831),
    1e-2: (3.474294297345359e-004, 9.794823732640623e-004, 0.002320869273385),
    1e-3: (3.568404980169859e-005, 9.709160784732163e-005, 2.298145180823497e-004),
    1e-4: (3.577852512925972e-006, 9.700655808853043e-006, 2.295902635651714e-005),
    1e-5: (3.578797715952931e-007, 9.699803174001431e-007, 2.295678681374369e-006),
}
TABLE2 = {
    1.0: (0.056862533841534, 0.257861518971072, 15.530365282265436),
    1e-1: (0.030063654051754, 0.109862865600443, 0.256967636704650),
    1e-2: (0.039734990275286, 0.103390564043856, 0.247233541153000),
    1e-3: (0.040703612013705, 0.102744510888389, 0.246264374931792),
    1e-4: (0.040800485618428, 0.102679929285270, 0.246167506109657),
    1e-5: (0.040810166884441, 0.102673437145564, 0.246157825305468),
}
SCHEMES = ("nsfd", "nonstd-euler", "euler")


def test_reference_solution_exponential():
    ref = reference_solution(DECAY, [1.0], 1.0, 1e-3)
    assert len(ref) == 1001
    assert ref.final[0] == pytest.approx(math.exp(-1.0), abs=1e-10)


def test_reference_solution_zero_horizon():
    ref = reference_solution(DECAY, [1.0], 0.0, 1e-3)
    assert ref.states.tolist() == [[1.0]]


def test_reference_solution_rejects_misaligned_horizon():
    with pytest.raises(UsageError):
        reference_solution(DECAY, [1.0], 1.0005, 1e-3)


def test_reference_solution_b1_limit(b1_reference):
    assert b1_reference.final[0] == pytest.approx(math.log(12), abs=1e-8)


def test_compute_errors_identical_trajectories():
    ref = reference_solution(DECAY, [1.0], 1.0, 1e-2)
    row = compute_errors(ref, ref)
    assert row.error == 0.0 and row.error_T == 0.0


def test_compute_errors_stride_alignment():
    ref = reference_solution(DECAY, [1.0], 1.0, 1e-3)
    traj = integrate(DECAY, SchemeSpec.euler(), [1.0], 0.1, 10)
    row = compute_errors(traj, ref)
    exact = np.exp(-0.1 * np.arange(1, 11))
    diff = np.abs(traj.states[1:, 0] - exact)
    assert row.error == pytest.approx(diff.max(), rel=1e-9)
    assert row.error_T == pytest.approx(diff.sum(), rel=1e-9)
    assert row.error <= row.error_T + 1e-15


def test_compute_errors_misaligned_grid():
    ref = reference_solution(DECAY, [1.0], 1.0, 1e-3)
    traj = integrate(DECAY, SchemeSpec.euler(), [1.0], 0.0015, 10)
    with pytest.raises(UsageError):
        compute_errors(traj, ref)


def test_compute_errors_diverged_row():
    square = DynamicalModel("square", 1, lambda y: y * y, alpha=0.0)
    ref = integrate(square, SchemeSpec.rk4(), [0.01], 0.01, 1000)
    traj = integrate(square, SchemeSpec.euler(), [1e100], 1.0, 10)
    row = compute_errors(traj, ref)
    assert row.diverged and row.error == math.inf


@pytest.mark.parametrize("dt", sorted(TABLE1))
def test_table_against_reference_values(b1_table, dt):
    for col, scheme in enumerate(SCHEMES):
        row = b1_table[dt][scheme]
        assert row.error == pytest.approx(TABLE1[dt][col], rel=1e-6)
        assert row.error_T == pytest.approx(TABLE2[dt][col], rel=1e-6)


def test_table_ordering(b1_table):
    for dt, cells in b1_table.items():
        e = [cells[s].error for s in SCHEMES]
        eT = [cells[s].error_T for s in SCHEMES]
        assert e[0] < e[1] < e[2], dt
        assert eT[0] < eT[1] < eT[2], dt
        for s in SCHEMES:
            assert 0 <= cells[s].error <= cells[s].error_T + 1e-15


def test_table_first_order(b1_table):
    dts = [1e-2, 1e-3, 1e-4, 1e-5]
    for s in SCHEMES:
        logs = [math.log10(b1_table[dt][s].error) for dt in dts]
        for a, b in zip(logs, logs[1:]):
            assert 0.85 <= a - b <= 1.05


def test_run_table_writes_csv(tmp_path):
    out = tmp_path / "table.csv"
    rows = run_table(DECAY, y0=[1.0], horizon=1.0, dts=[0.1, 0.01], ref_dt=1e-3, out=out)
    meta, header, data = csvio.read_csv(out)
    assert header == ["dt", "scheme", "error", "error_T", "diverged"]
    assert len(data) == len(rows) == 6
    assert meta["ref_scheme"] == "rk4"
    assert float(data[0][2]) == pytest.approx(rows[0].error, rel=1e-14)


def test_run_thresholds_values(tmp_path):
    out = tmp_path / "thr.csv"
    report = run_thresholds(build_model("vaccination"), out=out)
    _, header, rows = csvio.read_csv(out)
    values = {k: v for k, v in rows}
    assert header == ["quantity", "value"]
    assert float(values["m_required"]) == pytest.approx(0.9808)
    assert float(values["phi_required"]) == pytest.approx(1 / 0.9808)
    assert float(values["phi_required"]) == pytest.approx(1.02, abs=1e-3)
    assert report.m_GCL == 0.03


def test_run_thresholds_predator_prey():
    assert run_thresholds(build_model("predator-prey")).m_required == pytest.approx(5.0, rel=1e-12)


def test_simulation_euler_goes_negative(tmp_path):
    out = tmp_path / "euler.csv"
    cfg = RunConfig(model="vaccination", scheme="euler", dt=2.0, steps=100, y0=[500, 2000, 100], out=str(out))
    run_simulation(cfg)
    meta, header, data = csvio.read_numeric_csv(out)
    assert header == ["step", "t", "y1", "y2", "y3", "P_T"]
    assert data[:, 2:5].min() < 0
    assert meta["scheme"] == "euler"


def test_simulation_nsfd_stays_positive(tmp_path):
    out = tmp_path / "nsfd.csv"
    cfg = RunConfig(model="vaccination", scheme="nsfd", dt=2.0, steps=250, y0=[500, 2000, 100], out=str(out))
    traj = run_simulation(cfg)
    meta, _, data = csvio.read_numeric_csv(out)
    assert data[:, 2:5].min() >= 0
    dfe = vaccination().known_equilibria[0]
    assert np.max(np.abs(traj.final - dfe)) < np.max(np.abs(traj.states[0] - dfe))
    assert float(meta["m"]) == pytest.approx(0.9808)
    assert meta["diverged"] == "false"


def test_simulation_zero_steps(tmp_path):
    out = tmp_path / "zero.csv"
    run_simulation(RunConfig(steps=0, out=str(out)))
    _, header, data = csvio.read_numeric_csv(out)
    assert header == ["step", "t", "y1"] and data.tolist() == [[0.0, 0.0, 2.0]]


def test_simulation_horizon_and_divergence_metadata(tmp_path):
    out = tmp_path / "div.csv"
    traj = run_simulation(RunConfig(model="vaccination", scheme="euler", dt=40.0, horizon=40000.0, out=str(out)))
    meta, _, data = csvio.read_numeric_csv(out)
    assert traj.diverged and meta["diverged"] == "true"
    assert int(meta["failed_step"]) == traj.failed_step == len(data)


def test_trajectory_csv_round_trip(tmp_path, rng):
    model = vaccination()
    traj = integrate(model, SchemeSpec.rk4(), rng.random(3) * 1e4, 0.37, 200)
    traj.states[5] = [1e-300, 3.0 / 7.0, 2.0**60 + 1.0]
    out = tmp_path / "rt.csv"
    write_trajectory(traj, model, out)
    _, _, data = csvio.read_numeric_csv(out)
    assert data[:, 2:5].tobytes() == traj.states.tobytes()
    assert data[:, 1].tobytes() == traj.times.tobytes()


def test_csv_formatting():
    assert csvio.format_value(None) == ""
    assert csvio.format_value(True) == "true"
    assert csvio.format_value(math.inf) == "inf"
    assert csvio.format_value(-math.inf) == "-inf"
    assert csvio.format_value(math.nan) == "nan"
    assert csvio.format_value(3) == "3"
    assert csvio.format_value(0.053229803837052) == "5.32298038370520e-02"


def test_csv_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(UsageError, match="cannot write"):
        csvio.write_csv(blocker / "sub" / "out.csv", ["a"], [[1]])


def test_run_conservation_sis(tmp_path):
    out = tmp_path / "cons.csv"
    rep = run_conservation(RunConfig(model="sis-dcl", dt=10.0, steps=1000, out=str(out)))
    assert rep.max_deviation <= 1e-10
    _, _, rows = csvio.read_csv(out)
    assert dict(rows)["kind"] == "dcl"


def test_run_conservation_rejects_unconserved_model(tmp_path):
    with pytest.raises(UsageError):
        run_conservation(RunConfig(model="predator-prey", out=str(tmp_path / "x.csv")))


def test_run_equilibria(tmp_path):
    out = tmp_path / "eq.csv"
    reports = run_equilibria(build_model("predator-prey"), out=out)
    _, header, rows = csvio.read_csv(out)
    assert header[:3] == ["index", "y1", "y2"]
    assert len(rows) == len(reports) == 2
    assert {r[3] for r in rows} == {"stable", "unstable"}


def test_build_model_parameters():
    assert build_model("single-species", {"birth": "B3", "A": "2", "c": "0.5"}).known_equilibria[0][0] == 4.0
    assert build_model("predator-prey", {"A": "10"}).params["A"] == 10.0
    with pytest.raises(UsageError):
        build_model("predator-prey", {"Z": "1"})
    with pytest.raises(UsageError):
        build_model("single-species", {"birth": "B9"})
    with pytest.raises(UsageError):
        build_model("single-species", {"zz": "1"})
    with pytest.raises(UsageError):
        build_model("vaccination", {"mu": "fast"})
    with pytest.raises(UsageError):
        build_model("lotka")


def test_build_scheme_defaults():
    model = build_model("single-species")
    scheme = build_scheme(RunConfig(), model)
    assert scheme.kind == "nsfd" and scheme.m == pytest.approx(math.log(12) / 2)
    vac = build_model("vaccination")
    exact = build_scheme(RunConfig(model="vaccination", scheme="nonstd-euler", phi="exact-linear"), vac)
    assert exact.phi.b1 == 0.03
    with pytest.raises(UsageError):
        build_scheme(RunConfig(phi="exp"), model)
    with pytest.raises(UsageError):
        build_scheme(RunConfig(phi="exact-linear"), model)


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig(dt=0.0)
    with pytest.raises(UsageError):
        RunConfig(steps=-1)
    with pytest.raises(UsageError):
        RunConfig(dt=0.3, horizon=1.0).step_count()
    assert RunConfig(dt=0.1, horizon=1.0).step_count() == 10


def test_default_m_without_hyperbolicity_uses_positivity_bound():
    from nsfd.bench import default_m
    assert default_m(build_model("sis-dcl")) == 50.0
    assert default_m(build_model("vaccination")) == pytest.approx(0.9808)
