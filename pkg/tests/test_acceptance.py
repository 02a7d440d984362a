"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; conftest prints them in the terminal
summary, and ``pytest -s`` shows them inline.
"""

import math

import numpy as np
import pytest

from nsfd import csvio
from nsfd.cli import main
from nsfd.conservation import check_dcl, check_gcl
from nsfd.equilibria import Stability, classify, compute_thresholds, discrete_jacobian
from nsfd.exceptions import HyperbolicityError
from nsfd.integrators import DenominatorSpec, SchemeSpec, integrate, nonstd_euler_step, nsfd_step
from nsfd.linalg import eigenvalues, spectral_radius
from nsfd.models import single_species, sis_dcl, vaccination

from conftest import ACCEPTANCE_RESULTS, builtin_models, random_initial_states

LN12 = math.log(12.0)
SCHEMES = ("nsfd", "nonstd-euler", "euler")
VAC_Y0 = [5000.0, 20000.0, 1000.0]


def record(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} | {detail}"
    ACCEPTANCE_RESULTS.append(line)
    print(line)
    assert ok, line


def cli_thresholds(tmp_path, model):
    out = tmp_path / f"{model}.csv"
    assert main(["thresholds", "--model", model, "--out", str(out)]) == 0
    _, _, rows = csvio.read_csv(out)
    return {k: float(v) for k, v in rows if v}


def test_criterion_1_thresholds(tmp_path):
    ss = cli_thresholds(tmp_path, "single-species")
    pp = cli_thresholds(tmp_path, "predator-prey")
    vac = cli_thresholds(tmp_path, "vaccination")
    checks = [
        abs(ss["m_required"] - 1.2425) <= 1e-3,
        abs(pp["m_required"] - 5.0) <= 1e-2,
        abs(vac["m_required"] - 0.98) <= 5e-3,
        abs(ss["phi_S"] - 0.8049) <= 1e-3,
    ]
    detail = (f"single-species m={ss['m_required']:.6f} phi_S={ss['phi_S']:.6f}, "
              f"predator-prey m={pp['m_required']:.6f}, vaccination m={vac['m_required']:.6f}")
    record(1, "threshold reproduction", all(checks), detail)


def test_criterion_2_table_spot_values(b1_table):
    nsfd = b1_table[1.0]["nsfd"].error
    euler = b1_table[1.0]["euler"].error
    spot = abs(nsfd / 0.05323 - 1) <= 0.02 and abs(euler / 1.8958 - 1) <= 0.02
    ordered = all(cells["nsfd"].error < cells["nonstd-euler"].error < cells["euler"].error
                  for cells in b1_table.values())
    detail = f"dt=1 NSFD {nsfd:.12f}, Euler {euler:.12f}, ordering over {len(b1_table)} rows {ordered}"
    record(2, "error table spot values and ordering", spot and ordered, detail)


def test_criterion_3_first_order(b1_table):
    dts = [1e-2, 1e-3, 1e-4, 1e-5]
    ratios = {s: [b1_table[a][s].error / b1_table[b][s].error for a, b in zip(dts, dts[1:])]
              for s in SCHEMES}
    ok = all(8.5 <= r <= 10.5 for rs in ratios.values() for r in rs)
    detail = ", ".join(f"{s} " + "/".join(f"{r:.3f}" for r in rs) for s, rs in ratios.items())
    record(3, "first-order convergence", ok, detail)


def test_criterion_4_positivity():
    rng = np.random.default_rng(4)
    worst = math.inf
    cases = 0
    for model in builtin_models():
        m = max(model.alpha, 0.0)
        y0 = random_initial_states(model, 200, rng)
        for dt in (0.1, 1.0, 10.0, 100.0):
            y = y0.copy()
            for _ in range(10_000):
                y = nsfd_step(model, y, m, dt)
                worst = min(worst, float(y.min()))
            cases += 1
    record(4, "positivity", worst >= -1e-12,
           f"{cases} model/dt cases x 200 states x 1e4 steps, min component {worst:.3e}")


def test_criterion_5_fixed_points():
    rng = np.random.default_rng(5)
    worst = 0.0
    checked = 0
    for model in builtin_models():
        for _ in range(20):
            m = rng.uniform(0.0, 10.0)
            dt = 10 ** rng.uniform(-3, 2)
            phi = DenominatorSpec.exponential(rng.uniform(0.1, 5.0)) if rng.random() < 0.5 \
                else DenominatorSpec.identity()
            for e in model.known_equilibria:
                moved = np.max(np.abs(nsfd_step(model, e, m, phi(dt)) - e))
                worst = max(worst, moved / (1 + np.max(np.abs(e))))
                checked += 1
    record(5, "fixed-point set equality", worst <= 1e-12,
           f"{checked} equilibrium/config pairs, max relative move {worst:.3e}")


def test_criterion_6_stability():
    radii = []
    skipped = []
    for model in builtin_models():
        try:
            m_S = compute_thresholds(model).m_S
        except HyperbolicityError:
            # Non-hyperbolic equilibria: no stable set to preserve.
            skipped.append(model.name)
            continue
        for e in model.known_equilibria:
            if classify(model, e).classification is not Stability.STABLE:
                continue
            for dt in (0.1, 1.0, 10.0, 1000.0):
                radii.append(spectral_radius(eigenvalues(discrete_jacobian(model, e, m_S, dt))))
    witnesses = []
    for model in builtin_models():
        if model.name in skipped:
            continue
        phi_S = compute_thresholds(model).phi_S
        if not math.isfinite(phi_S):
            continue
        for e in model.known_equilibria:
            if classify(model, e).classification is Stability.STABLE:
                r = spectral_radius(eigenvalues(discrete_jacobian(model, e, 0.0, 2 * phi_S)))
                witnesses.append((model.name, r))
    ok = bool(radii) and max(radii) < 1 and any(r > 1 for _, r in witnesses)
    best = max(witnesses, key=lambda w: w[1])
    detail = (f"{len(radii)} radii at m=m_S, max {max(radii):.6f}; sharpness witness {best[0]} "
              f"radius {best[1]:.4f} at m=0 dt=2 phi_S; skipped non-hyperbolic {skipped}")
    record(6, "stability preservation", ok, detail)


def test_criterion_7_instability():
    model = single_species()
    euler = integrate(model, SchemeSpec.euler(), [2.0], 1.0, 200)
    dev = euler.states[:, 0] - LN12
    alternating = np.sign(dev[1:]) != np.sign(dev[:-1])
    # first index after which every step flips sign
    k0 = next(k for k in range(len(alternating)) if alternating[k:].all())
    tail = np.abs(dev[100:])
    euler_ok = k0 <= 100 and tail.min() > 0.5 and np.abs(dev[-50:]).mean() >= 0.9 * np.abs(dev[100:150]).mean()

    rk2 = integrate(model, SchemeSpec.rk2(), [2.0], 1.0, 200)
    limit = rk2.final[0]
    converged = abs(rk2.states[-1, 0] - rk2.states[-2, 0]) <= 1e-10
    spurious = abs(limit - LN12) > 1e-3
    detail = (f"Euler alternates from k={k0}, min |N_k - N*| over k>=100 {tail.min():.4f}; "
              f"RK2 limit {limit:.6f} vs N* {LN12:.6f}")
    record(7, "instability reproduction", euler_ok and converged and spurious, detail)


def test_criterion_8_conservation():
    vac = vaccination()
    limit = 700 / 0.03
    nsfd = check_gcl(integrate(vac, SchemeSpec.nsfd(0.98), VAC_Y0, 5.0, 1000), vac.conservation)
    part_a = nsfd.monotone and nsfd.limit_error / limit <= 1e-4

    # dt = 1: phi* stays below phi_P and phi_S, so the run itself is stable.
    exact_scheme = SchemeSpec.nonstd_euler(DenominatorSpec.exact_linear(0.03))
    exact = check_gcl(integrate(vac, exact_scheme, VAC_Y0, 1.0, 1000), vac.conservation)
    part_b = exact.exact_deviation <= 1e-9 * (1 + sum(VAC_Y0))

    sis = sis_dcl()
    dcl_devs = []
    for dt in (1.0, 10.0):
        traj = integrate(sis, SchemeSpec.nsfd(max(sis.alpha, 0.0)), [8.0, 2.0], dt, 1000)
        dcl_devs.append(check_dcl(traj, sis.conservation).max_deviation)
    part_c = max(dcl_devs) <= 1e-10

    detail = (f"GCL monotone={nsfd.monotone} rel limit error {nsfd.limit_error / limit:.2e}; "
              f"exact-linear max deviation {exact.exact_deviation:.2e}; "
              f"DCL deviations {dcl_devs[0]:.1e}/{dcl_devs[1]:.1e}")
    record(8, "conservation", part_a and part_b and part_c, detail)


def test_criterion_9_renormalization():
    rng = np.random.default_rng(9)
    worst = 0.0
    count = 0
    for model in builtin_models():
        states = random_initial_states(model, 1000, rng) + 1e-6
        for y in states:
            m = rng.uniform(0.0, 10.0)
            phi = 10 ** rng.uniform(-3, 2)
            a = nsfd_step(model, y, m, phi)
            b = nonstd_euler_step(model, y, phi / (1 + m * phi))
            scale = np.maximum(np.abs(b), np.finfo(float).tiny)
            worst = max(worst, float(np.max(np.abs(a - b) / scale)))
            count += 1
    record(9, "renormalization identity", worst <= 1e-15,
           f"{count} random states, max relative difference {worst:.1e}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
