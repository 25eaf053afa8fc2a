"""Sweeps, the 1/C scaling fit, and threshold timing."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsteady.analysis import (
    FitResult,
    SweepSpec,
    evaluate_sweep_point,
    fit_scaling,
    params_at,
    run_sweep,
    time_to_threshold,
)
from wsteady.dynamics import Trajectory, integrate_rate, rate_steady_state, uniform_population
from wsteady.effective import assemble_rate_matrix
from wsteady.model import SystemParams, TARGET_INDEX, fig2_preset


# --- fit ------------------------------------------------------------------------


def test_fit_recovers_exact_law():
    points = [(c, 1.0 - 5.0 / c) for c in (25.0, 50.0, 100.0, 200.0)]
    fit = fit_scaling(points)
    assert fit.a == pytest.approx(5.0, rel=1e-12)
    assert fit.residual < 1e-15
    assert fit.points_used == 4


def test_fit_input_validation():
    with pytest.raises(ValueError):
        fit_scaling([(25.0, 0.8), (50.0, 0.9)])
    with pytest.raises(ValueError):
        fit_scaling([(25.0, 0.8), (-50.0, 0.9), (100.0, 0.95)])
    with pytest.raises(ValueError):
        fit_scaling([(25.0, 0.8), (50.0, float("nan")), (100.0, 0.95)])
    with pytest.raises(ValueError):
        # fidelities above one at every point make the fitted coefficient negative
        fit_scaling([(25.0, 1.2), (50.0, 1.1), (100.0, 1.05)])


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.1, 50.0), seed=st.integers(0, 10**6))
def test_fit_recovery_property(a, seed):
    rng = np.random.default_rng(seed)
    c = np.sort(rng.uniform(5.0, 1e4, size=6))
    fit = fit_scaling([(ci, 1.0 - a / ci) for ci in c])
    assert fit.a == pytest.approx(a, rel=1e-9)


# --- sweep spec and parameter mapping ------------------------------------------------


def test_sweep_spec_validation(fig2):
    with pytest.raises(ValueError):
        SweepSpec(axis="detuning", start=1.0, stop=2.0, points=3, base=fig2)
    with pytest.raises(ValueError):
        SweepSpec(axis="cooperativity", start=1.0, stop=2.0, points=1, base=fig2)
    with pytest.raises(ValueError):
        SweepSpec(axis="cooperativity", start=2.0, stop=2.0, points=3, base=fig2)
    with pytest.raises(ValueError):
        SweepSpec(axis="cooperativity", start=-1.0, stop=2.0, points=3, base=fig2)


def test_sweep_spec_grid(fig2):
    spec = SweepSpec(axis="cooperativity", start=25.0, stop=100.0, points=4, base=fig2)
    assert np.allclose(spec.values(), [25.0, 50.0, 75.0, 100.0])


def test_params_at_cooperativity(fig2):
    p = params_at("cooperativity", 120.0, fig2)
    assert p.cooperativity == pytest.approx(120.0, rel=1e-12)
    assert p.gamma / p.kappa == pytest.approx(fig2.gamma / fig2.kappa, rel=1e-12)
    assert p.omegas == fig2.omegas


def test_params_at_gamma_over_kappa(fig2):
    p = params_at("gamma_over_kappa", 0.9, fig2)
    assert p.cooperativity == pytest.approx(fig2.cooperativity, rel=1e-12)
    assert p.gamma / p.kappa == pytest.approx(0.9, rel=1e-12)


def test_params_at_omega(fig2):
    p = params_at("omega_over_g", 0.08, fig2)
    assert p.omegas[0] == pytest.approx(0.08)
    # relative drive strengths are preserved
    assert p.omegas[1] / p.omegas[0] == pytest.approx(fig2.omegas[1] / fig2.omegas[0])
    assert p.kappa == fig2.kappa and p.gamma == fig2.gamma


def test_params_at_rejections(fig2):
    with pytest.raises(ValueError):
        params_at("cooperativity", -5.0, fig2)
    lossless = SystemParams(kappa=0.0, gamma=0.0, omegas=fig2.omegas, deltas=fig2.deltas)
    with pytest.raises(ValueError):
        params_at("cooperativity", 50.0, lossless)
    silent = SystemParams(kappa=fig2.kappa, gamma=fig2.gamma, omegas=(0.0,) * 4,
                          deltas=fig2.deltas)
    with pytest.raises(ValueError):
        params_at("omega_over_g", 0.05, silent)


# --- sweep evaluation -----------------------------------------------------------------


def test_evaluate_point_matches_direct_steady_state(fig2, mu_fig2):
    row = evaluate_sweep_point("cooperativity", 80.0, fig2)
    ss = rate_steady_state(mu_fig2)
    assert row.fidelity == pytest.approx(ss[TARGET_INDEX], rel=1e-12)
    assert row.purity == pytest.approx(float((ss**2).sum()), rel=1e-12)
    assert row.reason == ""


def test_evaluate_point_failure_becomes_nan_row():
    # lossless base with Delta_3 at sqrt(3): the omega axis leaves it degenerate
    base = SystemParams(kappa=0.0, gamma=0.0, omegas=(0.04, 0.024, 0.04, 0.048),
                        deltas=(0.0, 1.0, np.sqrt(3.0), np.sqrt(2.0)))
    row = evaluate_sweep_point("omega_over_g", 0.05, base)
    assert math.isnan(row.fidelity) and math.isnan(row.purity)
    assert row.reason.startswith("DegenerateParameterError")


def test_run_sweep_explicit_values(fig2):
    spec = SweepSpec(axis="cooperativity", start=25.0, stop=100.0, points=2, base=fig2)
    rows = run_sweep(spec, values=np.array([80.0, 40.0]))
    assert [r.value for r in rows] == [80.0, 40.0]
    assert rows[0].fidelity > rows[1].fidelity  # fidelity grows with cooperativity


def test_run_sweep_parallel_matches_serial(fig2):
    spec = SweepSpec(axis="cooperativity", start=25.0, stop=100.0, points=4, base=fig2)
    serial = run_sweep(spec, workers=1)
    parallel = run_sweep(spec, workers=2)
    assert serial == parallel


# --- threshold timing ----------------------------------------------------------------


def _toy_trajectory(times, fidelity):
    times = np.asarray(times, dtype=float)
    fidelity = np.asarray(fidelity, dtype=float)
    pops = np.zeros((len(times), 8))
    pops[:, TARGET_INDEX] = fidelity
    pops[:, 0] = 1.0 - fidelity
    return Trajectory(times=times, populations=pops, fidelity=fidelity,
                      purity=np.ones_like(fidelity), method="rate")


def test_time_to_threshold_interpolates():
    traj = _toy_trajectory([0.0, 1.0, 2.0, 3.0], [0.0, 0.2, 0.6, 0.8])
    assert time_to_threshold(traj, 0.4) == pytest.approx(1.5)
    assert time_to_threshold(traj, 0.0) == 0.0
    assert math.isnan(time_to_threshold(traj, 0.9))


def test_preparation_time_scales_with_drive_power(fig2, mu_fig2, uniform8):
    # doubling every Omega quadruples all rates: same steady state, 4x faster clock
    strong = params_at("omega_over_g", 0.08, fig2)
    mu_strong = assemble_rate_matrix(strong)
    t_weak = time_to_threshold(integrate_rate(uniform8, mu_fig2, 3000.0, dt=1.0,
                                              sample_every=5), 0.85)
    t_strong = time_to_threshold(integrate_rate(uniform8, mu_strong, 3000.0, dt=1.0,
                                                sample_every=5), 0.85)
    assert t_strong / t_weak == pytest.approx(0.25, abs=0.01)
    assert np.max(np.abs(rate_steady_state(mu_strong) - rate_steady_state(mu_fig2))) < 1e-9


def test_fit_result_is_frozen():
    fit = FitResult(a=5.0, residual=0.0, points_used=3)
    with pytest.raises(AttributeError):
        fit.a = 6.0
