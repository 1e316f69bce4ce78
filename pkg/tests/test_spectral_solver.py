import math
import warnings

import numpy as np
import pytest

from talbot.fourier import RationalTime, grid, sigma1_samples, sigma2_samples
from talbot.linear_solver import solve_riemann_case2
from talbot.spectral_solver import (
    DivergedError,
    GridField,
    ManakovState,
    SolverConfig,
    conserved,
    rk4_step,
    simulate,
)


def smooth_field(M, scale=1.0):
    x = grid(M)
    return scale * (np.exp(1j * x) + 0.5 * np.exp(-2j * x) + 0.25)


def test_grid_field_validation():
    with pytest.raises(ValueError):
        GridField(np.zeros(100))  # not a power of two
    with pytest.raises(ValueError):
        GridField(np.zeros(2 ** 5))  # below the minimum size
    with pytest.raises(ValueError):
        GridField(np.full(128, np.nan))
    assert GridField(np.zeros(128)).M == 128


def test_state_requires_matching_grids():
    with pytest.raises(ValueError):
        ManakovState(GridField(np.zeros(128)), GridField(np.zeros(256)), 0.0)


def test_config_stability_envelope():
    cfg = SolverConfig(M=512)
    # default dt sits at y = 0.5, inside the quiet zone
    assert cfg.resolved_dt() * (256 ** 2) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        SolverConfig(M=512, dt=3.0 / 256 ** 2).resolved_dt()
    with pytest.warns(UserWarning):
        SolverConfig(M=512, dt=2.0 / 256 ** 2).resolved_dt()


def test_conserved_examples():
    M = 256
    x = grid(M)
    u = np.exp(1j * 3 * x)  # |u| = 1 everywhere
    state = ManakovState(GridField(u), GridField(u.copy()), 0.0)
    c = conserved(state)
    assert c.norm_u_sq == pytest.approx(2 * math.pi)
    assert c.inner_uv == pytest.approx(c.norm_u_sq)
    s1 = sigma1_samples(M)
    c2 = conserved(ManakovState(GridField(s1), GridField(sigma2_samples(M)), 0.0))
    assert c2.norm_u_sq == pytest.approx(2 * math.pi, rel=1e-2)
    assert c2.inner_uv.real == pytest.approx(2 * math.pi / 10, rel=1e-2)


def test_zero_state_stays_zero():
    M = 128
    res = simulate(GridField(np.zeros(M)), GridField(np.zeros(M)),
                   SolverConfig(M=M), 0.2)
    assert np.max(np.abs(res.final.u.values)) == 0.0
    assert np.max(np.abs(res.final.v.values)) == 0.0


def test_plane_wave_is_stationary():
    # f = e^{ix}, g = 0: the dispersion -1 and the self-interaction +1
    # cancel exactly, so the profile never moves.
    M = 128
    x = grid(M)
    res = simulate(GridField(np.exp(1j * x)), GridField(np.zeros(M)),
                   SolverConfig(M=M), 0.5)
    assert np.max(np.abs(res.final.u.values - np.exp(1j * x))) < 1e-9
    assert np.max(np.abs(res.final.v.values)) < 1e-12


def test_linear_only_matches_exact_symbol():
    # Band-limited data under linear_only must follow e^{-ik^2 t} exactly.
    M = 256
    x = grid(M)
    f = smooth_field(M)
    res = simulate(GridField(f), GridField(np.zeros(M)),
                   SolverConfig(M=M, linear_only=True), 0.3)
    expected = (np.exp(1j * x) * np.exp(-1j * 0.3)
                + 0.5 * np.exp(-2j * x) * np.exp(-4j * 0.3) + 0.25)
    assert np.max(np.abs(res.final.u.values - expected)) < 1e-8


def test_linear_only_matches_linear_solver_on_step():
    # Cross-check against the closed-form free evolution of band-limited
    # step data; this is the oracle pairing used by the acceptance suite.
    from talbot.dispersion import DispersionQuartet, IntegralPolynomial
    from talbot.fourier import evaluate_modes, riemann_coefficient

    M = 256
    N = M // 16
    ks = np.arange(-N, N + 1)
    coeffs = np.array([riemann_coefficient(int(k)) for k in ks])
    x = grid(M)
    f0 = evaluate_modes(ks, coeffs, x)
    res = simulate(GridField(f0), GridField(np.zeros(M)),
                   SolverConfig(M=M, linear_only=True), 0.3)
    free = DispersionQuartet(
        IntegralPolynomial([0, 0, -1]), IntegralPolynomial([0]),
        IntegralPolynomial([0]), IntegralPolynomial([0, 0, -1]),
    )
    exact = solve_riemann_case2(free, 0.3, x, N)
    assert np.max(np.abs(res.final.u.values - exact.u_values)) < 1e-8


def test_symmetry_equal_data():
    M = 128
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = simulate(GridField(sigma1_samples(M)), GridField(sigma1_samples(M)),
                       SolverConfig(M=M), 0.05,
                       snapshot_times=[0.01, 0.03, 0.05])
    for _, state in res.snapshots:
        assert np.max(np.abs(state.u.values - state.v.values)) < 1e-10


def test_gauge_covariance():
    M = 128
    f = smooth_field(M)
    g = 0.3 * smooth_field(M, scale=0.5)
    theta = 0.77
    r1 = simulate(GridField(f), GridField(g), SolverConfig(M=M), 0.2)
    r2 = simulate(GridField(f * np.exp(1j * theta)), GridField(g * np.exp(1j * theta)),
                  SolverConfig(M=M), 0.2)
    assert np.max(np.abs(r2.final.u.values - np.exp(1j * theta) * r1.final.u.values)) < 1e-12
    assert np.max(np.abs(r2.final.v.values - np.exp(1j * theta) * r1.final.v.values)) < 1e-12


def test_reversibility_smooth_data():
    M = 128
    cfg = SolverConfig(M=M)
    dt = cfg.resolved_dt()
    state = ManakovState(GridField(smooth_field(M)), GridField(np.zeros(M)), 0.0)
    n = 200
    for _ in range(n):
        state = rk4_step(state, cfg, dt)
    for _ in range(n):
        state = rk4_step(state, cfg, -dt)
    assert np.max(np.abs(state.u.values - smooth_field(M))) < 1e-6


def test_grid_refinement_smooth_data():
    # Band-limited data is resolved on both grids, so doubling M only
    # changes the time discretization; compare on the coarse nodes.
    f_small = smooth_field(128)
    f_big = smooth_field(256)
    dt = 1e-4
    r1 = simulate(GridField(f_small), GridField(np.zeros(128)),
                  SolverConfig(M=128, dt=dt), 0.1)
    r2 = simulate(GridField(f_big), GridField(np.zeros(256)),
                  SolverConfig(M=256, dt=dt), 0.1)
    assert np.max(np.abs(r2.final.u.values[::2] - r1.final.u.values)) < 1e-9


def test_conservation_drift_fourth_order():
    # RK4 is not symplectic: invariant drift scales like dt^4, so halving
    # the step should shrink it by roughly 16x for well-resolved data.
    M = 128
    f = smooth_field(M, scale=3.0)

    def drift(dt):
        res = simulate(GridField(f), GridField(0.5 * f),
                       SolverConfig(M=M, dt=dt), 0.5, conservation_stride=10)
        vals = np.array([c.norm_u_sq for _, c in res.conservation])
        return float(np.max(np.abs(vals - vals[0])) / vals[0])

    ratio = drift(4e-4) / drift(2e-4)
    assert 10.0 < ratio < 22.0


def test_snapshots_land_exactly():
    M = 128
    times = [0.013, RationalTime(1, 100), 0.05]
    res = simulate(GridField(smooth_field(M)), GridField(np.zeros(M)),
                   SolverConfig(M=M), 0.05, snapshot_times=times)
    recorded = [t for t, _ in res.snapshots]
    assert recorded[0] == 0.013
    assert isinstance(recorded[1], RationalTime)
    assert res.final.t == 0.05


def test_snapshot_outside_range_rejected():
    M = 128
    with pytest.raises(ValueError):
        simulate(GridField(np.zeros(M)), GridField(np.zeros(M)),
                 SolverConfig(M=M), 0.1, snapshot_times=[0.2])


def test_dealias_close_to_plain_for_smooth_data():
    M = 128
    f = smooth_field(M)
    r1 = simulate(GridField(f), GridField(np.zeros(M)), SolverConfig(M=M), 0.1)
    r2 = simulate(GridField(f), GridField(np.zeros(M)),
                  SolverConfig(M=M, dealias=True), 0.1)
    assert np.max(np.abs(r1.final.u.values - r2.final.u.values)) < 1e-8


def test_divergence_raises():
    # Amplitude far above the nonlinear CFL limit blows up in a few steps.
    M = 128
    big = 500.0 * np.ones(M, dtype=complex)
    with pytest.raises(DivergedError):
        simulate(GridField(big), GridField(big.copy()), SolverConfig(M=M), 0.1)


def test_rk4_step_reports_stage():
    M = 128
    huge = 1e80 * np.ones(M, dtype=complex)
    state = ManakovState(GridField(huge), GridField(huge.copy()), 0.0)
    with pytest.raises(DivergedError) as exc:
        rk4_step(state, SolverConfig(M=M))
    assert exc.value.stage in (1, 2, 3, 4)
