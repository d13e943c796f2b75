"""Cross-check of the series solution against an independent finite
difference discretization of the same boundary value problem."""
import numpy as np
import pytest

from annulus_gibc.forward import (
    AnnulusConfig,
    ImpedancePair,
    evaluate_potential,
    fd_solve,
    solve_defective,
    trace_current_defective,
)
from annulus_gibc.fourier import (
    FourierCoefficients,
    PeriodicGridFunction,
    grid_angles,
    synthesize,
)

IMP = ImpedancePair(5 + 2j, 10 + 1j)


def _cos_data():
    return FourierCoefficients({-1: 0.5, 0: 0.0, 1: 0.5})


def test_fd_current_converges_at_second_order():
    cfg = AnnulusConfig(0.5, kernel_truncation=2, collocation_points=16)
    f = _cos_data()
    g = trace_current_defective(f, cfg, IMP)
    errs = []
    for nr, m in [(9, 16), (17, 32), (33, 64), (65, 128)]:
        config = AnnulusConfig(0.5, 2, m)
        samples = PeriodicGridFunction(synthesize(f, grid_angles(m)).astype(complex))
        _, current = fd_solve(samples, config, IMP, radial_points=nr)
        exact = synthesize(g, grid_angles(m))
        errs.append(np.abs(current.values - exact).max())
    for coarse, fine in zip(errs, errs[1:]):
        ratio = coarse / fine
        assert 3.5 <= ratio <= 4.5, f"convergence ratio {ratio} outside [3.5, 4.5]"


def test_fd_interior_matches_series():
    cfg = AnnulusConfig(0.5, 2, 64)
    f = _cos_data()
    h = solve_defective(f, cfg, IMP)
    samples = PeriodicGridFunction(synthesize(f, grid_angles(64)).astype(complex))
    u, _ = fd_solve(samples, cfg, IMP, radial_points=65)
    rs = 0.5 + (0.5 / 64) * np.arange(65)
    th = grid_angles(64)
    # probe a handful of interior nodes
    for i in (10, 32, 50):
        for j in (0, 16, 40):
            exact = evaluate_potential(h, rs[i], th[j])
            assert abs(u[i, j] - exact) < 5e-4


def test_fd_second_parameter_set():
    imp = ImpedancePair(1 + 1j, 1 + 1j)
    cfg = AnnulusConfig(0.25, 2, 64)
    f = _cos_data()
    g = trace_current_defective(f, cfg, imp)
    samples = PeriodicGridFunction(synthesize(f, grid_angles(64)).astype(complex))
    _, current = fd_solve(samples, cfg, imp, radial_points=97)
    exact = synthesize(g, grid_angles(64))
    assert np.abs(current.values - exact).max() < 5e-4


def test_fd_rejects_coarse_radial_grid():
    cfg = AnnulusConfig(0.5, 2, 16)
    samples = PeriodicGridFunction(np.ones(16, dtype=complex))
    with pytest.raises(ValueError):
        fd_solve(samples, cfg, IMP, radial_points=4)
