"""Level solver, convergence tables, and basis-frequency tools."""
import math
import random

import pytest
from mpmath import mp, mpf

from anharmonic import (
    ConvergenceFailure,
    ModelParams,
    Omega0Model,
    Omega0Policy,
    SolveRequest,
    convergence_table,
    fit_omega0_model,
    format_fixed,
    make_context,
    optimize_omega0,
    predict_omega0,
    solve_levels,
)


def _energy(lam, omega=1, policy=None, digits=8):
    request = SolveRequest(
        params=ModelParams(omega=omega, lam=lam),
        levels=(0,),
        target_digits=digits,
        omega0=policy or Omega0Policy.optimize(),
    )
    return solve_levels(request)


def test_ground_state_unit_coupling():
    result = _energy("1")
    assert format_fixed(result.energies[0], 8) == "0.80377065"
    assert result.rows[0].order == 8
    orders = [row.order for row in result.rows]
    assert orders == sorted(set(orders))


def test_strong_coupling_with_fixed_basis_frequency():
    result = _energy("20000", policy=Omega0Policy.fixed("84.0"))
    assert format_fixed(result.energies[0], 8) == "18.13722907"
    assert result.final_order <= 12
    assert result.omega0_used == mpf("84.0")


def test_zero_coupling_is_exact_for_every_policy():
    for policy in (Omega0Policy.fixed("7.0"), Omega0Policy.formula(),
                   Omega0Policy.optimize()):
        request = SolveRequest(
            params=ModelParams(omega=1, lam=0),
            levels=(0, 1, 4),
            omega0=policy,
            n_start=8,
        )
        result = solve_levels(request)
        assert result.energies == (mpf("0.5"), mpf("1.5"), mpf("4.5"))
        assert result.omega0_used == 1


def test_first_six_excited_levels_unit_coupling():
    request = SolveRequest(
        params=ModelParams(lam=1),
        levels=(1, 2, 3, 4, 5, 6),
        n_start=8,
    )
    result = solve_levels(request)
    rendered = [format_fixed(e, 8) for e in result.energies]
    assert rendered == [
        "2.73789227",
        "5.17929169",
        "7.94240398",
        "10.96358309",
        "14.20313910",
        "17.63404912",
    ]
    for level, pair in zip(request.levels, result.pairs):
        assert pair.level == level // 2


def test_interleaving_of_parity_sectors():
    request = SolveRequest(
        params=ModelParams(lam=5),
        levels=tuple(range(8)),
        n_start=8,
    )
    result = solve_levels(request)
    with make_context(8).workdps():
        for lower, upper in zip(result.energies, result.energies[1:]):
            assert lower < upper


def test_scaling_relation():
    # E(omega, lambda) = omega * E(1, lambda / omega**3)
    left = _energy("8", omega=2).energies[0]
    right = _energy("1").energies[0]
    assert format_fixed(left, 8) == format_fixed(2 * right, 8)


def test_converged_energy_ignores_basis_frequency_choice():
    rendered = set()
    for policy in (Omega0Policy.fixed(1), Omega0Policy.formula(),
                   Omega0Policy.optimize()):
        result = _energy("1", policy=policy)
        rendered.add(format_fixed(result.energies[0], 8))
    assert rendered == {"0.80377065"}


def test_convergence_failure_reports_last_rows():
    request = SolveRequest(
        params=ModelParams(lam=1),
        levels=(0,),
        omega0=Omega0Policy.fixed(1),
        n_start=8,
        n_max=10,
    )
    with pytest.raises(ConvergenceFailure) as info:
        solve_levels(request)
    failure = info.value
    assert len(failure.rows) == 2
    assert failure.rows[-1].order == 10
    assert failure.omega0_used == 1


def test_request_validation():
    params = ModelParams(lam=1)
    with pytest.raises(ValueError):
        SolveRequest(params=params, levels=())
    with pytest.raises(ValueError):
        SolveRequest(params=params, levels=(0, 0))
    with pytest.raises(ValueError):
        SolveRequest(params=params, levels=(-1,))
    with pytest.raises(ValueError):
        SolveRequest(params=params, levels=(0,), target_digits=0)
    with pytest.raises(ValueError):
        SolveRequest(params=params, levels=(30,), n_start=8)
    with pytest.raises(ValueError):
        SolveRequest(params=params, levels=(0,), n_start=8, n_max=7)
    with pytest.raises(ValueError):
        SolveRequest(params=params, levels=(0.5,))


def test_policy_validation():
    with pytest.raises(ValueError):
        Omega0Policy("adaptive")
    with pytest.raises(ValueError):
        Omega0Policy("fixed")
    with pytest.raises(ValueError):
        Omega0Policy("fixed", value=-2)
    with pytest.raises(ValueError):
        Omega0Policy("formula", value=3)


def test_convergence_table_weak_coupling():
    ctx = make_context(8)
    table = convergence_table(ModelParams(lam="0.7"), 1, (5, 15), ctx)
    assert [row.order for row in table] == [5, 15]
    assert format_fixed(table[0].energies[0], 8) == "0.74425930"
    assert format_fixed(table[1].energies[0], 8) == "0.74390350"


def test_convergence_table_tuned_frequency():
    ctx = make_context(8)
    table = convergence_table(ModelParams(lam=1), "4.5", (1, 7), ctx)
    assert format_fixed(table[0].energies[0], 8) == "0.85896477"
    assert format_fixed(table[1].energies[0], 8) == "0.80377065"


def test_convergence_table_zero_coupling_rows():
    ctx = make_context(8)
    table = convergence_table(ModelParams(lam=0), 1, (1, 2, 3), ctx)
    for row in table:
        assert row.energies[0] == mpf("0.5")


def test_convergence_table_validation():
    ctx = make_context(8)
    params = ModelParams(lam=1)
    with pytest.raises(ValueError):
        convergence_table(params, 1, (), ctx)
    with pytest.raises(ValueError):
        convergence_table(params, 1, (5, 5), ctx)
    with pytest.raises(ValueError):
        convergence_table(params, 1, (5, 3), ctx)
    with pytest.raises(ValueError):
        convergence_table(params, 1, (1, 5), ctx, level=6)
    with pytest.raises(ValueError):
        convergence_table(params, 0, (1, 5), ctx)


def test_predict_known_points():
    assert predict_omega0(1) == pytest.approx(3.47542)
    assert predict_omega0(math.e) == pytest.approx(5.40018, abs=1e-5)
    assert predict_omega0(20000) == pytest.approx(85.55, abs=0.05)
    assert predict_omega0("0.1") == 1.0
    with pytest.raises(ValueError):
        predict_omega0(0)
    with pytest.raises(ValueError):
        predict_omega0(-3)


def test_predict_with_custom_model():
    model = Omega0Model(a=2.0, b=1.0, c=0.0, alpha=2.0)
    assert predict_omega0(math.exp(2), model) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        Omega0Model(a=1, b=1, c=1, alpha=0)


def _truncated_energy(params, omega0, order, ctx, level=0):
    table = convergence_table(params, omega0, (order,), ctx, level=level)
    return table[0].energies[0]


def test_optimize_beats_grid_scan():
    ctx = make_context(8)
    params = ModelParams(lam=1)
    order = 3
    w_best = optimize_omega0(params, order, 0, ctx)
    e_best = _truncated_energy(params, w_best, order, ctx)
    scan_min = None
    for i in range(1101):
        w = 1 + i * 0.01
        e = _truncated_energy(params, w, order, ctx)
        if scan_min is None or e < scan_min:
            scan_min = e
    with ctx.workdps():
        assert e_best <= scan_min + mpf("1e-6")
        assert abs(e_best - mpf("0.80377065")) < mpf("1e-3")
    assert 1 <= w_best <= 12


def test_optimize_matches_reference_point():
    ctx = make_context(8)
    params = ModelParams(lam=100)
    w = optimize_omega0(params, 6, 0, ctx)
    assert _truncated_energy(params, w, 6, ctx) <= mpf("3.13140")
    assert w > 1


def test_optimize_zero_coupling_short_circuit():
    ctx = make_context(8)
    params = ModelParams(omega=1, lam=0)
    w = optimize_omega0(params, 5, 0, ctx)
    assert w == 1.0
    assert _truncated_energy(params, w, 5, ctx) == mpf(1) / 2


def test_optimize_order_precondition():
    ctx = make_context(8)
    with pytest.raises(ValueError):
        optimize_omega0(ModelParams(lam=1), 2, 9, ctx)


def test_fit_recovers_exact_linear_data():
    # c = 0 makes alpha irrelevant, so a and b must come back exactly
    true = Omega0Model(a=1.0, b=2.0, c=0.0, alpha=5.0)
    points = [(math.exp(k / 2), predict_omega0(math.exp(k / 2), true))
              for k in range(8)]
    fitted = fit_omega0_model(points)
    assert fitted.a == pytest.approx(1.0, abs=1e-6)
    assert fitted.b == pytest.approx(2.0, abs=1e-6)
    assert fitted.c == pytest.approx(0.0, abs=1e-6)


def test_fit_recovers_on_grid_power_model():
    rng = random.Random(303)
    true = Omega0Model(a=1.5, b=2.25, c=3e-5, alpha=3.0)
    points = []
    for _ in range(40):
        lam = 10 ** rng.uniform(0, 4)
        points.append((lam, predict_omega0(lam, true)))
    fitted = fit_omega0_model(points)
    for lam, w in points:
        assert predict_omega0(lam, fitted) == pytest.approx(w, rel=1e-3)


def test_fit_input_validation():
    good = [(10.0 ** k, 3.0 + 2.0 * k) for k in range(5)]
    fit_omega0_model(good)
    with pytest.raises(ValueError):
        fit_omega0_model(good[:4])
    with pytest.raises(ValueError):
        fit_omega0_model(good + [(0.5, 3.0)])


def test_variational_monotonicity_random_couplings():
    rng = random.Random(20240811)
    ctx = make_context(8)
    for _ in range(4):
        lam = round(10 ** rng.uniform(-2, 2), 4)
        params = ModelParams(lam=str(lam))
        table = convergence_table(params, predict_omega0(lam), (4, 6, 9, 13), ctx)
        with ctx.workdps():
            for older, newer in zip(table, table[1:]):
                assert newer.energies[0] <= older.energies[0] + mpf(10) ** -14


def test_result_accessors():
    result = _energy("1")
    assert result.pair(0) is result.pairs[0]
    with pytest.raises(KeyError):
        result.pair(3)
