import math

import pytest

from poc.errors import DomainError
from poc.measures import MeasureKind
from poc.toy import (
    DEFAULT_P_VALUES,
    DEFAULT_PB_GRID,
    ToyConfig,
    toy_analytic,
    toy_audit,
    toy_sweep,
)


def test_default_grids_shape():
    assert len(DEFAULT_PB_GRID) == 25
    assert all(0.0 <= v <= 2.0 / 3.0 for v in DEFAULT_PB_GRID)
    # every swept optimum 3*p_b - 1 sits on the 1e-3 control grid
    for p_b in DEFAULT_PB_GRID:
        assert abs(round(p_b * 3000) - p_b * 3000) < 1e-9
    for p in DEFAULT_P_VALUES:
        assert p in DEFAULT_PB_GRID


def test_analytic_values():
    vals = toy_analytic(0.3, 0.3)
    assert vals["u0"] == pytest.approx(-0.1)
    assert vals["cost"] == pytest.approx(1.89)
    assert vals["regret"] == pytest.approx(1.59)
    assert vals["mse"] == pytest.approx(10.5)
    assert vals["loglik"] == pytest.approx(
        -0.3 * math.log(0.3) - 0.7 * math.log(0.7)
    )
    assert toy_analytic(0.0, 0.0)["cost"] == 0.0
    assert math.isinf(toy_analytic(0.3, 0.0)["loglik"])
    assert toy_analytic(0.0, 0.0)["loglik"] == 0.0
    # ideal-cost curve -9p^2 + 9p at the matched belief
    for p, expected in ((0.0, 0.0), (1.0 / 3.0, 2.0), (2.0 / 3.0, 2.0)):
        assert toy_analytic(p, p)["cost"] == pytest.approx(expected, abs=1e-12)


def test_config_rejects_out_of_range():
    with pytest.raises(DomainError):
        ToyConfig(p_values=(0.7,))
    with pytest.raises(DomainError):
        ToyConfig(p_b_grid=(-0.1,))


def test_small_sweep_matches_analytic():
    cfg = ToyConfig(p_values=(0.15,), p_b_grid=(0.0, 0.15, 0.3, 2.0 / 3.0))
    rows, disc = toy_sweep(cfg)
    assert len(rows) == 4
    for col, worst in disc.items():
        assert worst < 1e-9, col
    # E_R column equals cost column minus the constant p
    for r in rows:
        assert r.regret == pytest.approx(r.cost - 0.15, abs=1e-9)


def test_analytic_only_sweep():
    cfg = ToyConfig(p_values=(0.3,), p_b_grid=(0.1, 0.3), use_pipeline=False)
    rows, disc = toy_sweep(cfg)
    assert all(v == 0.0 for v in disc.values())


def test_audit_reproduces_measure_table_pattern():
    entries, audits = toy_audit(ToyConfig())
    mse_report = audits[MeasureKind.MSE]
    regret_report = audits[MeasureKind.REGRET]
    loglik_report = audits[MeasureKind.LOG_LIKELIHOOD]

    # squared error: neither best-aligned nor monotone
    assert mse_report.violation_count >= 1
    assert not mse_report.best_coincide
    # regret: fully aligned with cost
    assert regret_report.violation_count == 0
    assert regret_report.best_coincide
    # log-likelihood: best-aligned but not monotone
    assert loglik_report.violation_count >= 1
    assert loglik_report.best_coincide

    # witnesses arbitrarily close to the optimum for mse and loglik
    for report in (mse_report, loglik_report):
        close = [
            v for v in report.violations
            if abs(v.id_i - 0.3) <= 1e-2 + 1e-12 and abs(v.id_j - 0.3) <= 1e-2 + 1e-12
        ]
        assert close, report
