import math
import random

import numpy as np
import pytest

from laakso_lab.errors import DomainError
from laakso_lab.moduli import (
    AUC_ORACLE_TOL,
    BETA_ORACLE_TOL,
    LpModel,
    ModulusTable,
    auc_model,
    auc_oracle,
    aus_model,
    beta_model,
    beta_oracle,
    check_beta_leq_auc,
    composed_power_type,
    power_type_fit,
    tabulate,
)


class TestLpModel:
    def test_rejects_bad_p(self):
        for p in (1.0, 0.5, 0, -2, math.inf):
            with pytest.raises(DomainError):
                LpModel(p)

    def test_conjugate(self):
        assert LpModel(2.0).conjugate == 2.0
        assert LpModel(3.0).conjugate == pytest.approx(1.5)

    def test_separation_cap(self):
        assert LpModel(2.0).separation_cap() == pytest.approx(math.sqrt(2))


class TestClosedForms:
    def test_auc_hilbert_point(self):
        assert auc_model(LpModel(2.0), 1.0) == pytest.approx(math.sqrt(2) - 1)

    def test_aus_same_expression_in_model(self):
        m = LpModel(3.0)
        for t in (0.1, 0.5, 1.0):
            assert aus_model(m, t) == auc_model(m, t)

    def test_beta_hilbert_full_separation(self):
        # t = sqrt(2) forces s = 1, w = 0: value 1 - sqrt(2)/2
        m = LpModel(2.0)
        assert beta_model(m, math.sqrt(2)) == pytest.approx(1 - math.sqrt(2) / 2)

    def test_beta_sign_conventions_agree(self):
        m = LpModel(2.5)
        for t in (0.2, 0.7, 1.1):
            assert beta_model(m, t, "plus") == beta_model(m, t, "minus")

    def test_domains(self):
        m = LpModel(2.0)
        with pytest.raises(DomainError):
            auc_model(m, 0.0)
        with pytest.raises(DomainError):
            auc_model(m, 1.5)
        with pytest.raises(DomainError):
            beta_model(m, m.separation_cap() + 0.01)
        with pytest.raises(DomainError):
            beta_model(m, 0.3, sign="other")

    def test_near_one_p_degenerates(self):
        # as p -> 1 the gain from a disjoint bump approaches the full bump
        m = LpModel(1.001)
        assert auc_model(m, 0.5) == pytest.approx(0.5, abs=1e-3)

    def test_monotone_in_t(self):
        m = LpModel(2.0)
        ts = np.linspace(0.01, 1.0, 40)
        vals = [auc_model(m, t) for t in ts]
        assert all(a < b for a, b in zip(vals, vals[1:]))


class TestOracles:
    def test_auc_agreement_random(self):
        rng = random.Random(11)
        for _ in range(100):
            m = LpModel(1.2 + 3.3 * rng.random())
            t = 0.05 + 0.95 * rng.random()
            assert abs(auc_model(m, t) - auc_oracle(m, t)) <= AUC_ORACLE_TOL

    def test_beta_agreement_random(self):
        rng = random.Random(12)
        for _ in range(100):
            m = LpModel(1.2 + 3.3 * rng.random())
            t = (0.05 + 0.9 * rng.random()) * m.separation_cap()
            assert abs(beta_model(m, t) - beta_oracle(m, t)) <= BETA_ORACLE_TOL

    def test_oracles_not_trusting_the_model(self):
        # the oracle is a genuine optimizer: it recovers the value from the
        # raw objective even where the closed form is least flat
        m = LpModel(4.0)
        t = 0.99 * m.separation_cap()
        assert beta_oracle(m, t) == pytest.approx(beta_model(m, t),
                                                  abs=BETA_ORACLE_TOL)


class TestLemmaGrid:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
    def test_beta_below_auc(self, p):
        grid = [0.5 * k / 50 for k in range(1, 51)]
        rep = check_beta_leq_auc(LpModel(p), grid)
        assert rep["pass"], rep
        assert rep["max_slack"] <= 0  # slack = beta - auc(2t), never positive

    def test_rejects_grid_outside_half(self):
        with pytest.raises(DomainError):
            check_beta_leq_auc(LpModel(2.0), [0.6])


class TestTables:
    def test_tabulate_and_validate(self):
        t = tabulate(LpModel(2.0), "auc", np.geomspace(0.01, 0.5, 20))
        assert t.kind == "auc"
        assert len(t.samples) == 20

    def test_table_rejects_bad_kind(self):
        with pytest.raises(DomainError):
            ModulusTable(kind="bogus", model=LpModel(2.0),
                         samples=((0.1, 0.01),))

    def test_table_rejects_disorder(self):
        with pytest.raises(ValueError):
            ModulusTable(kind="auc", model=LpModel(2.0),
                         samples=((0.2, 0.1), (0.1, 0.2)))

    @pytest.mark.parametrize("kind,p", [("auc", 1.5), ("auc", 3.0),
                                        ("beta", 2.0), ("beta", 4.0)])
    def test_power_type_recovered(self, kind, p):
        table = tabulate(LpModel(p), kind, np.geomspace(1e-3, 0.1, 40))
        _, p_hat = power_type_fit(table)
        assert abs(p_hat - p) / p <= 0.05

    def test_fit_needs_points(self):
        t = tabulate(LpModel(2.0), "auc", [0.1, 0.2])
        with pytest.raises(DomainError):
            power_type_fit(t)


class TestComposedPowerType:
    def test_frozen_value(self):
        # (p - e)(p + e - 1)/(p - e - 1) at p = 2, e = 0.1: 2.09 / 0.9
        assert composed_power_type(2.0, 0.1) == pytest.approx(2.09 / 0.9)

    def test_ratio_monotone_and_bounded(self):
        eps = [1e-1, 1e-2, 1e-3, 1e-4]
        ratios = [abs(composed_power_type(2.0, e) - 2.0) / e for e in eps]
        assert all(a >= b for a, b in zip(ratios, ratios[1:]))
        # the limit ratio is (1 + p) / (p - 1) = 3 at p = 2
        assert ratios[-1] == pytest.approx(3.0, rel=1e-3)
        assert ratios[0] <= 3.5

    def test_rejects_collapsing_eps(self):
        with pytest.raises(DomainError):
            composed_power_type(1.5, 0.6)
