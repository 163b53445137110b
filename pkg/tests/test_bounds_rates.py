import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wright_lab.bounds_rates import (
    CLAIM_IDS,
    CORPUS,
    HOLDS,
    INCONCLUSIVE,
    STANDARD_GRID,
    VIOLATED,
    GridSpec,
    expand_claims,
    lemma2_bound,
    lemma3_bound,
    modulus_of_continuity,
    norm_lemma_audit,
    run_claim_audit,
    sup_error,
    summarize,
    theorem1_bound,
    theorem1_delta,
    verdict,
    weighted_norm,
)
from wright_lab.operator_core import OperatorConfig, TestFunction, raw_moment_closed_form

CFG = OperatorConfig(10, 2.0)


class TestStatedBounds:
    def test_lemma2_examples(self):
        assert lemma2_bound(1, CFG, 3.0) == 0.2
        assert lemma2_bound(2, CFG, 1.0) == pytest.approx(0.29, rel=1e-15)
        assert lemma2_bound(1, OperatorConfig(10 ** 9, 2.0), 0.0) < 1e-8

    def test_lemma3_examples(self):
        assert lemma3_bound(1, CFG, 1.0) == 0.2
        assert lemma3_bound(2, CFG, 1.0) == pytest.approx(0.69, rel=1e-15)
        assert lemma3_bound(2, CFG, 0.0) == pytest.approx(0.04, rel=1e-15)

    def test_lemma3_item3_forms_differ(self):
        a = lemma3_bound(3, CFG, 1.0, "statement")
        b = lemma3_bound(3, CFG, 1.0, "proof")
        assert b == pytest.approx(3 * 4 / (10 * 2 * 3) + 1 / 200, rel=1e-15)
        assert a != b
        with pytest.raises(ValueError):
            lemma3_bound(3, CFG, 1.0, "other")

    def test_lemma2_j4_spot_value(self):
        b, n, x = 2.0, 10, 1.0
        expected = (14 / 24) / 10 + (55 / 6) / 100 + (65 / 2) / 1000 + 16 / 1e4
        assert lemma2_bound(4, CFG, x) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("fn", [lemma2_bound, lemma3_bound])
    @pytest.mark.parametrize("order", [0, 5])
    def test_unsupported_orders(self, fn, order):
        with pytest.raises(ValueError):
            fn(order, CFG, 1.0)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 4), st.sampled_from([1.5, 2.0, 5.0]), st.integers(1, 10 ** 4),
           st.floats(0, 10))
    def test_bounds_deterministic_and_nonnegative(self, j, beta, n, x):
        cfg = OperatorConfig(n, beta)
        assert lemma2_bound(j, cfg, x) == lemma2_bound(j, cfg, x) >= 0
        assert lemma3_bound(j, cfg, x) == lemma3_bound(j, cfg, x) >= 0

    def test_theorem1_delta(self):
        assert theorem1_delta(2.0, 10, 1.0) == pytest.approx(0.29, rel=1e-15)


class TestWeightedNorm:
    def test_constant(self):
        assert weighted_norm(CORPUS["one"], 10.0) == 1.0

    def test_square_grows_to_one(self):
        vals = [weighted_norm(CORPUS["square"], xm) for xm in (1.0, 10.0, 1000.0)]
        assert vals == sorted(vals)
        assert vals[-1] == pytest.approx(1.0, abs=1e-5)

    def test_identity_peak(self):
        assert weighted_norm(CORPUS["identity"], 10.0) == pytest.approx(0.5, abs=1e-6)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            weighted_norm(CORPUS["one"], 1.0, points=50)

    @pytest.mark.parametrize("label", list(CORPUS))
    def test_within_growth_certificate(self, label):
        f = CORPUS[label]
        assert weighted_norm(f, 50.0) <= f.growth_constant + 1e-12


class TestModulus:
    def test_constant(self):
        assert modulus_of_continuity(CORPUS["one"], 3.0, 0.4) == 0.0

    def test_identity(self):
        assert modulus_of_continuity(CORPUS["identity"], 5.0, 0.3) == pytest.approx(0.3, abs=1e-12)

    def test_square(self):
        assert abs(modulus_of_continuity(CORPUS["square"], 2.0, 0.5) - 1.75) <= 1e-3

    def test_preconditions(self):
        with pytest.raises(ValueError):
            modulus_of_continuity(CORPUS["one"], 1.0, 0.1, points=100)
        with pytest.raises(ValueError):
            modulus_of_continuity(CORPUS["one"], 1.0, 0.0)

    @pytest.mark.parametrize("label", list(CORPUS))
    def test_monotone_in_delta(self, label):
        f = CORPUS[label]
        deltas = np.linspace(0.01, 3.0, 60)
        vals = [modulus_of_continuity(f, 3.0, d) for d in deltas]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("label", list(CORPUS))
    @pytest.mark.parametrize("delta", [0.05, 0.2, 0.7, 1.3])
    def test_subadditive(self, label, delta):
        f = CORPUS[label]
        assert (modulus_of_continuity(f, 3.0, 2 * delta)
                <= 2 * modulus_of_continuity(f, 3.0, delta) + 1e-9)


class TestTheorem1:
    def test_constant_function(self):
        f = CORPUS["one"]
        assert theorem1_bound(f, CFG, 1.0) == pytest.approx(6 * 2 * 0.29, rel=1e-14)

    def test_identity(self):
        v = theorem1_bound(CORPUS["identity"], CFG, 1.0)
        assert v == pytest.approx(6 * 2 * 0.29 + 2 * math.sqrt(0.29), abs=1e-9)
        assert round(v, 3) == 4.557

    @pytest.mark.parametrize("label", list(CORPUS))
    def test_nonnegative(self, label):
        f = CORPUS[label]
        assert theorem1_bound(f, OperatorConfig(100, 1.5), 2.0) >= 0
        assert sup_error(f, OperatorConfig(100, 1.5), 2.0) >= 0


class TestSupError:
    def test_constant(self):
        cfg = OperatorConfig(100, 2.0)
        assert sup_error(CORPUS["one"], cfg, 2.0) <= 2 * cfg.tol

    def test_atom_only_grid(self):
        f = CORPUS["sin"]
        cfg = OperatorConfig(10, 2.0)
        assert sup_error(f, cfg, 2.0, points=1) == abs(math.sin(0.2) - 0.0)

    def test_exp_neg_measurement(self):
        v, where, tail = sup_error(CORPUS["exp-neg"], OperatorConfig(100, 1.5), 1.0,
                                   with_location=True)
        assert 0 <= where <= 1 and math.isfinite(v) and tail <= 2e-12


class TestNormLemma:
    def test_origin_only(self):
        cfg = OperatorConfig(10, 2.0)
        rec = norm_lemma_audit(cfg, [0.0])
        assert rec.measured == pytest.approx(1 + 0.04, rel=1e-14)
        assert rec.stated == pytest.approx(1 + 0.04, rel=1e-14)

    def test_grid_measurement_finite(self):
        rec = norm_lemma_audit(OperatorConfig(10, 2.0), np.linspace(0, 10, 21))
        assert math.isfinite(rec.measured) and rec.verdict != INCONCLUSIVE

    def test_trend_over_n(self):
        xs = np.linspace(0, 10, 21)
        meas = [norm_lemma_audit(OperatorConfig(n, 2.0), xs).measured for n in (10, 100, 1000)]
        assert meas == sorted(meas, reverse=True)
        assert meas[-1] <= 1.05


class TestVerdict:
    def test_rules(self):
        assert verdict(0.0, 0.0) == HOLDS
        assert verdict(-1e-9, 1e-8) == HOLDS
        assert verdict(-1e-7, 1e-8) == VIOLATED
        assert verdict(math.nan, 0.0) == INCONCLUSIVE
        assert verdict(1.0, 0.0, math.inf) == INCONCLUSIVE


class TestAudit:
    def test_lemma2_item2_example(self):
        grid = GridSpec((0.0, 1.0), (10, 100), (2.0,))
        recs = run_claim_audit(grid, ["Lemma2.item2"])
        assert len(recs) == 4
        for r in recs:
            cfg = OperatorConfig(r.params["n"], 2.0)
            m1 = raw_moment_closed_form(cfg, 1, r.params["x"])
            assert r.margin == pytest.approx(2.0 / r.params["n"] - abs(m1 - r.params["x"]),
                                             rel=1e-12, abs=1e-15)

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            GridSpec((), (10,), (2.0,))
        with pytest.raises(ValueError):
            run_claim_audit(None, ["Lemma2.item2"])

    def test_unknown_claim(self):
        with pytest.raises(ValueError):
            run_claim_audit(STANDARD_GRID, ["Lemma9"])

    def test_theorem1_records(self):
        grid = GridSpec((0.0, 1.0), (10,), (2.0,), B=1.0)
        recs = run_claim_audit(grid, ["Theorem1:identity"])
        assert len(recs) == 1
        assert recs[0].stated == pytest.approx(theorem1_bound(CORPUS["identity"], CFG, 1.0))

    def test_expand(self):
        ids = expand_claims()
        assert "Lemma3.item3a" in ids and "Lemma3.item3b" in ids
        assert {f"Theorem1:{k}" for k in CORPUS} <= set(ids)
        assert "Voronovskaya:abs-shift" not in ids
        assert expand_claims(["Lemma3.item3"]) == ["Lemma3.item3a", "Lemma3.item3b"]
        with pytest.raises(ValueError):
            expand_claims(["Voronovskaya:abs-shift"])

    def test_canonical_order_and_threads(self):
        grid = GridSpec((0.0, 0.5, 2.0), (10, 100), (1.5, 5.0), B=2.0)
        claims = ["Lemma3.item4", "Lemma2.item3", "NormLemma", "Theorem1:sin"]
        serial = run_claim_audit(grid, claims, workers=1)
        threaded = run_claim_audit(grid, claims, workers=4)
        assert serial == threaded
        keys = [r.sort_key() for r in serial]
        assert keys == sorted(keys)

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("WRIGHT_LAB_THREADS", "0")
        with pytest.raises(ValueError):
            run_claim_audit(STANDARD_GRID, ["NormLemma"])

    def test_summarize(self):
        grid = GridSpec((1.0,), (10,), (2.0,))
        recs = run_claim_audit(grid, ["Lemma2.item2", "Lemma3.item1"])
        c = summarize(recs)
        assert sum(c.values()) == len(recs) == 2

    def test_first_moment_claim_measured_violated(self):
        # the two-sided |m1 - x| <= beta/n is not implied by the one-sided proof
        grid = GridSpec((5.0,), (10,), (2.0,))
        rec = run_claim_audit(grid, ["Lemma2.item2"])[0]
        assert rec.verdict == VIOLATED
