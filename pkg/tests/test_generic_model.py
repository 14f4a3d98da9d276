import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from pwm_coreloss import generic_model as gm
from pwm_coreloss.errors import ValidationError

from conftest import series

TABLE_VII_A = (-0.25, 0.51, 0.038, -0.63, 0.017, -0.21)


def sampled(fn, n=1024):
    """One cycle of a phase function on a closed grid (unit period)."""
    return series(lambda t: fn(2 * np.pi * t), n)


coef = st.floats(-0.5, 0.5, allow_nan=False)


class TestEvaluate:
    def test_table_vii_at_zero(self):
        oracle = math.fsum((0.98,) + TABLE_VII_A)
        _, raw = gm.evaluate(gm.TABLE_VII, 0.0)
        assert float(raw) == pytest.approx(oracle, abs=1e-12)
        assert float(raw) == pytest.approx(0.455, abs=1e-3)

    def test_constant_model(self):
        m = gm.GenericLossModel(1.0, (0.0,) * 6, (0.0,) * 6)
        clamped, raw = gm.evaluate(m, np.linspace(0, 2 * np.pi, 50))
        assert np.all(raw == 1.0) and np.all(clamped == 1.0)

    def test_table_vii_period_mean(self):
        theta = 2 * np.pi * np.arange(100_000) / 100_000
        _, raw = gm.evaluate(gm.TABLE_VII, theta)
        assert raw.mean() == pytest.approx(0.98, abs=1e-3)

    def test_clamp_only_floors_negatives(self):
        m = gm.GenericLossModel(0.1, (1.0,), (0.0,))
        clamped, raw = gm.evaluate(m, np.array([0.0, np.pi]))
        assert list(raw) == pytest.approx([1.1, -0.9])
        assert list(clamped) == pytest.approx([1.1, 0.0])
        assert gm.clamp_fraction(m) > 0
        assert gm.clamp_fraction(gm.TABLE_VII) == 0.0

    def test_phase_offset_shifts(self):
        shifted = gm.TABLE_VII.with_phase(0.3)
        assert shifted.raw(0.0) == pytest.approx(gm.TABLE_VII.raw(0.3), abs=1e-15)

    def test_rescaled_mean_is_one(self):
        r = gm.TABLE_VII.rescaled()
        assert r.a0 == 1.0 and r.normalized
        assert r.raw(0.7) == pytest.approx(gm.TABLE_VII.raw(0.7) / 0.98, rel=1e-12)


class TestNormalize:
    def test_constant(self):
        out = gm.normalize(series(lambda t: 0 * t + 5.0, 100, unit="W"))
        assert np.allclose(out.values, 1.0)

    def test_sin_squared(self):
        p = sampled(lambda th: np.sin(th) ** 2)
        assert np.allclose(gm.normalize(p).values, 2 * p.values, atol=1e-12)

    def test_idempotent(self):
        p = gm.normalize(sampled(lambda th: 1 + 0.5 * np.cos(th) + 0.2 * np.sin(3 * th)))
        assert np.allclose(gm.normalize(p).values, p.values, atol=1e-9)

    def test_non_positive_mean_rejected(self):
        with pytest.raises(ValidationError, match="reactive"):
            gm.normalize(sampled(np.sin))


class TestFit:
    def test_exact_six_harmonic_series(self):
        truth = gm.TABLE_VII
        model, r2 = gm.fit(gm.NormalizedLossSet((("a", sampled(truth.raw)),)))
        assert r2 == pytest.approx(1.0, abs=1e-12)
        assert model.a0 == pytest.approx(truth.a0, abs=1e-9)
        assert np.allclose(model.a, truth.a, atol=1e-9)
        assert np.allclose(model.b, truth.b, atol=1e-9)

    def test_two_sin_squared(self):
        model, _ = gm.fit(gm.NormalizedLossSet.from_traces([("x", sampled(lambda th: np.sin(th) ** 2))]))
        expected_a = [0, -1, 0, 0, 0, 0]
        assert model.a0 == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(model.a, expected_a, atol=1e-9)
        assert np.allclose(model.b, 0, atol=1e-9)

    def test_identical_sets_average_to_one(self):
        p = sampled(lambda th: 1 + 0.4 * np.cos(2 * th))
        one, _ = gm.fit(gm.NormalizedLossSet((("a", p),)))
        two, _ = gm.fit(gm.NormalizedLossSet((("a", p), ("b", p))))
        assert np.allclose(one.a, two.a, atol=1e-12) and np.allclose(one.b, two.b, atol=1e-12)

    def test_members_on_other_grids_are_resampled(self):
        fn = lambda th: 1 + 0.3 * np.sin(th)
        model, _ = gm.fit(gm.NormalizedLossSet((("a", sampled(fn, 1024)), ("b", sampled(fn, 4096)))))
        assert model.b[0] == pytest.approx(0.3, abs=1e-4)

    def test_poor_fit_reports_low_r2(self):
        square = sampled(lambda th: np.where(np.sin(th) >= 0, 2.0, 0.5), 1000)
        _, r2 = gm.fit(gm.NormalizedLossSet((("sq", square),)), n_harmonics=1)
        assert r2 < 0.99

    def test_empty_set(self):
        with pytest.raises(ValidationError):
            gm.fit(gm.NormalizedLossSet(()))

    @settings(max_examples=25, deadline=None)
    @given(st.lists(coef, min_size=6, max_size=6), st.lists(coef, min_size=6, max_size=6))
    def test_fit_eval_round_trip(self, a, b):
        truth = gm.GenericLossModel(1.0, tuple(a), tuple(b))
        model, _ = gm.fit(gm.NormalizedLossSet((("p", sampled(truth.raw, 512)),)))
        assert np.allclose(model.a, a, atol=1e-9) and np.allclose(model.b, b, atol=1e-9)


class TestDistribute:
    def test_constant_model_uniform(self):
        m = gm.GenericLossModel(1.0, (0.0,) * 6, (0.0,) * 6)
        parts = gm.distribute(m, 2.61e-3, 16)
        assert parts == pytest.approx([163.125e-6] * 16, rel=1e-12)

    def test_table_vii_conservation(self):
        parts = gm.distribute(gm.TABLE_VII, 2.61e-3, 16)
        assert math.fsum(parts) == pytest.approx(2.61e-3, rel=1e-12)
        assert all(p > 0 for p in parts)

    def test_shares_against_quadrature(self):
        parts = gm.distribute(gm.TABLE_VII, 1.0, 16)
        f = lambda th: max(gm.TABLE_VII.raw(th).item(), 0.0)
        edges = np.linspace(0, 2 * np.pi, 17)
        pieces = [quad(f, a, b, limit=200)[0] for a, b in zip(edges[:-1], edges[1:])]
        assert np.allclose(parts, np.array(pieces) / sum(pieces), rtol=1e-6, atol=1e-12)

    def test_zero_total(self):
        assert gm.distribute(gm.TABLE_VII, 0.0, 8) == [0.0] * 8

    @settings(max_examples=40, deadline=None)
    @given(st.lists(coef, min_size=6, max_size=6), st.lists(coef, min_size=6, max_size=6),
           st.floats(1e-9, 10.0), st.integers(1, 64))
    def test_conservation_and_sign_for_any_model(self, a, b, q, n):
        m = gm.GenericLossModel(0.8, tuple(a), tuple(b))
        parts = gm.distribute(m, q, n, points_per_cycle=64)
        assert len(parts) == n
        assert abs(math.fsum(parts) - q) <= 1e-12 * q
        assert all(p >= 0 for p in parts)


def test_model_file_round_trip(tmp_path):
    path = tmp_path / "m.json"
    gm.save_model(gm.TABLE_VII, path)
    assert gm.load_model(path) == gm.TABLE_VII


def test_from_dict_requires_coefficients():
    with pytest.raises(ValidationError, match="a0"):
        gm.GenericLossModel.from_dict({"a": [], "b": []})
