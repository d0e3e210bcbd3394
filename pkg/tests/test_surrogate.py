import math

import numpy as np
import pytest

from pddrdo import (
    FitMethod,
    InputLaw,
    NOMINAL_MEANS,
    PDDSurrogate,
    SDMorphConfig,
    TrainingSet,
    Uniform,
    build_bases,
    build_index_set,
    deserialize,
    fit,
    mc_moments,
    reference_law,
    rescale_inputs,
    serialize,
    single_pass_retrain,
    synthetic_qoi,
    transform_x_to_z,
)
from pddrdo.errors import DimensionMismatch, NonFiniteInput
from pddrdo.orthopoly import eval_poly

CFG = SDMorphConfig(lasso_penalty=1e-3)


def _fit_poly_surrogate(law, bases, idx, nominal_r, n, seed,
                        method=FitMethod.SDMORPH):
    X = law.sample_lhs(n, seed)
    Z = transform_x_to_z(X, nominal_r)
    h = synthetic_qoi(X)
    train = TrainingSet(Z=Z, h=h, r=nominal_r)
    return train, fit(train, bases, idx, CFG, method)


class TestTransforms:
    def test_nominal_means_map_to_ones(self):
        z = transform_x_to_z(NOMINAL_MEANS, 1.0 / NOMINAL_MEANS)
        np.testing.assert_allclose(z, np.ones(5), rtol=1e-15)

    def test_identity_transform(self):
        x = np.array([0.3, 1.2, 0.9])
        np.testing.assert_array_equal(transform_x_to_z(x, np.ones(3)), x)

    def test_transformed_mean_is_one(self):
        # E[Z_i] = r_i * E[X_i] = 1 for r_i = 1 / E[X_i]
        law = reference_law()
        means = np.array([m.mean() for m in law.marginals])
        x = law.sample_iid(1_000_000, seed=0)
        z = transform_x_to_z(x, 1.0 / means)
        for i in range(5):
            se = z[:, i].std(ddof=1) / math.sqrt(len(z))
            assert abs(z[:, i].mean() - 1.0) < 3 * se

    def test_rescale_identity(self):
        Z = np.random.default_rng(0).uniform(0.5, 1.5, (6, 3))
        r = np.array([2.0, 3.0, 4.0])
        np.testing.assert_array_equal(rescale_inputs(Z, r, r), Z)

    def test_rescale_column_doubling(self):
        Z = np.ones((2, 2))
        out = rescale_inputs(Z, np.array([2.0, 1.0]), np.array([1.0, 1.0]))
        np.testing.assert_allclose(out[:, 0], 2.0)
        np.testing.assert_allclose(out[:, 1], 1.0)

    def test_rescale_round_trip(self):
        rng = np.random.default_rng(1)
        Z = rng.uniform(0.5, 1.5, (10, 4))
        r = rng.uniform(0.5, 2.0, 4)
        r2 = rng.uniform(0.5, 2.0, 4)
        back = rescale_inputs(rescale_inputs(Z, r, r2), r2, r)
        np.testing.assert_allclose(back, Z, rtol=1e-14)

    def test_invalid_transform(self):
        with pytest.raises(ValueError):
            transform_x_to_z(np.ones(2), np.array([1.0, -1.0]))
        with pytest.raises(NonFiniteInput):
            transform_x_to_z(np.array([np.inf, 1.0]), np.ones(2))


class TestTrainingSet:
    def test_shape_validation(self):
        with pytest.raises(DimensionMismatch):
            TrainingSet(Z=np.ones((3, 2)), h=np.ones(4), r=np.ones(2))
        with pytest.raises(DimensionMismatch):
            TrainingSet(Z=np.ones((3, 2)), h=np.ones(3), r=np.ones(3))


class TestPredictAndMoments:
    def test_constant_surrogate(self, bases_m5, idx_m5, nominal_r):
        c = np.zeros(len(idx_m5))
        c[0] = 5.0
        s = PDDSurrogate(bases=bases_m5, idx=idx_m5, c=c, r=nominal_r)
        assert s.predict(np.ones(5)) == 5.0
        assert s.moments() == (5.0, 0.0)

    def test_moments_sum_of_squares(self, bases_m5, idx_m5, nominal_r):
        c = np.zeros(len(idx_m5))
        c[1], c[2] = 3.0, 4.0
        s = PDDSurrogate(bases=bases_m5, idx=idx_m5, c=c, r=nominal_r)
        assert s.moments() == (0.0, 25.0)

    def test_unit_coefficient_reproduces_basis(self, bases_m5, idx_m5,
                                               nominal_r):
        k = idx_m5.entries.index(((2,), (1,)))
        c = np.zeros(len(idx_m5))
        c[k] = 1.0
        s = PDDSurrogate(bases=bases_m5, idx=idx_m5, c=c, r=nominal_r)
        z = np.ones(5)
        z[2] = 1.37
        assert s.predict(z) == pytest.approx(
            eval_poly(bases_m5[2], 1, 1.37), abs=1e-12
        )

    def test_predict_linear_in_coefficients(self, bases_m5, idx_m5, nominal_r):
        rng = np.random.default_rng(2)
        a = rng.normal(0, 1, len(idx_m5))
        b = rng.normal(0, 1, len(idx_m5))
        z = rng.uniform(0.8, 1.2, 5)
        sa = PDDSurrogate(bases=bases_m5, idx=idx_m5, c=a, r=nominal_r)
        sb = PDDSurrogate(bases=bases_m5, idx=idx_m5, c=b, r=nominal_r)
        sab = PDDSurrogate(bases=bases_m5, idx=idx_m5, c=a + b, r=nominal_r)
        assert sab.predict(z) == pytest.approx(
            sa.predict(z) + sb.predict(z), abs=1e-12
        )

    def test_coefficient_length_check(self, bases_m5, idx_m5, nominal_r):
        with pytest.raises(DimensionMismatch):
            PDDSurrogate(bases=bases_m5, idx=idx_m5, c=np.ones(3), r=nominal_r)


class TestFit:
    def test_linear_univariate_either_method(self):
        # noiseless linear model in one input, M=12
        law = InputLaw((Uniform(0.5, 1.5),))
        r = np.ones(1)
        bases = build_bases(list(law.marginals), r, 3)
        idx = build_index_set(1, 1, 3)
        X = law.sample_lhs(12, seed=0)
        h = 2.0 + 3.0 * X[:, 0]
        train = TrainingSet(Z=X, h=h, r=r)
        for method in (FitMethod.LASSO, FitMethod.SDMORPH):
            cfg = SDMorphConfig(lasso_penalty=1e-9)
            s = fit(train, bases, idx, cfg, method)
            # mean of 2 + 3X is 2 + 3*E[X] = 5; only degree-1 term nonzero
            assert s.c[0] == pytest.approx(5.0, abs=1e-7)
            assert abs(s.c[2]) < 1e-7 and abs(s.c[3]) < 1e-7

    def test_exact_representation_m_equals_l(self, law, bases_m11, idx_m11,
                                             nominal_r):
        train, s = _fit_poly_surrogate(
            law, bases_m11, idx_m11, nominal_r, len(idx_m11), seed=3
        )
        X = law.sample_iid(100, seed=77)
        Z = transform_x_to_z(X, nominal_r)
        pred = s.predict(Z)
        truth = synthetic_qoi(X)
        assert np.max(np.abs(pred - truth) / np.abs(truth)) < 1e-6

    def test_underdetermined_residual(self, law, bases_m5, idx_m5, nominal_r):
        train, s = _fit_poly_surrogate(law, bases_m5, idx_m5, nominal_r, 80,
                                       seed=4)
        resid = np.linalg.norm(s.predict(train.Z) - train.h)
        assert resid / np.linalg.norm(train.h) < 1e-8

    def test_deterministic(self, law, bases_m5, idx_m5, nominal_r):
        _, s1 = _fit_poly_surrogate(law, bases_m5, idx_m5, nominal_r, 60, seed=5)
        _, s2 = _fit_poly_surrogate(law, bases_m5, idx_m5, nominal_r, 60, seed=5)
        np.testing.assert_array_equal(s1.c, s2.c)

    def test_moments_vs_monte_carlo(self, law, bases_m11, idx_m11, nominal_r):
        _, s = _fit_poly_surrogate(
            law, bases_m11, idx_m11, nominal_r, len(idx_m11), seed=6
        )
        mean, var = s.moments()
        mc = mc_moments(lambda x: synthetic_qoi(x, check_support=False),
                        law, 1_000_000, seed=8)
        assert abs(mean - mc.mean) < 3 * mc.se_mean
        assert abs(var - mc.variance) < 3 * mc.se_variance


class TestSinglePassRetrain:
    def test_identity_rescale_fixed_point(self, law, bases_m5, idx_m5,
                                          nominal_r):
        train, s = _fit_poly_surrogate(law, bases_m5, idx_m5, nominal_r, 80,
                                       seed=9)
        again = single_pass_retrain(s, train, nominal_r, CFG)
        assert np.max(np.abs(again.c - s.c)) < 1e-10

    def test_predictions_match_shifted_model(self, law, bases_m11, idx_m11,
                                             nominal_r):
        # retrained surrogate at r' must reproduce Q(z / r') pointwise
        train, s = _fit_poly_surrogate(
            law, bases_m11, idx_m11, nominal_r, len(idx_m11), seed=10
        )
        r_new = nominal_r.copy()
        r_new[1] = 1.0 / 0.9   # design change on input 2
        r_new[2] = 1.0 / 9e-4  # and input 3
        s2 = single_pass_retrain(s, train, r_new, CFG)
        Z = train.Z[:100]
        pred = s2.predict(Z)
        direct = synthetic_qoi(Z / r_new, check_support=False)
        assert np.max(np.abs(pred - direct) / np.abs(direct)) < 1e-6

    def test_moments_at_new_design_vs_mc(self, law, bases_m11, idx_m11,
                                         nominal_r):
        train, s = _fit_poly_surrogate(
            law, bases_m11, idx_m11, nominal_r, len(idx_m11), seed=11
        )
        r_new = nominal_r.copy()
        r_new[1] = 1.0 / 0.95
        s2 = single_pass_retrain(s, train, r_new, CFG)
        mean, var = s2.moments()
        shifted_law = law.scaled(nominal_r / r_new)
        mc = mc_moments(lambda x: synthetic_qoi(x, check_support=False),
                        shifted_law, 1_000_000, seed=12)
        assert abs(mean - mc.mean) < 3 * mc.se_mean
        assert abs(var - mc.variance) < 3 * mc.se_variance

    def test_basis_fingerprint_unchanged(self, law, bases_m5, idx_m5,
                                         nominal_r):
        train, s = _fit_poly_surrogate(law, bases_m5, idx_m5, nominal_r, 60,
                                       seed=13)
        r_new = nominal_r * 1.1
        s2 = single_pass_retrain(s, train, r_new, CFG)
        assert s2.basis_fingerprint() == s.basis_fingerprint()


class TestSerialization:
    def test_round_trip_bit_exact(self, law, bases_m5, idx_m5, nominal_r):
        _, s = _fit_poly_surrogate(law, bases_m5, idx_m5, nominal_r, 60,
                                   seed=14)
        s2 = deserialize(serialize(s))
        np.testing.assert_array_equal(s2.c, s.c)
        np.testing.assert_array_equal(s2.r, s.r)
        assert s2.idx.entries == s.idx.entries
        for b1, b2 in zip(s.bases, s2.bases):
            np.testing.assert_array_equal(b1.recurrence_alpha,
                                          b2.recurrence_alpha)
            np.testing.assert_array_equal(b1.recurrence_beta,
                                          b2.recurrence_beta)
            np.testing.assert_array_equal(b1.norms, b2.norms)
        assert s2.basis_fingerprint() == s.basis_fingerprint()

    def test_round_trip_predictions(self, law, bases_m5, idx_m5, nominal_r):
        _, s = _fit_poly_surrogate(law, bases_m5, idx_m5, nominal_r, 60,
                                   seed=15)
        s2 = deserialize(serialize(s))
        z = np.random.default_rng(16).uniform(0.8, 1.2, (5, 5))
        np.testing.assert_array_equal(s2.predict(z), s.predict(z))

    def test_bad_header_rejected(self):
        with pytest.raises(ValueError):
            deserialize("not a surrogate\n")

    def test_truncated_document_rejected(self, law, bases_m5, idx_m5,
                                         nominal_r):
        _, s = _fit_poly_surrogate(law, bases_m5, idx_m5, nominal_r, 60,
                                   seed=17)
        text = serialize(s)
        head = "\n".join(text.splitlines()[:5])
        with pytest.raises(ValueError):
            deserialize(head)
