"""Anti-divergence operator and commutator-probe checks."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ibflow import antidiv as AD
from ibflow import fields as F
from conftest import random_real_scalar, random_real_vector


def div_defect(u):
    res = AD.anti_divergence(u)
    div = F.tensor_divergence(res.tensor)
    target = u.coeffs.copy()
    target[:, 0, 0, 0] = 0.0
    scale = np.max(np.abs(target)) or 1.0
    return np.max(np.abs(div.coeffs - target)) / scale, res


class TestAntiDivergence:
    def test_constant_maps_to_zero(self):
        u = F.VectorField.zero(8)
        u.coeffs[:, 0, 0, 0] = [1.0, -2.0, 0.5]
        res = AD.anti_divergence(u)
        assert np.max(np.abs(res.tensor.coeffs)) == 0.0
        assert np.allclose(res.mean_removed, [1.0, -2.0, 0.5])

    def test_divergence_identity_random(self, rng):
        for _ in range(10):
            u = random_real_vector(16, 5, rng)
            defect, _ = div_defect(u)
            assert defect <= 1e-12

    def test_symmetry_is_structural_and_trace_free(self, rng):
        u = random_real_vector(12, 4, rng)
        res = AD.anti_divergence(u)
        tr = res.tensor.trace()
        assert np.max(np.abs(tr.coeffs)) <= 1e-13 * np.max(np.abs(res.tensor.coeffs))

    def test_hand_value_single_mode(self):
        # u = Re((1,0,0) e^{i z}): R(u)_{xz} = sin(z), all other entries 0
        n = 16
        u = F.VectorField.zero(n)
        u.coeffs[0, 0, 0, 1] = 0.5
        u.coeffs[0, 0, 0, -1 % n] = 0.5
        res = AD.anti_divergence(u)
        z = 2 * np.pi * np.arange(n) / n
        xz = res.tensor.component(0, 2).physical()
        assert np.max(np.abs(xz[0, 0, :] - np.sin(z))) <= 1e-13
        for (i, j) in [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)]:
            assert np.max(np.abs(res.tensor.component(i, j).coeffs)) <= 1e-14

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**31), alpha=st.floats(-2, 2), beta=st.floats(-2, 2))
    def test_linearity(self, seed, alpha, beta):
        rng = np.random.default_rng(seed)
        u = random_real_vector(8, 2, rng)
        w = random_real_vector(8, 2, rng)
        lhs = AD.anti_divergence(
            F.VectorField(alpha * u.coeffs + beta * w.coeffs)
        ).tensor.coeffs
        rhs = (
            alpha * AD.anti_divergence(u).tensor.coeffs
            + beta * AD.anti_divergence(w).tensor.coeffs
        )
        scale = np.max(np.abs(rhs)) or 1.0
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale

    def test_boundedness_diagnostic(self, rng):
        # || R P_neq0 u ||_p stays within a stable constant of || |grad|^{-1} P_neq0 u ||_p
        ratios = []
        for _ in range(20):
            u = random_real_vector(24, 8, rng)
            u.coeffs[:, 0, 0, 0] = 0.0
            num = F.lebesgue_norm(AD.anti_divergence(u).tensor, 2)
            den = F.lebesgue_norm(
                F.VectorField(F.inverse_gradient_norm(u).coeffs), 2
            )
            ratios.append(num / den)
        assert max(ratios) < 3.0
        assert min(ratios) > 0.1


class TestCommutatorProbe:
    def test_two_mode_hand_computation(self):
        # a = 0.7 cos(ka.x), f = 2 cos(kf.x) with ka orthogonal to kf:
        # product modes sit at +-(ka+kf), +-(kf-ka), all of size sqrt(82),
        # so the left side is 0.7/sqrt(82) exactly
        n = 32
        a = F.ScalarField.zero(n)
        f = F.ScalarField.zero(n)
        a.coeffs[1, 0, 0] = a.coeffs[-1 % n, 0, 0] = 0.35
        f.coeffs[0, 9, 0] = f.coeffs[0, -9 % n, 0] = 1.0
        prod = F.pointwise_product(a, f)
        val = F.lebesgue_norm(F.inverse_gradient_norm(F.project_nonzero(prod)), 2)
        assert val == pytest.approx(0.7 / np.sqrt(82.0), rel=1e-12)

    def test_constant_multiplier_bound_trivial(self, rng):
        n = 48
        a = F.ScalarField.zero(n)
        a.coeffs[0, 0, 0] = 1.3
        f = random_real_scalar(n, 20, rng)
        hi = F.fourier_project(f, 8.0, np.inf)
        prod = F.pointwise_product(a, hi)
        # constant a: the product keeps only high modes, |grad|^{-1} <= 1/8
        val = F.lebesgue_norm(F.inverse_gradient_norm(F.project_nonzero(prod)), 2)
        assert val <= F.lebesgue_norm(hi, 2) * 1.3 / 8.0 * (1 + 1e-12)

    def test_decay_slope_near_minus_one(self, rng):
        n = 96
        a_phys = 1.0 + 0.6 * np.cos(2 * np.pi * np.arange(n) / n)
        a = F.ScalarField.from_physical(
            np.broadcast_to(a_phys.reshape(-1, 1, 1), (n, n, n)).copy()
            * (1 + 0.4 * np.cos(2 * np.pi * np.arange(n) / n)).reshape(1, -1, 1)
        )
        f = random_real_scalar(n, 40, rng)
        rep = AD.commutator_decay_probe(a, f, [6, 9, 14, 20, 30], p=2)
        assert -1.2 <= rep["slope"] <= -0.8
        assert all(r <= 1.5 for r in rep["ratio"])
