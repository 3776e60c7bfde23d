#  (c) Copyright 2026 skewmix authors. All rights reserved.
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

import math

import numpy as np
import pytest
from expects import be_above, be_below, be_true, be_within, equal, expect, raise_error

from skewmix.mixing.errors import (
    DepthMismatchError,
    DepthTooSmallError,
    NotFoundError,
    NotNiceError,
    ToleranceUndefinedError,
)
from skewmix.mixing.gibbs import gibbs_measure
from skewmix.mixing.presets import bernoulli_s1, lattice_counterexample
from skewmix.mixing.skewprod import FiberCocycle
from skewmix.mixing.symbolic import StateFunction, Word, agreement_matrix
from skewmix.mixing.twisted import (
    StablePair,
    calibrate_c0,
    cancellation_pair_check,
    cancellation_schedule,
    find_us_cycle,
    green_kubo_variance,
    h_norm,
    norm_decay_profile,
    sample_nice_observable,
    spectral_curve,
    stable_pairs,
    stable_tolerance,
    strong_cancellation,
    twisted_matrix,
    unstable_tolerance,
    wrap_phase,
)

SYSTEM = bernoulli_s1()
RPF = gibbs_measure(SYSTEM.sft, SYSTEM.potential, 2)
F = SYSTEM.cocycle


def close_to(value, tol):
    return be_within(value - tol, value + tol)


class TestWrapPhase:
    @pytest.mark.parametrize(
        "phase,expected",
        [(0.0, 0.0), (math.pi, math.pi), (-math.pi, math.pi), (3 * math.pi / 2, -math.pi / 2)],
    )
    def test_wrap(self, phase, expected):
        expect(wrap_phase(phase)).to(close_to(expected, 1e-12))


class TestTwistedMatrix:
    def test_zero_frequency_is_transfer(self):
        op = twisted_matrix(RPF, F, 0.0)
        expect(np.allclose(op.matrix, RPF.g)).to(be_true)
        expect(op.r_bound).to(close_to(0.0, 1e-12))
        expect(op.H).to(equal(1.0))

    def test_entries(self):
        op = twisted_matrix(RPF, F, 1.0)
        # the preimage 10 of x = 00 carries g = 1/2 and f = sqrt 2
        expected = 0.5 * np.exp(1j * math.sqrt(2.0))
        expect(abs(op.matrix[0, 2] - expected)).to(be_within(0, 1e-15))
        expect(op.matrix[0, 1]).to(equal(0))

    def test_constants(self):
        op = twisted_matrix(RPF, F, 1.0)
        expect(op.r_bound).to(be_above(1.0))
        expect(op.H).to(close_to(2.0 * op.r_bound / (1.0 - 0.5), 1e-12))
        expect(op.c0).to(close_to(op.r_bound / op.weight_seminorm, 1e-12))

    def test_depth_checks(self):
        expect(lambda: twisted_matrix(RPF, F, 1.0, m=3)).to(raise_error(DepthMismatchError))
        shallow = gibbs_measure(SYSTEM.sft, SYSTEM.potential, 1)
        expect(lambda: twisted_matrix(shallow, F, 1.0)).to(raise_error(DepthTooSmallError))
        shifted = FiberCocycle(SYSTEM.sft, 1, np.array([0.0, 1.0]), offset=-1)
        expect(lambda: twisted_matrix(RPF, shifted, 1.0)).to(raise_error(ValueError))

    def test_apply_matches_power(self):
        op = twisted_matrix(RPF, F, 0.7)
        v = StateFunction(SYSTEM.sft, 2, np.array([1.0, 1j, -0.5, 2.0]))
        expect(np.allclose(op.apply(v, 3).values, op.power(3) @ v.values)).to(be_true)


class TestHNorm:
    def test_values(self):
        v = StateFunction(SYSTEM.sft, 2, np.array([0.0, 1.0, 0.0, 0.0]))
        expect(h_norm(v, 1.0)).to(equal(2.0))
        expect(h_norm(v, 4.0)).to(equal(1.0))
        expect(lambda: h_norm(v, 0.5)).to(raise_error(ValueError))

    @pytest.mark.parametrize("xi", [0.3, 1.0, 4.0])
    def test_calibration_stays_below_certificate(self, xi):
        calibration = calibrate_c0(twisted_matrix(RPF, F, xi), trials=1000, seed=1)
        expect(calibration.r_empirical).to(be_below(calibration.r_certified * (1 + 1e-9) + 1e-12))
        expect(calibration.r_empirical).to(be_above(0.0))


class TestSpectralCurve:
    def test_green_kubo(self):
        expect(green_kubo_variance(RPF, F)).to(close_to(1.5, 1e-12))

    def test_curvature_matches_variance(self):
        curve = spectral_curve(RPF, F, np.linspace(-0.2, 0.2, 21))
        expect(curve.lambdas[curve.xi == 0.0][0]).to(equal(1 + 0j))
        expect(curve.second_derivative).to(close_to(-1.5, 1e-4))
        expect(curve.curvature_error).to(be_below(0.02))
        expect(curve.truncated_at).to(equal(None))
        expect(curve.fit.c).to(close_to(0.75, 0.05))
        expect(curve.fit.a_kappa).to(close_to(curve.fit.c / 2, 1e-15))

    def test_modulus_below_one_away_from_zero(self):
        curve = spectral_curve(RPF, F, [0.5, 1.0, 2.0])
        expect(bool(np.all(np.abs(curve.lambdas[curve.xi != 0]) < 1.0))).to(be_true)


class TestNormDecay:
    def test_high_frequency_decay(self):
        op = twisted_matrix(RPF, F, 2.0)
        profile = norm_decay_profile(op, StateFunction.constant(SYSTEM.sft, 2, 1.0), 150)
        expect(profile.values[0]).to(close_to(1.0, 1e-12))
        expect(bool(np.all(np.diff(profile.values) <= 1e-9))).to(be_true)
        expect(profile.first_below(1e-8)).not_to(equal(None))
        expect(profile.rate).to(be_below(1.0))

    @pytest.mark.parametrize("xi", [0.05, 0.1, 0.2])
    def test_low_frequency_envelope(self, xi):
        fit = spectral_curve(RPF, F, np.linspace(-0.2, 0.2, 21)).fit
        profile = norm_decay_profile(
            twisted_matrix(RPF, F, xi), StateFunction.constant(SYSTEM.sft, 2, 1.0), 200
        )
        expect(profile.within(fit.a_kappa)).to(be_true)

    def test_h_norm_never_grows(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            op = twisted_matrix(RPF, F, float(rng.uniform(-6.0, 6.0)))
            v = StateFunction(
                SYSTEM.sft, 2, rng.standard_normal(4) + 1j * rng.standard_normal(4)
            )
            before = h_norm(v, op.H)
            expect(h_norm(op.apply(v, 1), op.H)).to(be_below(before * (1 + 1e-9) + 1e-15))

    def test_zero_start_is_rejected(self):
        op = twisted_matrix(RPF, F, 2.0)
        zero = StateFunction.constant(SYSTEM.sft, 2, 0.0)
        expect(lambda: norm_decay_profile(op, zero, 5)).to(raise_error(ValueError))


class TestStablePairs:
    def test_enumeration(self):
        op = twisted_matrix(RPF, F, math.pi / 2)
        pairs = stable_pairs(op, 2, "00")
        expect(len(pairs)).to(equal(16))
        expect(all(p.suffix == (0, 0) for p in pairs)).to(be_true)
        expect(all(abs(p.g_x - 0.25) < 1e-12 for p in pairs)).to(be_true)
        diagonal = [p for p in pairs if p.x == p.y]
        expect(all(p.phase == 0.0 for p in diagonal)).to(be_true)

    def test_opposite_phase(self):
        op = twisted_matrix(RPF, F, math.pi / 2)
        pair = next(
            p for p in stable_pairs(op, 2, "00") if str(p.x) == "0000" and str(p.y) == "1100"
        )
        expect(abs(pair.phase)).to(close_to(math.pi, 1e-12))

    def test_checks(self):
        op = twisted_matrix(RPF, F, 1.0)
        expect(lambda: stable_pairs(op, 2, "000")).to(raise_error(DepthMismatchError))
        expect(lambda: stable_pairs(op, 0, "00")).to(raise_error(ValueError))
        expect(lambda: stable_pairs(op, 6, "00", budget=100)).to(raise_error(ValueError))


class TestTolerances:
    def test_stable(self):
        expect(stable_tolerance(0.25, 0.25, 0.01)).to(close_to(math.acos(0.92), 1e-15))
        expect(lambda: stable_tolerance(0.25, 0.25, 0.3)).to(raise_error(ToleranceUndefinedError))

    def test_unstable(self):
        expect(unstable_tolerance(0.0, 5.0)).to(equal(0.0))
        expect(unstable_tolerance(0.05, 2.0)).to(close_to(math.asin(0.2), 1e-15))
        expect(lambda: unstable_tolerance(0.25, 2.0)).to(raise_error(ToleranceUndefinedError))

    def test_schedule(self):
        schedule = cancellation_schedule(RPF, 4.0, 1.0)
        expect(schedule.n_xi).to(equal(3))
        expect(schedule.growth).to(close_to(2.0, 1e-12))
        expect(schedule.epsilon_xi).to(close_to(1.0 / (64.0 * 8.0), 1e-15))
        expect(lambda: cancellation_schedule(RPF, 0.0, 1.0)).to(raise_error(ValueError))


class TestCancellation:
    def test_opposite_pair_cancels(self):
        op = twisted_matrix(RPF, F, math.pi / 2)
        pair = StablePair(Word((0, 0, 0, 0)), Word((1, 1, 0, 0)), 2, 0.25, 0.25, math.pi)
        v = StateFunction.constant(SYSTEM.sft, 2, 1.0 - 0.005)
        check = cancellation_pair_check(pair, v, op, 0.01)
        expect(check.is_cancellation).to(be_true)
        expect(check.transferred).to(close_to(0.0, 1e-12))

    def test_diagonal_pair_does_not_cancel(self):
        op = twisted_matrix(RPF, F, math.pi / 2)
        pair = StablePair(Word((0, 0, 0, 0)), Word((0, 0, 0, 0)), 2, 0.25, 0.25, 0.0)
        v = StateFunction.constant(SYSTEM.sft, 2, 1.0 - 0.005)
        check = cancellation_pair_check(pair, v, op, 0.01)
        expect(check.is_cancellation).to(equal(False))
        expect(check.margin).to(close_to(-0.01, 1e-12))

    def test_not_nice(self):
        op = twisted_matrix(RPF, F, math.pi / 2)
        pair = StablePair(Word((0, 0, 0, 0)), Word((1, 1, 0, 0)), 2, 0.25, 0.25, math.pi)
        expect(
            lambda: cancellation_pair_check(pair, StateFunction.constant(SYSTEM.sft, 2, 1.0), op, 0.01)
        ).to(raise_error(NotNiceError))

    def test_nice_samples(self):
        op = twisted_matrix(RPF, F, 1.0)
        v = sample_nice_observable(op, 0.01, seed=4)
        moduli = np.abs(v.values)
        expect(bool(np.all((moduli > 0.99) & (moduli < 1.0)))).to(be_true)
        expect(np.array_equal(v.values, sample_nice_observable(op, 0.01, seed=4).values)).to(
            be_true
        )
        expect(lambda: sample_nice_observable(op, 0.5, seed=4)).to(raise_error(ValueError))


class TestUsCycle:
    def test_bernoulli_s1_has_a_witness(self):
        cycle = find_us_cycle(RPF, F, 1.0, 8, 2)
        expect(cycle.margin).to(be_above(0.0))
        expect(cycle.recomputed_phase()).to(close_to(cycle.total_phase, 1e-12))
        expect(cycle.total_tolerance).to(
            close_to(sum(cycle.stable_tolerances) + sum(cycle.unstable_tolerances), 1e-12)
        )
        expect(all(d <= 0.5**4 for d in cycle.junction_distances)).to(be_true)

    def test_every_nice_observable_cancels(self):
        cycle = find_us_cycle(RPF, F, 1.0, 8, 2)
        op = twisted_matrix(RPF, F, 1.0)
        for seed in range(100):
            v = sample_nice_observable(op, cycle.epsilon, seed)
            expect(strong_cancellation(cycle, v, op)).to(be_true)

    def test_lattice_has_no_witness(self):
        system = lattice_counterexample()
        rpf = gibbs_measure(system.sft, system.potential, 2)
        expect(lambda: find_us_cycle(rpf, system.cocycle, math.pi, 8, 2, budget=5_000)).to(
            raise_error(NotFoundError)
        )


class TestTolerancePropositions:
    def test_stable_tolerance_forces_a_defect(self):
        rng = np.random.default_rng(23)
        triggered = 0
        for _ in range(1000):
            g_x, g_y = rng.uniform(0.05, 1.0, 2)
            epsilon = rng.uniform(0.001, 0.99) * 2.0 / (1.0 / g_x + 1.0 / g_y)
            epsilon = min(epsilon, 0.45)
            moduli = rng.uniform(1.0 - epsilon, 1.0, 2)
            a, b = moduli * np.exp(1j * rng.uniform(-math.pi, math.pi, 2))
            p, q = g_x * a, g_y * np.exp(1j * rng.uniform(-math.pi, math.pi)) * b
            angle = abs(wrap_phase(float(np.angle(q) - np.angle(p))))
            if angle < stable_tolerance(g_x, g_y, epsilon):
                continue
            triggered += 1
            defect = abs(p) + abs(q) - abs(p + q)
            expect(defect).to(be_above(epsilon * (1.0 - epsilon) * (1 - 1e-9)))
        expect(triggered).to(be_above(100))

    def test_unstable_tolerance_bounds_nice_phases(self):
        rpf = gibbs_measure(SYSTEM.sft, SYSTEM.potential, 5)
        agree = agreement_matrix(SYSTEM.sft, 5)
        distinct = agree < 5
        rng = np.random.default_rng(29)
        ops = [twisted_matrix(rpf, F, xi) for xi in (0.1, 0.2, 0.3, 0.5, 1.0)]
        checked = 0
        for seed in range(1000):
            op = ops[seed % len(ops)]
            v = sample_nice_observable(op, float(rng.uniform(0.01, 0.45)), seed)
            d = SYSTEM.sft.theta**agree
            usable = distinct & (2.0 * op.H * d < 1.0)
            phases = np.angle(v.values)
            gaps = np.abs(np.angle(np.exp(1j * (phases[:, None] - phases[None, :]))))
            bound = np.array([unstable_tolerance(float(x), op.H) for x in d[usable]])
            expect(bool(np.all(gaps[usable] <= bound + 1e-12))).to(be_true)
            checked += int(usable.sum())
        expect(checked).to(be_above(0))
