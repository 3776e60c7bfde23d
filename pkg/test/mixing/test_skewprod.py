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
from expects import be_true, be_within, equal, expect, raise_error

from skewmix.mixing.errors import WordTooShortError
from skewmix.mixing.gibbs import Potential, gibbs_measure
from skewmix.mixing.presets import bernoulli_s1, lattice_counterexample
from skewmix.mixing.skewprod import (
    CycleGeometry,
    FiberCocycle,
    TwoSidedCocycle,
    birkhoff_sum,
    center,
    closed_walks,
    cohomology_residual,
    collapsed_access_coverage,
    covering_radius,
    non_arithmeticity_check,
    periodic_sum,
    reduce_to_one_sided,
    unique_mod_one,
)
from skewmix.mixing.symbolic import Word, build_sft

FULL = build_sft(2, [[1, 1], [1, 1]], 0.5)
GOLDEN = build_sft(2, [[1, 1], [1, 0]], 0.5)
ROOT2 = math.sqrt(2.0)


class TestFiberCocycle:
    def test_lookup(self):
        f = bernoulli_s1().cocycle
        expect(f((1, 0))).to(equal(ROOT2))
        expect(f.at((0, 1, 1, 0), 1)).to(equal(-ROOT2))

    def test_shape(self):
        expect(lambda: FiberCocycle(FULL, 2, np.zeros(3))).to(raise_error(ValueError))
        expect(lambda: FiberCocycle(FULL, 1, np.array([0.0, math.inf]))).to(raise_error(ValueError))

    def test_from_mapping(self):
        f = FiberCocycle.from_mapping(GOLDEN, 2, {"00": 1.0, "10": -2.0})
        expect(f.values.tolist()).to(equal([1.0, 0.0, -2.0]))

    def test_birkhoff_sum(self):
        f = bernoulli_s1().cocycle
        # windows 01, 11, 10
        expect(birkhoff_sum(f, "0110", 3)).to(be_within(-1 - 1e-12, -1 + 1e-12))
        expect(birkhoff_sum(f, "0110", 0)).to(equal(0.0))
        expect(lambda: birkhoff_sum(f, "011", 3)).to(raise_error(WordTooShortError))

    def test_birkhoff_sums_are_additive(self):
        rng = np.random.default_rng(31)
        for _ in range(1000):
            depth = int(rng.integers(1, 4))
            f = FiberCocycle(FULL, depth, rng.standard_normal(2**depth))
            first, second = (int(k) for k in rng.integers(1, 12, 2))
            word = "".join(str(s) for s in rng.integers(0, 2, first + second + depth - 1))
            whole = birkhoff_sum(f, word, first + second)
            split = birkhoff_sum(f, word, first) + birkhoff_sum(f, word[first:], second)
            expect(whole).to(be_within(split - 1e-9, split + 1e-9))

    def test_center(self):
        rpf = gibbs_measure(FULL, Potential.constant(FULL, -math.log(2.0)), 2)
        f = center(FiberCocycle(FULL, 2, np.array([1.0, 2.0, 3.0, 4.0])), rpf)
        expect(f.values.tolist()).to(equal([-1.5, -0.5, 0.5, 1.5]))
        expect(f.mean).to(be_within(-1e-12, 1e-12))

    def test_periodic_sum(self):
        f = bernoulli_s1().cocycle
        expect(periodic_sum(f, Word((0, 1)))).to(be_within(ROOT2 - 1 - 1e-12, ROOT2 - 1 + 1e-12))
        expect(periodic_sum(f, Word((1,)))).to(be_within(-ROOT2 - 1e-12, -ROOT2 + 1e-12))


class TestOneSidedReduction:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_cohomologous_reduction(self, seed):
        rng = np.random.default_rng(seed)
        f2 = TwoSidedCocycle.of_range(GOLDEN, 1, rng.standard_normal(len(GOLDEN.words(3))))
        f_plus, h = reduce_to_one_sided(f2)
        expect(f_plus.offset).to(equal(0))
        expect(h.offset).to(equal(-1))
        expect(cohomology_residual(f2, f_plus, h)).to(be_within(0, 1e-12))

    def test_range_zero(self):
        f2 = TwoSidedCocycle.of_range(FULL, 0, np.array([0.5, -0.5]))
        f_plus, h = reduce_to_one_sided(f2)
        expect(f_plus.values.tolist()).to(equal([0.5, -0.5]))
        expect(h.values.tolist()).to(equal([0.0]))


class TestNonArithmeticityCheck:
    def test_lattice(self):
        system = lattice_counterexample()
        report = non_arithmeticity_check(system.sft, system.cocycle, 6)
        expect(report.lattice_candidate).to(be_true)
        expect(report.lattice_step).to(be_within(2 - 1e-9, 2 + 1e-9))
        expect(report.cohomologous_to_constant).to(equal(False))

    def test_bernoulli_s1(self):
        system = bernoulli_s1()
        report = non_arithmeticity_check(system.sft, system.cocycle, 6)
        expect(report.lattice_candidate).to(equal(False))
        expect(report.cohomologous_to_constant).to(equal(False))

    def test_constant_cocycle(self):
        report = non_arithmeticity_check(FULL, FiberCocycle(FULL, 1, np.array([0.3, 0.3])), 4)
        expect(report.cohomologous_to_constant).to(be_true)
        expect(report.lattice_candidate).to(equal(False))

    def test_coboundary_is_cohomologous_to_constant(self):
        # f = h - h o sigma with h(x) = x0
        f = FiberCocycle(FULL, 2, np.array([0.0, -1.0, 1.0, 0.0]))
        expect(non_arithmeticity_check(FULL, f, 5).cohomologous_to_constant).to(be_true)


class TestCycleGeometry:
    def test_layout(self):
        geometry = CycleGeometry(FULL, 8, 2, 4, 2)
        expect(geometry.lead).to(equal(1))
        expect(geometry.start).to(equal(3))
        expect(geometry.tail_length).to(equal(7))
        expect(len(geometry.word((0,) * 7))).to(equal(10))

    def test_whole_head_is_free(self):
        geometry = CycleGeometry(FULL, 8, 2, 8, 2)
        expect(geometry.lead).to(equal(0))
        expect(geometry.start).to(equal(0))
        expect(geometry.tail_length).to(equal(10))
        expect(len(geometry.by_lead()[()])).to(equal(2**10))

    def test_too_small(self):
        expect(lambda: CycleGeometry(FULL, 4, 2, 5, 2)).to(raise_error(ValueError))
        expect(lambda: CycleGeometry(FULL, 8, 1, 4, 3)).to(raise_error(ValueError))

    def test_closed_walks_are_consistent(self):
        geometry = CycleGeometry(GOLDEN, 6, 1, 2, 2)
        walks = list(closed_walks(geometry, 2, 40))
        expect(len(walks) > 0).to(be_true)
        expect(len(walks) <= 40).to(be_true)
        for walk in walks:
            for k, (x, y) in enumerate(walk):
                following = walk[(k + 1) % len(walk)][0]
                expect(y[-1:]).to(equal(x[-1:]))
                expect(following[:1]).to(equal(y[:1]))
            expect(walk[-1][1] != walk[0][0]).to(be_true)


class TestAccessCoverage:
    def test_covering_radius(self):
        expect(covering_radius([])).to(equal(0.5))
        expect(covering_radius([0.5])).to(equal(0.25))
        expect(covering_radius([0.0, 0.25, 0.5, 0.75, 1.0])).to(equal(0.125))

    def test_bernoulli_s1_is_dense(self):
        system = bernoulli_s1()
        report = collapsed_access_coverage(system.sft, system.cocycle, 8, 4)
        expect(report.truncated).to(equal(False))
        expect(report.closeness).to(equal(8))
        expect(report.covering_radius < 0.05).to(be_true)
        expect(all(0.0 <= t < 1.0 for t in report.achieved)).to(be_true)
        for t in (ROOT2 - 1.0, 5.0 * ROOT2 - 7.0, 20.0 - 14.0 * ROOT2):
            expect(min(abs(a - t) for a in report.achieved) < 1e-7).to(be_true)

    def test_short_junctions_thin_the_coverage(self):
        system = bernoulli_s1()
        report = collapsed_access_coverage(system.sft, system.cocycle, 8, 4, closeness=4)
        expect(report.closeness).to(equal(4))
        expect(report.covering_radius > 0.1).to(be_true)

    def test_zero_cocycle_reaches_only_zero(self):
        report = collapsed_access_coverage(FULL, FiberCocycle(FULL, 2, np.zeros(4)), 6, 2)
        expect(report.achieved).to(equal((0.0,)))
        expect(report.cycle_lengths).to(equal((1,)))
        expect(report.covering_radius).to(equal(0.5))

    def test_lattice_stays_on_integers(self):
        system = lattice_counterexample()
        report = collapsed_access_coverage(system.sft, system.cocycle, 6, 2)
        expect(report.covering_radius).to(equal(0.5))
        expect(report.achieved).to(equal((0.0,)))

    def test_achieved_values_are_distinct_modulo_one(self):
        values, counts = unique_mod_one(
            [0.0, 1e-9, 0.07106781, 0.071067811, 1.0 - 1e-9, 0.5], [2, 1, 3, 2, 4, 1]
        )
        expect(values.tolist()).to(equal([0.0, 0.07106781, 0.5]))
        expect(counts.tolist()).to(equal([1, 2, 1]))

    def test_pairs_need_room(self):
        system = bernoulli_s1()
        expect(lambda: collapsed_access_coverage(system.sft, system.cocycle, 5, 3)).to(
            raise_error(ValueError)
        )
