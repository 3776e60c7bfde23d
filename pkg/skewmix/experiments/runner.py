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

"""Builds the configured system and runs one experiment kind, emitting CSV tables and a manifest."""

import dataclasses
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from skewmix._version import __version__
from skewmix.core.config import ConfigLoader
from skewmix.core.errors import ConfigError
from skewmix.core.functions import context
from skewmix.core.util import alias, dataclass_from_dict
from skewmix.experiments.errors import ExperimentError
from skewmix.experiments.output import OutputWriter
from skewmix.experiments.types import (
    ExperimentConfig,
    ResultManifest,
    SystemConfig,
    Verdict,
)
from skewmix.mixing import correlate, gibbs, presets, skewprod, twisted
from skewmix.mixing.presets import GLOBAL_OBSERVABLES, LOCAL_OBSERVABLES
from skewmix.mixing.errors import DeadSymbolError, NotFoundError, NotMixingError
from skewmix.mixing.observables import (
    GlobalObservable,
    LocalObservable,
    low_freq_variation,
    nu_av_global,
)
from skewmix.mixing.symbolic import StateFunction, as_symbols, build_sft

LOGGER = logging.getLogger(__name__)

EXPERIMENTS = alias()

DEFAULT_CURVE_GRID = np.round(np.linspace(-0.3, 0.3, 61), 12)
HIGH_FREQUENCY_LEVEL = 1e-8


@dataclass(frozen=True)
class Setup:
    config: ExperimentConfig
    system: presets.SkewSystem
    rpf: gibbs.RpfData
    f: skewprod.FiberCocycle
    seed: int

    @property
    def section(self):
        return self.config.experiment

    def observables(self) -> Tuple[GlobalObservable, LocalObservable]:
        return build_observables(self.config, self.system.sft)


def load_config(config_path: Path, overrides: Sequence[str] = ()) -> ExperimentConfig:
    document = ConfigLoader(config_path, overrides=overrides).load_document()
    return dataclass_from_dict(ExperimentConfig, document)


def _table(sft, depth: int, mapping: Dict[str, float], where: str) -> np.ndarray:
    index = sft.index(depth)
    values = np.zeros(len(index))
    for key, value in mapping.items():
        symbols = as_symbols(key)
        if symbols not in index:
            raise ConfigError(f"{where}.{key}", f"not an admissible word of length {depth}")
        values[index[symbols]] = value
    return values


def build_system(config: SystemConfig) -> presets.SkewSystem:
    if config.preset is not None:
        return presets.SYSTEMS[config.preset](theta=config.theta)
    try:
        sft = build_sft(config.alphabet_size, config.transitions, config.theta)
    except (ValueError, NotMixingError, DeadSymbolError) as exc:
        raise ConfigError("system.transitions", str(exc)) from exc
    potential = gibbs.Potential(
        sft,
        config.potential_depth,
        _table(sft, config.potential_depth, config.potential or {}, "system.potential"),
    )
    cocycle = skewprod.FiberCocycle(
        sft,
        config.cocycle_depth,
        _table(sft, config.cocycle_depth, config.cocycle, "system.cocycle"),
    )
    return presets.SkewSystem(sft, potential, cocycle)


def build_observables(
    config: ExperimentConfig, sft
) -> Tuple[GlobalObservable, LocalObservable]:
    obs = config.observables
    phi_params = {"alpha": config.experiment.alpha, **obs.phi_params}
    try:
        phi = GLOBAL_OBSERVABLES[obs.phi](sft, **phi_params)
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError("observables.phi_params", str(exc)) from exc
    try:
        psi = LOCAL_OBSERVABLES[obs.psi](sft, **obs.psi_params)
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError("observables.psi_params", str(exc)) from exc
    return phi, psi


def build_setup(config: ExperimentConfig, seed: int) -> Setup:
    system = build_system(config.system)
    depth = config.system.depth
    if depth is None:
        depth = max(system.cocycle.depth, system.potential.depth, 1)
        if config.experiment.kind in ("correlate", "rates"):
            phi, psi = build_observables(config, system.sft)
            depth = max(depth, phi.depth, psi.depth)
    rpf = gibbs.gibbs_measure(system.sft, system.potential, depth)
    f = system.cocycle
    if config.system.center:
        f = skewprod.center(f, rpf)
    return Setup(config, system, rpf, f, seed)


def run(
    config_path: Path,
    overrides: Sequence[str] = (),
    seed: Optional[int] = None,
    out: Optional[str] = None,
) -> ResultManifest:
    """
    Runs the experiment described by a TOML configuration file.

    Args:
        config_path: Path to the configuration file.
        overrides: `key.path=value` strings applied to the document before validation.
        seed: Base seed; otherwise resolved from $SKEWMIX_SEED, then `experiment.seed`, then 0.
        out: Output directory; otherwise from $SKEWMIX_OUT, then `output.directory`, then ./results.

    Returns: The :class:`ResultManifest`, also written as manifest.json next to the tables.
    """
    loader = ConfigLoader(config_path, overrides=overrides)
    document = loader.load_document()
    config = dataclass_from_dict(ExperimentConfig, document)
    ctx = context(seed=seed, out=out, config_loader=loader)
    base_seed = ctx.seed
    writer = OutputWriter(ctx.output_directory, config.output.plots)
    kind = config.experiment.kind

    manifest = ResultManifest(
        config=document, version=__version__, seeds={"base": base_seed}
    )
    try:
        started = time.perf_counter()
        setup = build_setup(config, base_seed)
        manifest.timings["setup"] = time.perf_counter() - started
        LOGGER.info("running %s on %s at depth %d", kind, setup.system.name, setup.rpf.depth)

        started = time.perf_counter()
        EXPERIMENTS[kind](setup, writer, manifest)
        manifest.timings[kind] = time.perf_counter() - started
    except ConfigError:
        raise
    except Exception as exc:
        raise ExperimentError(kind, exc) from exc
    writer.write_manifest(manifest)
    for name, verdict in manifest.verdicts.items():
        LOGGER.info("verdict %s: %s", name, verdict.value)
    return manifest


@EXPERIMENTS.alias("gibbs")
def run_gibbs(setup: Setup, writer: OutputWriter, manifest: ResultManifest) -> None:
    rpf = setup.rpf
    sft, m = rpf.sft, rpf.depth
    writer.write_json("rpf.json", rpf.as_dict())

    ones = StateFunction.constant(sft, m, 1.0)
    normalized = float(np.max(np.abs(rpf.transfer(ones).values - 1.0)))
    suffix_sums = np.bincount(
        [sft.index(m - 1)[w.symbols[1:]] for w in sft.words(m)],
        weights=rpf.mu,
        minlength=len(sft.words(m - 1)),
    )
    invariance = float(np.max(np.abs(suffix_sums - gibbs.cylinder_measures(rpf, m - 1))))

    rng = np.random.default_rng(setup.seed)
    v = StateFunction(sft, m, rng.standard_normal(len(sft.words(m))))
    envelope = gibbs.gap_envelope(rpf, v, setup.section.n_max)
    fit = gibbs.gibbs_ball_fit(rpf, [sft.theta**j for j in range(1, m + 4)])

    manifest.results.update(
        {
            "lambda": rpf.lam,
            "mu": dict(zip([str(w) for w in sft.words(m)], rpf.mu.tolist())),
            "normalization_error": normalized,
            "invariance_error": invariance,
            "gap": {"c": envelope.c, "delta": envelope.delta, "second": envelope.second_eigenvalue},
            "gibbs_ball": {"c_u": fit.c_u, "d": fit.d},
        }
    )
    manifest.verdicts["normalization"] = Verdict.of(normalized <= 1e-12)
    manifest.verdicts["shift_invariance"] = Verdict.of(invariance <= 1e-12)
    manifest.verdicts["spectral_gap"] = Verdict.of(envelope.delta < 1.0)


@EXPERIMENTS.alias("spectrum")
def run_spectrum(setup: Setup, writer: OutputWriter, manifest: ResultManifest) -> None:
    section, rpf, f = setup.section, setup.rpf, setup.f
    grid = DEFAULT_CURVE_GRID if section.xi is None else np.asarray(section.xi)
    curve = twisted.spectral_curve(rpf, f, grid)
    writer.write_frame(
        "spectral_curve.csv",
        pd.DataFrame(
            {
                "xi": curve.xi,
                "re_lambda": curve.lambdas.real,
                "im_lambda": curve.lambdas.imag,
                "abs_lambda": np.abs(curve.lambdas),
            }
        ),
    )
    writer.plot(
        "spectral_curve.svg", curve.xi, {"|lambda|": np.abs(curve.lambdas)}, "xi", "|lambda_xi|"
    )
    results: Dict[str, Any] = {
        "second_derivative": curve.second_derivative,
        "green_kubo_variance": curve.variance,
        "truncated_at": curve.truncated_at,
    }
    at_zero = curve.lambdas[curve.xi == 0.0]
    manifest.verdicts["lambda0"] = Verdict.of(
        bool(abs(at_zero[0] - 1.0) <= 1e-12) if at_zero.size else None
    )
    manifest.verdicts["curvature"] = Verdict.of(curve.curvature_error <= 0.02)
    a_kappa = None
    if curve.fit is not None:
        a_kappa = curve.fit.a_kappa
        results["fit"] = dataclasses.asdict(curve.fit)

    start = StateFunction.constant(rpf.sft, rpf.depth, 1.0)
    low_ok, high_ok = [], []
    for xi in section.profile_xi:
        op = twisted.twisted_matrix(rpf, f, xi)
        profile = twisted.norm_decay_profile(op, start, section.n_max)
        name = f"decay_xi_{xi:g}.csv"
        writer.write_frame(
            name, pd.DataFrame({"n": np.arange(len(profile.values)), "w_n": profile.values})
        )
        writer.plot(
            name.replace(".csv", ".svg"),
            np.arange(len(profile.values)),
            {f"xi={xi:g}": profile.values},
            "n",
            "w_n",
        )
        results[f"rate_xi_{xi:g}"] = profile.rate
        if abs(xi) < 0.3 and a_kappa is not None:
            low_ok.append(profile.within(a_kappa))
        elif abs(xi) >= 1.0:
            high_ok.append(profile.first_below(HIGH_FREQUENCY_LEVEL) is not None)
    manifest.verdicts["low_frequency_envelope"] = Verdict.of(all(low_ok) if low_ok else None)
    manifest.verdicts["high_frequency_decay"] = Verdict.of(all(high_ok) if high_ok else None)
    manifest.results.update(results)


def _series(setup: Setup, phi, psi) -> correlate.CorrelationSeries:
    section = setup.section
    return correlate.correlation_series(
        section.estimator,
        section.n,
        setup.rpf,
        setup.f,
        phi,
        psi,
        alpha=section.alpha,
        samples=section.samples,
        seed=setup.seed,
        budget=section.budget,
    )


def _write_series(writer: OutputWriter, series: correlate.CorrelationSeries) -> None:
    writer.write_frame("correlation.csv", series.as_frame())
    positive = series.n > 0
    writer.plot(
        "correlation.svg",
        series.n[positive],
        {"|cov|": np.abs(series.values[positive])},
        "n",
        "|cov(n)|",
        log=True,
    )


@EXPERIMENTS.alias("correlate")
def run_correlate(setup: Setup, writer: OutputWriter, manifest: ResultManifest) -> None:
    phi, psi = setup.observables()
    series = _series(setup, phi, psi)
    _write_series(writer, series)
    manifest.seeds.update(
        {f"n={n}": correlate.derived_seed(setup.seed, int(n)) for n in series.n}
        if series.estimator == "direct"
        else {}
    )
    manifest.verdicts["finite"] = Verdict.of(bool(np.isfinite(series.values).all()))
    vanishing = None
    if phi.name == "constant":
        vanishing = bool(np.all(np.abs(series.values) <= 1e-10 + 3 * series.errors))
    manifest.verdicts["constant_phi_vanishes"] = Verdict.of(vanishing)

    band_ok = None
    if series.estimator == "spectral":
        max0 = psi.max_norm(0)
        band_ok = True
        for n, bands in zip(series.n, series.bands):
            threshold = math.inf if n == 0 else n ** (-setup.section.alpha)
            bound = max0 * low_freq_variation(phi, setup.rpf, threshold)
            band_ok &= bool(abs(bands[1]) <= bound * (1 + 1e-9) + 1e-12)
    manifest.verdicts["low_band_bound"] = Verdict.of(band_ok)
    manifest.results["nu_av"] = nu_av_global(phi, setup.rpf)


@EXPERIMENTS.alias("rates")
def run_rates(setup: Setup, writer: OutputWriter, manifest: ResultManifest) -> None:
    section = setup.section
    phi, psi = setup.observables()
    series = _series(setup, phi, psi)
    _write_series(writer, series)
    window = tuple(section.window) if section.window else None
    fit = correlate.rate_fit(series, window, section.levels, section.log_power)
    check = correlate.lf_bound_check(series, phi, setup.rpf, section.k, section.eps, window)
    lo, hi = fit.window
    inside = (series.n >= max(lo, 1)) & (series.n <= hi)
    floor = float(np.min(np.abs(series.values[inside]) * np.sqrt(series.n[inside])))
    # no spectral mass near 0 from the start of the window on
    start = float(series.n[inside][0])
    rapid = low_freq_variation(phi, setup.rpf, start ** (-0.5 + section.eps)) == 0.0
    manifest.results["rate_fit"] = {
        "window": list(fit.window),
        "exponent": fit.exponent,
        "confidence": list(fit.confidence),
        "points": fit.points,
        "log_power": fit.log_power,
        "rapid_decay": {str(level): verdict for level, verdict in fit.rapid_decay.items()},
    }
    manifest.results["sqrt_n_floor"] = floor
    manifest.results["lf_bound"] = {"c": check.c, "passed": check.passed}
    manifest.verdicts["lf_envelope"] = Verdict.of(check.passed)
    manifest.verdicts["exponent_range"] = Verdict.of(
        None
        if section.exponent_range is None
        else section.exponent_range[0] <= fit.exponent <= section.exponent_range[1]
    )
    manifest.verdicts["rapid_decay"] = Verdict.of(all(fit.rapid_decay.values()) if rapid else None)
    manifest.verdicts["positive_floor"] = Verdict.of(None if rapid else floor > 0)


@EXPERIMENTS.alias("cancel")
def run_cancel(setup: Setup, writer: OutputWriter, manifest: ResultManifest) -> None:
    section, rpf, f = setup.section, setup.rpf, setup.f
    n = section.n[-1]
    try:
        cycle = twisted.find_us_cycle(
            rpf,
            f,
            section.xi0,
            n,
            section.max_pairs,
            section.budget,
            section.epsilon,
            section.closeness,
        )
    except NotFoundError as exc:
        LOGGER.warning("%s", exc)
        manifest.verdicts["witness"] = Verdict.FAIL
        manifest.verdicts["dichotomy"] = Verdict.SKIPPED
        return

    writer.write_frame(
        "us_cycle.csv",
        pd.DataFrame(
            {
                "pair": np.arange(len(cycle.pairs)),
                "x": [str(p.x) for p in cycle.pairs],
                "y": [str(p.y) for p in cycle.pairs],
                "g_x": [p.g_x for p in cycle.pairs],
                "g_y": [p.g_y for p in cycle.pairs],
                "phase": [p.phase for p in cycle.pairs],
                "stable_tol": cycle.stable_tolerances,
                "junction_distance": cycle.junction_distances,
                "unstable_tol": cycle.unstable_tolerances,
            }
        ),
    )
    op = twisted.twisted_matrix(rpf, f, section.xi0)
    cancelled = [
        twisted.strong_cancellation(
            cycle, twisted.sample_nice_observable(op, cycle.epsilon, setup.seed + draw), op
        )
        for draw in range(section.trials)
    ]
    manifest.results.update(
        {
            "margin": cycle.margin,
            "total_phase": cycle.total_phase,
            "total_tolerance": cycle.total_tolerance,
            "epsilon": cycle.epsilon,
            "H": cycle.H,
            "pairs": len(cycle.pairs),
            "cancelling_draws": int(sum(cancelled)),
        }
    )
    manifest.verdicts["witness"] = Verdict.PASS
    manifest.verdicts["phase_consistency"] = Verdict.of(
        abs(cycle.recomputed_phase() - cycle.total_phase) <= 1e-12
    )
    manifest.verdicts["dichotomy"] = Verdict.of(all(cancelled))


@EXPERIMENTS.alias("access")
def run_access(setup: Setup, writer: OutputWriter, manifest: ResultManifest) -> None:
    section, system = setup.section, setup.system
    n = section.n[-1]
    report = skewprod.collapsed_access_coverage(
        system.sft, setup.f, n, section.max_pairs, section.budget, section.closeness
    )
    writer.write_frame(
        "access.csv",
        pd.DataFrame(
            {"t": report.achieved, "cycle_length": report.cycle_lengths, "n": report.n}
        ),
    )
    arithmeticity = skewprod.non_arithmeticity_check(system.sft, setup.f, section.max_period)
    manifest.results.update(
        {
            "covering_radius": report.covering_radius,
            "achieved": len(report.achieved),
            "truncated": report.truncated,
            "cohomologous_to_constant": arithmeticity.cohomologous_to_constant,
            "lattice_candidate": arithmeticity.lattice_candidate,
            "lattice_step": arithmeticity.lattice_step,
        }
    )
    expected: Optional[bool] = None
    if system.accessible is not None:
        if system.accessible:
            expected = report.covering_radius < 0.05 and not arithmeticity.lattice_candidate
        else:
            expected = report.covering_radius >= 0.5 - 1e-9 and arithmeticity.lattice_candidate
    manifest.verdicts["accessibility"] = Verdict.of(expected)
    manifest.verdicts["complete_search"] = Verdict.of(not report.truncated)
