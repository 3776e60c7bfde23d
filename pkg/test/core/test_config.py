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

import os
from pathlib import Path
from unittest import mock

from expects import be_none, contain, equal, expect, raise_error

from skewmix.core.config import (
    ConfigFileOutputDirectoryProvider,
    ConfigFileSeedProvider,
    ConfigLoader,
    EnvironmentOutputDirectoryProvider,
    EnvironmentSeedProvider,
    OutputDirectoryProviderChain,
    SeedProviderChain,
    StaticOutputDirectoryProvider,
    StaticSeedProvider,
)
from skewmix.core.errors import ConfigError

DATA = Path(os.path.dirname(__file__)) / "data"


class TestConfigLoader:
    def test_load_document(self):
        document = ConfigLoader(DATA / "test_config.toml").load_document()
        expect(document["experiment"]["seed"]).to(equal(17))
        expect(document["system"]).to(equal({"preset": "bernoulli_s1"}))

    def test_load_namespace(self):
        loader = ConfigLoader(DATA / "test_config.toml", namespace="nightly")
        expect(loader.load_document()).to(equal({"experiment": {"kind": "gibbs"}}))

    def test_load_missing_namespace(self):
        loader = ConfigLoader(DATA / "test_config.toml", namespace="missing")
        expect(lambda: loader.load_document()).to(
            raise_error(ConfigError, contain("did not find 'missing' namespace"))
        )

    def test_load_invalid_file(self):
        loader = ConfigLoader(DATA / "test_config_bad.toml")
        expect(lambda: loader.load_document()).to(raise_error(ConfigError))

    def test_overrides_apply_in_order(self):
        loader = ConfigLoader(
            DATA / "test_config.toml",
            overrides=["experiment.n=[1, 2]", "system.theta=0.25", "experiment.n=[3]"],
        )
        document = loader.load_document()
        expect(document["experiment"]["n"]).to(equal([3]))
        expect(document["system"]["theta"]).to(equal(0.25))

    def test_get(self):
        loader = ConfigLoader(DATA / "test_config.toml")
        expect(loader.get("output.directory")).to(equal("sample-results"))
        expect(loader.get("output.plots")).to(be_none)
        expect(loader.get("experiment.kind.deeper")).to(be_none)

    def test_equality(self):
        expect(ConfigLoader(DATA / "a.toml", overrides=["x=1"])).to(
            equal(ConfigLoader(DATA / "a.toml", overrides=["x=1"]))
        )
        expect(ConfigLoader(DATA / "a.toml")).not_to(
            equal(ConfigLoader(DATA / "a.toml", overrides=["x=1"]))
        )


class TestStaticSeedProvider:
    def test_get(self):
        expect(StaticSeedProvider(5).get()).to(equal(5))

    def test_equality(self):
        expect(StaticSeedProvider(5)).to(equal(StaticSeedProvider(5)))
        expect(StaticSeedProvider(5)).not_to(equal(StaticSeedProvider(6)))


class TestEnvironmentSeedProvider:
    def test_get(self):
        provider = EnvironmentSeedProvider()
        with mock.patch.dict(os.environ, {"SKEWMIX_SEED": "42"}, clear=True):
            expect(provider.get()).to(equal(42))

    def test_get_unset(self):
        provider = EnvironmentSeedProvider()
        with mock.patch.dict(os.environ, {}, clear=True):
            expect(lambda: provider.get()).to(
                raise_error(ValueError, "$SKEWMIX_SEED is unset or empty")
            )

    def test_try_get_unset(self):
        provider = EnvironmentSeedProvider()
        with mock.patch.dict(os.environ, {}, clear=True):
            expect(provider.try_get()).to(be_none)

    def test_get_not_an_integer(self):
        provider = EnvironmentSeedProvider()
        with mock.patch.dict(os.environ, {"SKEWMIX_SEED": "seven"}, clear=True):
            expect(lambda: provider.get()).to(raise_error(ConfigError))

    def test_get_custom(self):
        provider = EnvironmentSeedProvider("CUSTOM_SEED")
        with mock.patch.dict(os.environ, {"CUSTOM_SEED": "3"}, clear=True):
            expect(provider.get()).to(equal(3))

    def test_equality(self):
        expect(EnvironmentSeedProvider()).to(equal(EnvironmentSeedProvider()))
        expect(EnvironmentSeedProvider("custom")).not_to(
            equal(EnvironmentSeedProvider("different-custom"))
        )


class TestConfigFileSeedProvider:
    def test_get(self):
        provider = ConfigFileSeedProvider(ConfigLoader(DATA / "test_config.toml"))
        expect(provider.get()).to(equal(17))

    def test_try_get_unset(self):
        provider = ConfigFileSeedProvider(ConfigLoader(DATA / "test_config_empty.toml"))
        expect(provider.try_get()).to(be_none)

    def test_try_get_missing_file(self):
        provider = ConfigFileSeedProvider(ConfigLoader(DATA / "missing_config_file.toml"))
        expect(provider.try_get()).to(be_none)


class TestSeedProviderChain:
    def test_environment_wins_over_file(self):
        provider = SeedProviderChain(
            EnvironmentSeedProvider(),
            ConfigFileSeedProvider(ConfigLoader(DATA / "test_config.toml")),
            StaticSeedProvider(0),
        )
        with mock.patch.dict(os.environ, {"SKEWMIX_SEED": "9"}, clear=True):
            expect(provider.get()).to(equal(9))
        with mock.patch.dict(os.environ, {}, clear=True):
            expect(provider.get()).to(equal(17))

    def test_fallback(self):
        provider = SeedProviderChain(
            ConfigFileSeedProvider(ConfigLoader(DATA / "missing_config_file.toml")),
            StaticSeedProvider(0),
        )
        expect(provider.get()).to(equal(0))

    def test_get_no_value(self):
        provider = SeedProviderChain(StaticSeedProvider(None))
        expect(lambda: provider.get()).to(raise_error(ValueError, "No configured seed found."))


class TestOutputDirectoryProviders:
    def test_static(self):
        expect(StaticOutputDirectoryProvider("out").get()).to(equal(Path("out")))

    def test_environment(self):
        provider = EnvironmentOutputDirectoryProvider()
        with mock.patch.dict(os.environ, {"SKEWMIX_OUT": "/tmp/runs"}, clear=True):
            expect(provider.get()).to(equal(Path("/tmp/runs")))
        with mock.patch.dict(os.environ, {}, clear=True):
            expect(provider.try_get()).to(be_none)

    def test_config_file(self):
        provider = ConfigFileOutputDirectoryProvider(ConfigLoader(DATA / "test_config.toml"))
        expect(provider.get()).to(equal(Path("sample-results")))

    def test_chain(self):
        provider = OutputDirectoryProviderChain(
            EnvironmentOutputDirectoryProvider(),
            ConfigFileOutputDirectoryProvider(ConfigLoader(DATA / "test_config_empty.toml")),
            StaticOutputDirectoryProvider(Path("results")),
        )
        with mock.patch.dict(os.environ, {}, clear=True):
            expect(provider.get()).to(equal(Path("results")))

    def test_chain_no_value(self):
        provider = OutputDirectoryProviderChain(EnvironmentOutputDirectoryProvider())
        with mock.patch.dict(os.environ, {}, clear=True):
            expect(lambda: provider.get()).to(
                raise_error(ValueError, "No configured output directory found.")
            )
