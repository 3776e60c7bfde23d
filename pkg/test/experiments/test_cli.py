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

import pytest
from expects import contain, equal, expect
from mockito import unstub, verify, when

from skewmix.experiments import cli
from skewmix.experiments.errors import ExperimentError
from skewmix.experiments.types import ResultManifest, Verdict


def manifest_with(**verdicts) -> ResultManifest:
    return ResultManifest(
        config={}, version="0.0.0", seeds={"base": 0}, verdicts=dict(verdicts)
    )


@pytest.fixture(autouse=True)
def clean_environment():
    with mock.patch.dict(os.environ, {}, clear=True):
        yield


class TestCli:
    def teardown_method(self):
        unstub()

    def test_list_presets(self, capsys):
        expect(cli.main(["list-presets"])).to(equal(0))
        expect(capsys.readouterr().out).to(contain("bernoulli_s1"))

    def test_validate(self, tmp_path):
        good = tmp_path / "good.toml"
        good.write_text('[experiment]\nkind = "gibbs"\n')
        expect(cli.main(["validate", "--config", str(good)])).to(equal(0))
        expect(cli.main(["validate", "--config", str(good), "--set", "experiment.kind=walk"])).to(
            equal(1)
        )

    def test_validate_missing_file(self, tmp_path):
        expect(cli.main(["validate", "--config", str(tmp_path / "absent.toml")])).to(equal(1))

    def test_run_passes_arguments(self):
        when(cli).run(
            Path("exp.toml"), ["system.theta=0.25", "output.plots=true"], seed=3, out="results"
        ).thenReturn(manifest_with(finite=Verdict.PASS, dichotomy=Verdict.SKIPPED))
        code = cli.main(
            [
                "run",
                "--config",
                "exp.toml",
                "--seed",
                "3",
                "--out",
                "results",
                "--set",
                "system.theta=0.25",
                "--plots",
                "on",
            ]
        )
        expect(code).to(equal(0))
        verify(cli, times=1).run(...)

    def test_failed_verdict_exits_nonzero(self):
        when(cli).run(Path("exp.toml"), [], seed=None, out=None).thenReturn(
            manifest_with(finite=Verdict.PASS, witness=Verdict.FAIL)
        )
        expect(cli.main(["run", "--config", "exp.toml"])).to(equal(1))

    def test_experiment_error_exits_nonzero(self):
        when(cli).run(Path("exp.toml"), [], seed=None, out=None).thenRaise(
            ExperimentError("rates", ValueError("too few points"))
        )
        expect(cli.main(["run", "--config", "exp.toml"])).to(equal(1))

    def test_end_to_end(self, tmp_path):
        config = tmp_path / "exp.toml"
        config.write_text('[experiment]\nkind = "gibbs"\n')
        out = tmp_path / "out"
        expect(cli.main(["run", "--config", str(config), "--out", str(out)])).to(equal(0))
        expect((out / "manifest.json").exists()).to(equal(True))

    def test_setup_failure_exits_nonzero(self, tmp_path):
        config = tmp_path / "exp.toml"
        config.write_text('[experiment]\nkind = "gibbs"\n')
        out = tmp_path / "out"
        arguments = ["run", "--config", str(config), "--out", str(out), "--set", "system.theta=1.5"]
        expect(cli.main(arguments)).to(equal(1))
        expect((out / "manifest.json").exists()).to(equal(False))
