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

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import pytest
from expects import be_none, contain, equal, expect, raise_error

from skewmix.core.errors import ConfigError
from skewmix.core.util import alias, dataclass_from_dict, parse_override, set_dotted


@dataclass(frozen=True)
class Inner:
    rate: float
    labels: List[str] = field(default_factory=list)


@dataclass(frozen=True)
class Outer:
    name: str
    inner: Inner
    count: Optional[int] = None
    table: Dict[str, float] = field(default_factory=dict)


class TestDataclassFromDict:
    def test_nested(self):
        actual = dataclass_from_dict(
            Outer, {"name": "a", "inner": {"rate": 2, "labels": ["x"]}, "table": {"01": 0.5}}
        )
        expect(actual).to(equal(Outer("a", Inner(2.0, ["x"]), None, {"01": 0.5})))
        expect(actual.inner.rate).to(equal(2.0))

    def test_optional(self):
        expect(dataclass_from_dict(Outer, {"name": "a", "inner": {"rate": 1.0}}).count).to(be_none)
        expect(
            dataclass_from_dict(Outer, {"name": "a", "inner": {"rate": 1.0}, "count": 3}).count
        ).to(equal(3))

    def test_unknown_field(self):
        expect(lambda: dataclass_from_dict(Outer, {"name": "a", "inner": {"rate": 1, "speed": 2}})).to(
            raise_error(ConfigError, "invalid configuration at 'inner.speed': unknown field")
        )

    def test_wrong_type_names_path(self):
        def build():
            dataclass_from_dict(Outer, {"name": "a", "inner": {"rate": "fast"}})

        expect(build).to(raise_error(ConfigError, contain("'inner.rate'")))

    def test_bool_is_not_a_number(self):
        expect(lambda: dataclass_from_dict(Inner, {"rate": True})).to(raise_error(ConfigError))

    def test_missing_required(self):
        expect(lambda: dataclass_from_dict(Outer, {"name": "a"})).to(raise_error(ConfigError))


class TestOverrides:
    @pytest.mark.parametrize(
        "override,expected",
        [
            ("experiment.n=[1, 2, 4]", ("experiment.n", [1, 2, 4])),
            ("system.theta=0.25", ("system.theta", 0.25)),
            ("output.plots=true", ("output.plots", True)),
            ("system.preset=golden_mean", ("system.preset", "golden_mean")),
            ('system.preset="golden_mean"', ("system.preset", "golden_mean")),
        ],
    )
    def test_parse_override(self, override, expected):
        expect(parse_override(override)).to(equal(expected))

    def test_parse_override_without_value(self):
        expect(lambda: parse_override("experiment.n")).to(raise_error(ConfigError))

    def test_set_dotted(self):
        document = {"experiment": {"kind": "gibbs"}}
        set_dotted(document, "experiment.seed", 3)
        set_dotted(document, "output.plots", True)
        expect(document).to(
            equal({"experiment": {"kind": "gibbs", "seed": 3}, "output": {"plots": True}})
        )

    def test_set_dotted_through_value(self):
        expect(lambda: set_dotted({"a": 1}, "a.b", 2)).to(raise_error(ConfigError))


class TestAlias:
    def test_lookup(self):
        registry = alias(ignore_case=True)

        @registry.alias("first", "one", description="the first")
        def first():
            return 1

        expect(registry["ONE"]()).to(equal(1))
        expect("First" in registry).to(equal(True))
        expect("second" in registry).to(equal(False))
        expect(registry.describe()).to(equal([("first", "the first"), ("one", "the first")]))

    def test_case_sensitive(self):
        registry = alias()
        registry.alias("Name")(str)
        expect("name" in registry).to(equal(False))
        expect(lambda: registry["name"]).to(raise_error(KeyError))
