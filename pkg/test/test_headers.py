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

from pathlib import Path

import pytest
from expects import contain, equal, expect

ROOT = Path(__file__).resolve().parent.parent
SOURCES = sorted(
    p
    for directory in ("skewmix", "test", "scripts")
    for p in (ROOT / directory).rglob("*.py")
    if p.name != "_version.py"
)


@pytest.mark.parametrize("path", SOURCES, ids=lambda p: str(p.relative_to(ROOT)))
def test_license_header(path):
    lines = path.read_text().splitlines()
    expect(lines[0]).to(equal("#  (c) Copyright 2026 skewmix authors. All rights reserved."))
    expect(lines[2]).to(contain("Apache License, Version 2.0"))
