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
"""Stamps skewmix/_version.py with `git describe` so run manifests carry the build."""

import subprocess
from pathlib import Path

VERSION_FILE = Path(__file__).resolve().parent.parent / "skewmix" / "_version.py"

try:
    described = subprocess.check_output(
        ["git", "describe", "--tags", "--always", "--first-parent"], stderr=subprocess.DEVNULL
    )
    version = described.decode().strip().replace("-", "_")
    VERSION_FILE.write_text(f'__version__ = "{version}"\n')
except (subprocess.CalledProcessError, FileNotFoundError):
    print(f"not a git checkout, keeping {VERSION_FILE.name}")
print(VERSION_FILE.read_text().strip())
