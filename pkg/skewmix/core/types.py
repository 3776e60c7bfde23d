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

from skewmix.core.config import OutputDirectoryProvider, SeedProvider


class RunContext:
    def __init__(self, seed: SeedProvider, output: OutputDirectoryProvider):
        self.seed_provider = seed
        self.output_provider = output

    @property
    def seed(self) -> int:
        return self.seed_provider.get()

    @property
    def output_directory(self) -> Path:
        return self.output_provider.get()

    def __eq__(self, other: object):
        return other is self or (
            isinstance(other, RunContext)
            and other.seed_provider == self.seed_provider
            and other.output_provider == self.output_provider
        )
