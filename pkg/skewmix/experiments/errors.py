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

from skewmix.core.errors import ConfigError


class ExperimentError(Exception):
    def __init__(self, kind: str, cause: Exception):
        super().__init__(f"experiment '{kind}' failed: {cause}")
        self.kind = kind
        self.cause = cause


__all__ = ["ConfigError", "ExperimentError"]
