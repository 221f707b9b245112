# Copyright 2026 The rofl-lab Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Byzantine-robust federated learning lab: crypto primitives, robust
aggregators, attacks and the round simulator."""

from rofl_lab._core import *  # noqa: F401,F403
from rofl_lab._core import (  # noqa: F401
    ConfigError,
    DecodeError,
    Error,
    IoError,
    PreconditionError,
    ProtocolAbort,
    ProtocolError,
    ShapeError,
)

__version__ = "0.1.0"
