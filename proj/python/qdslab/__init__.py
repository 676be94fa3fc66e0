# Copyright 2026 The qdslab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Numerical laboratory for minimal quantum dynamical semigroups."""

import json as _json

from ._qdslab import *  # noqa: F401,F403
from ._qdslab import __doc__  # noqa: F401

__version__ = "0.1.0"


def to_dict(report):
    """Full JSON record of a report object (CFReport, ChoiReport, ...) as a dict."""
    return _json.loads(report.to_json())


def gaussian(variance=0.5, center=None):
    """exp(-|x - c|^2 / (2 variance)) as a callable on point tuples."""
    import math

    def f(x):
        c = center or (0.0,) * len(x)
        return math.exp(-sum((a - b) ** 2 for a, b in zip(x, c)) / (2.0 * variance))

    return f
