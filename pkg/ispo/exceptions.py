# ========= Copyright 2023-2024 @ CAMEL-AI.org. All Rights Reserved. =========
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
# ========= Copyright 2023-2024 @ CAMEL-AI.org. All Rights Reserved. =========
from typing import Optional


class IspoError(Exception):
    r"""Base class of every error raised by the solver suite."""


class InstanceValidationError(IspoError, ValueError):
    r"""Raised when an instance document violates one of its invariants.

    Args:
        invariant (str): Short name of the first violated invariant.
        message (str): Human readable description.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(message)
        self.invariant = invariant
        self.message = message

    def __str__(self) -> str:
        return self.message


class InfeasibleError(IspoError):
    r"""Raised when no assignment satisfies the supply and lot-type limits."""


class NonConvexError(IspoError):
    r"""Raised when a relaxed adjustment is requested on a non-convex cost."""


class WorkLimitExceeded(IspoError):
    r"""Raised when an explicit enumeration or node limit would be exceeded.

    Args:
        message (str): Description of the exceeded limit.
        work (int, optional): Amount of work that was requested.
            (default: :obj:`None`)
        limit (int, optional): The configured limit. (default: :obj:`None`)
    """

    def __init__(
        self,
        message: str,
        work: Optional[int] = None,
        limit: Optional[int] = None,
    ):
        super().__init__(message)
        self.work = work
        self.limit = limit


class WilcoxonTieError(IspoError, ValueError):
    r"""Raised when paired differences contain zeros or tied magnitudes."""


class RroUndefinedError(IspoError, ZeroDivisionError):
    r"""Raised when the relative realized operative profit has a zero
    denominator."""


class OddBranchCountError(IspoError, ValueError):
    r"""Raised when branches cannot be split into pairs."""
