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
r"""Streaming writer for the LP text format.

Sections are written in the order ``Maximize``/``Minimize``, ``Subject To``,
``Bounds``, ``Binaries``, ``Generals``, ``End``. Names may contain brackets
and commas, e.g. ``x[0,2,1]``.
"""

from collections import Counter
from typing import Dict, Iterable, List, Optional, TextIO, Tuple

from pydantic import BaseModel, Field

Term = Tuple[float, str]

SENSES = ("<=", ">=", "=")
TERMS_PER_LINE = 8


class LpSummary(BaseModel):
    r"""Variable and constraint counts per family.

    A family is the part of a name before the index bracket.
    """

    variables: Dict[str, int] = Field(default_factory=dict)
    constraints: Dict[str, int] = Field(default_factory=dict)

    @property
    def num_variables(self) -> int:
        return sum(self.variables.values())

    @property
    def num_constraints(self) -> int:
        return sum(self.constraints.values())


def family(name: str) -> str:
    return name.split("[", 1)[0]


def index_name(prefix: str, *index: int) -> str:
    if not index:
        return prefix
    return f"{prefix}[{','.join(str(i) for i in index)}]"


def format_number(value: float) -> str:
    return format(float(value), ".12g")


class LpWriter:
    r"""Writes one model to an open text handle.

    Args:
        handle (TextIO): Destination.
        sense (str): ``"Maximize"`` or ``"Minimize"``.
            (default: :obj:`"Maximize"`)
    """

    def __init__(self, handle: TextIO, sense: str = "Maximize"):
        if sense not in ("Maximize", "Minimize"):
            raise ValueError(f"unknown objective sense {sense}")
        self.handle = handle
        self.sense = sense
        self._section = None
        self._rows: Counter = Counter()
        self._columns: Counter = Counter()
        self._binaries: List[str] = []
        self._generals: List[str] = []
        self._bounds: List[str] = []

    def declare(self, names: Iterable[str], kind: str = "continuous") -> None:
        r"""Register variables; ``kind`` is ``binary``, ``general`` or
        ``continuous``."""
        for name in names:
            self._columns[family(name)] += 1
            if kind == "binary":
                self._binaries.append(name)
            elif kind == "general":
                self._generals.append(name)
            elif kind != "continuous":
                raise ValueError(f"unknown variable kind {kind}")

    def bound(
        self, name: str, lower: Optional[float] = None, upper: Optional[float] = None
    ) -> None:
        if lower is not None and upper is not None:
            text = f"{format_number(lower)} <= {name} <= {format_number(upper)}"
        elif lower is not None:
            text = f"{name} >= {format_number(lower)}"
        elif upper is not None:
            text = f"{name} <= {format_number(upper)}"
        else:
            text = f"{name} free"
        self._bounds.append(text)

    def _expression(self, terms: Iterable[Term]) -> List[str]:
        lines, current = [], []
        for coefficient, name in terms:
            if coefficient == 0:
                continue
            sign = "-" if coefficient < 0 else "+"
            current.append(f"{sign} {format_number(abs(coefficient))} {name}")
            if len(current) == TERMS_PER_LINE:
                lines.append(" ".join(current))
                current = []
        if current:
            lines.append(" ".join(current))
        return lines

    def objective(self, terms: Iterable[Term], name: str = "obj") -> None:
        if self._section is not None:
            raise RuntimeError("objective must come first")
        self.handle.write(f"{self.sense}\n")
        lines = self._expression(terms) or ["0"]
        self.handle.write(f" {name}: {lines[0]}\n")
        for line in lines[1:]:
            self.handle.write(f"   {line}\n")
        self.handle.write("Subject To\n")
        self._section = "constraints"

    def constraint(
        self, name: str, terms: Iterable[Term], sense: str, rhs: float
    ) -> None:
        if self._section != "constraints":
            raise RuntimeError("constraints follow the objective")
        if sense not in SENSES:
            raise ValueError(f"unknown constraint sense {sense}")
        lines = self._expression(terms)
        if not lines:
            raise ValueError(f"constraint {name} has no terms")
        self.handle.write(f" {name}: {lines[0]}\n")
        for line in lines[1:]:
            self.handle.write(f"   {line}\n")
        self.handle.write(f"   {sense} {format_number(rhs)}\n")
        self._rows[family(name)] += 1

    def close(self) -> LpSummary:
        r"""Write the trailing sections and return the counts."""
        if self._bounds:
            self.handle.write("Bounds\n")
            for text in self._bounds:
                self.handle.write(f" {text}\n")
        for title, names in (("Binaries", self._binaries), ("Generals", self._generals)):
            if not names:
                continue
            self.handle.write(f"{title}\n")
            for start in range(0, len(names), TERMS_PER_LINE):
                self.handle.write(" " + " ".join(names[start : start + TERMS_PER_LINE]) + "\n")
        self.handle.write("End\n")
        self._section = "closed"
        return LpSummary(variables=dict(self._columns), constraints=dict(self._rows))
