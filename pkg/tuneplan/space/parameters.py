# Copyright 2026 The Tuneplan Authors
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

"""Tunable parameters, routines and configurations."""

import math
from dataclasses import dataclass, field
from typing import (
    Any,
    Dict,
    Iterable,
    Iterator,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from tuneplan.enums import ParameterKind

Value = Union[int, float, str]


def _plain(value: Any) -> Value:
    """Converts numpy scalars into the equivalent python value."""
    if isinstance(value, np.generic):
        return value.item()
    return value


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(
        value, bool
    )


def canonical_value(value: Value) -> str:
    """Decimal rendering used for command placeholders and reports.

    Integers print as integers, reals in positional notation without a
    trailing ".0" (2.0 -> "2", 1e-05 -> "0.00001"), labels verbatim.
    """
    value = _plain(value)
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return np.format_float_positional(value, trim="-")
    return str(value)


def divisors(n: int) -> Tuple[int, ...]:
    """All positive divisors of n, ascending.

    Handy for ordinal parameters that may only take values that split a
    workload evenly (e.g. bands over MPI ranks).
    """
    if n < 1:
        raise ValueError(f"divisors() needs a positive integer, got {n}")
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    large = [n // d for d in reversed(small) if d * d != n]
    return tuple(small + large)


@dataclass(frozen=True)
class RoutineDecl:
    """A kernel or code region whose metric can be measured separately.

    Args:
        name: identifier of the routine.
        parent: the enclosing region, if any.
        measured: False for regions that report no metric of their own; their
            parameters are tuned against the total objective.
    """

    name: str
    parent: Optional[str] = None
    measured: bool = True

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"name": self.name}
        if self.parent is not None:
            out["parent"] = self.parent
        if not self.measured:
            out["measured"] = False
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RoutineDecl":
        return cls(
            name=str(data["name"]),
            parent=data.get("parent"),
            measured=bool(data.get("measured", True)),
        )


@dataclass(frozen=True)
class ParameterSpec:
    """One tunable parameter and its domain.

    Prefer the `integer`, `real`, `ordinal` and `categorical` constructors.

    Args:
        name: identifier, unique within a search space.
        kind: the domain kind.
        default: value used when the parameter is not tuned.
        owner: routine the parameter belongs to.
        lo, hi: inclusive bounds of range kinds.
        step: grid step of integer ranges.
        values: allowed values of set kinds.
        shared_value_required: every use across routines must take one value.
        users: other routines invoking the same kernel as the owner.
    """

    name: str
    kind: ParameterKind
    default: Value
    owner: str
    lo: Optional[float] = None
    hi: Optional[float] = None
    step: Optional[int] = None
    values: Tuple[Value, ...] = ()
    shared_value_required: bool = False
    users: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(_plain(v) for v in self.values))
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "default", _plain(self.default))
        if self.kind in (ParameterKind.INTEGER, ParameterKind.REAL):
            if self.lo is None or self.hi is None:
                raise ValueError(f"Parameter {self.name} needs lo and hi bounds")
            if self.lo > self.hi:
                raise ValueError(f"Parameter {self.name} has lo > hi")
        if self.kind == ParameterKind.INTEGER:
            step = 1 if self.step is None else int(self.step)
            if step < 1:
                raise ValueError(f"Parameter {self.name} needs a positive step")
            object.__setattr__(self, "step", step)
            object.__setattr__(self, "lo", int(self.lo))
            object.__setattr__(self, "hi", int(self.hi))
            if _is_number(self.default) and float(self.default).is_integer():
                object.__setattr__(self, "default", int(self.default))
        elif self.kind == ParameterKind.REAL:
            object.__setattr__(self, "lo", float(self.lo))
            object.__setattr__(self, "hi", float(self.hi))
            if _is_number(self.default):
                object.__setattr__(self, "default", float(self.default))
        else:
            if not self.values:
                raise ValueError(f"Parameter {self.name} needs a non-empty value set")
            if len(set(self.values)) != len(self.values):
                raise ValueError(f"Parameter {self.name} lists duplicate values")
            if self.kind == ParameterKind.ORDINAL and not all(
                _is_number(v) for v in self.values
            ):
                raise ValueError(f"Ordinal parameter {self.name} needs numeric values")
            if self.kind == ParameterKind.CATEGORICAL:
                object.__setattr__(self, "values", tuple(str(v) for v in self.values))
                object.__setattr__(self, "default", str(self.default))
        if not self.contains(self.default):
            raise ValueError(
                f"Default {self.default!r} of parameter {self.name} "
                "is outside its domain"
            )
        if self.owner in self.users:
            raise ValueError(f"Parameter {self.name} lists its owner among its users")

    @classmethod
    def integer(
        cls,
        name: str,
        lo: int,
        hi: int,
        *,
        default: int,
        owner: str,
        step: int = 1,
        **kw,
    ) -> "ParameterSpec":
        return cls(
            name, ParameterKind.INTEGER, default, owner, lo=lo, hi=hi, step=step, **kw
        )

    @classmethod
    def real(
        cls, name: str, lo: float, hi: float, *, default: float, owner: str, **kw
    ) -> "ParameterSpec":
        return cls(name, ParameterKind.REAL, default, owner, lo=lo, hi=hi, **kw)

    @classmethod
    def ordinal(
        cls, name: str, values: Sequence[float], *, default: float, owner: str, **kw
    ) -> "ParameterSpec":
        return cls(
            name, ParameterKind.ORDINAL, default, owner, values=tuple(values), **kw
        )

    @classmethod
    def categorical(
        cls, name: str, values: Sequence[str], *, default: str, owner: str, **kw
    ) -> "ParameterSpec":
        return cls(
            name, ParameterKind.CATEGORICAL, default, owner, values=tuple(values), **kw
        )

    @property
    def is_numeric(self) -> bool:
        return self.kind != ParameterKind.CATEGORICAL

    @property
    def is_shared_kernel(self) -> bool:
        """True when several routines call the kernel and must agree on a value."""
        return self.shared_value_required and bool(self.users)

    @property
    def bounds(self) -> Tuple[float, float]:
        """Smallest and largest numeric value of the domain."""
        if self.kind in (ParameterKind.INTEGER, ParameterKind.REAL):
            return (self.lo, self.hi)
        if self.kind == ParameterKind.ORDINAL:
            return (min(self.values), max(self.values))
        raise TypeError(f"Categorical parameter {self.name} has no numeric bounds")

    def grid(self) -> Tuple[Value, ...]:
        """All values of a finite domain (integer ranges and sets)."""
        if self.kind == ParameterKind.INTEGER:
            return tuple(range(self.lo, self.hi + 1, self.step))
        if self.kind == ParameterKind.REAL:
            raise TypeError(f"Real parameter {self.name} has no finite grid")
        return self.values

    def contains(self, value: Any) -> bool:
        """Whether value lies in this parameter's domain."""
        if self.kind == ParameterKind.CATEGORICAL:
            return isinstance(value, str) and value in self.values
        if not _is_number(value):
            return False
        if self.kind == ParameterKind.ORDINAL:
            return any(value == v for v in self.values)
        if not math.isfinite(value) or not self.lo <= value <= self.hi:
            return False
        if self.kind == ParameterKind.INTEGER:
            return float(value).is_integer() and (int(value) - self.lo) % self.step == 0
        return True

    def sample(self, rng: np.random.Generator) -> Value:
        """Draws one value uniformly from the domain."""
        if self.kind == ParameterKind.REAL:
            return float(rng.uniform(self.lo, self.hi))
        if self.kind == ParameterKind.INTEGER:
            count = (self.hi - self.lo) // self.step + 1
            return int(self.lo + self.step * int(rng.integers(count)))
        return self.values[int(rng.integers(len(self.values)))]

    def snap(self, value: Any) -> Value:
        """The in-domain value closest to a numeric value (labels pass through)."""
        if self.kind == ParameterKind.CATEGORICAL:
            if value not in self.values:
                raise ValueError(f"{value!r} is not a label of {self.name}")
            return value
        if self.kind == ParameterKind.REAL:
            return float(min(max(float(value), self.lo), self.hi))
        if self.kind == ParameterKind.INTEGER:
            top = self.lo + ((self.hi - self.lo) // self.step) * self.step
            k = round((float(value) - self.lo) / self.step)
            return int(min(max(self.lo + k * self.step, self.lo), top))
        return min(self.values, key=lambda v: abs(v - float(value)))

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "name": self.name,
            "kind": self.kind.value,
            "default": self.default,
            "owner": self.owner,
        }
        if self.kind in (ParameterKind.INTEGER, ParameterKind.REAL):
            out["lo"] = self.lo
            out["hi"] = self.hi
        if self.kind == ParameterKind.INTEGER:
            out["step"] = self.step
        if self.values:
            out["values"] = list(self.values)
        if self.shared_value_required:
            out["shared"] = True
        if self.users:
            out["users"] = list(self.users)
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ParameterSpec":
        return cls(
            name=str(data["name"]),
            kind=ParameterKind(data["kind"]),
            default=data["default"],
            owner=str(data["owner"]),
            lo=data.get("lo"),
            hi=data.get("hi"),
            step=data.get("step"),
            values=tuple(data.get("values", ())),
            shared_value_required=bool(data.get("shared", False)),
            users=tuple(data.get("users", ())),
        )


class Configuration(Mapping[str, Value]):
    """An immutable assignment of values to parameter names.

    Configurations hash and compare by content, so they can key dicts and be
    checked for duplicates.
    """

    __slots__ = ("_assignments", "_hash")

    def __init__(
        self, assignments: Union[Mapping[str, Any], Iterable] = (), **kwargs: Any
    ):
        merged = dict(assignments)
        merged.update(kwargs)
        self._assignments: Dict[str, Value] = {
            str(k): _plain(v) for k, v in merged.items()
        }
        self._hash: Optional[int] = None

    def __getitem__(self, name: str) -> Value:
        return self._assignments[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._assignments)

    def __len__(self) -> int:
        return len(self._assignments)

    def __hash__(self) -> int:
        if self._hash is None:
            items = sorted(self._assignments.items(), key=lambda kv: kv[0])
            self._hash = hash(tuple(items))
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Mapping):
            return self._assignments == dict(other.items())
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{k}={canonical_value(v)}" for k, v in self._assignments.items()
        )
        return f"Configuration({inner})"

    def updated(self, changes: Mapping[str, Any]) -> "Configuration":
        """A copy with some assignments replaced or added."""
        merged = dict(self._assignments)
        merged.update(changes)
        return Configuration(merged)

    def restricted(self, names: Iterable[str]) -> "Configuration":
        """A copy holding only the given names (missing names are skipped)."""
        return Configuration(
            {n: self._assignments[n] for n in names if n in self._assignments}
        )

    def to_dict(self) -> Dict[str, Value]:
        return dict(self._assignments)
