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

"""Validity constraints over configurations, e.g. `nstb * nkpb * nspb <= 40`."""

import operator
import re
from dataclasses import dataclass, field
from typing import Any, Callable, FrozenSet, Mapping, Tuple

import sympy
from sympy.parsing.sympy_parser import parse_expr

_RELATIONS = {
    "<=": operator.le,
    ">=": operator.ge,
    "==": operator.eq,
    "<": operator.lt,
    ">": operator.gt,
    "=": operator.eq,
}
_RELATION_RE = re.compile(r"(<=|>=|==|<|>|=)")
_IDENTIFIER_RE = re.compile(r"(?<![0-9.])[A-Za-z_][A-Za-z0-9_]*")


def _check_arithmetic(expr: sympy.Expr, text: str) -> None:
    """Only sums, differences and products of symbols and constants are allowed."""
    for node in sympy.preorder_traversal(expr):
        if isinstance(node, (sympy.Symbol, sympy.Number, sympy.Add, sympy.Mul)):
            continue
        if (
            isinstance(node, sympy.Pow)
            and node.exp.is_Integer
            and int(node.exp) > 0
        ):
            # x*x is simplified to x**2 by the parser
            continue
        raise ValueError(f"Unsupported operation {node} in constraint {text!r}")


@dataclass(frozen=True)
class ConstraintExpr:
    """A comparison between two arithmetic expressions of parameter values.

    Example:
        ConstraintExpr("tb_PAIR * tb_sm_PAIR <= 2048")
    """

    expression: str
    _relation: Callable[[Any, Any], bool] = field(init=False, repr=False, compare=False)
    _lhs: Callable[..., Any] = field(init=False, repr=False, compare=False)
    _rhs: Callable[..., Any] = field(init=False, repr=False, compare=False)
    _names: Tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        parts = _RELATION_RE.split(self.expression)
        if len(parts) != 3:
            raise ValueError(
                f"Constraint {self.expression!r} needs exactly one comparison operator"
            )
        lhs_text, relation, rhs_text = parts
        names = sorted(set(_IDENTIFIER_RE.findall(lhs_text + " " + rhs_text)))
        local_dict = {n: sympy.Symbol(n) for n in names}
        try:
            lhs = parse_expr(lhs_text, local_dict=local_dict)
            rhs = parse_expr(rhs_text, local_dict=local_dict)
        except (SyntaxError, TypeError, sympy.SympifyError) as e:
            raise ValueError(f"Cannot parse constraint {self.expression!r}") from e
        _check_arithmetic(lhs, self.expression)
        _check_arithmetic(rhs, self.expression)
        symbols = [local_dict[n] for n in names]
        object.__setattr__(self, "_relation", _RELATIONS[relation])
        object.__setattr__(self, "_lhs", sympy.lambdify(symbols, lhs, modules="math"))
        object.__setattr__(self, "_rhs", sympy.lambdify(symbols, rhs, modules="math"))
        object.__setattr__(self, "_names", tuple(names))

    @property
    def parameters(self) -> FrozenSet[str]:
        """Names of the parameters the constraint reads."""
        return frozenset(self._names)

    def __call__(self, assignments: Mapping[str, Any]) -> bool:
        args = [assignments[n] for n in self._names]
        return bool(self._relation(self._lhs(*args), self._rhs(*args)))
