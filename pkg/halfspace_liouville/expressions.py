"""
Restricted arithmetic expressions for user-defined cones, operators and fields.

The grammar accepts numeric literals, the variables ``<prefix>1 ... <prefix>n``,
the binary operators ``+ - * / **``, unary minus, and calls to a small
whitelist of functions. Anything else is rejected at parse time, so files
read from disk are never handed to ``eval``.
"""

import ast
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence

from .exceptions import SpecFormatError

_BINARY = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}

EIGEN_FUNCTIONS: Dict[str, Callable[..., float]] = {
    "min": min,
    "max": max,
    "pow": pow,
}

FIELD_FUNCTIONS: Dict[str, Callable[..., float]] = {
    **EIGEN_FUNCTIONS,
    "log": math.log,
    "exp": math.exp,
    "sqrt": math.sqrt,
    "abs": abs,
}


@dataclass(frozen=True)
class Expression:
    """A parsed expression over the variables ``<prefix>1 .. <prefix>n``."""

    text: str
    prefix: str
    n: int
    functions: Dict[str, Callable[..., float]] = field(default_factory=dict, repr=False)
    tree: ast.Expression = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    def __call__(self, values: Sequence[float]) -> float:
        if len(values) != self.n:
            raise SpecFormatError(f"expression expects {self.n} values, got {len(values)}")
        env = {f"{self.prefix}{i + 1}": float(v) for i, v in enumerate(values)}
        try:
            return float(self._eval(self.tree.body, env))
        except (ValueError, ZeroDivisionError, OverflowError) as e:
            raise SpecFormatError(f"cannot evaluate '{self.text}': {e}") from e

    def _eval(self, node: ast.AST, env: Dict[str, float]) -> float:
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            operand = self._eval(node.operand, env)
            return -operand if isinstance(node.op, ast.USub) else operand
        if isinstance(node, ast.BinOp):
            return _BINARY[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.Call):
            args = [self._eval(a, env) for a in node.args]
            return self.functions[node.func.id](*args)  # type: ignore[attr-defined]
        raise SpecFormatError(f"unsupported syntax in '{self.text}'")


def _check(node: ast.AST, text: str, names: set, functions: Dict[str, Callable[..., float]]) -> None:
    if isinstance(node, ast.Expression):
        _check(node.body, text, names, functions)
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise SpecFormatError(f"only numeric constants are allowed in '{text}'")
    elif isinstance(node, ast.Name):
        if node.id not in names:
            raise SpecFormatError(f"unknown variable '{node.id}' in '{text}'")
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise SpecFormatError(f"unsupported unary operator in '{text}'")
        _check(node.operand, text, names, functions)
    elif isinstance(node, ast.BinOp):
        if type(node.op) not in _BINARY:
            raise SpecFormatError(f"unsupported operator in '{text}'")
        _check(node.left, text, names, functions)
        _check(node.right, text, names, functions)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in functions:
            raise SpecFormatError(f"unsupported function call in '{text}'")
        if node.keywords or not node.args:
            raise SpecFormatError(f"functions take positional arguments only in '{text}'")
        for arg in node.args:
            _check(arg, text, names, functions)
    else:
        raise SpecFormatError(f"unsupported syntax '{type(node).__name__}' in '{text}'")


def parse_expression(
    text: str, n: int, prefix: str = "l", functions: Dict[str, Callable[..., float]] = None
) -> Expression:
    """Parse ``text`` as an expression over ``prefix1 .. prefixn``."""
    if functions is None:
        functions = EIGEN_FUNCTIONS
    if not isinstance(text, str) or not text.strip():
        raise SpecFormatError("expression must be a non-empty string")
    if not re.fullmatch(r"[A-Za-z_]\w*", prefix):
        raise SpecFormatError(f"invalid variable prefix '{prefix}'")
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as e:
        raise SpecFormatError(f"cannot parse expression '{text}': {e.msg}") from e
    names = {f"{prefix}{i + 1}" for i in range(n)}
    _check(tree, text, names, functions)
    return Expression(text=text.strip(), prefix=prefix, n=n, functions=functions, tree=tree)
