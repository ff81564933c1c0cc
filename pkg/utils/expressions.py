"""Restricted arithmetic for numeric config values such as ``-eta/pi`` or ``0.5*scale``."""

import ast
import math
import operator
from typing import Mapping

_BINARY = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def evaluate_number(text: str, names: Mapping[str, float] = None) -> float:
    """
    Evaluate a numeric expression.

    Only literals, + - * / **, unary signs, parentheses and the given names
    (plus ``pi``) are accepted.

    Raises:
        ValueError: on anything else
    """
    scope = {'pi': math.pi}
    scope.update(names or {})
    try:
        tree = ast.parse(text.strip(), mode='eval')
    except SyntaxError as e:
        raise ValueError(f"not an expression: {text!r}") from e

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in scope:
                raise ValueError(f"unknown name {node.id!r} in {text!r}")
            return float(scope[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
            return _BINARY[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](walk(node.operand))
        raise ValueError(f"unsupported syntax in {text!r}")

    try:
        value = walk(tree)
    except ZeroDivisionError as e:
        raise ValueError(f"division by zero in {text!r}") from e
    if not math.isfinite(value):
        raise ValueError(f"non-finite value from {text!r}")
    return value


def evaluate_list(text: str, names: Mapping[str, float] = None) -> list:
    """Comma-separated list of expressions."""
    items = [item for item in text.split(',') if item.strip()]
    return [evaluate_number(item, names) for item in items]
