"""Whitelisted arithmetic expressions in ``x`` for initial conditions."""

from __future__ import annotations

import ast
import math
from collections.abc import Callable

import numpy as np

from hyperrelax._errors import ConfigError
from hyperrelax.types import FloatArray

_FUNCTIONS: dict[str, Callable[[FloatArray], FloatArray]] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "sech": lambda z: 1.0 / np.cosh(z),
}

_CONSTANTS = {"pi": math.pi, "e": math.e}

_BINARY = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


def _evaluate(node: ast.AST, x: FloatArray) -> FloatArray | float:
    if isinstance(node, ast.Expression):
        return _evaluate(node.body, x)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name):
        if node.id == "x":
            return x
        if node.id in _CONSTANTS:
            return _CONSTANTS[node.id]
        raise ConfigError(f"Unknown name {node.id!r} in initial condition")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        value = _evaluate(node.operand, x)
        return -value if isinstance(node.op, ast.USub) else value
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        return _BINARY[type(node.op)](_evaluate(node.left, x), _evaluate(node.right, x))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
        fn = _FUNCTIONS.get(node.func.id)
        if fn is None or node.keywords or len(node.args) != 1:
            raise ConfigError(f"Unsupported call {ast.unparse(node)!r} in initial condition")
        return fn(_evaluate(node.args[0], x))
    raise ConfigError(f"Unsupported syntax {ast.unparse(node)!r} in initial condition")


def compile_expression(source: str) -> Callable[[FloatArray], FloatArray]:
    """Turn ``source`` into a vectorized function of ``x``.

    Only numbers, ``x``, ``pi``, ``e``, the operators ``+ - * / **`` and the
    one-argument functions in ``_FUNCTIONS`` are accepted.

    Raises:
        ConfigError: The expression does not parse or uses anything else.

    Example:
        >>> f = compile_expression("2*exp(-0.02*x**2)")
        >>> float(f(np.array([0.0]))[0])
        2.0
    """
    try:
        tree = ast.parse(source.strip(), mode="eval")
    except SyntaxError as e:
        raise ConfigError(f"Cannot parse initial condition {source!r}: {e.msg}") from e
    # Validate eagerly so bad expressions fail at config time
    with np.errstate(all="ignore"):
        _evaluate(tree, np.zeros(1))

    def fn(x: FloatArray) -> FloatArray:
        values = _evaluate(tree, np.asarray(x, dtype=np.float64))
        return np.broadcast_to(np.asarray(values, dtype=np.float64), np.shape(x)).copy()

    return fn
