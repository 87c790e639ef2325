"""Safe evaluation of density expressions such as ``1 + 0.5*cos(2*theta)``.

The grammar is numeric constants, the variables ``theta`` (plane) or
``x, y, z`` (space), ``+ - * /``, powers (``**`` or ``^``), parentheses
and the functions ``cos``, ``sin``, ``exp``.  Expressions are compiled
from the ``ast`` tree, never passed to ``eval``.
"""

from __future__ import annotations

import ast
import math
import operator

import numpy as np

__all__ = ["ExpressionError", "compile_density", "variables_for"]

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"cos": np.cos, "sin": np.sin, "exp": np.exp}
_CONSTS = {"pi": math.pi, "e": math.e}


class ExpressionError(ValueError):
    pass


def variables_for(dim: int) -> tuple[str, ...]:
    if dim == 2:
        return ("theta",)
    if dim == 3:
        return ("x", "y", "z")
    raise ExpressionError(f"no expression variables for dimension {dim}")


def _compile(node, names):
    if isinstance(node, ast.Expression):
        return _compile(node.body, names)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        value = float(node.value)
        return lambda env: value
    if isinstance(node, ast.Name):
        if node.id in names:
            key = node.id
            return lambda env: env[key]
        if node.id in _CONSTS:
            value = _CONSTS[node.id]
            return lambda env: value
        raise ExpressionError(f"unknown name {node.id!r} (allowed: {', '.join(names)})")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left, right = _compile(node.left, names), _compile(node.right, names)
        return lambda env: op(left(env), right(env))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        op = _UNARY[type(node.op)]
        inner = _compile(node.operand, names)
        return lambda env: op(inner(env))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords:
        fn = _FUNCS[node.func.id]
        arg = _compile(node.args[0], names)
        return lambda env: fn(arg(env))
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def compile_density(text: str, dim: int):
    """Return ``func(u)`` evaluating the expression at unit vectors ``u`` (k, n)."""
    names = variables_for(dim)
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as err:
        raise ExpressionError(f"cannot parse {text!r}: {err.msg} at column {err.offset}") from None
    body = _compile(tree, names)

    def func(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if dim == 2:
            env = {"theta": np.arctan2(u[:, 1], u[:, 0])}
        else:
            env = {"x": u[:, 0], "y": u[:, 1], "z": u[:, 2]}
        with np.errstate(all="ignore"):
            return np.asarray(body(env), dtype=float) * np.ones(len(u))

    func.source = text
    return func
