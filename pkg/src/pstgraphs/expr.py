"""Safe evaluation of small arithmetic expressions such as ``sqrt(5)/2``.

Used for ``--set`` values on the command line and for expected values in the
acceptance fixtures.  Only numbers, ``+ - * / **``, ``pi``, ``e``, a handful
of math functions and caller-supplied variables are accepted.
"""

from __future__ import annotations

import ast
import math
import operator
from typing import Mapping

import numpy as np


class ExpressionError(ValueError):
    pass


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {"sqrt": np.sqrt, "sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}
_CONSTS = {"pi": math.pi, "e": math.e}


def evaluate(text: str, variables: Mapping[str, object] | None = None):
    """Evaluate ``text``; variables may be scalars or numpy arrays."""
    if not isinstance(text, str):
        raise ExpressionError(f"expected an expression string, got {text!r}")
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}") from exc
    env = dict(_CONSTS)
    env.update(variables or {})

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(
            node.value, bool
        ):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in env:
                return env[node.id]
            raise ExpressionError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ExpressionError(f"unsupported syntax in {text!r}")

    with np.errstate(all="raise"):
        try:
            return ev(tree)
        except (ZeroDivisionError, FloatingPointError, OverflowError) as exc:
            raise ExpressionError(f"cannot evaluate {text!r}: {exc}") from exc


def number(text) -> float:
    """A finite float from a number or an expression string."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        val = float(text)
    else:
        val = evaluate(text)
        if np.ndim(val) != 0:
            raise ExpressionError(f"{text!r} is not a scalar")
        val = float(val)
    if not math.isfinite(val):
        raise ExpressionError(f"{text!r} is not finite")
    return val
