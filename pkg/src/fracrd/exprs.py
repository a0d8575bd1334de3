"""Safe arithmetic expressions for config files (reaction terms, initial data).

Expressions are parsed with ast, checked against a whitelist of node types,
names and call targets, and compiled once; evaluation happens with numpy
semantics so they vectorize over grids.  No attribute access, subscripts,
comprehensions or double-underscore anything.
"""

from __future__ import annotations

import ast
from typing import Callable, Sequence

import numpy as np

_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "tanh": np.tanh,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "minimum": np.minimum,
    "maximum": np.maximum,
}
_CONSTANTS = {"pi": np.pi, "e": np.e}
_ALLOWED_NODES = (
    ast.Expression,
    ast.BinOp,
    ast.UnaryOp,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.Pow,
    ast.Mod,
    ast.USub,
    ast.UAdd,
    ast.Constant,
    ast.Name,
    ast.Call,
    ast.Load,
)


class ExpressionError(ValueError):
    pass


def compile_expression(text: str, variables: Sequence[str]) -> Callable:
    """Compile `text` into fn(*variables) operating on floats or arrays."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse expression {text!r}: {exc.msg}") from exc
    names = set(variables) | set(_CONSTANTS)
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ExpressionError(
                f"expression {text!r} uses unsupported syntax {type(node).__name__}"
            )
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
                raise ExpressionError(
                    f"expression {text!r} calls an unknown function"
                )
            if node.keywords:
                raise ExpressionError("keyword arguments are not supported")
        if isinstance(node, ast.Name):
            if node.id not in names and node.id not in _FUNCTIONS:
                raise ExpressionError(
                    f"expression {text!r} references unknown name {node.id!r} "
                    f"(variables here: {', '.join(variables)})"
                )
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ExpressionError(f"constant {node.value!r} is not numeric")
    code = compile(tree, "<config-expression>", "eval")
    env = {**_FUNCTIONS, **_CONSTANTS, "__builtins__": {}}

    def fn(*args):
        local = dict(zip(variables, args))
        return eval(code, env, local)  # noqa: S307 - ast-whitelisted above

    fn.__name__ = f"expr[{text}]"
    return fn
