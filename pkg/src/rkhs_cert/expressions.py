"""Whitelisted arithmetic expressions evaluable at double and extended precision.

One small grammar is shared by custom radial profiles (variable ``r``),
candidate functions (variable ``x``) and custom point sequences (variable
``n``): numeric literals, the single free variable, ``+ - * /``, unary minus,
``pow(base, integer_literal)`` or ``base ** integer_literal``, and the calls
``exp``, ``sin``, ``cos``, ``sqrt``, ``abs``.  Anything else is rejected at
compile time, so config files cannot smuggle in attribute access, names or
general Python.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import mpmath

from .errors import ExpressionError

_DOUBLE_FUNCS: Mapping[str, Callable[[Any], Any]] = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
    "abs": abs,
}

_MP_FUNCS: Mapping[str, Callable[[Any], Any]] = {
    "exp": mpmath.exp,
    "sin": mpmath.sin,
    "cos": mpmath.cos,
    "sqrt": mpmath.sqrt,
    "abs": mpmath.fabs,
}

_BIN_OPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_UNARY_OPS = (ast.USub, ast.UAdd)


def _literal_int(node: ast.expr) -> int | None:
    """Return the value of an integer literal node (allowing a sign), else None."""
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, _UNARY_OPS):
        inner = _literal_int(node.operand)
        if inner is None:
            return None
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.Constant) and type(node.value) is int:
        return node.value
    return None


def _validate(node: ast.expr, variable: str) -> None:
    if isinstance(node, ast.Constant):
        if type(node.value) not in (int, float):
            raise ExpressionError(f"literal {node.value!r} is not a real number")
        return
    if isinstance(node, ast.Name):
        if node.id != variable:
            raise ExpressionError(f"unknown name {node.id!r}; the only variable is {variable!r}")
        return
    if isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _UNARY_OPS):
            raise ExpressionError("only unary +/- are allowed")
        _validate(node.operand, variable)
        return
    if isinstance(node, ast.BinOp):
        if not isinstance(node.op, _BIN_OPS):
            raise ExpressionError("only + - * / and integer ** are allowed")
        if isinstance(node.op, ast.Pow) and _literal_int(node.right) is None:
            raise ExpressionError("exponents must be integer literals")
        _validate(node.left, variable)
        if not isinstance(node.op, ast.Pow):
            _validate(node.right, variable)
        return
    if isinstance(node, ast.Call):
        if node.keywords or not isinstance(node.func, ast.Name):
            raise ExpressionError("only plain calls of whitelisted functions are allowed")
        name = node.func.id
        if name == "pow":
            if len(node.args) != 2:
                raise ExpressionError("pow takes exactly two arguments")
            if _literal_int(node.args[1]) is None:
                raise ExpressionError("pow exponents must be integer literals")
            _validate(node.args[0], variable)
            return
        if name not in _DOUBLE_FUNCS:
            raise ExpressionError(f"function {name!r} is not in the whitelist")
        if len(node.args) != 1:
            raise ExpressionError(f"{name} takes exactly one argument")
        _validate(node.args[0], variable)
        return
    raise ExpressionError(f"disallowed syntax: {ast.dump(node)}")


def _evaluate(node: ast.expr, value: Any, funcs: Mapping[str, Callable], num: Callable) -> Any:
    if isinstance(node, ast.Constant):
        return num(node.value)
    if isinstance(node, ast.Name):
        return value
    if isinstance(node, ast.UnaryOp):
        inner = _evaluate(node.operand, value, funcs, num)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = _evaluate(node.left, value, funcs, num)
            return base ** _literal_int(node.right)
        left = _evaluate(node.left, value, funcs, num)
        right = _evaluate(node.right, value, funcs, num)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        return left / right
    if isinstance(node, ast.Call):
        name = node.func.id  # type: ignore[union-attr]
        if name == "pow":
            base = _evaluate(node.args[0], value, funcs, num)
            return base ** _literal_int(node.args[1])
        return funcs[name](_evaluate(node.args[0], value, funcs, num))
    raise AssertionError("unreachable: node survived validation")


@dataclass(frozen=True)
class Expression:
    """A compiled single-variable expression with two evaluation paths.

    ``eval_double`` runs on machine doubles; ``eval_mp`` runs on mpmath
    numbers under whatever working precision the caller has set.  Integer
    literals are kept exact on both paths.
    """

    source: str
    variable: str
    _tree: ast.expr = field(repr=False)

    def eval_double(self, value: float) -> float:
        return float(_evaluate(self._tree, float(value), _DOUBLE_FUNCS, float))

    def eval_mp(self, value: Any) -> Any:
        return _evaluate(self._tree, mpmath.mpf(value), _MP_FUNCS, mpmath.mpf)


def compile_expression(source: str, variable: str) -> Expression:
    """Parse and validate ``source`` against the whitelist grammar.

    Raises ExpressionError for syntax errors, unknown names, non-integer
    exponents or any construct outside the grammar.
    """
    if not isinstance(source, str) or not source.strip():
        raise ExpressionError("expression must be a nonempty string")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse expression {source!r}: {exc.msg}") from exc
    _validate(tree.body, variable)
    return Expression(source=source, variable=variable, _tree=tree.body)
