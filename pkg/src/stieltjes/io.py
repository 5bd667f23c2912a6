"""JSON formats for derivators and targets.

Derivator::

    {"interval": [a, b],
     "continuous_part": {"breakpoints": [[x, y], ...]},
     "jumps": [[x, delta], ...]}

Target::

    {"kind": "expr", "expr": "sin(g)"}
    {"kind": "samples", "pieces": [[[y, f], ...], ...]}

Expressions use the variable ``g``, numeric literals, ``+ - * / ^`` and the
functions ``sin cos exp abs``. They are parsed into a restricted syntax tree;
nothing is passed to ``eval``.
"""

from __future__ import annotations

import ast
import json
import operator
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .approx import GFunction, PiecewiseTarget, target_from_samples
from .derivator import Derivator, make_derivator


class SpecError(ValueError):
    """Malformed derivator or target description."""


def derivator_from_dict(data: dict) -> Derivator:
    try:
        interval = data["interval"]
        breakpoints = data["continuous_part"]["breakpoints"]
        jumps = data.get("jumps", [])
    except (KeyError, TypeError) as exc:
        raise SpecError(f"derivator spec is missing a field: {exc}") from exc
    return make_derivator(interval, breakpoints, jumps)


def derivator_to_dict(d: Derivator) -> dict:
    return {
        "interval": [d.a, d.b],
        "continuous_part": {"breakpoints": [[float(x), float(y)] for x, y in zip(d.bx, d.by)]},
        "jumps": [[float(x), float(v)] for x, v in zip(d.jx, d.jd)],
    }


def _read_json(source: Union[str, Path, dict]) -> dict:
    if isinstance(source, dict):
        return source
    try:
        return json.loads(Path(source).read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{source}: invalid JSON ({exc})") from exc


def load_derivator(source: Union[str, Path, dict]) -> Derivator:
    return derivator_from_dict(_read_json(source))


def dump_derivator(d: Derivator, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(derivator_to_dict(d), indent=2) + "\n")


# expressions ------------------------------------------------------------

_BINARY = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv, ast.Pow: np.power}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}


def compile_expr(text: str) -> Callable:
    """Compile an expression in ``g`` into a vectorized function of ``g``.

    >>> compile_expr("2*g^2 + 1")(3.0)
    19.0
    """
    if not isinstance(text, str) or not text.strip():
        raise SpecError("empty expression")
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise SpecError(f"cannot parse expression {text!r}") from exc

    def build(node) -> Callable:
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            v = float(node.value)
            return lambda g: v
        if isinstance(node, ast.Name) and node.id == "g":
            return lambda g: g
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
            op, lhs, rhs = _BINARY[type(node.op)], build(node.left), build(node.right)
            return lambda g: op(lhs(g), rhs(g))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            op, arg = _UNARY[type(node.op)], build(node.operand)
            return lambda g: op(arg(g))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            fn, arg = _FUNCS[node.func.id], build(node.args[0])
            return lambda g: fn(arg(g))
        raise SpecError(f"unsupported syntax in expression {text!r}: {ast.dump(node)[:60]}")

    body = build(tree)

    def outer(g):
        g = np.asarray(g, dtype=float)
        return np.broadcast_to(np.asarray(body(g), dtype=float), g.shape).copy()

    return outer


def target_from_dict(d: Derivator, data: dict) -> Union[GFunction, PiecewiseTarget]:
    kind = data.get("kind") if isinstance(data, dict) else None
    if kind == "expr":
        return GFunction(d, compile_expr(data.get("expr", "")))
    if kind == "samples":
        try:
            return target_from_samples(d, data["pieces"])
        except (KeyError, TypeError) as exc:
            raise SpecError(f"malformed samples target: {exc}") from exc
    raise SpecError(f"unknown target kind {kind!r}")


def load_target(d: Derivator, source: Union[str, Path, dict]) -> Union[GFunction, PiecewiseTarget]:
    return target_from_dict(d, _read_json(source))
