"""Tiny integer expression evaluator for catalog templates.

Accepts integers, names bound in the environment, + - * //, parentheses,
max/min and s(c,d) := max(0, c+d-1).
"""
from __future__ import annotations

import ast
from typing import Mapping


class ExprError(ValueError):
    pass


def s_shift(c: int, d: int) -> int:
    return max(0, c + d - 1)


_FUNCS = {"max": max, "min": min, "s": s_shift}


def eval_int(expr: str | int, env: Mapping[str, int] | None = None) -> int:
    if isinstance(expr, bool):
        raise ExprError("booleans are not expressions")
    if isinstance(expr, int):
        return expr
    env = dict(env or {})
    if "c" in env and "d" in env and "s" not in env:
        env["s"] = s_shift(env["c"], env["d"])
    try:
        tree = ast.parse(str(expr).strip(), mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"malformed expression {expr!r}") from exc
    return _ev(tree.body, env, expr)


def _ev(node, env, src):
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise ExprError(f"unbound name {node.id!r} in {src!r}")
        return int(env[node.id])
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _ev(node.operand, env, src)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.FloorDiv)):
        a, b = _ev(node.left, env, src), _ev(node.right, env, src)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        return a // b
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and not node.keywords:
        args = [_ev(a, env, src) for a in node.args]
        return _FUNCS[node.func.id](*args)
    raise ExprError(f"unsupported construct in {src!r}")


def names_in(expr: str | int) -> set[str]:
    if isinstance(expr, int):
        return set()
    try:
        tree = ast.parse(str(expr).strip(), mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"malformed expression {expr!r}") from exc
    return {n.id for n in ast.walk(tree) if isinstance(n, ast.Name) and n.id not in _FUNCS}
