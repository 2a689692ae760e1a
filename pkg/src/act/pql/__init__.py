"""Pattern query language: parser and evaluator."""

from . import ast
from .evaluator import DEFAULT_EXPANSION_CAP, evaluate, render_value
from .parser import parse

__all__ = ["ast", "parse", "evaluate", "render_value", "DEFAULT_EXPANSION_CAP"]
