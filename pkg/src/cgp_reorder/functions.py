"""Function sets for Boolean circuits and symbolic regression.

The Boolean operators are written against integer bitmasks: with ``mask=1``
and arguments in {0, 1} they reduce to the plain 4-row truth tables, while a
wider mask lets a caller evaluate every row of a truth table at once on
packed column bitmasks.  The regression operators are protected so that any
finite real input yields a finite real output; they accept scalars and numpy
arrays alike.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ConfigError

Value = Union[int, float, np.ndarray]

PROTECTED_EPS = 1e-9
EXP_CLAMP = 700.0
# overflow clamp: finite inputs always yield finite outputs
VALUE_LIMIT = np.finfo(np.float64).max


def _b_and(a: int, b: int, mask: int) -> int:
    return a & b


def _b_or(a: int, b: int, mask: int) -> int:
    return a | b


def _b_nand(a: int, b: int, mask: int) -> int:
    return mask ^ (a & b)


def _b_nor(a: int, b: int, mask: int) -> int:
    return mask ^ (a | b)


def _finite(value: Value) -> Value:
    """Clamp IEEE overflow (+-inf) back to the largest finite float."""
    return np.clip(value, -VALUE_LIMIT, VALUE_LIMIT)


def add(a: Value, b: Value) -> Value:
    return _finite(np.add(a, b))


def sub(a: Value, b: Value) -> Value:
    return _finite(np.subtract(a, b))


def mul(a: Value, b: Value) -> Value:
    return _finite(np.multiply(a, b))


def protected_div(a: Value, b: Value) -> Value:
    """a / b, returning 1.0 wherever |b| < 1e-9."""
    guarded = np.abs(b) < PROTECTED_EPS
    safe = np.where(guarded, 1.0, b)
    return _finite(np.where(guarded, 1.0, np.asarray(a, dtype=np.float64) / safe))


def sin(a: Value) -> Value:
    return np.sin(a)


def cos(a: Value) -> Value:
    return np.cos(a)


def protected_log(a: Value) -> Value:
    """ln(|a|), returning 0.0 wherever |a| < 1e-9."""
    mag = np.abs(a)
    guarded = mag < PROTECTED_EPS
    return np.where(guarded, 0.0, np.log(np.where(guarded, 1.0, mag)))


def clamped_exp(a: Value) -> Value:
    """exp(min(a, 700)) so the result never overflows to infinity."""
    return np.exp(np.minimum(a, EXP_CLAMP))


class InvalidArity(Exception):
    """Too few arguments for the addressed function (programming error)."""


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    arity: int
    fn: Callable


@dataclass(frozen=True)
class FunctionSet:
    """Ordered collection of node functions addressed by function id."""

    id: str
    entries: tuple[FunctionSpec, ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def max_arity(self) -> int:
        return max(spec.arity for spec in self.entries)

    @property
    def is_boolean(self) -> bool:
        return self.id == "boolean"

    @cached_property
    def arities(self) -> tuple[int, ...]:
        return tuple(spec.arity for spec in self.entries)

    def arity_of(self, function_id: int) -> int:
        return self.entries[function_id].arity

    def apply(self, function_id: int, args: Sequence[Value]) -> Value:
        """Apply one function to its consumed arguments; excess args are ignored."""
        spec = self.entries[function_id]
        if len(args) < spec.arity:
            raise InvalidArity(
                f"{spec.name} needs {spec.arity} args, got {len(args)}"
            )
        if self.is_boolean:
            return spec.fn(args[0], args[1], 1)
        return spec.fn(*args[: spec.arity])


BOOLEAN_SET = FunctionSet(
    id="boolean",
    entries=(
        FunctionSpec("AND", 2, _b_and),
        FunctionSpec("OR", 2, _b_or),
        FunctionSpec("NAND", 2, _b_nand),
        FunctionSpec("NOR", 2, _b_nor),
    ),
)

REGRESSION_SET = FunctionSet(
    id="regression",
    entries=(
        FunctionSpec("ADD", 2, add),
        FunctionSpec("SUB", 2, sub),
        FunctionSpec("MUL", 2, mul),
        FunctionSpec("PDIV", 2, protected_div),
        FunctionSpec("SIN", 1, sin),
        FunctionSpec("COS", 1, cos),
        FunctionSpec("LN", 1, protected_log),
        FunctionSpec("EXP", 1, clamped_exp),
    ),
)

FUNCTION_SETS = {fs.id: fs for fs in (BOOLEAN_SET, REGRESSION_SET)}

# Conventions embedded into every result file so reports are self-describing.
PROTECTED_CONVENTIONS = {
    "pdiv": f"1.0 when |denominator| < {PROTECTED_EPS:g}, else a/b",
    "ln": f"0.0 when |x| < {PROTECTED_EPS:g}, else ln(|x|)",
    "exp": f"exp(min(x, {EXP_CLAMP:g}))",
}


def get_function_set(set_id: str) -> FunctionSet:
    try:
        return FUNCTION_SETS[set_id]
    except KeyError:
        raise ConfigError(
            f"unknown function set {set_id!r}; expected one of {sorted(FUNCTION_SETS)}"
        ) from None


def function_names(set_id: str) -> list[str]:
    return [spec.name for spec in get_function_set(set_id).entries]
