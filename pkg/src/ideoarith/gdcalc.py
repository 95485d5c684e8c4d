"""Growth/decay classes of positive sequences and depth-bounded verdicts.

A class is represented by a deterministic sequence s_1, s_2, ...  Eventual
statements are judged on the tail half of a finite window; when the window
does not settle the question the verdict is UNDECIDED, never a guess.
"""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Union

from . import config
from .errors import LogOfUnit, MalformedSpec, NonPositiveTerm, NotMonotone
from .interval import Interval

Term = Union[Fraction, Interval]


class Order(str, Enum):
    LESS = "LESS"
    GREATER = "GREATER"
    EQUIVALENT = "EQUIVALENT"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class Verdict:
    value: Order
    depth: int
    witness: dict = field(default_factory=dict)

    @property
    def decided(self) -> bool:
        return self.value is not Order.UNDECIDED

    def to_json(self) -> dict:
        return {"value": self.value.value, "depth": self.depth, "witness": _jsonable(self.witness)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Interval):
        return list(obj.to_strings())
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Enum):
        return obj.value
    return obj


class GDClass:
    """A positive sequence standing for its growth/decay class."""

    def __init__(self, fn: Callable[[int], Term], tag: str = "infinitesimal", label: str = ""):
        if tag not in ("infinitesimal", "unit", "infinite"):
            raise ValueError(f"unknown tag {tag!r}")
        self._fn = fn
        self.tag = tag
        self.label = label

    def __repr__(self):
        return f"GDClass({self.label or '<fn>'}, {self.tag})"

    def term(self, i: int) -> Interval:
        t = Interval.lift(self._fn(i))
        if t.lo <= 0:
            if t.hi <= 0:
                raise NonPositiveTerm(f"{self.label or 'sequence'} term {i} is not positive")
            # positive by declaration but not yet certified: keep the upper end
        return t

    def window(self, depth: int) -> list:
        return [self.term(i) for i in range(1, depth + 1)]

    @staticmethod
    def constant(c, tag: str = "unit") -> "GDClass":
        c = Fraction(c)
        return GDClass(lambda i: c, tag, f"const:{c}")

    def power(self, r: Fraction, prec: int = 96) -> "GDClass":
        """Pointwise s_i^r for rational r > 0 (outward rounded roots)."""
        r = Fraction(r)
        if r <= 0:
            raise ValueError("exponent must be positive")

        def fn(i):
            t = self.term(i) ** r.numerator
            if r.denominator == 1:
                return t
            scale = max(0, -math.floor(math.log2(float(t.hi)) if t.hi > 0 else 0))
            return t.root(r.denominator, prec + scale // r.denominator + 8)
        return GDClass(fn, self.tag, f"({self.label})^{r}")


def class_from_spec(spec: str) -> GDClass:
    """Parse seq:pow:<b>, seq:poly:<k>, seq:factored:<expr>, seq:from-pair:<h>, seq:recip-denoms:<h>."""
    if not spec.startswith("seq:"):
        raise MalformedSpec(f"class spec must start with 'seq:': {spec!r}")
    kind, _, arg = spec[4:].partition(":")
    if kind == "pow":
        b = Fraction(arg)
        if b <= 1:
            raise MalformedSpec("seq:pow needs b > 1")
        return GDClass(lambda i: b ** -i, "infinitesimal", spec)
    if kind == "poly":
        k = Fraction(arg)
        if k.denominator != 1 or k <= 0:
            raise MalformedSpec("seq:poly needs a positive integer k")
        k = int(k)
        return GDClass(lambda i: Fraction(1, i ** k), "infinitesimal", spec)
    if kind == "factored":
        fn = compile_expr(arg)
        return GDClass(fn, "infinitesimal", spec)
    if kind in ("from-pair", "recip-denoms"):
        from .ideology import lookup_pair

        pair = lookup_pair(arg)
        if kind == "from-pair":
            return pair.decay_class()
        return pair.growth_class()
    raise MalformedSpec(f"unknown class kind {kind!r}")


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"factorial": math.factorial, "fib": lambda n: _fib(int(n))}


def _fib(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def compile_expr(text: str) -> Callable[[int], Fraction]:
    """A tiny exact arithmetic language over the index variable i."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise MalformedSpec(f"bad expression {text!r}") from exc

    def ev(node, i):
        if isinstance(node, ast.Expression):
            return ev(node.body, i)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Fraction(node.value)
        if isinstance(node, ast.Name) and node.id == "i":
            return Fraction(i)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand, i)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            a, b = ev(node.left, i), ev(node.right, i)
            if isinstance(node.op, ast.Pow):
                if b.denominator != 1:
                    raise MalformedSpec("only integer exponents")
                return a ** int(b)
            return _BINOPS[type(node.op)](a, b)
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return Fraction(_FUNCS[node.func.id](int(ev(node.args[0], i))))
        raise MalformedSpec(f"unsupported syntax in {text!r}")

    ev(tree, 1)  # fail early on bad syntax
    return lambda i: ev(tree, i)


def _tail(depth: int) -> range:
    return range(depth // 2 + 1, depth + 1)


def _check_depth(depth: int):
    if depth < 8:
        raise ValueError("depth must be at least 8")


def _escape_verdict(ratios: list, idx: list, lo_bound, hi_bound, depth: int) -> Verdict:
    """Shared logic: in band -> EQUIVALENT, monotone out of band -> ordered."""
    in_band = [r.ge(lo_bound) and r.le(hi_bound) for r in ratios]
    if all(in_band):
        return Verdict(Order.EQUIVALENT, depth, {"bound": hi_bound})
    dec = all(ratios[k + 1].lt(ratios[k]) for k in range(len(ratios) - 1))
    inc = all(ratios[k + 1].gt(ratios[k]) for k in range(len(ratios) - 1))
    first_out = next(idx[k] for k, ok in enumerate(in_band) if not ok)
    if dec and ratios[-1].lt(lo_bound):
        return Verdict(Order.LESS, depth, {"crossing": first_out, "last": ratios[-1]})
    if inc and ratios[-1].gt(hi_bound):
        return Verdict(Order.GREATER, depth, {"crossing": first_out, "last": ratios[-1]})
    return Verdict(Order.UNDECIDED, depth, {"depth": depth, "index": first_out})


def compare_class(u: GDClass, v: GDClass, depth: int = config.DEFAULT_DEPTH,
                  bound=config.EQUIV_BOUND) -> Verdict:
    """Compare two classes on the tail half of a window of the given depth."""
    _check_depth(depth)
    B = Fraction(bound)
    idx = list(_tail(depth))
    ratios = []
    for i in idx:
        a, b = u.term(i), v.term(i)
        if not b.excludes_zero():
            return Verdict(Order.UNDECIDED, depth, {"depth": depth, "index": i})
        ratios.append(a / b)
    return _escape_verdict(ratios, idx, 1 / B, B, depth)


def trop_combine(u: GDClass, v: GDClass, op: str) -> GDClass:
    """mul is the pointwise product, add the pointwise max, sub the pointwise min."""
    if op == "mul":
        fn = lambda i: u.term(i) * v.term(i)
    elif op == "add":
        fn = lambda i: _imax(u.term(i), v.term(i))
    elif op == "sub":
        fn = lambda i: _imin(u.term(i), v.term(i))
    else:
        raise ValueError(f"unknown tropical operation {op!r}")
    tag = u.tag if u.tag == v.tag else "unit"
    return GDClass(fn, tag, f"{op}({u.label},{v.label})")


def _imax(a: Interval, b: Interval) -> Interval:
    return Interval(max(a.lo, b.lo), max(a.hi, b.hi))


def _imin(a: Interval, b: Interval) -> Interval:
    return Interval(min(a.lo, b.lo), min(a.hi, b.hi))


def frobenius_compare(u: GDClass, v: GDClass, depth: int = config.DEFAULT_DEPTH,
                      bound=config.FROB_BOUND) -> Verdict:
    """Compare Frobenius classes through the log-ratio log v_i / log u_i."""
    _check_depth(depth)
    B = Fraction(bound)
    idx, ratios, skipped = [], [], []
    tail = list(_tail(depth))
    for i in tail:
        a, b = u.term(i), v.term(i)
        la, lb = _safe_log(a), _safe_log(b)
        if la is None or lb is None:
            skipped.append(i)
            continue
        idx.append(i)
        ratios.append(lb / la)
    if len(skipped) * 4 > len(tail):
        raise LogOfUnit(f"terms equal to 1 at indices {skipped[:8]}")
    if not ratios:
        return Verdict(Order.UNDECIDED, depth, {"depth": depth})
    if all(r.lt(0) for r in ratios):
        # one side infinitesimal, the other infinite
        la = _safe_log(u.term(idx[-1]))
        return Verdict(Order.LESS if la.lt(0) else Order.GREATER, depth, {"opposite": True})
    v_ = _escape_verdict(ratios, idx, 1 / B, B, depth)
    if v_.value is Order.UNDECIDED or v_.value is Order.EQUIVALENT:
        return v_ if not skipped else Verdict(v_.value, depth, {**v_.witness, "skipped": skipped})
    # a large ratio means v is a smaller power of u; the orientation flips with the sign of log u
    la = _safe_log(u.term(idx[-1]))
    grow = v_.value is Order.GREATER
    if la.gt(0):
        grow = not grow
    return Verdict(Order.GREATER if grow else Order.LESS, depth, v_.witness)


def _safe_log(t: Interval) -> Optional[Interval]:
    if t.lo <= 0:
        return None
    if t.contains(1):
        return None
    return t.log()


def shift_invariant_verdict(u: GDClass, depth: int = config.DEFAULT_DEPTH,
                            bound=config.EQUIV_BOUND) -> Verdict:
    """EQUIVALENT when s_i/s_{i+1} stays below the bound, GREATER when it escapes."""
    _check_depth(depth)
    B = Fraction(bound)
    terms = u.window(depth + 1)
    for i in range(depth):
        if terms[i + 1].gt(terms[i]):
            raise NotMonotone(f"s_{i + 2} > s_{i + 1}")
    idx = list(_tail(depth))
    ratios = [terms[i - 1] / terms[i] for i in idx]
    if all(r.le(B) for r in ratios):
        return Verdict(Order.EQUIVALENT, depth, {"bound": B})
    inc = all(ratios[k + 1].gt(ratios[k]) for k in range(len(ratios) - 1))
    if inc and ratios[-1].gt(B):
        return Verdict(Order.GREATER, depth, {"last": ratios[-1]})
    return Verdict(Order.UNDECIDED, depth, {"depth": depth})
