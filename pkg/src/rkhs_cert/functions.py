"""Candidate functions with declared or empirically sampled tail lower bounds.

A tail bound records that |f(x)| >= alpha with a fixed sign of f beyond a
threshold (one bound per direction of the line).  Declared bounds come with
the function definition; empirical bounds are measured on finitely many
sequence points by ``tail_lower_bound`` and are labeled as evidence, not
proof.  Witness construction only needs the bound to hold at the points it
actually visits, and every certificate records which kind it used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence, Tuple

import mpmath
from mpmath import mpf, workprec

from .expressions import Expression, compile_expression
from .kernels import KernelSpec

DECLARED = "declared"
EMPIRICAL = "empirical"


@dataclass(frozen=True)
class TailBound:
    """|f(x)| >= alpha and sign(f(x)) = sign for all x beyond ``threshold``.

    ``threshold`` is the start of the validity region: x >= threshold on the
    +inf side, x <= -threshold mirrored for bounds attached to the -inf side.
    """

    alpha: float
    sign: int
    threshold: float
    provenance: str = DECLARED


@dataclass(frozen=True)
class DomainSpec:
    """Declared evaluation domain of a candidate function.

    ``has_accumulation_point`` is a user declaration used only for reporting;
    nothing downstream verifies it.
    """

    kind: str = "full_line"
    endpoints: Optional[Tuple[float, float]] = None
    points: Optional[Tuple[float, ...]] = None
    has_accumulation_point: Optional[bool] = None

    def __post_init__(self) -> None:
        if self.kind not in ("full_line", "interval", "finite_set"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "interval":
            if self.endpoints is None or not self.endpoints[0] < self.endpoints[1]:
                raise ValueError("interval domains need ordered endpoints")
        if self.kind == "finite_set":
            if not self.points or len(set(self.points)) != len(self.points):
                raise ValueError("finite-set domains need distinct points")


@dataclass(frozen=True)
class CandidateFunction:
    """A real function under test, evaluable at double and extended precision."""

    function_id: str
    fn_double: Callable[[float], float]
    fn_mp: Callable[[Any], Any]
    tail_pos: Optional[TailBound] = None
    tail_neg: Optional[TailBound] = None
    domain: DomainSpec = DomainSpec()
    notes: str = ""

    def eval(self, x: float) -> float:
        return float(self.fn_double(float(x)))

    def eval_mp(self, x: Any) -> Any:
        return self.fn_mp(mpf(x))


def make_constant(v: float) -> CandidateFunction:
    """f(x) = v.  For v != 0 the tail bound alpha = |v| holds everywhere."""
    value = float(v)
    tail = None
    if value != 0.0:
        tail = TailBound(alpha=abs(value), sign=1 if value > 0 else -1, threshold=0.0)
    return CandidateFunction(
        function_id=f"constant:{value!r}",
        fn_double=lambda x: value,
        fn_mp=lambda x: mpf(value),
        tail_pos=tail,
        tail_neg=tail,
    )


def _horner_double(coeffs: Sequence[float]) -> Callable[[float], float]:
    def fn(x: float) -> float:
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    return fn


def _horner_mp(coeffs: Sequence[float]) -> Callable[[Any], Any]:
    def fn(x: Any) -> Any:
        acc = mpf(0)
        for c in reversed(coeffs):
            acc = acc * x + mpf(c)
        return acc

    return fn


def _poly_tail(coeffs: Sequence[float], direction: int) -> TailBound:
    """Tail bound for a degree >= 1 polynomial toward +inf or -inf.

    Beyond the classical root bound x* = 1 + max |c_i / c_d| the polynomial
    has no zeros and |p| is increasing in |x|, so halving the sampled minimum
    of |p| on a grid starting at x* gives a safe alpha.
    """
    lead = coeffs[-1]
    degree = len(coeffs) - 1
    root_bound = 1.0 + max(abs(c / lead) for c in coeffs[:-1])
    fn = _horner_double(coeffs)
    sign = 1 if lead * (1 if direction > 0 else (-1) ** degree) > 0 else -1
    lo = root_bound
    samples = [abs(fn(direction * (lo + i * 0.1))) for i in range(10_001)]
    return TailBound(alpha=min(samples) / 2.0, sign=sign, threshold=root_bound)


def make_polynomial(coeffs: Sequence[float]) -> CandidateFunction:
    """f(x) = sum_i coeffs[i] * x^i with tail bounds on both sides."""
    cs = [float(c) for c in coeffs]
    if not cs:
        raise ValueError("polynomial needs at least one coefficient")
    while len(cs) > 1 and cs[-1] == 0.0:
        cs.pop()
    function_id = "poly:" + ",".join(repr(c) for c in cs)
    if len(cs) == 1:
        const = make_constant(cs[0])
        return CandidateFunction(
            function_id=function_id,
            fn_double=const.fn_double,
            fn_mp=const.fn_mp,
            tail_pos=const.tail_pos,
            tail_neg=const.tail_neg,
        )
    return CandidateFunction(
        function_id=function_id,
        fn_double=_horner_double(cs),
        fn_mp=_horner_mp(cs),
        tail_pos=_poly_tail(cs, +1),
        tail_neg=_poly_tail(cs, -1),
    )


def make_paper_example() -> CandidateFunction:
    """f(x) = exp(-sin(x)^2 + 1/sqrt(1 + x^2)).

    Bounded between e^-1 and e on the whole line, so both tails carry the
    declared bound alpha = e^-1 with positive sign.
    """
    tail = TailBound(alpha=math.exp(-1.0), sign=1, threshold=0.0)

    def fd(x: float) -> float:
        return math.exp(-math.sin(x) ** 2 + 1.0 / math.sqrt(1.0 + x * x))

    def fm(x: Any) -> Any:
        return mpmath.exp(-mpmath.sin(x) ** 2 + 1 / mpmath.sqrt(1 + x * x))

    return CandidateFunction(
        function_id="paper_example",
        fn_double=fd,
        fn_mp=fm,
        tail_pos=tail,
        tail_neg=tail,
        notes="bounded in [exp(-1), exp(1)] on the whole line",
    )


def make_sin_squared_shifted() -> CandidateFunction:
    """f(x) = sin(pi * (x + 1/2))^2.

    Has zeros at half-integers, so no uniform tail bound exists; but
    f(n) = 1 exactly at every integer n, which covers integer-valued
    sequences.  Callers must obtain alpha empirically.
    """

    def fd(x: float) -> float:
        return math.sin(math.pi * (x + 0.5)) ** 2

    def fm(x: Any) -> Any:
        return mpmath.sinpi(x + mpf(1) / 2) ** 2

    return CandidateFunction(
        function_id="sin_squared_shifted",
        fn_double=fd,
        fn_mp=fm,
        tail_pos=None,
        tail_neg=None,
        notes="equals 1 at every integer; vanishes at half-integers",
    )


def make_expression_function(source: str) -> CandidateFunction:
    """Candidate function from a whitelisted expression in ``x`` (no tail data)."""
    expr: Expression = compile_expression(source, "x")
    return CandidateFunction(
        function_id=f"expr:{source}",
        fn_double=expr.eval_double,
        fn_mp=expr.eval_mp,
    )


def kernel_section(kernel: KernelSpec, x0: float) -> CandidateFunction:
    """f = K(., x0): the canonical member of the kernel's space (norm sqrt(K(x0, x0)))."""
    center = float(x0)
    return CandidateFunction(
        function_id=f"kernel_section:{center!r}",
        fn_double=lambda x: kernel.eval(x, center),
        fn_mp=lambda x: kernel.eval_mp(x, mpf(center)),
        notes="member control: lies in the kernel's space by construction",
    )


def tail_lower_bound(
    f: CandidateFunction,
    sequence: Any,
    start: int,
    count: int,
    precision_bits: int = 256,
) -> Optional[TailBound]:
    """Sample |f| at ``count`` consecutive sequence points from index ``start``.

    Returns an empirical TailBound (alpha = min |f|, common sign) or None when
    the samples mix signs or touch zero.  Evidence only: the bound is labeled
    EMPIRICAL and certificates propagate that label.
    """
    if count < 2:
        raise ValueError("need at least two sample points for an empirical tail bound")
    if start < 1:
        raise ValueError("sequence indices start at 1")
    with workprec(precision_bits):
        values = [f.eval_mp(sequence.point(n)) for n in range(start, start + count)]
        signs = {(-1 if v < 0 else (1 if v > 0 else 0)) for v in values}
        if len(signs) != 1 or 0 in signs:
            return None
        alpha = min(abs(v) for v in values)
        # The bound is recorded as a double; a minimum that underflows to
        # zero there certifies nothing.
        if float(alpha) == 0.0:
            return None
        return TailBound(
            alpha=float(alpha),
            sign=signs.pop(),
            threshold=float(sequence.point(start)),
            provenance=EMPIRICAL,
        )
