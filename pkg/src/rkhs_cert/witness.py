"""Construction and verification of non-membership witness certificates.

A certificate for (K, f) consists of a scale c > 0, a tail bound alpha for
|f| along the sequence, a window offset ell and a window size N with
N > 2 * sup K(x,x) / (c^2 alpha^2), such that the all-ones quadratic form

    r = sum_{n,m <= N} [ K(x_{ell+n}, x_{ell+m}) - c^2 f(x_{ell+n}) f(x_{ell+m}) ]

is negative.  Any such r < 0 refutes positive semidefiniteness of the
deflated kernel at scale c; a verified certificate for every c on a grid is
the non-membership verdict.  Certificates are self-contained: verification
recomputes r from the stored points and re-checks the size threshold, and
never trusts the builder.

Window sizes reach 2^17 + 1 at the smallest default scale, where a dense
Gram matrix is out of reach.  For monotone point sets under a radial profile
that is nonincreasing and decays to zero, the kernel part of r is evaluated
in banded form: pairs whose squared gap exceeds a radius r* with
phi(r*) < 2^-(precision + 64) are dropped.  Since 0 <= phi <= phi(r*) on the
dropped pairs, the omitted mass is below N^2 * 2^-(precision + 64), far under
the certificate's comparison tolerance.  Builder and verifier select the
evaluation path by the same rule, so reverification reproduces r to working
accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import mpmath
from mpmath import mpf, workprec

from .errors import WitnessSearchError
from .functions import CandidateFunction, TailBound, tail_lower_bound, DECLARED
from .kernels import KernelSpec
from .quadform import (
    DEFAULT_PRECISION_BITS,
    assemble_gram,
    deflate,
    neumaier_sum,
    quadratic_form,
)
from .sequences import SequenceSpec, max_offdiag

WITNESS_SCHEMA = "rkhs-cert/witness/v1"

# Dense Gram evaluation is used up to this window size; beyond it the banded
# path applies (and requires monotone decay metadata).
DENSE_EVAL_CAP = 128

# Hard stop for dense evaluation without decay metadata.
DENSE_FALLBACK_LIMIT = 4096

DEFAULT_DOUBLING_CAP = 6


def default_c_grid() -> Tuple[float, ...]:
    """The default scale grid 2^0, 2^-1, ..., 2^-8."""
    return tuple(2.0 ** -k for k in range(9))


def n_threshold(c_k: Any, c: float, alpha: float) -> int:
    """Smallest admissible window size: floor(2 c_k / (c^2 alpha^2)) + 1.

    Beyond this size, the diagonal of the deflated window quadratic form is
    forced negative once off-diagonal kernel terms are small enough.
    """
    if not c > 0:
        raise ValueError("scale c must be positive")
    if not alpha > 0:
        raise ValueError("tail bound alpha must be positive")
    if math.isinf(float(c_k)):
        raise ValueError(
            "kernel diagonal is unbounded; no finite window size threshold exists"
        )
    if not float(c_k) > 0:
        raise ValueError("kernel diagonal bound must be positive")
    with workprec(320):
        ratio = 2 * mpf(c_k) / (mpf(c) ** 2 * mpf(alpha) ** 2)
        return int(mpmath.floor(ratio)) + 1


def find_ell(
    kernel: KernelSpec,
    sequence: SequenceSpec,
    window: int,
    bound: Any,
    ell_max: int,
    precision_bits: int = DEFAULT_PRECISION_BITS,
    min_ell: int = 0,
) -> int:
    """Smallest probed offset ell with max off-diagonal |K| <= bound.

    Probes ell = min_ell, min_ell + 1, then doubles up to ell_max (always
    including ell_max itself).  For monotone sequences with nondecreasing
    gaps under a nonincreasing profile, the window maximum is phi(g^2) for
    the smallest consecutive gap g, which avoids the O(window^2) scan.
    """
    if window < 2:
        raise ValueError("window must contain at least two points")
    if ell_max < min_ell:
        raise ValueError("ell_max is below the initial offset")
    ladder = [min_ell, min_ell + 1]
    step = 2
    while min_ell + step < ell_max:
        ladder.append(min_ell + step)
        step *= 2
    ladder.append(ell_max)
    seen = set()
    fast = (
        kernel.profile is not None
        and kernel.profile.monotone_decreasing
        and sequence.direction is not None
        and sequence.gaps_nondecreasing
    )
    with workprec(precision_bits):
        limit = mpf(bound)
        for ell in ladder:
            if ell in seen or ell > ell_max:
                continue
            seen.add(ell)
            if fast:
                gap = abs(mpf(sequence.point(ell + 2)) - mpf(sequence.point(ell + 1)))
                value = kernel.profile.value_mp(gap * gap)
            else:
                if window > 512:
                    raise WitnessSearchError(
                        "window too large for an exhaustive off-diagonal scan; "
                        "the kernel lacks monotone decay metadata",
                        reason="no-decay-metadata",
                    )
                value = max_offdiag(kernel, sequence, ell, window, precision_bits)
            if value <= limit:
                return ell
    raise WitnessSearchError(
        f"no window offset up to {ell_max} brings off-diagonal kernel values "
        f"below {mpmath.nstr(mpf(bound), 8)}; decay condition not met at this horizon",
        reason="decay-horizon-exhausted",
    )


def _negligible_radius(profile: Any, cutoff: Any) -> Any:
    """A radius beyond which the (nonincreasing, decaying) profile stays below cutoff."""
    r = mpf(1)
    for _ in range(4000):
        if profile.value_mp(r) < cutoff:
            return r
        r *= 4
    raise WitnessSearchError(
        "profile decays too slowly to truncate the banded sum",
        reason="truncation-failed",
    )


def _banded_ones_form(
    kernel: KernelSpec,
    f: CandidateFunction,
    c: float,
    points: Sequence[Any],
    precision_bits: int,
) -> Any:
    """r for the all-ones vector via banded kernel summation.

    Requires a monotone nonincreasing decaying profile and strictly monotone
    points.  The rank-one part uses the algebraic identity
    sum_{i,j} f_i f_j = (sum_i f_i)^2.
    """
    profile = kernel.profile
    assert profile is not None
    n = len(points)
    with workprec(precision_bits):
        pts = [mpf(p) for p in points]
        diffs = [pts[i + 1] - pts[i] for i in range(n - 1)]
        if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
            raise WitnessSearchError(
                "banded evaluation needs strictly monotone points",
                reason="not-monotone",
            )
        gaps = [abs(d) for d in diffs]
        gaps_sorted = all(gaps[i + 1] >= gaps[i] for i in range(len(gaps) - 1))
        cutoff = mpf(2) ** (-(precision_bits + 64)) * max(profile.value_mp(0), mpf(1))
        r_star = _negligible_radius(profile, cutoff)
        off_terms: List[Any] = []
        for i in range(n - 1):
            if gaps_sorted and gaps[i] * gaps[i] > r_star:
                break
            acc = mpf(0)
            for j in range(i + 1, n):
                d = pts[j] - pts[i]
                d2 = d * d
                if d2 > r_star:
                    break
                acc += profile.value_mp(d2)
            off_terms.append(2 * acc)
        diag = n * profile.value_mp(0)
        fsum = neumaier_sum([f.eval_mp(p) for p in pts])
        return diag + neumaier_sum(off_terms) - mpf(c) ** 2 * fsum * fsum


def evaluate_ones_form(
    kernel: KernelSpec,
    f: CandidateFunction,
    c: float,
    points: Sequence[Any],
    precision_bits: int = DEFAULT_PRECISION_BITS,
) -> Any:
    """The witness quadratic form r on the given window, all-ones coefficients.

    Dense evaluation through the deflated Gram matrix up to DENSE_EVAL_CAP
    points; beyond that, banded evaluation when the kernel's metadata makes
    truncation sound.  The selection rule depends only on (kernel, window
    size), so verification reproduces the builder's path.
    """
    n = len(points)
    profile = kernel.profile
    banded_ok = (
        profile is not None
        and profile.monotone_decreasing
        and profile.decays_to_zero
        and profile.nonneg
    )
    if n <= DENSE_EVAL_CAP or not banded_ok:
        if n > DENSE_FALLBACK_LIMIT:
            raise WitnessSearchError(
                f"window of {n} points exceeds the dense evaluation limit and the "
                "kernel lacks the decay metadata needed for banded summation",
                reason="window-too-large",
            )
        gram = assemble_gram(deflate(kernel, f, c), points, precision_bits)
        return quadratic_form(gram, [1] * n)
    return _banded_ones_form(kernel, f, c, points, precision_bits)


@dataclass(frozen=True)
class WitnessCertificate:
    """Self-contained negativity certificate for the deflated kernel at scale c.

    ``coefficients`` is None for the all-ones vector (the only kind the
    builder emits; the field exists so externally produced certificates with
    general coefficients can be represented).
    """

    kernel_id: str
    function_id: str
    sequence_id: str
    c: float
    alpha: float
    alpha_provenance: str
    kernel_diag_sup: float
    n_points: int
    ell: int
    r_value: Any
    points: Tuple[Any, ...]
    precision_bits: int
    coefficients: Optional[Tuple[Any, ...]] = None
    schema: str = WITNESS_SCHEMA

    def coefficient_vector(self) -> Tuple[Any, ...]:
        if self.coefficients is not None:
            return self.coefficients
        return tuple([1] * self.n_points)


def resolve_alpha(
    f: CandidateFunction,
    sequence: SequenceSpec,
    start: int = 1,
    count: int = 32,
    precision_bits: int = DEFAULT_PRECISION_BITS,
) -> TailBound:
    """Tail bound to use along the sequence: declared if available, else sampled.

    Raises WitnessSearchError when neither a declared bound matching the
    sequence direction nor a clean empirical sample exists.
    """
    declared = None
    if sequence.direction == 1:
        declared = f.tail_pos
    elif sequence.direction == -1:
        declared = f.tail_neg
    if declared is not None:
        return declared
    sampled = tail_lower_bound(f, sequence, start, count, precision_bits)
    if sampled is None:
        raise WitnessSearchError(
            "no usable tail bound: the function has no declared bound along this "
            "sequence and sampled values mix signs or vanish",
            reason="no-tail-bound",
        )
    return sampled


def _tail_entry_offset(sequence: SequenceSpec, tail: TailBound) -> int:
    """Smallest offset ell such that x_{ell+1} lies in the tail's validity region."""
    if tail.threshold <= 0 or sequence.direction is None:
        return 0
    target = tail.threshold
    ell = 0
    while abs(sequence.point(ell + 1)) < target:
        ell += 1
        if ell > 10**7:
            raise WitnessSearchError(
                "sequence never reaches the tail bound's validity region",
                reason="tail-unreachable",
            )
    return ell


def build_witness(
    kernel: KernelSpec,
    f: CandidateFunction,
    sequence: SequenceSpec,
    c: float,
    alpha: Optional[float] = None,
    alpha_provenance: Optional[str] = None,
    ell_max: int = 10**6,
    precision_bits: int = DEFAULT_PRECISION_BITS,
    doubling_cap: int = DEFAULT_DOUBLING_CAP,
) -> WitnessCertificate:
    """Search for a negativity certificate at scale c.

    Window size starts at the threshold N(c, alpha) and doubles up to
    ``doubling_cap`` times when r fails to come out negative; exhausting the
    cap raises, which is the expected outcome when f actually lies in the
    kernel's space (or alpha was declared too optimistically).
    """
    if not c > 0:
        raise ValueError("scale c must be positive")
    if alpha is None:
        tail = resolve_alpha(f, sequence, precision_bits=precision_bits)
        alpha_value = tail.alpha
        provenance = tail.provenance
        min_ell = _tail_entry_offset(sequence, tail)
    else:
        if not alpha > 0:
            raise ValueError("tail bound alpha must be positive")
        alpha_value = float(alpha)
        provenance = alpha_provenance or DECLARED
        min_ell = 0
    c_k = kernel.diag_sup
    n_min = n_threshold(c_k, c, alpha_value)
    with workprec(precision_bits):
        bound = mpf(c) ** 2 * mpf(alpha_value) ** 2 / 2
    n = n_min
    last_r = None
    for _ in range(doubling_cap + 1):
        ell = find_ell(kernel, sequence, n, bound, ell_max, precision_bits, min_ell=min_ell)
        points = sequence.points(ell + 1, n)
        r = evaluate_ones_form(kernel, f, c, points, precision_bits)
        if r < 0:
            return WitnessCertificate(
                kernel_id=kernel.kernel_id,
                function_id=f.function_id,
                sequence_id=sequence.name,
                c=float(c),
                alpha=alpha_value,
                alpha_provenance=provenance,
                kernel_diag_sup=float(c_k),
                n_points=n,
                ell=ell,
                r_value=r,
                points=tuple(points),
                precision_bits=precision_bits,
            )
        last_r = r
        n *= 2
    raise WitnessSearchError(
        f"quadratic form stayed nonnegative after {doubling_cap} doublings "
        f"(last r = {mpmath.nstr(last_r, 8)}); either f belongs to the kernel's "
        "space or the declared tail bound is unreliable",
        reason="doubling-cap-exhausted",
    )


# Relative tolerance for matching a recomputed r against the stored value.
VERIFY_REL_TOL_BITS = 100


def verify_certificate(
    cert: WitnessCertificate,
    kernel: KernelSpec,
    f: CandidateFunction,
) -> bool:
    """Recompute everything a certificate claims; True iff it all checks out.

    Checks: identifier match (raises on mismatch: verifying against the wrong
    objects is a caller bug, not a bad certificate), positive c and alpha,
    window size above the threshold, stored points consistent with the stated
    window, and the recomputed r matching the stored value to 2^-100 relative
    accuracy while being negative.
    """
    if cert.kernel_id != kernel.kernel_id:
        raise ValueError(
            f"certificate kernel {cert.kernel_id!r} does not match {kernel.kernel_id!r}"
        )
    if cert.function_id != f.function_id:
        raise ValueError(
            f"certificate function {cert.function_id!r} does not match {f.function_id!r}"
        )
    if not (cert.c > 0 and cert.alpha > 0):
        return False
    if cert.coefficients is not None and any(a != 1 for a in cert.coefficients):
        return False
    if len(cert.points) != cert.n_points:
        return False
    with workprec(320):
        threshold = 2 * mpf(cert.kernel_diag_sup) / (mpf(cert.c) ** 2 * mpf(cert.alpha) ** 2)
        if not mpf(cert.n_points) > threshold:
            return False
    if math.isinf(cert.kernel_diag_sup) or not kernel.is_bounded:
        return False
    if cert.kernel_diag_sup < kernel.diag_sup:
        return False
    r = evaluate_ones_form(kernel, f, cert.c, cert.points, cert.precision_bits)
    if not r < 0:
        return False
    with workprec(cert.precision_bits):
        stored = mpf(cert.r_value)
        if stored >= 0:
            return False
        tol = mpf(2) ** (-VERIFY_REL_TOL_BITS)
        return bool(abs(r - stored) <= tol * abs(stored))


@dataclass(frozen=True)
class SweepResult:
    """Witness construction across a grid of scales.

    Every grid entry lands in exactly one of ``certificates`` (by scale) or
    ``failures`` (scale, reason).  ``scaling`` records N(c) * c^2 per
    successful scale, which should hover near 2 * sup K / alpha^2.
    """

    c_values: Tuple[float, ...]
    certificates: Tuple[WitnessCertificate, ...]
    failures: Tuple[Tuple[float, str], ...]
    scaling: Tuple[Tuple[float, float], ...]
    alpha: float
    alpha_provenance: str


def sweep_c(
    kernel: KernelSpec,
    f: CandidateFunction,
    sequence: SequenceSpec,
    c_grid: Optional[Sequence[float]] = None,
    ell_max: int = 10**6,
    precision_bits: int = DEFAULT_PRECISION_BITS,
    doubling_cap: int = DEFAULT_DOUBLING_CAP,
) -> SweepResult:
    """Run build_witness for every scale on the grid, collecting outcomes."""
    grid = tuple(float(c) for c in (c_grid if c_grid is not None else default_c_grid()))
    if not grid:
        raise ValueError("scale grid must be nonempty")
    if any(not c > 0 for c in grid):
        raise ValueError("scales must be positive")
    tail = resolve_alpha(f, sequence, precision_bits=precision_bits)
    certs: List[WitnessCertificate] = []
    failures: List[Tuple[float, str]] = []
    scaling: List[Tuple[float, float]] = []
    for c in grid:
        try:
            cert = build_witness(
                kernel,
                f,
                sequence,
                c,
                alpha=tail.alpha,
                alpha_provenance=tail.provenance,
                ell_max=ell_max,
                precision_bits=precision_bits,
                doubling_cap=doubling_cap,
            )
        except WitnessSearchError as exc:
            failures.append((c, f"{exc.reason}: {exc}"))
            continue
        certs.append(cert)
        scaling.append((c, cert.n_points * c * c))
    return SweepResult(
        c_values=grid,
        certificates=tuple(certs),
        failures=tuple(failures),
        scaling=tuple(scaling),
        alpha=tail.alpha,
        alpha_provenance=tail.provenance,
    )
