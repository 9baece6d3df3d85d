"""Canonical JSON serialization for certificates and diagnostic reports.

Real-valued measurements are emitted as decimal strings with enough digits to
round-trip the working precision exactly; structural integers (sizes,
offsets, orders, precisions) stay JSON integers.  Objects are emitted with
sorted keys, two-space indentation and a trailing newline, so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import mpmath
from mpmath import mpf, workprec

from .analytic import DerivativeReport
from .interpolant import NormTrace
from .quadform import PsdVerdict
from .sequences import DecayReport
from .witness import WITNESS_SCHEMA, SweepResult, WitnessCertificate

REPORT_SCHEMA = "rkhs-cert/report/v1"


def _digits_for(precision_bits: int) -> int:
    return int(precision_bits * 0.30103) + 8


def number_to_str(value: Any, precision_bits: int = 256) -> str:
    """Decimal-string form of an int, float, Fraction or mpf."""
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    with workprec(max(precision_bits, 64)):
        x = mpf(value)
        if mpmath.isinf(x):
            return "inf" if x > 0 else "-inf"
        if mpmath.isnan(x):
            raise ValueError("refusing to serialize NaN")
        return mpmath.nstr(x, _digits_for(precision_bits), strip_zeros=True)


def str_to_number(text: str, precision_bits: int = 256) -> Any:
    """Inverse of number_to_str: exact ints stay int, the rest become mpf."""
    s = text.strip()
    if "/" in s:
        return Fraction(s)
    if s in ("inf", "+inf"):
        return mpf("inf")
    if s == "-inf":
        return mpf("-inf")
    try:
        return int(s)
    except ValueError:
        pass
    with workprec(max(precision_bits, 64)):
        return mpf(s)


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(canonical_dumps(obj), encoding="utf-8")


def load_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _num_list(values: Iterable[Any], precision_bits: int) -> List[str]:
    return [number_to_str(v, precision_bits) for v in values]


def witness_to_dict(cert: WitnessCertificate) -> Dict[str, Any]:
    bits = cert.precision_bits
    out: Dict[str, Any] = {
        "schema": cert.schema,
        "kernel_id": cert.kernel_id,
        "function_id": cert.function_id,
        "sequence_id": cert.sequence_id,
        "c": number_to_str(cert.c, bits),
        "alpha": number_to_str(cert.alpha, bits),
        "alpha_provenance": cert.alpha_provenance,
        "kernel_diag_sup": number_to_str(cert.kernel_diag_sup, bits),
        "n_points": cert.n_points,
        "ell": cert.ell,
        "r_value": number_to_str(cert.r_value, bits),
        "points": _num_list(cert.points, bits),
        "precision_bits": bits,
        "coefficients": "ones"
        if cert.coefficients is None
        else _num_list(cert.coefficients, bits),
    }
    return out


def witness_from_dict(data: Dict[str, Any]) -> WitnessCertificate:
    if not isinstance(data, dict):
        raise ValueError("certificate must be a JSON object")
    if data.get("schema") != WITNESS_SCHEMA:
        raise ValueError(f"unsupported certificate schema {data.get('schema')!r}")
    required = (
        "kernel_id",
        "function_id",
        "sequence_id",
        "c",
        "alpha",
        "alpha_provenance",
        "kernel_diag_sup",
        "n_points",
        "ell",
        "r_value",
        "points",
        "precision_bits",
        "coefficients",
    )
    missing = [k for k in required if k not in data]
    if missing:
        raise ValueError(f"certificate is missing fields: {missing}")
    bits = int(data["precision_bits"])
    if bits < 64:
        raise ValueError("certificate precision must be at least 64 bits")
    coeffs = data["coefficients"]
    coefficients = None
    if coeffs != "ones":
        coefficients = tuple(str_to_number(c, bits) for c in coeffs)
    return WitnessCertificate(
        kernel_id=str(data["kernel_id"]),
        function_id=str(data["function_id"]),
        sequence_id=str(data["sequence_id"]),
        c=float(data["c"]),
        alpha=float(data["alpha"]),
        alpha_provenance=str(data["alpha_provenance"]),
        kernel_diag_sup=float(data["kernel_diag_sup"]),
        n_points=int(data["n_points"]),
        ell=int(data["ell"]),
        r_value=str_to_number(str(data["r_value"]), bits),
        points=tuple(str_to_number(str(p), bits) for p in data["points"]),
        precision_bits=bits,
        coefficients=coefficients,
    )


def psd_to_dict(verdict: PsdVerdict, precision_bits: int) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "is_psd": verdict.is_psd,
        "min_pivot_or_eigenvalue": number_to_str(verdict.min_pivot_or_eigenvalue, precision_bits),
        "tolerance_used": number_to_str(verdict.tolerance_used, precision_bits),
    }
    if verdict.witness_vector is not None:
        out["witness_vector"] = _num_list(verdict.witness_vector, precision_bits)
        out["witness_value"] = number_to_str(verdict.witness_value, precision_bits)
    return out


def decay_to_dict(report: DecayReport, precision_bits: int) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "kernel_id": report.kernel_id,
        "sequence_id": report.sequence_name,
        "window": report.window,
        "threshold": number_to_str(report.threshold, precision_bits),
        "ell_values": list(report.ell_values),
        "max_offdiag": _num_list(report.max_offdiag, precision_bits),
        "passed": report.passed,
        "evidence": report.evidence,
    }
    if report.reason is not None:
        out["reason"] = report.reason
    if report.sign_obstruction is not None:
        out["sign_obstruction"] = list(report.sign_obstruction)
    return out


def derivative_report_to_dict(report: DerivativeReport, precision_bits: int) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "kernel_id": report.kernel_id,
        "norm_f": number_to_str(report.norm_f, precision_bits),
        "orders": list(report.orders),
        "dnn_values": _num_list(report.dnn_values, precision_bits),
        "exact_bounds": _num_list(report.exact_bounds, precision_bits),
        "bound_curve": _num_list(report.bound_curve, precision_bits),
        "growth_constants": _num_list(report.growth_constants, precision_bits),
    }
    if report.fd_values is not None:
        out["fd_values"] = _num_list(report.fd_values, precision_bits)
    return out


def norm_trace_to_dict(trace: NormTrace, precision_bits: int) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "kernel_id": trace.kernel_id,
        "function_id": trace.function_id,
        "rule": trace.rule,
        "point_sets": [_num_list(pts, precision_bits) for pts in trace.point_sets],
        "norms": _num_list(trace.norms, precision_bits),
        "precision_bits": list(trace.precision_bits),
        "ridge": number_to_str(trace.ridge, precision_bits),
        "divergence_factor": number_to_str(trace.divergence_factor, precision_bits),
        "divergence_evidence": trace.divergence_evidence,
    }
    if trace.truncated_reason is not None:
        out["truncated_reason"] = trace.truncated_reason
    return out


def sweep_to_dict(result: SweepResult, precision_bits: int) -> Dict[str, Any]:
    return {
        "c_values": _num_list(result.c_values, precision_bits),
        "alpha": number_to_str(result.alpha, precision_bits),
        "alpha_provenance": result.alpha_provenance,
        "certificates": [witness_to_dict(c) for c in result.certificates],
        "failures": [
            {"c": number_to_str(c, precision_bits), "reason": reason}
            for c, reason in result.failures
        ],
        "scaling": [
            {"c": number_to_str(c, precision_bits), "n_times_c_squared": number_to_str(v, precision_bits)}
            for c, v in result.scaling
        ],
    }
