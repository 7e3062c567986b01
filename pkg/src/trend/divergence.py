"""Divergences between fitted densities and the dimension-averaged score.

JSD uses base-2 logarithms so each per-dimension value lies in [0, 1]: 0
for identical densities, 1 for densities with disjoint supports.  The
aggregate score is the arithmetic mean of the per-dimension JSDs,
accumulated in index order for reproducibility.  KLD (natural log) is
exposed for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fitting import FittedModel
from .special_math import QuadratureSpec, integrate
from .tgn import TgnParams, _log_density, effective_support, pdf, scale_landmarks

__all__ = ["ScoreReport", "jsd", "kld", "trend_score"]

_LN2 = math.log(2.0)


def _quad_over(template: QuadratureSpec | None, lo: float, hi: float,
               cuts: tuple[float, ...]) -> tuple[QuadratureSpec, tuple[float, ...]]:
    if template is None:
        spec = QuadratureSpec(lo, hi)
    else:
        spec = template.rebound(lo, hi)
    return spec, tuple(c for c in cuts if math.isfinite(c) and lo < c < hi)


def kld(p: TgnParams, q: TgnParams, quad: QuadratureSpec | None = None) -> float:
    """Kullback-Leibler divergence of p from q in nats.

    Integrates p*log(p/q) over p's support.  Returns +inf when p has
    support outside q's truncation interval (mass where q has none); this
    is a well-defined answer, not an error.
    """
    if p.a1 < q.a1 or p.a2 > q.a2:
        return math.inf
    lo, hi = effective_support(p)
    spec, cuts = _quad_over(quad, lo, hi, (*scale_landmarks(p), *scale_landmarks(q)))

    def integrand(x: np.ndarray) -> np.ndarray:
        lp = _log_density(p, x)
        lq = _log_density(q, x)
        weight = np.exp(lp)
        return np.where(weight > 0.0, weight * (lp - lq), 0.0)

    return max(integrate(integrand, spec, breakpoints=cuts), 0.0)


def jsd(p: TgnParams, q: TgnParams, quad: QuadratureSpec | None = None) -> float:
    """Jensen-Shannon divergence in bits, always within [0, 1].

    One quadrature pass over the union of the supports, with the mixture
    (p+q)/2 evaluated pointwise; the integrand is symmetric in (p, q), so
    jsd(p, q) == jsd(q, p) exactly.
    """
    lo_p, hi_p = effective_support(p)
    lo_q, hi_q = effective_support(q)
    lo, hi = min(lo_p, lo_q), max(hi_p, hi_q)
    spec, cuts = _quad_over(
        quad, lo, hi,
        (*scale_landmarks(p), *scale_landmarks(q), p.a1, p.a2, q.a1, q.a2),
    )

    def integrand(x: np.ndarray) -> np.ndarray:
        fp = pdf(p, x)
        fq = pdf(q, x)
        m = 0.5 * (fp + fq)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_m = np.log(m)
            term_p = np.where(fp > 0.0, fp * (np.log(fp) - log_m), 0.0)
            term_q = np.where(fq > 0.0, fq * (np.log(fq) - log_m), 0.0)
        return (0.5 / _LN2) * (term_p + term_q)

    value = integrate(integrand, spec, breakpoints=cuts)
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class ScoreReport:
    """Aggregate score with its per-dimension breakdown and provenance."""

    trend: float
    per_dim_jsd: tuple[float, ...]
    n_clamped: int = 0
    test_tag: str = ""
    ref_tag: str = ""
    test_kind: str = ""
    ref_kind: str = ""
    warnings: tuple[str, ...] = ()

    @property
    def d(self) -> int:
        return len(self.per_dim_jsd)

    def to_record(self) -> dict:
        return {
            "metric": "trend",
            "trend": self.trend,
            "d": self.d,
            "per_dim_jsd": list(self.per_dim_jsd),
            "n_clamped": self.n_clamped,
            "test_tag": self.test_tag,
            "ref_tag": self.ref_tag,
            "test_kind": self.test_kind,
            "ref_kind": self.ref_kind,
            "warnings": list(self.warnings),
        }

    def to_text(self) -> str:
        lines = [
            f"TREND score: {self.trend!r}",
            f"dimensions: {self.d}",
            f"clamped evaluations: {self.n_clamped}",
            f"test: kind={self.test_kind} tag={self.test_tag}",
            f"reference: kind={self.ref_kind} tag={self.ref_tag}",
        ]
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines)


def trend_score(test: FittedModel, reference: FittedModel,
                quad: QuadratureSpec | None = None) -> ScoreReport:
    """Mean per-dimension JSD between two fitted models.

    Dimensions where exactly one side carries a degenerate fallback fit
    score 1.0 (maximal, conservative); dimensions degenerate on both
    sides score 0.0.  A kind mismatch is reported as a warning, not an
    error, so ablation combinations stay scoreable.
    """
    if test.d != reference.d:
        raise ValueError(f"dimension mismatch: test has {test.d}, reference has {reference.d}")
    warnings: list[str] = []
    if test.kind is not reference.kind:
        warnings.append(
            f"kind mismatch: test={test.kind.value} reference={reference.kind.value}"
        )
    per_dim: list[float] = []
    one_sided = both_sided = 0
    for dim_test, dim_ref in zip(test.dims, reference.dims):
        deg_test, deg_ref = dim_test.degenerate, dim_ref.degenerate
        if deg_test and deg_ref:
            both_sided += 1
            per_dim.append(0.0)
        elif deg_test or deg_ref:
            one_sided += 1
            per_dim.append(1.0)
        else:
            per_dim.append(jsd(dim_test.params, dim_ref.params, quad))
    if one_sided:
        warnings.append(f"{one_sided} dimension(s) scored 1.0: degenerate fit on one side")
    if both_sided:
        warnings.append(f"{both_sided} dimension(s) scored 0.0: degenerate fit on both sides")
    trend = sum(per_dim) / len(per_dim)
    return ScoreReport(
        trend=trend,
        per_dim_jsd=tuple(per_dim),
        n_clamped=0,
        test_tag=test.source_tag,
        ref_tag=reference.source_tag,
        test_kind=test.kind.value,
        ref_kind=reference.kind.value,
        warnings=tuple(warnings),
    )
