"""Error-probability bounds from mutual information.

For a uniform concept over m classes under 0/1 loss, the rate-distortion
function has the closed form

    R(D) = ln m - H_b(D) - D ln(m-1)      for D in [0, 1 - 1/m],
    R(D) = 0                              above,

with H_b the binary entropy in nats.  Its numeric inverse is the lower
(Fano) curve on the Bayes error; the matching upper bound is
1 - kappa*exp(I) with kappa = exp(-H), written here in the numerically
safer form 1 - exp(-(H - I)).

These bounds are certified only for discrete entropies H; differential
entropies can be negative, so callers working with continuous embeddings
get the discrete verification path (see the oracle module) rather than a
direct application to embedding MI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OutOfRange


def binary_entropy(p: float) -> float:
    """-p ln p - (1-p) ln(1-p) in nats, with 0*ln(0) = 0."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"binary_entropy needs p in [0,1], got {p}")
    out = 0.0
    if p > 0.0:
        out -= p * math.log(p)
    if p < 1.0:
        out -= (1.0 - p) * math.log(1.0 - p)
    return out


def _check_m(m: int) -> int:
    if int(m) != m or m < 2:
        raise OutOfRange(f"class count m must be an integer >= 2, got {m}")
    return int(m)


def rd(m: int, distortion: float) -> float:
    """Rate-distortion function of a uniform m-class source under Hamming loss.

    Exactly 0 for distortion above 1 - 1/m; the closed form is clamped at 0
    so the value at the domain endpoint carries no rounding residue of the
    wrong sign.
    """
    m = _check_m(m)
    if not 0.0 <= distortion <= 1.0:
        raise OutOfRange(f"distortion must be in [0,1], got {distortion}")
    d_max = 1.0 - 1.0 / m
    if distortion > d_max:
        return 0.0
    value = math.log(m) - binary_entropy(distortion) - distortion * math.log(m - 1)
    return max(0.0, value)


def rd_inverse(m: int, mi: float) -> float:
    """The unique D in [0, 1-1/m] with rd(m, D) = min(mi, ln m).

    rd is continuous and strictly decreasing on the domain, so bisection
    converges unconditionally; 200 iterations shrink the bracket far below
    double-precision resolution.  Returns 0 when mi >= ln m and the domain
    endpoint 1-1/m when mi = 0.
    """
    m = _check_m(m)
    if mi < 0.0:
        raise OutOfRange(f"mi must be non-negative, got {mi}")
    if mi >= math.log(m):
        return 0.0
    d_max = 1.0 - 1.0 / m
    if mi == 0.0:
        return d_max
    lo, hi = 0.0, d_max  # rd(lo) = ln m >= mi >= 0 = rd(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if rd(m, mid) >= mi:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BoundReport:
    """Both Bayes-error bounds evaluated at one (mi, m, entropy) point."""

    mi: float
    m: int
    lower: float
    upper: float
    kappa: float


def prop1_bounds(mi: float, m: int, entropy_for_kappa: float) -> BoundReport:
    """Lower (Fano curve) and upper (1 - kappa*exp(mi)) Bayes-error bounds.

    entropy_for_kappa is the concept entropy H in nats; it must be at least
    mi so that the implied conditional entropy H - mi is non-negative.
    """
    m = _check_m(m)
    if mi < 0.0:
        raise OutOfRange(f"mi must be non-negative, got {mi}")
    if entropy_for_kappa < mi:
        raise OutOfRange(
            f"entropy_for_kappa ({entropy_for_kappa}) must be >= mi ({mi})"
        )
    lower = rd_inverse(m, mi)
    upper = 1.0 - math.exp(-(entropy_for_kappa - mi))
    upper = min(1.0, max(0.0, upper))
    kappa = math.exp(-entropy_for_kappa)
    return BoundReport(mi=mi, m=m, lower=lower, upper=upper, kappa=kappa)
