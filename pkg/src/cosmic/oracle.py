"""Exact finite-alphabet information quantities and the bound verifier.

Everything here is plain arithmetic on small probability tables: exact
entropy, exact MI, exact Bayes error, and channel application.  The module
serves as ground truth for the bounds module: verify_prop1 checks, joint by
joint, that the Fano curve sits below the true Bayes error and the
exponential bound sits above it.  Random joints and channels are generated
from seeded draws so sweeps are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundReport, prop1_bounds
from .errors import NonUniformConcept, NotADistribution, ShapeMismatch

_SUM_TOL = 1e-12


def _check_probabilities(p: np.ndarray, what: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.size == 0:
        raise NotADistribution(f"{what} is empty")
    if not np.isfinite(p).all():
        raise NotADistribution(f"{what} has non-finite entries")
    if (p < 0).any():
        raise NotADistribution(f"{what} has negative entries")
    total = float(p.sum())
    if abs(total - 1.0) > _SUM_TOL:
        raise NotADistribution(f"{what} sums to {total!r}, not 1")
    return p


def exact_entropy(dist) -> float:
    """-sum p ln p in nats with 0*ln(0) = 0, by direct summation."""
    p = _check_probabilities(np.asarray(dist, dtype=np.float64).ravel(), "distribution")
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum())


@dataclass(frozen=True)
class DiscreteJoint:
    """Joint distribution over (concept, summary) as an m_c x m_s table."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise NotADistribution(f"joint must be a 2-D table, got shape {p.shape}")
        _check_probabilities(p, "joint")
        object.__setattr__(self, "p", p)

    @property
    def m_c(self) -> int:
        return self.p.shape[0]

    @property
    def m_s(self) -> int:
        return self.p.shape[1]

    def concept_marginal(self) -> np.ndarray:
        return self.p.sum(axis=1)

    def summary_marginal(self) -> np.ndarray:
        return self.p.sum(axis=0)


@dataclass(frozen=True)
class Channel:
    """Row-stochastic matrix mapping summary symbols to new symbols."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise NotADistribution(f"channel must be a 2-D table, got shape {rows.shape}")
        if not np.isfinite(rows).all() or (rows < 0).any():
            raise NotADistribution("channel has negative or non-finite entries")
        sums = rows.sum(axis=1)
        if (np.abs(sums - 1.0) > _SUM_TOL).any():
            bad = int(np.argmax(np.abs(sums - 1.0)))
            raise NotADistribution(f"channel row {bad} sums to {sums[bad]!r}, not 1")
        object.__setattr__(self, "rows", rows)


def exact_mi(joint: DiscreteJoint) -> float:
    """H(C) - H(C|S) by direct summation over the table.

    Both terms are exact entropies, so the difference is non-negative up to
    one rounding residue; that residue is clamped at zero.
    """
    p = joint.p
    h_c = exact_entropy(joint.concept_marginal())
    p_s = joint.summary_marginal()
    h_c_given_s = 0.0
    for s in range(joint.m_s):
        if p_s[s] <= 0.0:
            continue
        cond = p[:, s] / p_s[s]
        nz = cond[cond > 0.0]
        h_c_given_s += p_s[s] * float(-(nz * np.log(nz)).sum())
    return max(0.0, h_c - h_c_given_s)


def bayes_error(joint: DiscreteJoint) -> float:
    """1 - sum_s max_c p(c, s): the error of the best decoder per symbol."""
    return float(1.0 - joint.p.max(axis=0).sum())


def apply_channel(joint: DiscreteJoint, ch: Channel) -> DiscreteJoint:
    """Post-process the summary symbol: p'(c, s') = sum_s p(c,s) ch(s, s')."""
    if ch.rows.shape[0] != joint.m_s:
        raise ShapeMismatch(
            f"channel has {ch.rows.shape[0]} input symbols, joint has {joint.m_s}"
        )
    return DiscreteJoint(p=joint.p @ ch.rows)


def random_joint(m_c: int, m_s: int, rng: np.random.Generator) -> DiscreteJoint:
    """Random joint with exactly uniform concept marginal.

    Exponential draws cover the simplex interior; each concept row is then
    rescaled to mass 1/m_c so the closed-form bound machinery applies.
    """
    draws = rng.exponential(size=(m_c, m_s))
    row_sums = draws.sum(axis=1, keepdims=True)
    return DiscreteJoint(p=draws / row_sums / m_c)


def random_channel(m_in: int, m_out: int, rng: np.random.Generator) -> Channel:
    draws = rng.exponential(size=(m_in, m_out))
    return Channel(rows=draws / draws.sum(axis=1, keepdims=True))


_UNIFORM_TOL = 1e-9
_SLACK = 1e-9


@dataclass(frozen=True)
class VerifyResult:
    """Outcome of checking one joint against both bounds."""

    report: BoundReport
    bayes_error: float
    passed: bool
    lower_slack: float  # bayes_error - lower; >= -1e-9 when the bound holds
    upper_slack: float  # upper - bayes_error; >= -1e-9 when the bound holds


def verify_prop1(joint: DiscreteJoint) -> VerifyResult:
    """Check lower <= Bayes error <= upper for one uniform-concept joint.

    The concept marginal must be uniform to within 1e-9 because the
    closed-form lower curve is only valid there.  Each comparison carries
    1e-9 slack for rounding.
    """
    marginal = joint.concept_marginal()
    if np.abs(marginal - 1.0 / joint.m_c).max() > _UNIFORM_TOL:
        raise NonUniformConcept(
            f"concept marginal deviates from uniform by {np.abs(marginal - 1.0 / joint.m_c).max():.3g}"
        )
    mi = exact_mi(joint)
    pe = bayes_error(joint)
    h_c = exact_entropy(marginal)
    report = prop1_bounds(mi=mi, m=joint.m_c, entropy_for_kappa=h_c)
    lower_slack = pe - report.lower
    upper_slack = report.upper - pe
    passed = lower_slack >= -_SLACK and upper_slack >= -_SLACK
    return VerifyResult(
        report=report,
        bayes_error=pe,
        passed=passed,
        lower_slack=lower_slack,
        upper_slack=upper_slack,
    )


def sweep_verify(
    trials: int, seed: int, min_classes: int = 2, max_classes: int = 6
) -> tuple[int, float, float]:
    """Run verify_prop1 on seeded random joints.

    Returns (number passed, worst lower slack, worst upper slack).  Class
    counts cycle deterministically through the allowed range.
    """
    rng = np.random.default_rng(seed)
    passed = 0
    worst_lower = math.inf
    worst_upper = math.inf
    for _ in range(trials):
        m_c = int(rng.integers(min_classes, max_classes + 1))
        m_s = int(rng.integers(min_classes, max_classes + 1))
        result = verify_prop1(random_joint(m_c, m_s, rng))
        passed += result.passed
        worst_lower = min(worst_lower, result.lower_slack)
        worst_upper = min(worst_upper, result.upper_slack)
    return passed, worst_lower, worst_upper
