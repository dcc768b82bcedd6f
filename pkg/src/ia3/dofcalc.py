"""Exact rational DoF bounds, achievability formulas, and the greedy planner.

Everything in this module is integer/Fraction arithmetic; no floating point
enters any bound or plan, so sweep tables are reproducible bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import RegimeError

DEFAULT_T_MAX = 24

REGIME_ZERO_FORCING = "zero_forcing"
REGIME_NULLSPACE_INTERSECTION = "nullspace_intersection"
REGIME_CHAIN = "chain"
REGIME_MIXED_CHAIN = "mixed_chain"


@dataclass(frozen=True)
class ChainInstance:
    """One run of the chained-alignment scheme: depth and streams per block."""

    depth: int
    streams_per_block: int


@dataclass(frozen=True)
class SchemePlan:
    """Recipe for a synthesizable scheme on a (possibly extended) channel."""

    regime: str
    t: int
    instances: tuple[ChainInstance, ...]
    per_user_streams: int
    per_slot_dof_total: Fraction
    reciprocal: bool = False


@dataclass(frozen=True)
class BoundsReport:
    m: int
    n: int
    general_ub: Fraction
    beamforming_ub: Fraction
    baseline: Fraction
    achievable: Fraction
    plan: SchemePlan | None
    meets_general: bool
    meets_beamforming: bool
    note: str = ""


def general_upperbound(m: int, n: int) -> Fraction:
    """min{3M, 3N, max(2M,N), max(M,2N), (3/2)max(M,N)}."""
    _require_positive(m, n)
    return min(
        Fraction(3 * m),
        Fraction(3 * n),
        Fraction(max(2 * m, n)),
        Fraction(max(m, 2 * n)),
        Fraction(3 * max(m, n), 2),
    )


def beamforming_upperbound(m: int, n: int) -> Fraction:
    """Linear-beamforming ceiling 3(M+N)/4."""
    _require_positive(m, n)
    return Fraction(3 * (m + n), 4)


def baseline_khandani(m: int, n: int) -> Fraction:
    """Best previously known constant-channel total, 3MN/(M+N)."""
    _require_positive(m, n)
    return Fraction(3 * m * n, m + n)


def chain_dof(m: int, n: int, depth: int) -> Fraction:
    """Per-slot total for a single chain of the given depth.

    min{3(L+1)((L+1)M-(L+2)N)+, 3(L+1)N/(2L+1)}: the first term is the
    solution-space cap per unextended slot, the second the receiver-dimension
    cap.  Returns 0 when the solution space is empty.
    """
    if not (m > n >= 1):
        raise RegimeError("chain schemes need M > N >= 1")
    if depth < 1:
        raise RegimeError("chain depth must be >= 1")
    core = (depth + 1) * m - (depth + 2) * n
    if core <= 0:
        return Fraction(0)
    return min(
        Fraction(3 * (depth + 1) * core),
        Fraction(3 * (depth + 1) * n, 2 * depth + 1),
    )


def min_feasible_l(m: int, n: int) -> int:
    """Smallest chain depth whose solution space is nonempty for N < M < 2N."""
    _require_strict_regime(m, n)
    depth = 1
    while (depth + 1) * m - (depth + 2) * n < 1:
        depth += 1
    return depth


def greedy_plan(m: int, n: int, t_max: int = DEFAULT_T_MAX) -> SchemePlan:
    """Fill receiver dimensions with the cheapest chains first.

    For each extension factor t, start at the smallest feasible depth and
    allocate ``min(t*((L+1)M-(L+2)N), remaining_dims // (2L+1))`` blocks,
    moving to the next depth while dimensions remain.  Keeps the plan with
    the highest per-slot total; ties go to the smallest t, then to the
    fewest instances.
    """
    _require_strict_regime(m, n)
    if t_max < 1:
        raise RegimeError("t_max must be >= 1")
    l0 = min_feasible_l(m, n)
    best: SchemePlan | None = None
    for t in range(1, t_max + 1):
        remaining = n * t
        instances: list[ChainInstance] = []
        depth = l0
        while remaining >= 2 * depth + 1:
            width = min(t * ((depth + 1) * m - (depth + 2) * n), remaining // (2 * depth + 1))
            if width >= 1:
                instances.append(ChainInstance(depth, width))
                remaining -= (2 * depth + 1) * width
            depth += 1
        streams = sum((inst.depth + 1) * inst.streams_per_block for inst in instances)
        total = Fraction(3 * streams, t)
        candidate = SchemePlan(
            regime=REGIME_MIXED_CHAIN if len(instances) > 1 else REGIME_CHAIN,
            t=t,
            instances=tuple(instances),
            per_user_streams=streams,
            per_slot_dof_total=total,
        )
        if best is None or _plan_better(candidate, best):
            best = candidate
    assert best is not None
    return best


def _plan_better(a: SchemePlan, b: SchemePlan) -> bool:
    if a.per_slot_dof_total != b.per_slot_dof_total:
        return a.per_slot_dof_total > b.per_slot_dof_total
    if a.t != b.t:
        return a.t < b.t
    return len(a.instances) < len(b.instances)


def achievable(m: int, n: int, t_max: int = DEFAULT_T_MAX) -> BoundsReport:
    """Per-slot total DoF this workbench can construct, with all bounds.

    Dispatch: M=N is reported as the known reference 3M/2 (no construction
    here); M<N solves the reciprocal problem; M/N>=3 zero-forces; 2<=M/N<3
    uses nullspace intersection (t=3 whenever 3 does not divide M); and
    1<M/N<2 runs the greedy chain planner.
    """
    _require_positive(m, n)
    bounds = dict(
        general_ub=general_upperbound(m, n),
        beamforming_ub=beamforming_upperbound(m, n),
        baseline=baseline_khandani(m, n),
    )
    if m == n:
        value = Fraction(3 * m, 2)
        return _report(m, n, value, None, note="M=N reference value; no construction here", **bounds)
    if m < n:
        rev = achievable(n, m, t_max=t_max)
        plan = replace(rev.plan, reciprocal=True) if rev.plan is not None else None
        return _report(m, n, rev.achievable, plan, note="designed on the reciprocal channel", **bounds)
    if m >= 3 * n:
        plan = SchemePlan(
            regime=REGIME_ZERO_FORCING,
            t=1,
            instances=(),
            per_user_streams=n,
            per_slot_dof_total=Fraction(3 * n),
        )
        return _report(m, n, Fraction(3 * n), plan, **bounds)
    if m >= 2 * n:
        t = 1 if m % 3 == 0 else 3
        streams = m * t // 3
        plan = SchemePlan(
            regime=REGIME_NULLSPACE_INTERSECTION,
            t=t,
            instances=(),
            per_user_streams=streams,
            per_slot_dof_total=Fraction(3 * streams, t),
        )
        return _report(m, n, Fraction(m), plan, **bounds)
    plan = greedy_plan(m, n, t_max=t_max)
    return _report(m, n, plan.per_slot_dof_total, plan, **bounds)


def _report(m, n, value, plan, general_ub, beamforming_ub, baseline, note="") -> BoundsReport:
    return BoundsReport(
        m=m,
        n=n,
        general_ub=general_ub,
        beamforming_ub=beamforming_ub,
        baseline=baseline,
        achievable=value,
        plan=plan,
        meets_general=value == general_ub,
        meets_beamforming=value == beamforming_ub,
        note=note,
    )


def sweep_fig2(n: int, m_lo: int, m_hi: int, t_max: int = DEFAULT_T_MAX) -> list[BoundsReport]:
    """Achievable/bounds table rows for fixed N over a range of M."""
    if not (1 <= m_lo <= m_hi and n >= 1):
        raise RegimeError("invalid sweep range")
    return [achievable(m, n, t_max=t_max) for m in range(m_lo, m_hi + 1)]


@dataclass(frozen=True)
class RatioRow:
    """Per-antenna-ratio normalized DoF values (everything divided by N)."""

    ratio: Fraction
    per_depth: dict[int, Fraction]
    general_ub: Fraction
    beamforming_ub: Fraction


def sweep_fig1(depths: list[int], ratio_grid: list[Fraction]) -> list[RatioRow]:
    """Normalized chain DoF d/N per depth over a grid of ratios in (1, 2]."""
    rows = []
    for r in ratio_grid:
        r = Fraction(r)
        if not Fraction(1) < r <= Fraction(2):
            raise RegimeError("ratio grid must lie in (1, 2]")
        per_depth = {}
        for depth in depths:
            if depth < 1:
                raise RegimeError("chain depth must be >= 1")
            core = (depth + 1) * r - (depth + 2)
            if core <= 0:
                per_depth[depth] = Fraction(0)
            else:
                per_depth[depth] = min(
                    3 * (depth + 1) * core, Fraction(3 * (depth + 1), 2 * depth + 1)
                )
        rows.append(
            RatioRow(
                ratio=r,
                per_depth=per_depth,
                general_ub=_general_ub_normalized(r),
                beamforming_ub=Fraction(3, 4) * (r + 1),
            )
        )
    return rows


def _general_ub_normalized(r: Fraction) -> Fraction:
    return min(3 * r, Fraction(3), max(2 * r, Fraction(1)), max(r, Fraction(2)), Fraction(3, 2) * max(r, Fraction(1)))


def _require_positive(m: int, n: int) -> None:
    if m < 1 or n < 1:
        raise RegimeError("antenna counts must be >= 1")


def _require_strict_regime(m: int, n: int) -> None:
    if not n < m < 2 * n:
        raise RegimeError(f"chain planning needs N < M < 2N, got M={m}, N={n}")
