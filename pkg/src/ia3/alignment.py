"""Precoder synthesis for every regime of the 3-user channel.

The main construction partitions each user's precoder into depth+1 blocks
and threads them through a chain of constraints: the first block of a group
enters the nullspace of one cross channel, the next ``depth`` blocks pairwise
align with their predecessor at a rotating receiver, and the last block
enters another nullspace.  Three groups (one per starting user) cover all
blocks of all users.

Two solvers are provided.  ``solve_chain`` stacks each group's constraints
into one homogeneous block system and takes its nullspace, which is the
better-conditioned route.  ``solve_chain_xi`` follows the sequential
nullspace/pseudo-inverse elimination instead and is kept as a fidelity
cross-check; both must produce the same block column spans.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import matkit
from .channel import ChannelSet
from .dofcalc import (
    REGIME_CHAIN,
    REGIME_MIXED_CHAIN,
    REGIME_NULLSPACE_INTERSECTION,
    REGIME_ZERO_FORCING,
    ChainInstance,
    SchemePlan,
)
from .errors import InfeasibleError, InvalidInputError, RegimeError
from .matkit import DEFAULT_TOL, Tolerance


@dataclass(frozen=True)
class ChainSchedule:
    """Index bookkeeping for one chain depth.

    ``groups[g]`` lists the (user, block_index) visited by group g in chain
    order; ``receivers[g][k]`` is the receiver of the k-th constraint
    (k = 0 and k = depth+1 are nullspace constraints, the rest are pairwise
    alignments).  Users and receivers are 0-based; block indices are 1-based.
    """

    depth: int
    groups: tuple[tuple[tuple[int, int], ...], ...]
    receivers: tuple[tuple[int, ...], ...]


def chain_block_schedule(depth: int) -> ChainSchedule:
    """Cyclic visiting order of users/blocks for the given chain depth.

    Group g visits users (g, g+1, ..., g+depth) mod 3; a user's block index
    increments each time it reappears, scanning groups in order.  Constraint
    0 zero-forces the first block at receiver g+1, constraint k (1..depth)
    aligns blocks k and k-1 at receiver g+k+1, and the final constraint
    zero-forces the last block at receiver g+depth-1 (all mod 3).
    """
    if depth < 0:
        raise InvalidInputError("chain depth must be >= 0")
    seen = {0: 0, 1: 0, 2: 0}
    groups = []
    receivers = []
    for g in range(3):
        visits = []
        for k in range(depth + 1):
            user = (g + k) % 3
            seen[user] += 1
            visits.append((user, seen[user]))
        recv = [(g + 1) % 3]
        recv += [(g + k + 1) % 3 for k in range(1, depth + 1)]
        recv.append((g + depth - 1) % 3)
        groups.append(tuple(visits))
        receivers.append(tuple(recv))
    return ChainSchedule(depth=depth, groups=tuple(groups), receivers=tuple(receivers))


@dataclass(frozen=True)
class BlockInfo:
    """Provenance of one column range of a user's precoder."""

    user: int
    start: int
    stop: int
    instance: int
    group: int | None
    block: int
    depth: int | None


@dataclass(frozen=True)
class PrecoderSet:
    """Per-user transmit matrices with block provenance.

    ``v[u]`` has shape (m*t) x d_u with unit-norm columns; ``block_map``
    partitions all columns and records which scheme instance, group and
    chain block produced each range.
    """

    v: tuple[np.ndarray, np.ndarray, np.ndarray]
    block_map: tuple[BlockInfo, ...]
    plan: SchemePlan | None = None

    @property
    def streams(self) -> tuple[int, int, int]:
        return tuple(mat.shape[1] for mat in self.v)


@dataclass(frozen=True)
class DecoderSet:
    """Per-receiver projection matrices with orthonormal columns."""

    u: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def streams(self) -> tuple[int, int, int]:
        return tuple(mat.shape[1] for mat in self.u)


def build_chain_system(ch: ChannelSet, sched: ChainSchedule, group: int) -> np.ndarray:
    """Stack one group's constraints into a homogeneous block matrix.

    Returns the ((depth+2)*n*t) x ((depth+1)*m*t) matrix C such that the
    stacked per-block columns (v_0; ...; v_depth) satisfy all constraints of
    the group iff C @ (v_0; ...; v_depth) = 0.
    """
    if group not in (0, 1, 2):
        raise InvalidInputError("group must be 0, 1 or 2")
    mt, nt = ch.mt, ch.nt
    if mt <= nt:
        raise RegimeError("chain systems need M > N; solve the reciprocal channel instead")
    depth = sched.depth
    users = [user for user, _ in sched.groups[group]]
    recv = sched.receivers[group]
    dtype = np.complex128 if ch.field_mode == "complex" else np.float64
    c = np.zeros(((depth + 2) * nt, (depth + 1) * mt), dtype=dtype)
    c[0:nt, 0:mt] = ch.h[recv[0]][users[0]]
    for k in range(1, depth + 1):
        rows = slice(k * nt, (k + 1) * nt)
        c[rows, k * mt : (k + 1) * mt] = ch.h[recv[k]][users[k]]
        c[rows, (k - 1) * mt : k * mt] = -ch.h[recv[k]][users[k - 1]]
    c[(depth + 1) * nt :, depth * mt :] = ch.h[recv[depth + 1]][users[depth]]
    return c


def _chain_blocks_from_stacked(
    ch: ChannelSet, sched: ChainSchedule, group: int, stacked: np.ndarray
) -> dict[tuple[int, int], np.ndarray]:
    """Slice stacked solution columns into unit-norm per-(user, block) matrices."""
    mt = ch.mt
    out = {}
    for k, (user, block) in enumerate(sched.groups[group]):
        piece = stacked[k * mt : (k + 1) * mt, :]
        norms = np.linalg.norm(piece, axis=0)
        if np.any(norms < 1e-12):
            raise InfeasibleError(
                "degenerate chain solution: a block column vanished (non-generic channel)"
            )
        out[(user, block)] = piece / norms
    return out


def _assemble_chain_precoders(
    ch: ChannelSet,
    depth: int,
    streams_per_block: int,
    blocks: dict[tuple[int, int], np.ndarray],
    sched: ChainSchedule,
) -> PrecoderSet:
    mats = []
    infos = []
    for user in range(3):
        cols = []
        start = 0
        for block in range(1, depth + 2):
            piece = blocks[(user, block)]
            group = next(
                g for g in range(3) if (user, block) in sched.groups[g]
            )
            cols.append(piece)
            infos.append(
                BlockInfo(
                    user=user,
                    start=start,
                    stop=start + piece.shape[1],
                    instance=0,
                    group=group,
                    block=block,
                    depth=depth,
                )
            )
            start += piece.shape[1]
        mats.append(np.hstack(cols))
    plan = SchemePlan(
        regime=REGIME_CHAIN,
        t=ch.t,
        instances=(ChainInstance(depth, streams_per_block),),
        per_user_streams=(depth + 1) * streams_per_block,
        per_slot_dof_total=Fraction(3 * (depth + 1) * streams_per_block, ch.t),
    )
    return PrecoderSet(v=tuple(mats), block_map=tuple(infos), plan=plan)


def _check_chain_feasible(ch: ChannelSet, depth: int, streams_per_block: int) -> None:
    if streams_per_block < 1:
        raise InvalidInputError("streams_per_block must be >= 1")
    cap = (depth + 1) * ch.mt - (depth + 2) * ch.nt
    if streams_per_block > cap:
        raise InfeasibleError(
            f"chain depth {depth} on an {ch.mt}x{ch.nt} extended channel supports at most "
            f"{max(cap, 0)} streams per block, requested {streams_per_block}"
        )


def solve_chain(
    ch: ChannelSet, depth: int, streams_per_block: int, tol: Tolerance = DEFAULT_TOL
) -> PrecoderSet:
    """Solve the chain constraints via one stacked nullspace per group.

    Takes ``streams_per_block`` nullspace basis vectors of the stacked system
    (dominant right singular vectors first), slices them into depth+1 blocks
    of height m*t, and assigns each block per the schedule; every user ends
    up with (depth+1)*streams_per_block unit-norm columns.
    """
    _check_chain_feasible(ch, depth, streams_per_block)
    sched = chain_block_schedule(depth)
    blocks: dict[tuple[int, int], np.ndarray] = {}
    for g in range(3):
        c = build_chain_system(ch, sched, g)
        basis = matkit.nullspace_basis(c, tol)
        if basis.shape[1] < streams_per_block:
            raise InfeasibleError(
                f"group {g} stacked system has nullspace dimension {basis.shape[1]} "
                f"< requested {streams_per_block}"
            )
        blocks.update(_chain_blocks_from_stacked(ch, sched, g, basis[:, :streams_per_block]))
    return _assemble_chain_precoders(ch, depth, streams_per_block, blocks, sched)


def build_xi_system(
    ch: ChannelSet, sched: ChainSchedule, group: int, tol: Tolerance = DEFAULT_TOL
) -> np.ndarray:
    """Eliminated coefficient system of one group, sequential-solution style.

    Writing each block as nullspace-basis times coefficients plus a
    pseudo-inverse particular term and substituting along the chain leaves a
    single homogeneous system of shape (m*t) x ((depth+2)*(m*t - n*t)) whose
    nullspace parameterizes all chain solutions.
    """
    mt, nt = ch.mt, ch.nt
    if mt <= nt:
        raise RegimeError("chain systems need M > N; solve the reciprocal channel instead")
    depth = sched.depth
    users = [user for user, _ in sched.groups[group]]
    recv = sched.receivers[group]
    bases = [matkit.nullspace_basis(ch.h[recv[0]][users[0]], tol)]
    for k in range(1, depth + 1):
        bases.append(matkit.nullspace_basis(ch.h[recv[k]][users[k]], tol))
    bases.append(matkit.nullspace_basis(ch.h[recv[depth + 1]][users[depth]], tol))
    for b in bases:
        if b.shape[1] != mt - nt:
            raise InfeasibleError("cross channel is rank deficient; chain elimination unavailable")
    terms = [None] * (depth + 1)
    acc = np.eye(mt, dtype=bases[0].dtype)
    for k in range(depth, -1, -1):
        terms[k] = acc @ bases[k]
        if k > 0:
            step = matkit.pseudo_inverse(ch.h[recv[k]][users[k]], tol) @ ch.h[recv[k]][users[k - 1]]
            acc = acc @ step
    return np.hstack(terms + [-bases[depth + 1]])


def solve_chain_xi(
    ch: ChannelSet, depth: int, streams_per_block: int, tol: Tolerance = DEFAULT_TOL
) -> PrecoderSet:
    """Sequential nullspace/pseudo-inverse solver; span-equivalent to
    ``solve_chain`` and retained as a cross-check."""
    _check_chain_feasible(ch, depth, streams_per_block)
    mt, nt = ch.mt, ch.nt
    width = mt - nt
    sched = chain_block_schedule(depth)
    blocks: dict[tuple[int, int], np.ndarray] = {}
    for g in range(3):
        xi = build_xi_system(ch, sched, g, tol)
        coeff = matkit.nullspace_basis(xi, tol)
        if coeff.shape[1] < streams_per_block:
            raise InfeasibleError(
                f"group {g} eliminated system has nullspace dimension {coeff.shape[1]} "
                f"< requested {streams_per_block}"
            )
        coeff = coeff[:, :streams_per_block]
        users = [user for user, _ in sched.groups[g]]
        recv = sched.receivers[g]
        parts = []
        v = matkit.nullspace_basis(ch.h[recv[0]][users[0]], tol) @ coeff[0:width, :]
        parts.append(v)
        for k in range(1, depth + 1):
            basis = matkit.nullspace_basis(ch.h[recv[k]][users[k]], tol)
            step = matkit.pseudo_inverse(ch.h[recv[k]][users[k]], tol) @ ch.h[recv[k]][users[k - 1]]
            v = step @ v + basis @ coeff[k * width : (k + 1) * width, :]
            parts.append(v)
        stacked = np.vstack(parts)
        blocks.update(_chain_blocks_from_stacked(ch, sched, g, stacked))
    return _assemble_chain_precoders(ch, depth, streams_per_block, blocks, sched)


def chain_constraint_residuals(
    ch: ChannelSet, pset: PrecoderSet, instance: int = 0
) -> list[list[float]]:
    """Relative residual of every constraint of every group of one instance.

    Nullspace constraints report ||H v|| / (||H|| ||v||); alignment
    constraints report the worst per-column sine between the two interfering
    images, which is the scale-free form of the pairwise equality (stored
    blocks are unit-normalized per column, so only spans are comparable).
    """
    infos = [b for b in pset.block_map if b.instance == instance]
    if not infos:
        raise InvalidInputError(f"no blocks found for instance {instance}")
    depth = infos[0].depth
    if depth is None:
        raise InvalidInputError("constraint residuals are defined for chain instances only")
    sched = chain_block_schedule(depth)
    lookup = {(b.user, b.block): b for b in infos}
    out = []
    for g in range(3):
        users = [user for user, _ in sched.groups[g]]
        recv = sched.receivers[g]
        mats = []
        for user, block in sched.groups[g]:
            info = lookup[(user, block)]
            mats.append(pset.v[user][:, info.start : info.stop])
        residuals = [_null_residual(ch.h[recv[0]][users[0]], mats[0])]
        for k in range(1, depth + 1):
            left = ch.h[recv[k]][users[k]] @ mats[k]
            right = ch.h[recv[k]][users[k - 1]] @ mats[k - 1]
            residuals.append(_max_column_sine(left, right))
        residuals.append(_null_residual(ch.h[recv[depth + 1]][users[depth]], mats[depth]))
        out.append(residuals)
    return out


def _null_residual(h: np.ndarray, v: np.ndarray) -> float:
    return float(np.linalg.norm(h @ v) / (np.linalg.norm(h) * np.linalg.norm(v)))


def _max_column_sine(a: np.ndarray, b: np.ndarray) -> float:
    # sine via the orthogonal remainder, which stays accurate near zero
    worst = 0.0
    for c in range(a.shape[1]):
        x, y = a[:, c], b[:, c]
        nx, ny = np.linalg.norm(x), np.linalg.norm(y)
        if nx == 0.0 or ny == 0.0:
            return 1.0
        xh, yh = x / nx, y / ny
        rem = xh - yh * np.vdot(yh, xh)
        worst = max(worst, min(1.0, float(np.linalg.norm(rem))))
    return worst


def synth_zero_forcing(ch: ChannelSet, tol: Tolerance = DEFAULT_TOL) -> PrecoderSet:
    """Transmit-side zero forcing for M >= 3N: each user sends n*t streams in
    the joint nullspace of both of its cross channels."""
    mt, nt = ch.mt, ch.nt
    if mt < 3 * nt:
        raise RegimeError("zero forcing needs M >= 3N")
    mats = []
    infos = []
    for user in range(3):
        others = [r for r in range(3) if r != user]
        stack = np.vstack([ch.h[r][user] for r in others])
        basis = matkit.nullspace_basis(stack, tol)
        if basis.shape[1] < nt:
            raise InfeasibleError("cross-channel stack has too small a nullspace")
        mats.append(basis[:, :nt])
        infos.append(BlockInfo(user=user, start=0, stop=nt, instance=0, group=None, block=1, depth=None))
    plan = SchemePlan(
        regime=REGIME_ZERO_FORCING,
        t=ch.t,
        instances=(),
        per_user_streams=nt,
        per_slot_dof_total=Fraction(3 * nt, ch.t),
    )
    return PrecoderSet(v=tuple(mats), block_map=tuple(infos), plan=plan)


def synth_nullspace_intersection(
    ch: ChannelSet, d: int, seed: int, tol: Tolerance = DEFAULT_TOL
) -> tuple[PrecoderSet, DecoderSet]:
    """Random-decoder nullspace intersection for 2 <= M/N < 3.

    Draws an orthonormal n*t x d decoder per receiver from ``seed``, then
    sends each user's d streams in the nullspace of its two decoder-projected
    cross channels, so interference vanishes after the receivers project.
    """
    mt, nt = ch.mt, ch.nt
    ratio_lo = 2 * nt <= mt
    ratio_hi = mt < 3 * nt
    if not (ratio_lo and ratio_hi):
        raise RegimeError("nullspace intersection covers 2 <= M/N < 3")
    if d < 1:
        raise InvalidInputError("stream count must be >= 1")
    if d > mt - 2 * d:
        raise InfeasibleError(
            f"projected cross channels leave a nullspace of dimension {mt - 2 * d} < {d}"
        )
    rng = np.random.default_rng(seed)
    decoders = []
    for _ in range(3):
        if ch.field_mode == "complex":
            raw = rng.standard_normal((nt, d)) + 1j * rng.standard_normal((nt, d))
        else:
            raw = rng.standard_normal((nt, d))
        q, _ = np.linalg.qr(raw)
        decoders.append(q[:, :d])
    mats = []
    infos = []
    for user in range(3):
        others = [r for r in range(3) if r != user]
        stack = np.vstack([decoders[r].conj().T @ ch.h[r][user] for r in others])
        basis = matkit.nullspace_basis(stack, tol)
        if basis.shape[1] < d:
            raise InfeasibleError("projected cross-channel stack lost rank")
        mats.append(basis[:, :d])
        infos.append(BlockInfo(user=user, start=0, stop=d, instance=0, group=None, block=1, depth=None))
    plan = SchemePlan(
        regime=REGIME_NULLSPACE_INTERSECTION,
        t=ch.t,
        instances=(),
        per_user_streams=d,
        per_slot_dof_total=Fraction(3 * d, ch.t),
    )
    return (
        PrecoderSet(v=tuple(mats), block_map=tuple(infos), plan=plan),
        DecoderSet(u=tuple(decoders)),
    )


def synth_mixed(ch: ChannelSet, plan: SchemePlan, tol: Tolerance = DEFAULT_TOL) -> PrecoderSet:
    """Run each chain instance of a plan on the same channel and concatenate
    the per-user columns."""
    _validate_plan_against_channel(ch, plan)
    if not plan.instances:
        empty = tuple(
            np.zeros((ch.mt, 0), dtype=np.complex128 if ch.field_mode == "complex" else np.float64)
            for _ in range(3)
        )
        return PrecoderSet(v=empty, block_map=(), plan=plan)
    parts = []
    for inst in plan.instances:
        parts.append(solve_chain(ch, inst.depth, inst.streams_per_block, tol))
    mats = []
    infos = []
    for user in range(3):
        offset = 0
        cols = []
        for idx, pset in enumerate(parts):
            cols.append(pset.v[user])
            for b in pset.block_map:
                if b.user != user:
                    continue
                infos.append(
                    BlockInfo(
                        user=user,
                        start=b.start + offset,
                        stop=b.stop + offset,
                        instance=idx,
                        group=b.group,
                        block=b.block,
                        depth=b.depth,
                    )
                )
            offset += pset.v[user].shape[1]
        mats.append(np.hstack(cols))
    infos.sort(key=lambda b: (b.user, b.start))
    return PrecoderSet(v=tuple(mats), block_map=tuple(infos), plan=plan)


def _validate_plan_against_channel(ch: ChannelSet, plan: SchemePlan) -> None:
    if plan.t != ch.t:
        raise InvalidInputError(f"plan extension t={plan.t} does not match channel t={ch.t}")
    if plan.regime not in (REGIME_CHAIN, REGIME_MIXED_CHAIN):
        raise InvalidInputError(f"synth_mixed handles chain plans, got regime {plan.regime!r}")
    dims = 0
    for inst in plan.instances:
        cap = (inst.depth + 1) * ch.mt - (inst.depth + 2) * ch.nt
        if inst.streams_per_block > cap:
            raise InfeasibleError(
                f"instance depth={inst.depth} requests {inst.streams_per_block} > cap {max(cap, 0)}"
            )
        dims += (2 * inst.depth + 1) * inst.streams_per_block
    if dims > ch.nt:
        raise InfeasibleError(
            f"plan consumes {dims} receiver dimensions > available {ch.nt}"
        )
