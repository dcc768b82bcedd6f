"""Receiver-side certification: decoder construction, leakage measurement,
rank-based DoF certificates and the empirical sum-rate slope.

The certificate is a pure rank statement: at each receiver the interference
must occupy few enough dimensions, the desired signal must survive the
projection onto their orthogonal complement at full stream count, and the
residual leakage through that projection must stay below tolerance.  DoF
totals are carried as exact rationals so acceptance checks never compare
floats for equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import matkit
from .alignment import DecoderSet, PrecoderSet
from .channel import ChannelSet, NoiseModel
from .errors import InvalidInputError, NotCertifiableError
from .matkit import DEFAULT_TOL, Tolerance


@dataclass(frozen=True)
class ReceiverEvidence:
    receiver: int
    signal_rank: int
    interference_rank: int
    max_leakage: float


@dataclass(frozen=True)
class DofCertificate:
    m: int
    n: int
    t: int
    receivers: tuple[ReceiverEvidence, ReceiverEvidence, ReceiverEvidence]
    streams: tuple[int, int, int]
    per_slot_dof: Fraction
    max_leakage: float
    passed: bool
    tol: Tolerance


@dataclass(frozen=True)
class RateCurve:
    """Sum rate samples over an SNR grid and the DoF slope fitted on the top
    decade of the grid."""

    snr_db: tuple[float, ...]
    sum_rates: tuple[float, ...]
    fitted_slope: float


def interference_matrix(ch: ChannelSet, pset: PrecoderSet, receiver: int) -> np.ndarray:
    """Received interference columns at one receiver: [H_{i,j} V_j for j != i]."""
    cols = [ch.h[receiver][j] @ pset.v[j] for j in range(3) if j != receiver]
    return np.hstack(cols)


def _receiver_geometry(
    ch: ChannelSet, pset: PrecoderSet, receiver: int, tol: Tolerance
) -> tuple[int, np.ndarray]:
    """Interference rank plus an orthonormal basis of its orthogonal
    complement at one receiver.

    The rank decision is scale-aware: interference whose largest singular
    value is below leakage_tol times the cross-channel spectral scale counts
    as nulled, so transmit-side zero forcing is not misread as full-rank
    noise.
    """
    g = interference_matrix(ch, pset, receiver)
    dtype = g.dtype if g.size else ch.h[receiver][receiver].dtype
    if g.shape[1] == 0:
        return 0, np.eye(ch.nt, dtype=dtype)
    u, svals, _ = np.linalg.svd(g, full_matrices=True)
    smax = float(svals[0]) if svals.size else 0.0
    scale = max(
        float(np.linalg.norm(ch.h[receiver][j], ord=2))
        for j in range(3)
        if j != receiver
    )
    if smax <= tol.leakage_tol * scale:
        r = 0
    else:
        r = int(np.sum(svals > tol.rank_cutoff(g.shape, smax)))
    return r, u[:, r:]


def build_decoders(ch: ChannelSet, pset: PrecoderSet, tol: Tolerance = DEFAULT_TOL) -> DecoderSet:
    """Zero-forcing decoders: project onto the complement of the received
    interference, then keep the strongest directions of the projected direct
    channel.

    Raises NotCertifiableError when the interference leaves fewer dimensions
    than the user's stream count, or the projected direct channel loses rank.
    """
    _check_shapes(ch, pset)
    decoders = []
    for i in range(3):
        d = pset.v[i].shape[1]
        _, comp = _receiver_geometry(ch, pset, i, tol)
        if comp.shape[1] < d:
            raise NotCertifiableError(
                f"receiver {i}: interference leaves {comp.shape[1]} dimensions < {d} streams"
            )
        if d == 0:
            decoders.append(comp[:, :0])
            continue
        eff = comp.conj().T @ ch.h[i][i] @ pset.v[i]
        if matkit.rank(eff, tol) < d:
            raise NotCertifiableError(
                f"receiver {i}: effective direct channel is rank deficient"
            )
        left, _, _ = np.linalg.svd(eff, full_matrices=False)
        decoders.append(comp @ left[:, :d])
    return DecoderSet(u=tuple(decoders))


def naive_decoders(ch: ChannelSet, pset: PrecoderSet, tol: Tolerance = DEFAULT_TOL) -> DecoderSet:
    """Signal-matched decoders that ignore interference entirely.

    Useful as the receiver model for negative controls: with unaligned
    precoders these decoders expose the interference as leakage instead of
    silently projecting it away.
    """
    _check_shapes(ch, pset)
    decoders = []
    for i in range(3):
        d = pset.v[i].shape[1]
        if d == 0:
            decoders.append(np.zeros((ch.nt, 0), dtype=ch.h[i][i].dtype))
            continue
        left, _, _ = np.linalg.svd(ch.h[i][i] @ pset.v[i], full_matrices=False)
        decoders.append(left[:, :d])
    return DecoderSet(u=tuple(decoders))


def leakage(ch: ChannelSet, pset: PrecoderSet, dset: DecoderSet) -> np.ndarray:
    """Per-pair relative leakage after decoding.

    Entry (i, j) for i != j is ||U_i^H H_{i,j} V_j||_F normalized by
    ||H_{i,j}||_F ||V_j||_F; diagonal entries report the desired-signal
    energy through the same projection as a sanity value.
    """
    _check_shapes(ch, pset)
    out = np.zeros((3, 3))
    for j in range(3):
        vj = pset.v[j]
        if vj.shape[1] == 0:
            continue
        norms = np.linalg.norm(vj, axis=0)
        if np.any(norms < 1e-300):
            raise InvalidInputError("precoder has a zero column; leakage is undefined")
        vnorm = float(np.linalg.norm(vj))
        for i in range(3):
            ui = dset.u[i]
            if ui.shape[1] == 0:
                continue
            hnorm = float(np.linalg.norm(ch.h[i][j]))
            out[i, j] = float(np.linalg.norm(ui.conj().T @ ch.h[i][j] @ vj)) / (hnorm * vnorm)
    return out


def certify(ch: ChannelSet, pset: PrecoderSet, tol: Tolerance = DEFAULT_TOL) -> DofCertificate:
    """Issue the rank/leakage certificate for a precoder set.

    Never raises on a failing scheme: rank shortfalls and leakage are encoded
    in the certificate.  When the interference complement is too small for
    proper zero-forcing decoders, leakage is measured through signal-matched
    decoders instead so the failure is visible rather than projected away.
    """
    _check_shapes(ch, pset)
    streams = pset.streams
    nt = ch.nt
    evidence = []
    certifiable = True
    for i in range(3):
        d = streams[i]
        interference_rank, comp = _receiver_geometry(ch, pset, i, tol)
        if d == 0:
            evidence.append(ReceiverEvidence(i, 0, interference_rank, 0.0))
            continue
        eff = comp.conj().T @ ch.h[i][i] @ pset.v[i]
        signal_rank = matkit.rank(eff, tol) if comp.shape[1] else 0
        if comp.shape[1] < d or signal_rank < d:
            certifiable = False
        evidence.append(ReceiverEvidence(i, signal_rank, interference_rank, 0.0))
    try:
        dset = build_decoders(ch, pset, tol) if certifiable else naive_decoders(ch, pset, tol)
    except NotCertifiableError:
        dset = naive_decoders(ch, pset, tol)
    leak = leakage(ch, pset, dset)
    off = leak - np.diag(np.diag(leak))
    evidence = [
        ReceiverEvidence(e.receiver, e.signal_rank, e.interference_rank, float(np.max(off[e.receiver])))
        for e in evidence
    ]
    max_leak = float(np.max(off))
    passed = (
        all(e.signal_rank == streams[e.receiver] for e in evidence)
        and all(e.interference_rank <= nt - streams[e.receiver] for e in evidence)
        and max_leak <= tol.leakage_tol
    )
    return DofCertificate(
        m=ch.m,
        n=ch.n,
        t=ch.t,
        receivers=tuple(evidence),
        streams=streams,
        per_slot_dof=Fraction(sum(streams), ch.t),
        max_leakage=max_leak,
        passed=passed,
        tol=tol,
    )


def estimate_dof_slope(
    ch: ChannelSet,
    pset: PrecoderSet,
    dset: DecoderSet,
    noise: NoiseModel,
    snr_db_grid,
) -> RateCurve:
    """Sum-rate curve with Gaussian signaling and the DoF slope fit.

    Per SNR point, each user's power is snr * variance split equally over its
    streams; interference that survives the decoder projection is treated as
    Gaussian noise, so certified schemes recover their stream count as slope
    while unaligned ones saturate.  The slope is the least-squares fit of
    sum rate (bits per channel use) against log2(SNR) over the top decade of
    the grid.
    """
    _check_shapes(ch, pset)
    snr_db = [float(s) for s in snr_db_grid]
    if len(snr_db) < 2:
        raise InvalidInputError("need at least two SNR points")
    proj = [dset.u[i].conj().T @ ch.h[i][i] @ pset.v[i] for i in range(3)]
    cross = {
        (i, j): dset.u[i].conj().T @ ch.h[i][j] @ pset.v[j]
        for i in range(3)
        for j in range(3)
        if i != j
    }
    for i in range(3):
        d = pset.v[i].shape[1]
        if d and matkit.rank(proj[i]) < d:
            raise NotCertifiableError(f"receiver {i}: projected direct channel is singular")
    rates = []
    for s in snr_db:
        power = (10.0 ** (s / 10.0)) * noise.variance
        total = 0.0
        for i in range(3):
            d = pset.v[i].shape[1]
            if d == 0:
                continue
            cov = noise.variance * np.eye(d, dtype=np.complex128)
            for j in range(3):
                if j == i or pset.v[j].shape[1] == 0:
                    continue
                x = cross[(i, j)]
                cov = cov + (power / pset.v[j].shape[1]) * (x @ x.conj().T)
            sig = (power / d) * (proj[i] @ proj[i].conj().T)
            sign, logdet = np.linalg.slogdet(np.eye(d) + sig @ np.linalg.inv(cov))
            total += float(logdet) / np.log(2.0)
        rates.append(total / ch.t)
    top = [k for k, s in enumerate(snr_db) if s >= max(snr_db) - 10.0]
    if len(top) < 2:
        raise InvalidInputError("top decade of the SNR grid needs at least two points")
    xs = np.array([snr_db[k] / 10.0 * np.log2(10.0) for k in top])
    ys = np.array([rates[k] for k in top])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return RateCurve(snr_db=tuple(snr_db), sum_rates=tuple(rates), fitted_slope=slope)


def _check_shapes(ch: ChannelSet, pset: PrecoderSet) -> None:
    for u in range(3):
        if pset.v[u].shape[0] != ch.mt:
            raise InvalidInputError(
                f"precoder {u} has {pset.v[u].shape[0]} rows, channel expects {ch.mt}"
            )
