"""JSON encoding for precoders, plans, certificates and rate curves.

Matrices are stored dense as row-major [re, im] pairs, matching the channel
replay format; rationals are stored as "p/q" strings next to a decimal
rendering so downstream tools never have to parse fractions to plot.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .alignment import BlockInfo, DecoderSet, PrecoderSet
from .certify import DofCertificate, RateCurve, ReceiverEvidence
from .channel import mat_to_pairs, pairs_to_mat
from .dofcalc import ChainInstance, SchemePlan
from .errors import InvalidInputError
from .matkit import Tolerance


def frac_str(x: Fraction) -> str:
    return str(Fraction(x))


def parse_frac(s: str) -> Fraction:
    return Fraction(s)


def mat_to_dict(mat: np.ndarray) -> dict:
    return {
        "rows": int(mat.shape[0]),
        "cols": int(mat.shape[1]),
        "entries": mat_to_pairs(mat),
    }


def mat_from_dict(doc: dict, field_mode: str) -> np.ndarray:
    return pairs_to_mat(doc["entries"], int(doc["rows"]), int(doc["cols"]), field_mode)


def plan_to_dict(plan: SchemePlan) -> dict:
    return {
        "regime": plan.regime,
        "t": plan.t,
        "instances": [[inst.depth, inst.streams_per_block] for inst in plan.instances],
        "per_user_streams": plan.per_user_streams,
        "per_slot_dof": frac_str(plan.per_slot_dof_total),
        "per_slot_dof_dec": float(plan.per_slot_dof_total),
        "reciprocal": plan.reciprocal,
    }


def plan_from_dict(doc: dict) -> SchemePlan:
    return SchemePlan(
        regime=doc["regime"],
        t=int(doc["t"]),
        instances=tuple(ChainInstance(int(d), int(w)) for d, w in doc["instances"]),
        per_user_streams=int(doc["per_user_streams"]),
        per_slot_dof_total=parse_frac(doc["per_slot_dof"]),
        reciprocal=bool(doc.get("reciprocal", False)),
    )


def precoders_to_dict(pset: PrecoderSet, field_mode: str) -> dict:
    return {
        "field_mode": field_mode,
        "v": [mat_to_dict(mat) for mat in pset.v],
        "block_map": [
            {
                "user": b.user,
                "start": b.start,
                "stop": b.stop,
                "instance": b.instance,
                "group": b.group,
                "block": b.block,
                "depth": b.depth,
            }
            for b in pset.block_map
        ],
        "plan": plan_to_dict(pset.plan) if pset.plan is not None else None,
    }


def precoders_from_dict(doc: dict) -> PrecoderSet:
    field_mode = doc.get("field_mode", "complex")
    mats = [mat_from_dict(d, field_mode) for d in doc["v"]]
    if len(mats) != 3:
        raise InvalidInputError("precoder document must carry exactly 3 user matrices")
    blocks = tuple(
        BlockInfo(
            user=int(b["user"]),
            start=int(b["start"]),
            stop=int(b["stop"]),
            instance=int(b["instance"]),
            group=None if b["group"] is None else int(b["group"]),
            block=int(b["block"]),
            depth=None if b["depth"] is None else int(b["depth"]),
        )
        for b in doc["block_map"]
    )
    plan = plan_from_dict(doc["plan"]) if doc.get("plan") else None
    return PrecoderSet(v=tuple(mats), block_map=blocks, plan=plan)


def decoders_to_dict(dset: DecoderSet, field_mode: str) -> dict:
    return {"field_mode": field_mode, "u": [mat_to_dict(mat) for mat in dset.u]}


def decoders_from_dict(doc: dict) -> DecoderSet:
    field_mode = doc.get("field_mode", "complex")
    mats = [mat_from_dict(d, field_mode) for d in doc["u"]]
    if len(mats) != 3:
        raise InvalidInputError("decoder document must carry exactly 3 matrices")
    return DecoderSet(u=tuple(mats))


def tolerance_to_dict(tol: Tolerance) -> dict:
    return {"rel_rank_tol": tol.rel_rank_tol, "leakage_tol": tol.leakage_tol}


def certificate_to_dict(cert: DofCertificate) -> dict:
    return {
        "m": cert.m,
        "n": cert.n,
        "t": cert.t,
        "receivers": [
            {
                "receiver": e.receiver,
                "signal_rank": e.signal_rank,
                "interference_rank": e.interference_rank,
                "max_leakage": e.max_leakage,
            }
            for e in cert.receivers
        ],
        "streams": list(cert.streams),
        "per_slot_dof": frac_str(cert.per_slot_dof),
        "per_slot_dof_dec": float(cert.per_slot_dof),
        "max_leakage": cert.max_leakage,
        "pass": cert.passed,
        "tolerances": tolerance_to_dict(cert.tol),
    }


def certificate_from_dict(doc: dict) -> DofCertificate:
    tol = Tolerance(
        rel_rank_tol=doc["tolerances"]["rel_rank_tol"],
        leakage_tol=doc["tolerances"]["leakage_tol"],
    )
    return DofCertificate(
        m=int(doc["m"]),
        n=int(doc["n"]),
        t=int(doc["t"]),
        receivers=tuple(
            ReceiverEvidence(
                receiver=int(e["receiver"]),
                signal_rank=int(e["signal_rank"]),
                interference_rank=int(e["interference_rank"]),
                max_leakage=float(e["max_leakage"]),
            )
            for e in doc["receivers"]
        ),
        streams=tuple(int(s) for s in doc["streams"]),
        per_slot_dof=parse_frac(doc["per_slot_dof"]),
        max_leakage=float(doc["max_leakage"]),
        passed=bool(doc["pass"]),
        tol=tol,
    )


def rate_curve_to_dict(curve: RateCurve) -> dict:
    return {
        "snr_db": list(curve.snr_db),
        "sum_rates": list(curve.sum_rates),
        "fitted_slope": curve.fitted_slope,
    }


def dump_json(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
