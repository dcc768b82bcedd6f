"""3-user channel realizations: generation, symbol extension, reciprocity.

Receivers and transmitters are indexed 0..2 throughout; ``h[i][j]`` is the
channel from transmitter j to receiver i, of shape ``(n*t) x (m*t)``.
Symbol extension over t slots of a constant channel is modeled as a
block-diagonal matrix with t identical blocks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

FIELD_MODES = ("real", "complex")


@dataclass(frozen=True)
class NoiseModel:
    """Receiver AWGN power in linear units."""

    variance: float = 1.0

    def __post_init__(self) -> None:
        if not self.variance > 0:
            raise InvalidInputError("noise variance must be positive")


@dataclass(frozen=True)
class ChannelSet:
    m: int
    n: int
    t: int
    field_mode: str
    seed: int
    h: tuple[tuple[np.ndarray, ...], ...]

    @property
    def mt(self) -> int:
        return self.m * self.t

    @property
    def nt(self) -> int:
        return self.n * self.t


def _freeze(mat: np.ndarray) -> np.ndarray:
    mat.flags.writeable = False
    return mat


def generate(m: int, n: int, seed: int, field_mode: str = "complex") -> ChannelSet:
    """Draw nine i.i.d. unit-variance Gaussian channel matrices.

    Complex mode draws circularly-symmetric entries; the result is a pure
    function of ``(m, n, seed, field_mode)``.
    """
    if m < 1 or n < 1:
        raise InvalidInputError("antenna counts must be >= 1")
    if field_mode not in FIELD_MODES:
        raise InvalidInputError(f"field_mode must be one of {FIELD_MODES}")
    rng = np.random.default_rng(seed)
    mats = []
    for _ in range(9):
        if field_mode == "complex":
            mat = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2.0)
        else:
            mat = rng.standard_normal((n, m))
        mats.append(_freeze(mat))
    h = tuple(tuple(mats[3 * i + j] for j in range(3)) for i in range(3))
    return ChannelSet(m=m, n=n, t=1, field_mode=field_mode, seed=seed, h=h)


def extend(ch: ChannelSet, t: int) -> ChannelSet:
    """Symbol-extend a t=1 channel over ``t`` slots (block-diagonal copies)."""
    if t < 1:
        raise InvalidInputError("extension factor must be >= 1")
    if ch.t != 1:
        raise InvalidInputError("channel is already extended; extend from t=1")
    if t == 1:
        return ch
    h = tuple(
        tuple(_freeze(_block_diag_copies(ch.h[i][j], t)) for j in range(3)) for i in range(3)
    )
    return ChannelSet(m=ch.m, n=ch.n, t=t, field_mode=ch.field_mode, seed=ch.seed, h=h)


def _block_diag_copies(mat: np.ndarray, t: int) -> np.ndarray:
    n, m = mat.shape
    out = np.zeros((n * t, m * t), dtype=mat.dtype)
    for s in range(t):
        out[s * n : (s + 1) * n, s * m : (s + 1) * m] = mat
    return out


def reciprocal(ch: ChannelSet) -> ChannelSet:
    """Swap transmitter/receiver roles: ``h'[i][j] = h[j][i].T``.

    Plain transpose (not conjugate) so the real-field mode stays closed; the
    DoF argument only needs generic linear reciprocity.
    """
    h = tuple(tuple(_freeze(ch.h[j][i].T.copy()) for j in range(3)) for i in range(3))
    return ChannelSet(m=ch.n, n=ch.m, t=ch.t, field_mode=ch.field_mode, seed=ch.seed, h=h)


# ---------------------------------------------------------------------------
# JSON replay format: {m, n, t, field_mode, seed, h: 3x3 arrays of row-major
# [re, im] pairs}.


def mat_to_pairs(mat: np.ndarray) -> list[list[float]]:
    flat = np.asarray(mat).ravel(order="C")
    return [[float(np.real(x)), float(np.imag(x))] for x in flat]


def pairs_to_mat(pairs, rows: int, cols: int, field_mode: str) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.shape != (rows * cols, 2):
        raise InvalidInputError(f"expected {rows * cols} [re, im] pairs, got shape {arr.shape}")
    if field_mode == "real":
        if np.any(arr[:, 1] != 0.0):
            raise InvalidInputError("real-mode matrix has nonzero imaginary parts")
        return arr[:, 0].reshape(rows, cols)
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(rows, cols)


def to_json_dict(ch: ChannelSet) -> dict:
    return {
        "m": ch.m,
        "n": ch.n,
        "t": ch.t,
        "field_mode": ch.field_mode,
        "seed": ch.seed,
        "h": [[mat_to_pairs(ch.h[i][j]) for j in range(3)] for i in range(3)],
    }


def from_json_dict(doc: dict) -> ChannelSet:
    m, n, t = int(doc["m"]), int(doc["n"]), int(doc["t"])
    field_mode = doc["field_mode"]
    if field_mode not in FIELD_MODES:
        raise InvalidInputError(f"field_mode must be one of {FIELD_MODES}")
    h = tuple(
        tuple(
            _freeze(pairs_to_mat(doc["h"][i][j], n * t, m * t, field_mode)) for j in range(3)
        )
        for i in range(3)
    )
    return ChannelSet(m=m, n=n, t=t, field_mode=field_mode, seed=int(doc["seed"]), h=h)


def save(ch: ChannelSet, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_json_dict(ch), f, indent=2, sort_keys=True)
        f.write("\n")


def load(path) -> ChannelSet:
    with open(path, "r", encoding="utf-8") as f:
        return from_json_dict(json.load(f))
