"""Versioned binary serialization for fitted models.

Layout (all little-endian, magic "CKNF", version 1): a kind byte selects
marginal (0) or conditional (1).  A marginal blob carries shapes, the sigma
band, the optional standardizer, and the three parameter arrays.  A
conditional blob embeds its base marginal followed by the network arrays.
Diagnostics are a training trace, not part of the model, and are not
stored.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import BadMagic, IoFailure, ParseError, TruncatedPayload, VersionUnsupported
from .models import ConditionalKnife, MarginalKnife, Standardizer

MAGIC = b"CKNF"
VERSION = 1
_KIND_MARGINAL = 0
_KIND_CONDITIONAL = 1


def _array_bytes(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


class _Reader:
    def __init__(self, blob: bytes, path: str):
        self.blob = blob
        self.path = path
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise TruncatedPayload(
                f"{self.path}: needed {n} bytes at offset {self.pos}, "
                f"file has {len(self.blob)}"
            )
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def array(self, shape) -> np.ndarray:
        count = int(np.prod(shape))
        raw = self.take(count * 8)
        return np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)

    def done(self) -> None:
        if self.pos != len(self.blob):
            raise ParseError(
                f"{self.path}: {len(self.blob) - self.pos} trailing bytes"
            )


def _pack_standardizer(std: Standardizer | None) -> bytes:
    if std is None:
        return b"\x00"
    return b"\x01" + _array_bytes(std.shift) + _array_bytes(std.scale)


def _read_standardizer(r: _Reader, dim: int) -> Standardizer | None:
    if r.u8() == 0:
        return None
    shift = r.array((dim,))
    scale = r.array((dim,))
    return Standardizer(shift=shift, scale=scale)


def _pack_marginal(model: MarginalKnife) -> bytes:
    parts = [
        struct.pack("<II", model.modes, model.dim),
        struct.pack("<dd", model.sigma_floor, model.sigma_ceil),
        _pack_standardizer(model.standardizer),
        _array_bytes(model.logits),
        _array_bytes(model.means),
        _array_bytes(model.log_sigmas),
    ]
    return b"".join(parts)


def _read_marginal(r: _Reader) -> MarginalKnife:
    k, d = r.u32(), r.u32()
    sigma_floor, sigma_ceil = r.f64(), r.f64()
    standardizer = _read_standardizer(r, d)
    logits = r.array((k,))
    means = r.array((k, d))
    log_sigmas = r.array((k, d))
    return MarginalKnife(
        logits=logits,
        means=means,
        log_sigmas=log_sigmas,
        standardizer=standardizer,
        sigma_floor=sigma_floor,
        sigma_ceil=sigma_ceil,
    )


def save_model(model: MarginalKnife | ConditionalKnife, path: str) -> None:
    if isinstance(model, MarginalKnife):
        kind = _KIND_MARGINAL
        payload = _pack_marginal(model)
    elif isinstance(model, ConditionalKnife):
        kind = _KIND_CONDITIONAL
        h, ds = model.w1.shape
        payload = b"".join(
            [
                _pack_marginal(model.base),
                struct.pack("<II", ds, h),
                _pack_standardizer(model.cond_standardizer),
                _array_bytes(model.w1),
                _array_bytes(model.b1),
                _array_bytes(model.w2),
                _array_bytes(model.b2),
            ]
        )
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    blob = MAGIC + struct.pack("<IB", VERSION, kind) + payload
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_model(path: str) -> MarginalKnife | ConditionalKnife:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if blob[:4] != MAGIC:
        raise BadMagic(f"{path}: not a model file (magic {blob[:4]!r})")
    r = _Reader(blob, str(path))
    r.take(4)
    version = r.u32()
    if version != VERSION:
        raise VersionUnsupported(f"{path}: version {version}, reader supports {VERSION}")
    kind = r.u8()
    if kind == _KIND_MARGINAL:
        model: MarginalKnife | ConditionalKnife = _read_marginal(r)
    elif kind == _KIND_CONDITIONAL:
        base = _read_marginal(r)
        ds, h = r.u32(), r.u32()
        cond_standardizer = _read_standardizer(r, ds)
        p = base.modes + 2 * base.modes * base.dim
        w1 = r.array((h, ds))
        b1 = r.array((h,))
        w2 = r.array((p, h))
        b2 = r.array((p,))
        model = ConditionalKnife(
            base=base,
            w1=w1,
            b1=b1,
            w2=w2,
            b2=b2,
            cond_standardizer=cond_standardizer,
        )
    else:
        raise VersionUnsupported(f"{path}: unknown model kind {kind}")
    r.done()
    return model
