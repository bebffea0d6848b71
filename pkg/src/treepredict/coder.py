"""Arithmetic coding driven by a tree-structured predictor.

Each letter is coded as the sequence of son choices on its root-to-leaf path,
one vertex at a time, so countable alphabets never need a full pmf.  Son
frequencies are the exact integer weights of the additive estimator; the
64-bit coder maps them into its range with floor division so that every
coded sub-interval is at most its ideal size.  The stream is terminated with
the shortest dyadic interval that fits inside the final range, which keeps
the payload within 2 bits of the ideal code length.

Stream layout (all integers little-endian)::

    b"TPC1" | version u8 | header-length u32 | header JSON (utf-8)
           | symbol count u64 | payload bits, MSB first, zero-padded

The header JSON holds ``"predictor"`` (the predictor descriptor) and
``"payload_bits"``; callers may add further keys (the CLI stores its token
dictionary there).
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from typing import Iterable, Optional

MAGIC = b"TPC1"
VERSION = 1

STATE_BITS = 64
_FULL = 1 << STATE_BITS
_MASK = _FULL - 1
_HALF = 1 << (STATE_BITS - 1)
_QUARTER = 1 << (STATE_BITS - 2)
_THREE_QUARTERS = 3 * _QUARTER
# Split totals above this could leave a son with an empty sub-interval.
MAX_TOTAL = _QUARTER


class CoderError(ValueError):
    pass


class DecodeError(CoderError):
    pass


class BitWriter:
    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._n = 0
        self.nbits = 0

    def write(self, bit: int) -> None:
        self._acc = (self._acc << 1) | bit
        self._n += 1
        self.nbits += 1
        if self._n == 8:
            self._buf.append(self._acc)
            self._acc = 0
            self._n = 0

    def write_run(self, bit: int, count: int) -> None:
        for _ in range(count):
            self.write(bit)

    def getvalue(self) -> bytes:
        out = bytes(self._buf)
        if self._n:
            out += bytes([self._acc << (8 - self._n)])
        return out


class BitReader:
    """MSB-first reader; reads past ``nbits`` return zeros."""

    def __init__(self, data: bytes, nbits: int):
        self._data = data
        self.nbits = nbits
        self.pos = 0

    def read(self) -> int:
        pos = self.pos
        self.pos += 1
        if pos >= self.nbits:
            return 0
        return (self._data[pos >> 3] >> (7 - (pos & 7))) & 1


class Encoder:
    """Binary-output arithmetic encoder with a 64-bit interval."""

    def __init__(self):
        self.low = 0
        self.high = _MASK
        self.pending = 0
        self.out = BitWriter()
        self.ideal_bits = 0.0
        self._done = False

    def _emit(self, bit: int) -> None:
        self.out.write(bit)
        if self.pending:
            self.out.write_run(bit ^ 1, self.pending)
            self.pending = 0

    def encode(self, split, index: int) -> None:
        if split.sigma == 1:
            return
        total = split.total
        if total > MAX_TOTAL:
            raise CoderError(f"split total {total} exceeds coder precision")
        freq = split.freq(index)
        if freq <= 0:
            raise CoderError("cannot code a son with zero predicted probability")
        rng = self.high - self.low + 1
        start = rng * split.cum(index) // total
        width = rng * freq // total
        self.low += start
        self.high = self.low + width - 1
        self.ideal_bits += math.log2(total) - math.log2(freq)
        self._normalize()

    def _normalize(self) -> None:
        while True:
            if self.high < _HALF:
                self._emit(0)
            elif self.low >= _HALF:
                self._emit(1)
                self.low -= _HALF
                self.high -= _HALF
            elif self.low >= _QUARTER and self.high < _THREE_QUARTERS:
                self.pending += 1
                self.low -= _QUARTER
                self.high -= _QUARTER
            else:
                return
            self.low <<= 1
            self.high = (self.high << 1) | 1

    def finish(self) -> tuple[bytes, int]:
        """Terminate the stream; returns ``(payload, payload_bits)``."""
        if not self._done:
            self._done = True
            end = self.high + 1
            for k in range(1 if self.pending else 0, STATE_BITS + 1):
                step = 1 << (STATE_BITS - k)
                m = -(-self.low // step)
                if (m + 1) * step <= end:
                    break
            else:  # pragma: no cover - the range always exceeds a quarter
                raise CoderError("no terminating interval found")
            if k:
                bits = format(m, f"0{k}b")
                self._emit(int(bits[0]))
                for b in bits[1:]:
                    self.out.write(int(b))
        return self.out.getvalue(), self.out.nbits


class Decoder:
    def __init__(self, payload: bytes, nbits: int):
        if len(payload) != (nbits + 7) // 8:
            raise DecodeError(f"payload has {len(payload)} bytes, header declares {nbits} bits")
        if nbits % 8 and payload[-1] & ((1 << (8 - nbits % 8)) - 1):
            raise DecodeError("non-zero padding after the last payload bit")
        self.bits = BitReader(payload, nbits)
        self.low = 0
        self.high = _MASK
        self.code = 0
        for _ in range(STATE_BITS):
            self.code = (self.code << 1) | self.bits.read()

    def decode(self, split) -> int:
        if split.sigma == 1:
            return 0
        total = split.total
        if total > MAX_TOTAL:
            raise DecodeError(f"split total {total} exceeds coder precision")
        rng = self.high - self.low + 1
        offset = self.code - self.low
        if not 0 <= offset < rng:
            raise DecodeError("code value left the coding interval: corrupt payload")
        target = ((offset + 1) * total - 1) // rng
        index = split.find(target)
        if not 0 <= index < split.sigma:
            raise DecodeError("code value outside every son's interval")
        start = rng * split.cum(index) // total
        width = rng * split.freq(index) // total
        if not start <= offset < start + width:
            raise DecodeError("code value falls between son intervals: corrupt payload")
        self.low += start
        self.high = self.low + width - 1
        self._normalize()
        return index

    def _normalize(self) -> None:
        while True:
            if self.high < _HALF:
                pass
            elif self.low >= _HALF:
                self.low -= _HALF
                self.high -= _HALF
                self.code -= _HALF
            elif self.low >= _QUARTER and self.high < _THREE_QUARTERS:
                self.low -= _QUARTER
                self.high -= _QUARTER
                self.code -= _QUARTER
            else:
                return
            self.low <<= 1
            self.high = (self.high << 1) | 1
            self.code = (self.code << 1) | self.bits.read()


@dataclass
class CodecStream:
    """Parsed or freshly encoded stream."""

    predictor: dict
    n_symbols: int
    payload: bytes
    payload_bits: int
    extra: dict = field(default_factory=dict)
    ideal_bits: Optional[float] = None

    def header(self) -> dict:
        return {**self.extra, "predictor": self.predictor, "payload_bits": self.payload_bits}

    def to_bytes(self) -> bytes:
        head = json.dumps(self.header(), sort_keys=True, separators=(",", ":")).encode()
        return b"".join([MAGIC, struct.pack("<BI", VERSION, len(head)), head,
                         struct.pack("<Q", self.n_symbols), self.payload])

    @classmethod
    def from_bytes(cls, data: bytes) -> "CodecStream":
        if len(data) < 9 or data[:4] != MAGIC:
            raise DecodeError("not a TPC1 stream (bad magic)")
        version, hlen = struct.unpack_from("<BI", data, 4)
        if version != VERSION:
            raise DecodeError(f"unsupported stream version {version}")
        end = 9 + hlen
        if len(data) < end + 8:
            raise DecodeError("truncated header")
        try:
            head = json.loads(data[9:end].decode())
            predictor = head.pop("predictor")
            nbits = int(head.pop("payload_bits"))
        except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DecodeError(f"corrupt header: {exc}") from exc
        if not isinstance(predictor, dict) or nbits < 0:
            raise DecodeError("corrupt header")
        (n_symbols,) = struct.unpack_from("<Q", data, end)
        payload = data[end + 8:]
        if len(payload) != (nbits + 7) // 8:
            raise DecodeError(f"payload is {len(payload)} bytes, header declares {nbits} bits "
                              "(truncated or padded stream)")
        return cls(predictor, n_symbols, payload, nbits, head)


def encode(seq: Iterable[int], predictor, extra: Optional[dict] = None) -> CodecStream:
    """Encode ``seq`` starting from an empty copy of ``predictor``."""
    pred = predictor.fresh()
    enc = Encoder()
    n = 0
    for a in seq:
        for split, i in pred.decision_steps(a):
            enc.encode(split, i)
        pred.update(a)
        n += 1
    payload, nbits = enc.finish()
    return CodecStream(pred.descriptor(), n, payload, nbits, dict(extra or {}), enc.ideal_bits)


def decode(stream, predictor=None) -> list[int]:
    """Decode a :class:`CodecStream` or its byte serialization.

    The predictor is rebuilt from the header unless one is supplied.
    """
    if isinstance(stream, (bytes, bytearray)):
        stream = CodecStream.from_bytes(bytes(stream))
    if predictor is None:
        from .predictors import PredictorSpecError, predictor_from_descriptor
        try:
            pred = predictor_from_descriptor(stream.predictor)
        except PredictorSpecError as exc:
            raise DecodeError(f"corrupt predictor descriptor: {exc}") from exc
    else:
        pred = predictor.fresh()
    dec = Decoder(stream.payload, stream.payload_bits)
    out = []
    for _ in range(stream.n_symbols):
        try:
            a = pred.decode_with(dec.decode)
        except DecodeError:
            raise
        except (ValueError, IndexError) as exc:  # e.g. a letter outside a finite tree
            raise DecodeError(f"corrupt payload: {exc}") from exc
        pred.update(a)
        out.append(a)
    return out


def ideal_code_length(seq: Iterable[int], predictor) -> float:
    """``sum -log2 P*(x_{i+1} | x_1..x_i)`` computed from the predictor directly."""
    pred = predictor.fresh()
    bits = 0.0
    for a in seq:
        bits -= math.log2(pred.predict(a))
        pred.update(a)
    return bits
