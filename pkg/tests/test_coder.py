import json
import math
import random
import struct

import pytest

from treepredict import coder
from treepredict.alphabet import SourceSpec, sample_sequence
from treepredict.coder import (CodecStream, Decoder, DecodeError, Encoder, decode, encode,
                               ideal_code_length)
from treepredict.escape import EscapePredictor
from treepredict.estimators import KRICHEVSKY, LAPLACE
from treepredict.prefix_code import EliasGammaCode, LazyCodeTreePredictor, UnaryCode
from treepredict.tree import build_flat, build_from_partition, six_letter_tree


def random_case(rng):
    """A predictor from one of the four families and a sequence for it."""
    est = rng.choice([LAPLACE, KRICHEVSKY])
    kind = rng.randrange(4)
    t = rng.randint(0, 60)
    if kind == 0:
        n = rng.randint(2, 12)
        pred = build_flat(n, est)
    elif kind == 1:
        n = rng.randint(2, 12)
        letters = list(range(n))
        rng.shuffle(letters)
        cut = rng.randint(1, n - 1) if n > 2 else 1
        pred = build_from_partition([letters[:cut], letters[cut:]], est)
    elif kind == 2:
        n = rng.randint(1, 200)
        pred = EscapePredictor(n, est)
    else:
        pred = LazyCodeTreePredictor(rng.choice([UnaryCode(), EliasGammaCode()]), est)
        return pred, [min(int(rng.expovariate(0.2)), 300) for _ in range(t)]
    return pred, [rng.randrange(n) for _ in range(t)]


def test_empty_sequence():
    s = encode([], build_flat(3))
    assert s.payload == b"" and s.payload_bits == 0
    assert decode(s.to_bytes()) == []


def test_short_example():
    seq = [0, 2, 0, 0, 0]
    s = encode(seq, build_flat(3))
    ideal = -sum(math.log2(p) for p in (1 / 3, 1 / 4, 2 / 5, 3 / 6, 4 / 7))
    assert ideal == pytest.approx(math.log2(105))
    assert s.ideal_bits == pytest.approx(ideal)
    assert ideal_code_length(seq, build_flat(3)) == pytest.approx(ideal)
    assert s.payload_bits <= 9
    assert decode(s.to_bytes()) == seq


def test_random_round_trips():
    rng = random.Random(12)
    for _ in range(300):
        pred, seq = random_case(rng)
        s = encode(seq, pred)
        data = s.to_bytes()
        assert decode(data) == seq
        gap = s.payload_bits - ideal_code_length(seq, pred)
        assert -1e-9 <= gap <= 2


def test_uniform_rate():
    seq = sample_sequence(SourceSpec.uniform(4), 10**4, seed=1)
    s = encode(seq, build_flat(4))
    assert 2.0 - 0.02 <= s.payload_bits / 1e4 <= 2.01
    assert decode(s) == seq


def test_unary_geometric_round_trip():
    seq = sample_sequence(SourceSpec.geometric(0.5), 1000, seed=4)
    s = encode(seq, LazyCodeTreePredictor(UnaryCode()))
    assert decode(s.to_bytes()) == seq


def test_lockstep_states():
    pred = six_letter_tree()
    seq = sample_sequence(SourceSpec.uniform(6), 200, seed=2)
    s = encode(seq, pred)
    enc_side = pred.fresh()
    dec_side = pred.fresh()
    dec = Decoder(s.payload, s.payload_bits)
    for a in seq:
        b = dec_side.decode_with(dec.decode)
        assert b == a
        enc_side.update(a)
        dec_side.update(b)
        assert enc_side.node_counts() == dec_side.node_counts()


def test_stream_layout():
    s = encode([1, 0, 1], build_flat(2), extra={"note": "x"})
    data = s.to_bytes()
    assert data[:4] == b"TPC1" and data[4] == 1
    (hlen,) = struct.unpack_from("<I", data, 5)
    head = json.loads(data[9:9 + hlen])
    assert head == {"note": "x", "payload_bits": s.payload_bits,
                    "predictor": {"type": "flat", "alphabet_size": 2, "estimator": "laplace"}}
    assert struct.unpack_from("<Q", data, 9 + hlen)[0] == 3
    assert CodecStream.from_bytes(data).extra == {"note": "x"}


def _stream():
    seq = sample_sequence(SourceSpec.uniform(5), 400, seed=8)
    return seq, encode(seq, build_flat(5)).to_bytes()


def test_truncated_stream():
    _, data = _stream()
    for cut in (3, 8, 20, len(data) - 1):
        with pytest.raises(DecodeError):
            decode(data[:cut])


def test_bad_magic_and_version():
    _, data = _stream()
    with pytest.raises(DecodeError):
        decode(b"XPC1" + data[4:])
    with pytest.raises(DecodeError):
        decode(data[:4] + b"\x02" + data[5:])


def test_corrupt_header():
    _, data = _stream()
    (hlen,) = struct.unpack_from("<I", data, 5)
    bad = data[:9] + b"{" * hlen + data[9 + hlen:]
    with pytest.raises(DecodeError):
        decode(bad)


def test_bit_flips_never_misreport_length():
    seq, data = _stream()
    rng = random.Random(0)
    for _ in range(100):
        buf = bytearray(data)
        i = rng.randrange(len(buf) - 60, len(buf))
        buf[i] ^= 1 << rng.randrange(8)
        try:
            out = decode(bytes(buf))
        except DecodeError:
            continue
        assert len(out) == len(seq)


def test_encoder_rejects_zero_frequency():
    class Zero:
        sigma = 2
        total = 4

        def freq(self, i):
            return 0

    with pytest.raises(coder.CoderError):
        Encoder().encode(Zero(), 0)
