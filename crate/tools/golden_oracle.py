"""Independent reference encoder used to freeze golden streams.

Re-implements quantization, the 1-D block predictor, fixed-length packing and
the container layout from scratch (no shared code with the Rust crate) and
prints hex streams plus exact rational statistics for a few small inputs.
"""

import math
import struct
from fractions import Fraction


def f32(v):
    return struct.unpack("<f", struct.pack("<f", v))[0]


def rnd(v, dtype):
    return f32(v) if dtype == "f32" else v


def quantize(x, eps, dtype):
    w = 2.0 * eps
    b = math.floor((x + eps) / w)
    if abs(x - rnd(w * b, dtype)) <= eps:
        return b
    best = None
    for c in (b - 1, b + 1):
        e = abs(x - rnd(w * c, dtype))
        if e <= eps and (best is None or e < best[1]):
            best = (c, e)
    return best[0] if best else b


def pack_bits(fields, width):
    bits = "".join(format(f, "0{}b".format(width)) for f in fields)
    bits += "0" * (-len(bits) % 8)
    return bytes(int(bits[i:i + 8], 2) for i in range(0, len(bits), 8))


def encode(values, dims, eps, block, dtype):
    values = [rnd(v, dtype) for v in values]
    bins = [quantize(v, eps, dtype) for v in values]
    widths, outliers, signs, payload = [], [], b"", b""
    for s in range(0, len(bins), block):
        blk = bins[s:s + block]
        res = [0] + [blk[i] - blk[i - 1] for i in range(1, len(blk))]
        mags = [abs(r) for r in res]
        width = 0
        for m in mags:
            width = max(width, m.bit_length())
        widths.append(width)
        outliers.append(blk[0])
        if width:
            signs += pack_bits([1 if r < 0 else 0 for r in res], 1)
            payload += pack_bits(mags, width)
    header = b"HSZP" + struct.pack("<HBBdIIQ", 1, 0 if dtype == "f32" else 1, 0, eps, block, len(dims), len(values))
    header += b"".join(struct.pack("<Q", d) for d in dims)
    body = bytes(widths) + b"".join(struct.pack("<i", o) for o in outliers) + signs + payload
    return bins, header + body


def stats(bins, eps):
    n = len(bins)
    w = Fraction(2 * eps)
    mean = w * Fraction(sum(bins), n)
    var = w * w * (Fraction(sum(b * b for b in bins), n) - Fraction(sum(bins), n) ** 2)
    return mean, var


CASES = [
    ("example", [-0.025, -0.025, -0.051, -0.052], [2, 2], 0.01, 4, "f64"),
    ("ramp_f32", [0.1 * i - 0.7 for i in range(15)], [3, 5], 0.05, 4, "f32"),
    ("mixed_f64", [1.0, 1.0, 1.0, 1.0, 3.3, -2.2, 0.004, 9.75, 9.75, -0.5], [10], 0.125, 4, "f64"),
]

for name, values, dims, eps, block, dtype in CASES:
    bins, stream = encode(values, dims, eps, block, dtype)
    mean, var = stats(bins, eps)
    print(name)
    print("  bins", bins)
    print("  hex ", stream.hex())
    print("  mean", float(mean), " var", float(var))


def example_eps_range(step=Fraction(1, 10**6)):
    """Scan eps in exact rationals for the values that give the example bins."""
    xs = [Fraction(v).limit_denominator(1000) for v in (-0.025, -0.025, -0.051, -0.052)]
    target = [-1, -1, -3, -3]
    hits = []
    eps = step
    while eps <= Fraction(1, 20):
        if [math.floor((x + eps) / (2 * eps)) for x in xs] == target:
            hits.append(eps)
        eps += step
    return min(hits), max(hits)


lo, hi = example_eps_range()
print("example bins hold for eps in [%.6f, %.6f]" % (float(lo), float(hi)))
