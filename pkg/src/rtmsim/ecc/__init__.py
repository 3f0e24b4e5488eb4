"""Error-correcting codes protecting cache lines.

``secded`` guards uncompressed 512-bit lines with 11 out-of-line check bits;
``bch`` guards compressed payloads with 31 in-line check bits.
"""

from __future__ import annotations

from . import bch, gf, secded
from .outcome import CodeSpec, Codeword, DecodeOutcome, DecodeStatus, Scheme

secded_encode = secded.encode
secded_decode = secded.decode
tecqed_encode = bch.encode
tecqed_decode = bch.decode


def check_bits_required(scheme: Scheme, k: int) -> int:
    if not 1 <= k <= 512:
        raise ValueError(f"k must be in [1, 512], got {k}")
    if scheme is Scheme.SEC_DED:
        # smallest r with 2**r >= k + r + 1, plus the overall parity bit
        r = 1
        while (1 << r) < k + r + 1:
            r += 1
        return r + 1
    return bch.R


def correction_capability(scheme: Scheme) -> int:
    return 1 if scheme is Scheme.SEC_DED else bch.T


__all__ = [
    "CodeSpec",
    "Codeword",
    "DecodeOutcome",
    "DecodeStatus",
    "Scheme",
    "bch",
    "check_bits_required",
    "correction_capability",
    "gf",
    "secded",
    "secded_decode",
    "secded_encode",
    "tecqed_decode",
    "tecqed_encode",
]
