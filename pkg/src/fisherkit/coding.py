"""Code lengths, entropy, cross-entropy, KL divergence and log-loss."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .models import ParametricModel, ProbVector, as_counts, loglik_counts

KRAFT_TOL = 1e-12

# The three-word code used in the worked example; only its lengths matter.
EXAMPLE_CODE = {"L": "10", "M": "0", "R": "11"}


def _log(base) -> float:
    if base in (2, "2", "bits"):
        return math.log(2.0)
    if base in ("e", math.e, "nats"):
        return 1.0
    raise ValueError(f"base must be 2 or 'e', got {base!r}")


def _pv(p) -> np.ndarray:
    return p.array if isinstance(p, ProbVector) else ProbVector(tuple(np.asarray(p, float))).array


@dataclass(frozen=True)
class CodeLengthAssignment:
    lengths: tuple[float, ...]
    alphabet_size: int = 2

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise ValueError("alphabet size must be at least 2")
        if any(not l > 0 for l in self.lengths):
            raise ValueError("code lengths must be positive")
        total, ok = kraft_check(self.lengths, self.alphabet_size)
        if not ok:
            raise ValueError(f"Kraft sum {total} exceeds 1")


def kraft_check(lengths, D: int = 2) -> tuple[float, bool]:
    l = np.asarray(lengths, dtype=float)
    if np.any(l <= 0):
        raise ValueError("code lengths must be positive")
    total = math.fsum(float(D) ** (-l))
    return total, total <= 1.0 + KRAFT_TOL


def shannon_fano_lengths(p) -> CodeLengthAssignment:
    """Ideal lengths -log2 p(x); no integer rounding."""
    arr = _pv(p)
    if np.any(arr <= 0):
        raise ValueError("Shannon-Fano lengths need every outcome to have positive probability")
    lengths = -np.log2(arr)
    # a certain outcome would get length 0; keep the assignment well-formed
    return CodeLengthAssignment(tuple(float(max(v, 0.0)) or math.ulp(0.0) for v in lengths))


def entropy(p, base=2) -> float:
    arr = _pv(p)
    return -math.fsum(special.xlogy(arr, arr)) / _log(base)


def cross_entropy(p_true, q_code, base=2) -> float:
    """-sum p log q; infinite when q puts zero mass where p does not."""
    p, q = _pv(p_true), _pv(q_code)
    if p.shape != q.shape:
        raise ValueError("pmfs have different lengths")
    if np.any((q == 0) & (p > 0)):
        return math.inf
    return -math.fsum(special.xlogy(p, q)) / _log(base)


def kl_divergence(p, q, base=2) -> float:
    pa, qa = _pv(p), _pv(q)
    if np.any((qa == 0) & (pa > 0)):
        return math.inf
    return max(0.0, math.fsum(special.rel_entr(pa, qa)) / _log(base))


def log_loss(model: ParametricModel, data, theta) -> float:
    """-log f(x^n | theta) in nats."""
    counts = as_counts(model, data)
    model.check(theta)
    return -loglik_counts(model, counts, theta)


def encode_example(sequence) -> str:
    """Concatenate the worked-example codewords for a sequence of L/M/R outcomes."""
    try:
        return "".join(EXAMPLE_CODE[s] for s in sequence)
    except KeyError as exc:
        raise ValueError(f"outcome {exc.args[0]!r} has no codeword") from None


def decode_example(bits: str) -> list[str]:
    inverse = {v: k for k, v in EXAMPLE_CODE.items()}
    out, buf = [], ""
    for b in bits:
        buf += b
        if buf in inverse:
            out.append(inverse[buf])
            buf = ""
    if buf:
        raise ValueError(f"trailing bits {buf!r} do not form a codeword")
    return out
