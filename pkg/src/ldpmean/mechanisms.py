"""Binary privacy channels: randomized response and the sign mechanism.

A mechanism here is a column-stochastic matrix Q: Q[i, j] is the
probability of releasing output symbol i when the private input is
symbol j.  The epsilon-LDP constraint bounds the ratio of any two
entries within the same row by e^epsilon.

Randomization is driven by a caller-supplied ``numpy.random.Generator``;
nothing in this module touches global random state, so deterministic
replay only requires replaying the stream.  A single stream must not be
shared across concurrent callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy budget and the two derived constants used everywhere.

    p_eps = e^eps / (1 + e^eps) is the keep-probability of randomized
    response; t_eps = (e^eps - 1) / (e^eps + 1) = 2 * p_eps - 1 is the
    attenuation factor of the released bit's expectation.
    """

    epsilon: float
    p_eps: float
    t_eps: float


def privacy_params(epsilon: float) -> PrivacyParams:
    """Build ``PrivacyParams`` from a budget epsilon >= 0.

    epsilon = 0 yields a fair coin (p = 1/2, t = 0); epsilon = inf is
    accepted and yields the noiseless channel (p = 1, t = 1).
    """
    if not epsilon >= 0.0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon!r}")
    # 1 / (1 + e^-eps) avoids overflow for large eps; t = 2p - 1 is then
    # exact (Sterbenz) and matches (e^eps - 1)/(e^eps + 1).
    p = 1.0 / (1.0 + math.exp(-epsilon))
    return PrivacyParams(epsilon=epsilon, p_eps=p, t_eps=2.0 * p - 1.0)


def randomized_response(bits, params: PrivacyParams, rng: np.random.Generator):
    """Keep each +/-1 bit with probability p_eps, flip it otherwise.

    ``bits`` may be a scalar or an array of values in {-1, +1}; the
    output has the same shape.  Consumes exactly one uniform draw per
    bit.
    """
    arr = np.asarray(bits)
    u = rng.random(arr.shape)
    if arr.ndim == 0:
        bit = int(arr)
        return bit if u < params.p_eps else -bit
    # keep_sign = 2 * (u < p) - 1 in int8; cheaper than np.where
    keep_sign = (u < params.p_eps).astype(np.int8)
    keep_sign += keep_sign
    keep_sign -= 1
    return arr * keep_sign


def sign_mechanism(x, center: float, params: PrivacyParams,
                   rng: np.random.Generator):
    """Release randomized-response-privatized signs of ``x - center``.

    The sign convention is sgn(0) := 1, so a sample exactly at the
    center reports +1 before flipping.  Scalar in, scalar out; array in,
    array out (dtype int8).
    """
    arr = np.asarray(x)
    if arr.ndim == 0:
        return randomized_response(1 if float(arr) >= center else -1, params, rng)
    signs = (arr >= center).astype(np.int8)
    signs += signs
    signs -= 1
    return randomized_response(signs, params, rng)


def rr_matrix(params: PrivacyParams) -> np.ndarray:
    """2x2 randomized-response channel: diagonal p_eps, off-diagonal 1 - p_eps."""
    p = params.p_eps
    return np.array([[p, 1.0 - p], [1.0 - p, p]])


def verify_ldp(Q, epsilon: float, tol: float = 1e-12) -> bool:
    """Check the epsilon-LDP ratio bound row by row.

    Returns True iff every row satisfies max entry <= e^epsilon * min
    entry + tol.  Rows containing a zero next to a positive entry fail
    for any finite epsilon.  The absolute tolerance absorbs column
    normalization round-off.
    """
    mat = np.asarray(Q, dtype=float)
    if mat.ndim != 2 or mat.size == 0:
        raise ValueError(f"mechanism matrix must be 2-d and non-empty, got shape {mat.shape}")
    if np.any(mat < 0.0):
        return False
    bound = math.exp(epsilon)
    row_max = mat.max(axis=1)
    row_min = mat.min(axis=1)
    return bool(np.all(row_max <= bound * row_min + tol))
