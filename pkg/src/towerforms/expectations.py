"""Conditional expectations on the tower.

cond_expect is the trace-normalized partial trace onto the leading legs
(the level-n subalgebra), project_P / project_Q are the induced orthogonal
projections of the ambient level onto / off that subalgebra, and
diag_expect is the expectation onto the diagonal subalgebra.
"""

from __future__ import annotations

import numpy as np

from .tower import AlgebraElement, embed

__all__ = [
    "partial_trace_matrix",
    "diagonal_part",
    "cond_expect",
    "project_P",
    "project_Q",
    "diag_expect",
]


def partial_trace_matrix(mat: np.ndarray, level: int, target: int) -> np.ndarray:
    """Normalized partial trace of a level-`level` matrix over its trailing
    legs, leaving a level-`target` matrix.

    Each traced leg contributes a factor tau_1, so the map is unital.
    """
    k = level - target
    if k == 0:
        return mat
    d_keep, d_tr = 2 ** target, 2 ** k
    r = mat.reshape(d_keep, d_tr, d_keep, d_tr)
    return np.einsum("itjt->ij", r) / d_tr


def diagonal_part(mat: np.ndarray) -> np.ndarray:
    return np.diag(np.diag(mat))


def cond_expect(a: AlgebraElement, n: int) -> AlgebraElement:
    """Expectation of a level-N element onto level n <= N (partial trace
    over legs n+1..N with tau_1 normalization per leg)."""
    if n > a.level:
        raise ValueError(
            f"cannot condition level-{a.level} element down to higher level {n}"
        )
    if n < 0:
        raise ValueError(f"target level must be nonnegative, got {n}")
    return AlgebraElement(n, partial_trace_matrix(a.entries, a.level, n))


def project_P(a: AlgebraElement, n: int) -> AlgebraElement:
    """Orthogonal projection of the ambient level onto the embedded level-n
    subalgebra: condition down, then embed back up."""
    return embed(cond_expect(a, n), a.level)


def project_Q(a: AlgebraElement, n: int) -> AlgebraElement:
    """Complementary projection: a minus its level-n part."""
    return a - project_P(a, n)


def diag_expect(a: AlgebraElement) -> AlgebraElement:
    """Expectation onto the diagonal subalgebra (off-diagonal entries zeroed).

    Equals sum_i p_i a p_i over the rank-one diagonal projections p_i;
    idempotent, trace preserving and positive.
    """
    return AlgebraElement(a.level, diagonal_part(a.entries))
