"""Read a control input off an optimal input-moment vector."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .moments import MomentSequence, moment_matrix
from .poly import _basis, basis_index

RANK_TOL = 1e-3


@dataclass(frozen=True)
class ExtractionResult:
    u_star: np.ndarray
    rank_ratio: float
    certified: bool
    trace: float
    consistency: float

    def as_dict(self) -> dict:
        return {"u_star": [float(v) for v in self.u_star], "rank_ratio": float(self.rank_ratio),
                "certified": bool(self.certified), "trace": float(self.trace),
                "consistency": float(self.consistency)}


def extract_control(y_u: MomentSequence, r: int, rank_tol: float = RANK_TOL) -> ExtractionResult:
    """Point-mass readout of ``y_u``.

    The candidate input is the vector of first moments (normalized by the
    mass).  ``rank_ratio`` is sigma_2 / sigma_1 of ``M_r(y_u)``; the result is
    certified when it falls below ``rank_tol``.  ``consistency`` is the
    largest gap between an even moment ``y_{2a}`` and ``u*^{2a}`` over
    ``|a| <= r``, which exposes mixtures whose mean is not an atom.
    """
    mass = y_u.mass
    if abs(mass) < 1e-12:
        raise ValueError("input moment sequence has zero mass")
    if abs(mass - 1.0) > 1e-6:
        raise ValueError(f"input moment sequence must have unit mass, got {mass:.3e}")
    n = y_u.num_vars
    idx = basis_index(n, y_u.max_degree)
    u_star = np.array([y_u.values[idx[tuple(int(i == j) for i in range(n))]] for j in range(n)]) / mass

    M = moment_matrix(y_u, r)
    sv = np.linalg.svd(M, compute_uv=False)
    rank_ratio = float(sv[1] / sv[0]) if sv.shape[0] > 1 and sv[0] > 0 else 0.0

    consistency = 0.0
    for a in _basis(n, r):
        two_a = tuple(2 * k for k in a)
        target = float(np.prod(u_star ** np.array(two_a, dtype=float)))
        consistency = max(consistency, abs(y_u.values[idx[two_a]] / mass - target))

    return ExtractionResult(u_star, rank_ratio, rank_ratio < rank_tol, float(np.trace(M)), consistency)
