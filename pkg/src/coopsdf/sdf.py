"""Closed-form SDF position solver for one rectilinear pass.

A receiver moving along +x at speed ``v`` observes the normalized Doppler
curve ``F(t)``. With ``A = sqrt(1 - F^2) / F`` any two samples fix the
along-track coordinate and the cross-track range of the emitter::

    x = v (t1 A1 - t2 A2) / (A1 - A2)
    R = v (t1 - t2) A1 A2 / (A1 - A2),    |y| = sqrt(R^2 - z^2)

Times are measured from the instant the receiver passes the frame origin.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .scenario import LocalFrame

DEGENERATE_A_TOL = 1e-6
INFEASIBLE_REL_TOL = 0.01


class DegeneratePairError(ArithmeticError):
    pass


class InfeasibleGeometryError(ArithmeticError):
    pass


class EstimationFailedError(RuntimeError):
    pass


@dataclass(frozen=True)
class LocalEstimate:
    uav_id: int
    t: float
    position_world: np.ndarray
    position_local: np.ndarray
    residual: float
    n_pairs_used: int
    mirror_world: np.ndarray | None = None
    ambiguous: bool = False

    def mirrored(self) -> "LocalEstimate":
        """The same estimate with the other sign of the cross-track offset."""
        if self.mirror_world is None:
            return self
        flipped = self.position_local * np.array([1.0, -1.0, 1.0])
        return replace(
            self,
            position_world=self.mirror_world,
            position_local=flipped,
            mirror_world=self.position_world,
        )


def a_of_f(F: float) -> float:
    """``sqrt(1 - F^2) / F``: cross-track over along-track range."""
    F = float(F)
    if F == 0.0:
        raise ZeroDivisionError("A(F) is singular at F = 0")
    if not abs(F) < 1.0:
        raise ValueError(f"|F| must be < 1, got {F}")
    return math.sqrt(1.0 - F * F) / F


def pairwise_estimate(s1, s2, v: float, z_tilde: float, t0: float = 0.0):
    """Along-track position and unsigned cross-track offset from two samples.

    Parameters
    ----------
    s1, s2 : DopplerSample
        ``t`` is absolute time; ``t0`` is when the receiver passed the origin.
    v : float
        Receiver speed, m/s.
    z_tilde : float
        Known vertical offset of the emitter in the pass frame, m.

    Returns
    -------
    (x, abs_y) : tuple of float

    Raises
    ------
    DegeneratePairError
        Equal times or ``A1 == A2`` within tolerance.
    InfeasibleGeometryError
        The implied range is shorter than ``|z_tilde|``.
    """
    t1, t2 = s1.t - t0, s2.t - t0
    # fixed operand order keeps the result bit-identical under swapping
    if (t2, s2.normalized_F) < (t1, s1.normalized_F):
        t1, t2 = t2, t1
        s1, s2 = s2, s1
    if t1 == t2:
        raise DegeneratePairError("samples share a timestamp")
    a1 = a_of_f(s1.normalized_F)
    a2 = a_of_f(s2.normalized_F)
    da = a1 - a2
    if abs(da) < DEGENERATE_A_TOL:
        raise DegeneratePairError("A(t1) equals A(t2)")
    x = v * (t1 * a1 - t2 * a2) / da
    r = v * (t1 - t2) * a1 * a2 / da
    gap = r * r - z_tilde * z_tilde
    if gap < 0.0:
        if gap < -((INFEASIBLE_REL_TOL * r) ** 2):
            raise InfeasibleGeometryError(f"range {abs(r):.3f} m shorter than |z| {abs(z_tilde):.3f} m")
        gap = 0.0
    return x, math.sqrt(gap)


def predicted_F(position_world, frame: LocalFrame, t):
    """Normalized Doppler a receiver on ``frame`` would see from ``position_world``."""
    p = frame.to_local(position_world)
    along = p[0] - frame.speed_v * frame.tau(t)
    return along / np.sqrt(along**2 + p[1] ** 2 + p[2] ** 2)


def doppler_residual(position_world, observations) -> float:
    """RMS misfit in Hz between measured and predicted Doppler.

    ``observations`` is an iterable of ``(DopplerSample, LocalFrame)``.
    """
    err = [
        s.f_dmax * (s.normalized_F - predicted_F(position_world, frame, s.t))
        for s, frame in observations
    ]
    if not err:
        return 0.0
    return float(np.sqrt(np.mean(np.square(err))))


def estimate_from_window(
    samples,
    frame: LocalFrame,
    z_tilde: float,
    uav_id: int = 0,
    evidence=(),
    prior=None,
) -> LocalEstimate:
    """Emitter estimate from the Doppler history of one pass.

    Every usable pair is solved in closed form and the component-wise median
    of ``(x, |y|)`` is kept. The sign of ``y`` is picked by the lower Doppler
    residual. On one straight pass both mirror images give the same Doppler
    curve, so the residual also covers ``evidence``, samples taken on earlier
    headings as ``(DopplerSample, LocalFrame)`` pairs. If the residuals still
    tie, the candidate nearer ``prior`` (a world position) wins; without a
    prior ``+y`` is returned with ``ambiguous=True`` and the other candidate
    in ``mirror_world``.

    Raises
    ------
    EstimationFailedError
        No pair could be solved.
    """
    usable = [s for s in samples if s.usable]
    xs, ys = [], []
    for s1, s2 in itertools.combinations(usable, 2):
        try:
            x, y = pairwise_estimate(s1, s2, frame.speed_v, z_tilde, frame.t0)
        except (DegeneratePairError, InfeasibleGeometryError):
            continue
        xs.append(x)
        ys.append(y)
    if not xs:
        raise EstimationFailedError(f"no solvable pair among {len(usable)} usable samples")

    x_med = float(np.median(xs))
    y_med = float(np.median(ys))
    candidates = [np.array([x_med, y_med, z_tilde]), np.array([x_med, -y_med, z_tilde])]
    obs = [(s, frame) for s in samples] + list(evidence)
    worlds = [frame.to_world(c) for c in candidates]
    res = [doppler_residual(w, obs) for w in worlds]

    pick = 0
    tied = y_med > 0 and abs(res[0] - res[1]) <= 1e-9 * max(res) + 1e-12
    if not tied:
        pick = int(res[1] < res[0])
    elif prior is not None:
        d = [np.linalg.norm((w - np.asarray(prior, dtype=float))[:2]) for w in worlds]
        pick = int(d[1] < d[0])
    return LocalEstimate(
        uav_id=uav_id,
        t=float(max(s.t for s in samples)),
        position_world=worlds[pick],
        position_local=candidates[pick],
        residual=res[pick],
        n_pairs_used=len(xs),
        mirror_world=worlds[1 - pick] if y_med > 0 else None,
        ambiguous=bool(tied and prior is None),
    )
