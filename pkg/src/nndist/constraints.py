"""Compact per-layer norm constraints: feasibility, norms and projections.

Two constraint kinds are supported.  ``frobenius`` bounds the Frobenius
norm of every hidden matrix and the l2 norm of the output vector;
``one_inf`` bounds the maximum row l1 norm of every hidden matrix and the
l1 norm of the output vector.  Projections are exact Euclidean projections
onto the corresponding product of balls: radial scaling for a norm ball,
sort-based soft thresholding for the row-wise l1 balls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .networks import NetworkParams, NetworkSpec

CONSTRAINT_KINDS = ("frobenius", "one_inf")

FEASIBILITY_TOL = 1e-9  # absorbs float drift after long ascent runs

# norms this close (relatively) to the radius count as on the ball, which
# makes the float projection exactly idempotent
_BOUNDARY_SLACK = 1e-14


@dataclass(frozen=True)
class ConstraintSet:
    """Norm kind plus one radius per layer (hidden matrices, then output)."""

    kind: str
    radii: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if self.kind not in CONSTRAINT_KINDS:
            raise ValidationError(f"unknown constraint kind {self.kind!r}")
        if len(self.radii) < 2:
            raise ValidationError("need at least two radii (one hidden layer plus output)")
        if any(not r > 0 for r in self.radii):
            raise ValidationError(f"radii must be positive, got {self.radii}")

    @property
    def depth(self) -> int:
        return len(self.radii)

    def validate_against(self, spec: NetworkSpec) -> None:
        if self.depth != spec.depth:
            raise ValidationError(f"constraint depth {self.depth} != network depth {spec.depth}")


def layer_norms(params: NetworkParams):
    """Per-matrix (frobenius, max row l1) pairs plus (l2, l1) of the output."""
    pairs = [
        (float(np.linalg.norm(w)), float(np.abs(w).sum(axis=1).max())) for w in params.hidden
    ]
    out = params.output
    return pairs, (float(np.linalg.norm(out)), float(np.abs(out).sum()))


def is_feasible(params: NetworkParams, cs: ConstraintSet, tol: float = FEASIBILITY_TOL) -> bool:
    pairs, (out_l2, out_l1) = layer_norms(params)
    if len(pairs) + 1 != cs.depth:
        raise ValidationError(f"params have {len(pairs) + 1} layers, constraints {cs.depth}")
    idx = 0 if cs.kind == "frobenius" else 1
    for (norms, radius) in zip(pairs, cs.radii):
        if norms[idx] > radius + tol:
            return False
    out_norm = out_l2 if cs.kind == "frobenius" else out_l1
    return out_norm <= cs.radii[-1] + tol


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection of a vector onto the l1 ball of the given radius.

    Sort/threshold algorithm of Duchi et al.; ties are resolved by sort
    order but the projection itself is unique.
    """
    if radius <= 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    v = np.asarray(v, dtype=np.float64)
    mag = np.abs(v)
    if mag.sum() <= radius * (1.0 + _BOUNDARY_SLACK):
        return v.copy()
    u = np.sort(mag)[::-1]
    cumulative = np.cumsum(u)
    ranks = np.arange(1, len(u) + 1)
    candidates = u - (cumulative - radius) / ranks
    rho = int(np.nonzero(candidates > 0)[0][-1])
    theta = (cumulative[rho] - radius) / (rho + 1)
    return np.sign(v) * np.maximum(mag - theta, 0.0)


def _project_radial(w: np.ndarray, radius: float) -> np.ndarray:
    nrm = float(np.linalg.norm(w))
    if nrm <= radius * (1.0 + _BOUNDARY_SLACK):
        return w.copy()
    return w * (radius / nrm)


def project(params: NetworkParams, cs: ConstraintSet) -> NetworkParams:
    """Exact Euclidean projection onto the constraint set; idempotent."""
    if len(params.hidden) + 1 != cs.depth:
        raise ValidationError(f"params have {len(params.hidden) + 1} layers, constraints {cs.depth}")
    if cs.kind == "frobenius":
        hidden = tuple(_project_radial(w, r) for w, r in zip(params.hidden, cs.radii))
        out = _project_radial(params.output, cs.radii[-1])
    else:
        hidden = tuple(
            np.vstack([project_l1_ball(row, r) for row in w])
            for w, r in zip(params.hidden, cs.radii)
        )
        out = project_l1_ball(params.output, cs.radii[-1])
    return NetworkParams(hidden, out)


def constraints_to_dict(cs: ConstraintSet) -> dict:
    return {"kind": cs.kind, "radii": list(cs.radii)}


def constraints_from_dict(d: dict) -> ConstraintSet:
    return ConstraintSet(kind=d["kind"], radii=tuple(d["radii"]))
