"""Periodic shadow-price cycle and the interior-solution gate."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .cycle import PhaseCycle
from .model import GameParams, Structure, shadow_weights


class NotSustainable(RuntimeError):
    """Some player's shadow price leaves the interior band.

    Attributes
    ----------
    player : int
        0-based index of the worst player.
    margin : float
        Its (negative) distance to the band.
    structure : Structure or None
    """

    def __init__(self, player: int, margin: float, structure: Structure | None = None):
        self.player = player
        self.margin = margin
        self.structure = structure
        where = f" under {structure.value}" if structure is not None else ""
        super().__init__(
            f"player {player + 1} is not environmentally sustainable{where} (margin {margin:.6g})"
        )


@dataclass(frozen=True)
class AdjointCycle:
    """Unit shadow cycle ``L`` with its phase coefficients.

    On the first subperiod ``L = m1 e^{s1 u} - 1/s1``, on the second
    ``L = m2 e^{s2 u} - 1/s2`` (``u = t - kT``).  A coalition whose members
    pay aggregate tax ``mu`` has adjoint ``mu * L``.
    """

    L: PhaseCycle
    m1: float
    m2: float
    s1: float
    s2: float
    q: float

    @property
    def lambda_hlc(self) -> float:
        """Initial value ``q (m1 - 1/s1)`` of the grand-coalition adjoint."""
        return self.q * (self.m1 - 1.0 / self.s1)

    def endpoint_gap(self) -> float:
        """``L(T) - L(0)`` computed from the two phase formulas separately."""
        T = self.L.T
        return (self.m2 * np.exp(self.s2 * T) - 1.0 / self.s2) - (self.m1 - 1.0 / self.s1)

    def continuity_gap(self) -> float:
        """Jump of ``L`` at ``tau T`` between the two phase formulas."""
        u = self.L.split
        return (self.m2 * np.exp(self.s2 * u) - 1.0 / self.s2) - (self.m1 * np.exp(self.s1 * u) - 1.0 / self.s1)


@functools.lru_cache(maxsize=256)
def shadow_cycle(params: GameParams) -> AdjointCycle:
    """Build ``L`` from the closed-form phase coefficients."""
    s1, s2, T, tau = params.s1, params.s2, params.T, params.tau
    tail = np.exp(s2 * T * (tau - 1.0))
    m1 = (s2 - s1) * (1.0 - tail) / (s1 * s2 * (np.exp(s1 * tau * T) - tail))
    m2 = np.exp(-s2 * T) * (m1 - 1.0 / s1 + 1.0 / s2)
    L = PhaseCycle.from_terms(T, tau, [(m1, s1), (-1.0 / s1, 0.0)], [(m2, s2), (-1.0 / s2, 0.0)])
    return AdjointCycle(L=L, m1=float(m1), m2=float(m2), s1=s1, s2=s2, q=params.q)


def adjoint_of(params: GameParams, weight: float) -> PhaseCycle:
    """Shadow-price cycle ``weight * L`` of a coalition with aggregate tax ``weight``."""
    return shadow_cycle(params).L.scale(weight)


@dataclass(frozen=True)
class SustainabilityReport:
    structure: Structure
    ok: tuple[bool, bool, bool]
    margins: tuple[float, float, float]

    @property
    def sustainable(self) -> bool:
        return all(self.ok)

    @property
    def worst_player(self) -> int:
        return int(np.argmin(self.margins))

    @property
    def worst_margin(self) -> float:
        return float(min(self.margins))


def check_sustainable(params: GameParams, structure: Structure) -> SustainabilityReport:
    """Check that ``mu_i L(t)`` stays in ``[-a_i b_i / xi_i, 0]`` over a period.

    ``L`` is monotone on each subperiod, so its range is spanned by ``L(0)``
    and ``L(tau T)``.  A player's margin is the smaller of the distances to
    the two band edges; it is non-negative exactly when the player's
    emission path stays interior.
    """
    adj = shadow_cycle(params)
    ends = (adj.m1 - 1.0 / adj.s1, adj.m1 * np.exp(adj.s1 * params.split) - 1.0 / adj.s1)
    lo, hi = min(ends), max(ends)
    mus = shadow_weights(structure, params)
    margins = []
    for mu, player in zip(mus, params.players):
        lam_lo, lam_hi = mu * lo, mu * hi
        margins.append(float(min(lam_lo - player.bound, -lam_hi)))
    return SustainabilityReport(
        structure=structure,
        ok=tuple(m >= 0.0 for m in margins),
        margins=tuple(margins),
    )


def require_sustainable(params: GameParams, *structures: Structure) -> None:
    """Raise :class:`NotSustainable` for the first failing structure."""
    for st in structures:
        rep = check_sustainable(params, st)
        if not rep.sustainable:
            raise NotSustainable(rep.worst_player, rep.worst_margin, st)
