"""Exact arithmetic on T-periodic piecewise-exponential functions.

A :class:`PhaseCycle` is, on each period ``[kT, (k+1)T)``, a finite sum of
terms ``c * exp(r * (t - kT))``; one list of terms applies on the first
subperiod ``[kT, (k+tau)T)`` and another on ``[(k+tau)T, (k+1)T)``.  Constants
are terms with rate 0.  Every closed-form object of the game (shadow prices,
strategies, limit cycles of the stock) lives in this representation, and
discounted integrals of such functions are available in closed form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import exprel

from . import _kernels

RATE_TOL = 1e-14

Term = tuple[float, float]


def _canonical(terms: Iterable[Term]) -> tuple[Term, ...]:
    merged: list[list[float]] = []
    for c, r in sorted(((float(c), float(r)) for c, r in terms), key=lambda term: term[1]):
        if merged and abs(r - merged[-1][1]) <= RATE_TOL:
            merged[-1][0] += c
        else:
            merged.append([c, r])
    return tuple((c, r) for c, r in merged if c != 0.0)


def exp_integral(k: float, t1: float, t2: float) -> float:
    """``int_{t1}^{t2} exp(k t) dt``, stable for ``k`` near zero."""
    width = t2 - t1
    return float(np.exp(k * t1) * width * exprel(k * width))


@dataclass(frozen=True)
class PhaseCycle:
    """T-periodic function given per subperiod as a sum of exponentials.

    Attributes
    ----------
    T : float
        Period.
    tau : float
        Fraction of the period taken by the first subperiod.
    phases : tuple
        Two tuples of ``(coef, rate)`` terms, in canonical form (sorted by
        rate, equal rates merged, zero coefficients dropped).
    """

    T: float
    tau: float
    phases: tuple[tuple[Term, ...], tuple[Term, ...]]

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(_canonical(p) for p in self.phases))
        if len(self.phases) != 2:
            raise ValueError("a PhaseCycle has exactly two subperiods")

    # -- construction ----------------------------------------------------

    @classmethod
    def from_terms(cls, T: float, tau: float, first: Sequence[Term], second: Sequence[Term]):
        return cls(float(T), float(tau), (tuple(first), tuple(second)))

    @classmethod
    def constant(cls, T: float, tau: float, value: float) -> "PhaseCycle":
        return cls.from_terms(T, tau, [(value, 0.0)], [(value, 0.0)])

    @classmethod
    def piecewise_constant(cls, T: float, tau: float, v1: float, v2: float) -> "PhaseCycle":
        return cls.from_terms(T, tau, [(v1, 0.0)], [(v2, 0.0)])

    @property
    def split(self) -> float:
        return self.tau * self.T

    @property
    def bounds(self) -> tuple[tuple[float, float], tuple[float, float]]:
        return (0.0, self.split), (self.split, self.T)

    # -- evaluation ------------------------------------------------------

    def _arrays(self) -> tuple[np.ndarray, np.ndarray]:
        n = max(1, max(len(p) for p in self.phases))
        coef = np.zeros((2, n))
        rate = np.zeros((2, n))
        for p, terms in enumerate(self.phases):
            for m, (c, r) in enumerate(terms):
                coef[p, m] = c
                rate[p, m] = r
        return coef, rate

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Padded ``(2, n)`` coefficient and rate arrays for the kernels."""
        cached = self.__dict__.get("_arrays_cache")
        if cached is None:
            cached = self._arrays()
            object.__setattr__(self, "_arrays_cache", cached)
        return cached

    def __call__(self, t):
        """Evaluate at absolute time(s) ``t``; scalars in, scalars out."""
        coef, rate = self.arrays
        out = _kernels.eval_cycle(coef, rate, self.T, self.split, np.atleast_1d(np.asarray(t, float)))
        if np.ndim(t) == 0:
            return float(out[0])
        return out.reshape(np.shape(t))

    def eval_local(self, phase: int, u) -> np.ndarray | float:
        """Evaluate the formula of ``phase`` at local time ``u`` (no reduction)."""
        u = np.asarray(u, dtype=float)
        val = sum(c * np.exp(r * u) for c, r in self.phases[phase]) if self.phases[phase] else 0.0 * u
        return float(val) if np.ndim(val) == 0 else val

    # -- algebra ---------------------------------------------------------

    def _check_compatible(self, other: "PhaseCycle"):
        if self.T != other.T or self.tau != other.tau:
            raise ValueError(
                f"cycles have different (T, tau): ({self.T}, {self.tau}) vs ({other.T}, {other.tau})"
            )

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = PhaseCycle.constant(self.T, self.tau, float(other))
        self._check_compatible(other)
        return PhaseCycle(self.T, self.tau, tuple(a + b for a, b in zip(self.phases, other.phases)))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor: float) -> "PhaseCycle":
        return self.scale_phases(factor, factor)

    def scale_phases(self, f1: float, f2: float) -> "PhaseCycle":
        """Multiply the first subperiod by ``f1`` and the second by ``f2``."""
        return PhaseCycle(
            self.T,
            self.tau,
            tuple(tuple((c * f, r) for c, r in terms) for terms, f in zip(self.phases, (f1, f2))),
        )

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        self._check_compatible(other)
        phases = tuple(
            tuple((c1 * c2, r1 + r2) for c1, r1 in pa for c2, r2 in pb)
            for pa, pb in zip(self.phases, other.phases)
        )
        return PhaseCycle(self.T, self.tau, phases)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.phases)

    def is_constant(self) -> bool:
        """True when both subperiods hold the same single constant term."""
        p1, p2 = self.phases
        if not p1 and not p2:
            return True
        return p1 == p2 and len(p1) == 1 and p1[0][1] == 0.0

    def rates(self) -> set[float]:
        return {r for terms in self.phases for _, r in terms}

    # -- integrals -------------------------------------------------------

    def _segment_integral(self, phase: int, rho: float, u1: float, u2: float) -> float:
        """``int_{u1}^{u2} exp(-rho u) f(u) du`` using the formula of ``phase``."""
        return sum(c * exp_integral(r - rho, u1, u2) for c, r in self.phases[phase])

    def discounted_period_integral(self, rho: float) -> float:
        """``int_0^T exp(-rho t) f(t) dt`` in closed form."""
        (a1, b1), (a2, b2) = self.bounds
        return self._segment_integral(0, rho, a1, b1) + self._segment_integral(1, rho, a2, b2)

    def discounted_tail_integral(self, rho: float, eps: float = 0.0) -> float:
        """``int_eps^inf exp(-rho (t - eps)) f(t) dt`` in closed form.

        The first partial period is integrated directly and the rest is a
        geometric series of whole periods.
        """
        T = self.T
        e = float(eps) - np.floor(float(eps) / T) * T
        if e >= T:
            e -= T
        split = self.split
        if e < split:
            head = self._segment_integral(0, rho, e, split) + self._segment_integral(1, rho, split, T)
        else:
            head = self._segment_integral(1, rho, e, T)
        head *= np.exp(rho * e)
        full = self.discounted_period_integral(rho)
        return float(head + np.exp(-rho * (T - e)) * full / (-np.expm1(-rho * T)))

    def period_extrema(self) -> tuple[float, float]:
        """Min and max over one period, from a dense scan plus the breakpoints."""
        u = np.concatenate([np.linspace(0.0, self.T, 2049)[:-1], [self.split]])
        vals = self(u)
        ends = [self.eval_local(0, 0.0), self.eval_local(0, self.split),
                self.eval_local(1, self.split), self.eval_local(1, self.T)]
        allv = np.concatenate([vals, ends])
        return float(allv.min()), float(allv.max())

    # -- serialisation ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "period": self.T,
            "tau": self.tau,
            "phases": [[[c, r] for c, r in terms] for terms in self.phases],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseCycle":
        first, second = data["phases"]
        return cls.from_terms(data["period"], data["tau"], [tuple(x) for x in first], [tuple(x) for x in second])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PhaseCycle":
        return cls.from_dict(json.loads(text))


def combine(f: PhaseCycle, g: PhaseCycle | float | None = None, op: str = "add") -> PhaseCycle:
    """Functional front end to the cycle algebra (``add``, ``scale``, ``multiply``)."""
    if op == "add":
        return f + g
    if op == "scale":
        return f.scale(float(g))
    if op == "multiply":
        return f * g
    raise ValueError(f"unknown op {op!r}")


def periodic_linear_solution(forcing: PhaseCycle, kappa1: float, kappa2: float) -> PhaseCycle:
    """T-periodic solution of ``y' = forcing(t) + kappa(t) y``.

    ``kappa`` is ``kappa1`` on the first subperiod and ``kappa2`` on the
    second.  Each subperiod is solved by variation of constants (particular
    part ``c/(r - kappa) e^{ru}`` per forcing term plus ``B e^{kappa u}``);
    the two constants ``B`` follow from continuity at ``tau T`` and
    ``y(0) = y(T)``.

    Raises
    ------
    ValueError
        If a forcing rate coincides with ``kappa`` of its subperiod (the
        response would leave the exponential family), or if the periodic
        problem is singular (``kappa1 tau + kappa2 (1 - tau) == 0``).
    """
    T, split = forcing.T, forcing.split
    kappas = (kappa1, kappa2)
    particular = []
    for terms, kap in zip(forcing.phases, kappas):
        part = []
        for c, r in terms:
            if abs(r - kap) <= RATE_TOL:
                raise ValueError(f"resonant forcing rate {r} equals kappa {kap}")
            part.append((c / (r - kap), r))
        particular.append(part)
    P1 = PhaseCycle.from_terms(T, forcing.tau, particular[0], [])
    P2 = PhaseCycle.from_terms(T, forcing.tau, [], particular[1])
    # continuity at split: P1(split) + B1 e^{k1 split} = P2(split) + B2 e^{k2 split}
    # periodicity:         P1(0)     + B1              = P2(T)     + B2 e^{k2 T}
    mat = np.array([
        [np.exp(kappa1 * split), -np.exp(kappa2 * split)],
        [1.0, -np.exp(kappa2 * T)],
    ])
    rhs = np.array([
        P2.eval_local(1, split) - P1.eval_local(0, split),
        P2.eval_local(1, T) - P1.eval_local(0, 0.0),
    ])
    if abs(np.linalg.det(mat)) < 1e-300:
        raise ValueError("periodic problem is singular")
    B1, B2 = np.linalg.solve(mat, rhs)
    return PhaseCycle.from_terms(
        T, forcing.tau,
        particular[0] + [(B1, kappa1)],
        particular[1] + [(B2, kappa2)],
    )
