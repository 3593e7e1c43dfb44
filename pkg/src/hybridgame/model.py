"""Game parameters, coalition structures and shadow-cost weights."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping


class ParameterError(ValueError):
    """Raised when a parameter set violates a model invariant.

    The message names the first violated invariant.
    """


@dataclass(frozen=True)
class PlayerParams:
    """Economic constants of one player.

    Parameters
    ----------
    a : float
        Profit conversion coefficient.
    b : float
        Maximum emission rate.
    xi : float
        Marginal influence of emissions on the pollution stock.
    q : float
        Tax (vulnerability) per unit of pollution stock; zero for the myopic
        player.
    """

    a: float
    b: float
    xi: float
    q: float = 0.0

    @property
    def k(self) -> float:
        return self.xi ** 2 / (2.0 * self.a)

    @property
    def bound(self) -> float:
        """Lower edge ``-a b / xi`` of the interior band for the shadow price."""
        return -self.a * self.b / self.xi


@dataclass(frozen=True)
class GameParams:
    """All constants of the three-player hybrid game.

    Players are ordered (farsighted 1, farsighted 2, myopic 3).  The
    self-purification rate is ``delta1`` on ``[kT, (k+tau)T)`` and ``delta2``
    on ``[(k+tau)T, (k+1)T)``.
    """

    delta1: float
    delta2: float
    T: float
    tau: float
    rho: float
    players: tuple[PlayerParams, PlayerParams, PlayerParams]
    z0: float = 0.0

    @property
    def s1(self) -> float:
        return self.delta1 + self.rho

    @property
    def s2(self) -> float:
        return self.delta2 + self.rho

    @property
    def q(self) -> float:
        """Aggregate tax ``q1 + q2`` of the farsighted players."""
        return self.players[0].q + self.players[1].q

    @property
    def split(self) -> float:
        """Absolute length ``tau*T`` of the first subperiod."""
        return self.tau * self.T

    @property
    def decay_per_period(self) -> float:
        """``D = (delta1 tau + delta2 (1 - tau)) T``."""
        return (self.delta1 * self.tau + self.delta2 * (1.0 - self.tau)) * self.T

    @property
    def delta_min(self) -> float:
        return min(self.delta1, self.delta2)

    def k(self, i: int) -> float:
        return self.players[i].k

    # -- flat key=value view -------------------------------------------------

    def to_mapping(self) -> dict[str, float]:
        out = {
            "delta1": self.delta1,
            "delta2": self.delta2,
            "T": self.T,
            "tau": self.tau,
            "rho": self.rho,
        }
        for n, p in enumerate(self.players, start=1):
            out[f"a{n}"] = p.a
            out[f"b{n}"] = p.b
            out[f"xi{n}"] = p.xi
            if n < 3 or p.q != 0.0:
                out[f"q{n}"] = p.q
        out["z0"] = self.z0
        return out

    @classmethod
    def from_mapping(cls, values: Mapping[str, float]) -> "GameParams":
        unknown = set(values) - set(PARAM_KEYS) - {"q3"}
        if unknown:
            raise ParameterError(f"unknown parameter key(s): {', '.join(sorted(unknown))}")
        missing = [k for k in PARAM_KEYS if k not in values and k != "z0"]
        if missing:
            raise ParameterError(f"missing parameter key(s): {', '.join(missing)}")
        players = tuple(
            PlayerParams(
                a=float(values[f"a{n}"]),
                b=float(values[f"b{n}"]),
                xi=float(values[f"xi{n}"]),
                q=float(values.get(f"q{n}", 0.0)),
            )
            for n in (1, 2, 3)
        )
        return cls(
            delta1=float(values["delta1"]),
            delta2=float(values["delta2"]),
            T=float(values["T"]),
            tau=float(values["tau"]),
            rho=float(values["rho"]),
            players=players,
            z0=float(values.get("z0", 0.0)),
        )

    def updated(self, **changes: float) -> "GameParams":
        """Copy with flat keys (``q1``, ``a3``, ``delta2``, ...) replaced."""
        flat = self.to_mapping()
        flat.update(changes)
        return GameParams.from_mapping(flat)


PARAM_KEYS = (
    "delta1", "delta2", "T", "tau", "rho",
    "a1", "a2", "a3", "b1", "b2", "b3", "xi1", "xi2", "xi3", "q1", "q2", "z0",
)


def validate(params: GameParams) -> GameParams:
    """Return ``params`` unchanged if every invariant holds.

    Raises
    ------
    ParameterError
        Naming the first violated invariant.
    """
    checks = [
        (params.delta1 > 0, "delta1 must be > 0"),
        (params.delta2 > 0, "delta2 must be > 0"),
        (params.T > 0, "T must be > 0"),
        (0.0 < params.tau < 1.0, "tau out of (0,1)"),
        (params.rho > 0, "rho must be > 0"),
        (params.z0 >= 0, "z0 must be >= 0"),
        (len(params.players) == 3, "exactly three players required"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ParameterError(msg)
    for n, p in enumerate(params.players, start=1):
        if not p.a > 0:
            raise ParameterError(f"a{n} must be > 0")
        if not p.b > 0:
            raise ParameterError(f"b{n} must be > 0")
        if not p.xi > 0:
            raise ParameterError(f"xi{n} must be > 0")
    for n in (1, 2):
        if not params.players[n - 1].q > 0:
            raise ParameterError(f"farsighted player {n} must have q > 0")
    if params.players[2].q != 0.0:
        raise ParameterError("myopic player must have q=0")
    return params


def reference_params() -> GameParams:
    """Parameter set of the numerical illustration (players 1, 2 farsighted)."""
    return GameParams(
        delta1=0.45,
        delta2=0.9,
        T=1.0,
        tau=0.5,
        rho=0.3,
        players=(
            PlayerParams(a=5.0, b=10.0, xi=0.3, q=4.0),
            PlayerParams(a=4.0, b=10.0, xi=0.4, q=5.0),
            PlayerParams(a=3.0, b=10.0, xi=0.6, q=0.0),
        ),
        z0=0.0,
    )


class Structure(enum.Enum):
    """The five coalition structures of the three-player game."""

    PI1 = "pi1"    # {1,2,3}
    PI2 = "pi2"    # {1},{2},{3}
    PI3 = "pi3"    # {1,2},{3}
    PI41 = "pi41"  # {1,3},{2}
    PI42 = "pi42"  # {2,3},{1}

    @property
    def blocks(self) -> tuple[frozenset[int], ...]:
        return _BLOCKS[self]

    def coalition_of(self, i: int) -> frozenset[int]:
        """Block containing player ``i`` (0-based)."""
        for blk in self.blocks:
            if i in blk:
                return blk
        raise KeyError(i)

    @classmethod
    def parse(cls, text: str) -> "Structure":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ParameterError(f"unknown coalition structure {text!r}") from None


_BLOCKS = {
    Structure.PI1: (frozenset({0, 1, 2}),),
    Structure.PI2: (frozenset({0}), frozenset({1}), frozenset({2})),
    Structure.PI3: (frozenset({0, 1}), frozenset({2})),
    Structure.PI41: (frozenset({0, 2}), frozenset({1})),
    Structure.PI42: (frozenset({1, 2}), frozenset({0})),
}

# structure a player moves to when it alone leaves the grand coalition
DEVIATION = {0: Structure.PI42, 1: Structure.PI41, 2: Structure.PI3}


def shadow_weights(structure: Structure, params: GameParams) -> tuple[float, float, float]:
    """Aggregate tax coefficient of the coalition containing each player.

    Each player's adjoint is this weight times the unit shadow cycle, so the
    five scenarios differ only through these numbers.
    """
    qs = [p.q for p in params.players]
    return tuple(sum(qs[j] for j in structure.coalition_of(i)) for i in range(3))


def load_config(path: str | Path) -> dict[str, float]:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key=value")
        key, _, val = line.partition("=")
        key = key.strip()
        try:
            values[key] = float(val.strip())
        except ValueError:
            raise ParameterError(f"{path}:{lineno}: {key} is not a number") from None
    return values
