import numpy as np
import pytest

from hybridgame.adjoint import check_sustainable
from hybridgame.model import GameParams, PlayerParams, Structure, reference_params


def random_params(rng: np.random.Generator, equal_rates: bool = False) -> GameParams:
    """Draw parameters sustainable under all five structures.

    ``rho T`` is kept above 0.25 so a 120-period horizon truncates below
    ``1e-12``.
    """
    while True:
        d1 = rng.uniform(0.1, 1.5)
        d2 = d1 if equal_rates else rng.uniform(0.1, 1.5)
        T = rng.uniform(0.5, 3.0)
        rho = rng.uniform(0.05, 0.6)
        if rho * T < 0.25:
            continue
        players = tuple(
            PlayerParams(
                a=rng.uniform(1.0, 10.0),
                b=rng.uniform(5.0, 20.0),
                xi=rng.uniform(0.1, 1.0),
                q=rng.uniform(0.5, 10.0) if n < 2 else 0.0,
            )
            for n in range(3)
        )
        p = GameParams(delta1=d1, delta2=d2, T=T, tau=rng.uniform(0.1, 0.9), rho=rho,
                       players=players, z0=rng.uniform(0.0, 50.0))
        if all(check_sustainable(p, s).sustainable for s in Structure):
            return p


def random_param_sets(n: int, seed: int, **kw) -> list[GameParams]:
    rng = np.random.default_rng(seed)
    return [random_params(rng, **kw) for _ in range(n)]


@pytest.fixture(scope="session")
def params() -> GameParams:
    return reference_params()


@pytest.fixture(scope="session")
def random_sets() -> list[GameParams]:
    return random_param_sets(20, seed=20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        title, ok, detail = results[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {title} -- {detail}")
