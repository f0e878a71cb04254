from __future__ import annotations

import numpy as np
import pytest

from frontlab import (
    SemiWaveParams,
    SimConfig,
    make_laplace,
    make_logistic,
    simulate,
    solve_c0,
)


@pytest.fixture(scope="session")
def laplace():
    return make_laplace()


@pytest.fixture(scope="session")
def logistic():
    return make_logistic()


@pytest.fixture(scope="session")
def quick_params():
    # coarse but adequate grid for unit tests; acceptance uses spec defaults
    return SemiWaveParams(depth=30.0, n_cells=1200, tol_iter=1e-10)


@pytest.fixture(scope="session")
def c0_mu1(laplace, logistic):
    """Reference spreading speed at mu = 1, shared across modules."""
    return solve_c0(1.0, 1.0, laplace, logistic)


def parabola_u0(h0, amplitude=1.0):
    def u0(x):
        return amplitude * np.maximum(0.0, 1.0 - (np.asarray(x, dtype=float) / h0) ** 2)

    return u0


@pytest.fixture(scope="session")
def spreading_traj_T200(laplace, logistic):
    """The reference spreading run at full acceptance scale, with wall time."""
    import time

    cfg = SimConfig(
        kernel=laplace,
        reaction=logistic,
        d=1.0,
        mu=1.0,
        h0=10.0,
        u0=parabola_u0(10.0),
        t_max=200.0,
        dx=0.1,
        sample_dt=0.5,
    )
    t0 = time.perf_counter()
    traj = simulate(cfg)
    return {"traj": traj, "seconds": time.perf_counter() - t0}
