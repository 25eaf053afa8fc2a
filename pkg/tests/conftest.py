"""Shared fixtures: the standard operating points and their rate matrices."""

import numpy as np
import pytest

from wsteady.effective import assemble_rate_matrix
from wsteady.model import experimental_preset, fig2_preset


@pytest.fixture(scope="session")
def fig2():
    return fig2_preset()


@pytest.fixture(scope="session")
def experimental():
    return experimental_preset()


@pytest.fixture(scope="session")
def mu_fig2(fig2):
    return assemble_rate_matrix(fig2)


@pytest.fixture(scope="session")
def uniform8():
    return np.full(8, 1.0 / 8.0)
