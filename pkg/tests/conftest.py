"""Shared parameter sets for the optobell tests."""

import pytest

import optobell as ob


@pytest.fixture
def probe_params():
    # Linewidths and mechanical damping of the probe-amplitude maps.
    return ob.symmetric_params(kappa=0.1, r_e=0.9, gamma=1e-5, G_minus=0.2, r=0.1)


@pytest.fixture
def noise_params():
    # Narrow cavities of the bath-occupation curves.
    return ob.symmetric_params(kappa=0.01, r_e=0.9, gamma=1e-5, G_minus=0.2, r=0.1)


@pytest.fixture
def weak_params():
    # Couplings far below every linewidth, where the rotating-wave solution is exact.
    return ob.symmetric_params(kappa=0.01, r_e=0.9, gamma=1e-3, G_minus=3e-4, r=0.1)


@pytest.fixture
def large_cooperativity():
    def build(r, r_e=1.0, gamma=1e-7):
        return ob.symmetric_params(kappa=0.01, r_e=r_e, gamma=gamma, G_minus=0.2, r=r)

    return build
