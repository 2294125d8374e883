import numpy as np
import pytest

from imexdimsim.ssp import spijker_feasible, spijker_matrices, ssp_coefficient
from imexdimsim.tableau import CATALOG_NAMES, Tableau, catalog


def euler_tableau():
    return Tableau([1.0], [[0.0]], [[1.0]], [[1.0]], [[1.0]], [[1.0]], [[1.0]], 1, 1)


def test_forward_euler_has_unit_coefficient():
    cert = ssp_coefficient(euler_tableau())
    assert abs(cert.C - 1.0) <= 1e-10
    assert cert.gamma_feasible <= 1.0 <= cert.gamma_infeasible


def test_forward_euler_spijker_matrices_by_hand():
    # K = 1, so the conditions are 1 >= 0, 0 >= 0, 1 - g >= 0, g >= 0
    KU, IK, W, GBK = spijker_matrices(euler_tableau(), 0.7)
    assert KU[0, 0] == 1 and IK[0, 0] == 0
    assert np.isclose(W[0, 0], 0.3) and np.isclose(GBK[0, 0], 0.7)


def test_dimsim2a_bracket():
    t = catalog("DIMSIM2A")
    assert spijker_feasible(t, 1.38)
    assert not spijker_feasible(t, 1.45)
    assert abs(ssp_coefficient(t).C - 1.38) <= 0.01


def test_negative_gamma_rejected():
    with pytest.raises(ValueError):
        spijker_feasible(catalog("DIMSIM2A"), -0.1)


def test_infeasible_at_zero_gives_zero_certificate():
    t = Tableau([1.0], [[0.0]], [[1.0]], [[1.0]], [[1.0]], [[1.0]], [[-1.0]], 1, 1)
    cert = ssp_coefficient(t)
    assert cert.infeasible_at_zero and cert.C == 0.0


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_certificate_properties(name):
    t = catalog(name)
    cert = ssp_coefficient(t)
    assert 0 <= cert.C < np.inf
    assert cert.C_eff == cert.C / t.s
    assert cert.gamma_infeasible - cert.gamma_feasible <= 1e-10
    assert spijker_feasible(t, cert.gamma_feasible)
    assert not spijker_feasible(t, cert.gamma_infeasible)


@pytest.mark.parametrize("name", CATALOG_NAMES)
def test_feasibility_is_an_interval(name):
    t = catalog(name)
    C = ssp_coefficient(t).C
    gammas = np.concatenate([[0.0], np.geomspace(1e-3, 10.0, 80)])
    flags = [spijker_feasible(t, g) for g in gammas]
    # once infeasible, stays infeasible
    first_bad = flags.index(False) if False in flags else len(flags)
    assert all(not f for f in flags[first_bad:])
    assert all(flags[:first_bad])
    assert all((g <= C) == f for g, f in zip(gammas, flags) if abs(g - C) > 1e-8)
