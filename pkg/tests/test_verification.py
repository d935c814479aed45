
import numpy as np
import pytest

from coranks.densities import make_reference
from coranks.grid import factorize, make_grid
from coranks.models import InformationStructure, ModelSpec, information_structure
from coranks.scores import tangent_from_name
from coranks.verification import (CheckReport, Gate, check_basu_independence,
                                  check_bridge_law, check_distribution_freeness,
                                  check_efficiency, check_glivenko_cantelli,
                                  check_joint_weak_convergence, check_limit_experiment,
                                  clear_pairing_cache, derive_seed, replicate_pairing,
                                  run_replicates)

GAUSS = make_reference("gaussian", 2)
T3 = make_reference("t", 2, nu=3.0)
MIX = make_reference("mixture", 2)
LOC = ModelSpec("location", GAUSS)
TANH1 = tangent_from_name("tanh:1", GAUSS)


def _strip(report):
    return report.to_dict(include_runtime=False)


def test_gate_and_report_basics():
    assert Gate("a", 0.5, "<", 1.0).ok
    assert not Gate("a", float("nan"), "<", 1.0).ok
    assert Gate("a", 1.0, ">=", 1.0).ok and not Gate("a", 1.0, ">", 1.0).ok
    empty = CheckReport("x", 1, 0, 0.001)
    assert not empty.passed
    empty.gate("g", 2.0, "<=", 3.0)
    assert empty.passed and empty.to_dict()["pass"] is True


def test_replicate_pairing_cache_is_transparent():
    grid = make_grid(factorize(60, 2, 6, 10))
    clear_pairing_cache()
    z1, p1 = replicate_pairing(GAUSS, grid, 5, 0, 3)
    z2, p2 = replicate_pairing(GAUSS, grid, 5, 0, 3)
    np.testing.assert_array_equal(z1, z2)
    np.testing.assert_array_equal(p1, p2)
    clear_pairing_cache()
    _, p3 = replicate_pairing(GAUSS, grid, 5, 0, 3)
    np.testing.assert_array_equal(p1, p3)
    assert derive_seed(1, 2) == derive_seed(1, 2) != derive_seed(1, 3)


def test_distribution_freeness_small_run_and_determinism():
    a = check_distribution_freeness([GAUSS, T3, MIX], n=60, nr=6, ns=10, replicates=2000, seed=3)
    assert a.passed, a.lines()
    clear_pairing_cache()
    b = check_distribution_freeness([GAUSS, T3, MIX], n=60, nr=6, ns=10, replicates=2000, seed=3)
    assert _strip(a) == _strip(b)
    neg = [g for g in a.gates if g.name.startswith("negative_control")]
    assert len(neg) == 1 and neg[0].ok


def test_distribution_freeness_same_density_different_streams():
    r = check_distribution_freeness([GAUSS, GAUSS], n=60, nr=6, ns=10, replicates=3000, seed=4)
    ks = [v for k, v in r.p_values.items() if k.startswith("T_a")]
    assert all(p > 0.001 for p in ks)
    # same law: the negative control cannot reject, so the harness flags it
    assert not r.passed


def test_distribution_freeness_guards():
    with pytest.raises(ValueError, match="at least 2"):
        check_distribution_freeness([GAUSS], replicates=10)
    with pytest.raises(ValueError, match="dimension"):
        check_distribution_freeness([GAUSS, make_reference("gaussian", 3)], replicates=10)


def test_basu_small_run_deterministic_and_parallel_schedule_free():
    a = check_basu_independence(GAUSS, n=60, nr=6, ns=10, replicates=3000, seed=8)
    assert a.passed, a.lines()
    assert a.statistics["negative_control corr(sum|Z|^2, itself)"] == pytest.approx(1.0)
    clear_pairing_cache()
    b = check_basu_independence(GAUSS, n=60, nr=6, ns=10, replicates=3000, seed=8, n_jobs=2)
    assert _strip(a) == _strip(b)


def test_run_replicates_order():
    assert run_replicates(lambda i: i * i, 5) == [0, 1, 4, 9, 16]


def test_glivenko_cantelli_guards():
    r = check_glivenko_cantelli(GAUSS, n_list=(100, 100), replicates=3, seed=1)
    assert not r.passed
    r = check_glivenko_cantelli(GAUSS, n_list=(3, 100, 900), replicates=10, seed=1)
    assert any("n=3 skipped" in note for note in r.notes)
    assert "median_max_error[n=3]" not in r.statistics
    assert r.passed, r.lines()
    with pytest.raises(ValueError, match="not spherical"):
        check_glivenko_cantelli(MIX, n_list=(100, 400), replicates=2)


def test_bridge_law_small_run():
    r = check_bridge_law(GAUSS, TANH1, n=60, nr=6, ns=10, replicates=4000, seed=2)
    assert r.passed, r.lines()


def test_joint_convergence_gram_mismatch_rejected():
    other = tangent_from_name("sin:2", GAUSS)
    info = information_structure(LOC, [other], draws=10**4)
    with pytest.raises(ValueError, match="does not match"):
        check_joint_weak_convergence(LOC, [TANH1], [(np.zeros(2), 0)], n=60, replicates=10,
                                     info=info)


def test_joint_convergence_null_coordinate_and_small_run():
    info = information_structure(LOC, [TANH1], draws=10**5)
    local = [(np.zeros(2), None), (np.array([1.0, 0.5]), 0)]
    r = check_joint_weak_convergence(LOC, [TANH1], local, n=60, nr=6, ns=10, replicates=2000,
                                     seed=6, info=info)
    assert any("identically 0.0" in note for note in r.notes)
    assert r.passed, r.lines()


def test_joint_convergence_small_n_diagnostic_runs():
    # n = 50 is far from the limit; the report is produced whatever the verdict
    info = information_structure(LOC, [TANH1], draws=10**4)
    r = check_joint_weak_convergence(LOC, [TANH1], [(np.array([2.0, 0.0]), 0)], n=50,
                                     replicates=300, seed=1, info=info)
    assert r.gates and isinstance(r.passed, bool)


def test_efficiency_small_run_negative_control():
    r = check_efficiency(LOC, n=200, replicates=400, seed=3, var_tol=0.15)
    assert r.passed, r.lines()
    assert r.p_values["KS central sequence gaussian~t[|.|^2]"] < 0.001


def test_limit_experiment_small_run():
    info = InformationStructure(labels=("a",), I_II=np.eye(2), I_Ieta=np.array([[0.5], [0.0]]),
                                I_etaeta=np.array([[0.4]]))
    r = check_limit_experiment(info, [(np.zeros(2), None), (np.array([0.5, 0.0]), 0)],
                               n_paths=4000, seed=2)
    assert r.passed, r.lines()
    exact = [g for g in r.gates if g.name.startswith("max |")]
    assert exact and all(g.value == 0.0 for g in exact)
