import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockpotts.abc import (
    DEFAULT_PRIOR_G4,
    DEFAULT_PRIOR_G8,
    ReferenceTable,
    build_table,
    default_priors,
    knn_classify,
    prior_error_rate,
    summary_2d,
)
from blockpotts.criteria import CandidateModel
from blockpotts.grid import LatticeSpec, NeighborhoodSystem, edge_count
from blockpotts.noise import EmissionParams

G4 = NeighborhoodSystem.G4
G8 = NeighborhoodSystem.G8
PHI = EmissionParams.default(2, 0.39)


def test_summary_constant_observations():
    y = np.full((5, 7), 0.01)
    assert summary_2d(y, PHI) == (1.0, 1.0)


def test_summary_checkerboard_exact():
    h, w = 6, 6
    field = np.indices((h, w)).sum(axis=0) % 2
    y = field.astype(float)  # zero-noise observations of the parity field
    s4, s8 = summary_2d(y, PHI)
    assert s4 == 0.0
    diag = 2 * (h - 1) * (w - 1)
    assert s8 == pytest.approx(diag / edge_count(LatticeSpec(h, w), G8))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(2, 6))
def test_summary_bounds(seed, h, w):
    y = np.random.default_rng(seed).normal(0.5, 1.0, size=(h, w))
    s4, s8 = summary_2d(y, PHI)
    assert 0.0 <= s4 <= 1.0
    assert 0.0 <= s8 <= 1.0


def test_reference_table_validation():
    models = (CandidateModel(G4, 2), CandidateModel(G8, 2))
    with pytest.raises(ValueError):
        ReferenceTable(models, np.array([0.1]), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        ReferenceTable(models, np.array([0.1, 0.2]), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        ReferenceTable(
            models, np.array([0.1, 0.9]), np.zeros((2, 2)), default_priors()
        )  # 0.9 outside the G8 range


def test_default_priors():
    priors = default_priors()
    assert priors[CandidateModel(G4, 2)] == DEFAULT_PRIOR_G4 == (0.0, 1.0)
    assert priors[CandidateModel(G8, 2)] == DEFAULT_PRIOR_G8 == (0.0, 0.35)


def test_build_table_rejects_empty():
    with pytest.raises(ValueError):
        build_table(
            0, default_priors(), LatticeSpec(4, 4), PHI, 5, np.random.default_rng(0)
        )


def test_build_table_deterministic_and_balanced():
    lattice = LatticeSpec(8, 8)

    def make():
        return build_table(
            400, default_priors(), lattice, PHI, 20, np.random.default_rng(123)
        )

    a, b = make(), make()
    assert a.models == b.models
    np.testing.assert_array_equal(a.psis, b.psis)
    np.testing.assert_array_equal(a.summaries, b.summaries)
    assert a.size == 400
    for model, (lo, hi) in a.priors.items():
        sel = [m == model for m in a.models]
        assert all(lo <= p <= hi for p in a.psis[sel])
    frac_g4 = np.mean([m.system is G4 for m in a.models])
    assert abs(frac_g4 - 0.5) <= 3 * np.sqrt(0.25 / 400)


def _handmade_table():
    models = (
        CandidateModel(G4, 2),
        CandidateModel(G4, 2),
        CandidateModel(G8, 2),
        CandidateModel(G8, 2),
    )
    psis = np.array([0.2, 0.4, 0.1, 0.3])
    summaries = np.array([[0.1, 0.2], [0.15, 0.25], [0.8, 0.9], [0.85, 0.95]])
    return ReferenceTable(models, psis, summaries)


def test_knn_exact_rows_and_majority():
    table = _handmade_table()
    for i in range(table.size):
        assert knn_classify(table, table.summaries[i], 1) == table.models[i]
    # three nearest of a query near the G8 cluster: two G8 rows and one G4 row
    assert knn_classify(table, [0.81, 0.91], 3) == CandidateModel(G8, 2)
    # full-table vote is a 2-2 tie, broken toward G4
    assert knn_classify(table, [0.5, 0.5], 4) == CandidateModel(G4, 2)


def test_knn_argument_validation():
    table = _handmade_table()
    with pytest.raises(ValueError):
        knn_classify(table, [0.5, 0.5], 0)
    with pytest.raises(ValueError):
        knn_classify(table, [0.5, 0.5], 5)
    empty = ReferenceTable((), np.zeros(0), np.zeros((0, 2)))
    with pytest.raises(ValueError):
        knn_classify(empty, [0.5, 0.5], 1)


def test_knn_duplicated_rows_double_k():
    table = _handmade_table()
    doubled = ReferenceTable(
        table.models + table.models,
        np.concatenate([table.psis, table.psis]),
        np.vstack([table.summaries, table.summaries]),
    )
    queries = [[0.12, 0.22], [0.83, 0.93], [0.5, 0.5], [0.0, 1.0]]
    for q in queries:
        for k in (1, 2):
            assert knn_classify(table, q, k) == knn_classify(doubled, q, 2 * k)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(0.5, 2.0),
    st.floats(0.5, 2.0),
    st.floats(-5.0, 5.0),
    st.floats(-5.0, 5.0),
    st.booleans(),
)
def test_knn_affine_rescaling_invariant(a0, a1, c0, c1, flip):
    table = _handmade_table()
    a = np.array([-a0 if flip else a0, a1])
    c = np.array([c0, c1])
    scaled = ReferenceTable(table.models, table.psis, table.summaries * a + c)
    for q in ([0.12, 0.22], [0.83, 0.93], [0.4, 0.6]):
        q = np.asarray(q)
        for k in (1, 3):
            assert knn_classify(table, q, k) == knn_classify(scaled, q * a + c, k)


def test_prior_error_rate_validation():
    table = _handmade_table()
    empty = ReferenceTable((), np.zeros(0), np.zeros((0, 2)))
    with pytest.raises(ValueError):
        prior_error_rate(table, empty, 1)


def test_prior_error_rate_uninformative_summaries():
    # summaries independent of the label: the rule cannot beat coin flipping
    rng = np.random.default_rng(42)
    size, n_test = 400, 200
    labels = [CandidateModel(G4 if rng.random() < 0.5 else G8, 2) for _ in range(size)]
    table = ReferenceTable(tuple(labels), rng.uniform(0, 0.3, size), rng.normal(size=(size, 2)))
    test_labels = [
        CandidateModel(G4 if rng.random() < 0.5 else G8, 2) for _ in range(n_test)
    ]
    tests = ReferenceTable(
        tuple(test_labels), rng.uniform(0, 0.3, n_test), rng.normal(size=(n_test, 2))
    )
    err = prior_error_rate(table, tests, 25)
    assert abs(err - 0.5) <= 3 * np.sqrt(0.25 / n_test)


def test_prior_error_rate_informative_simulations():
    lattice = LatticeSpec(12, 12)
    priors = default_priors()
    rng = np.random.default_rng(7)
    table = build_table(400, priors, lattice, PHI, 40, rng)
    tests = build_table(120, priors, lattice, PHI, 40, rng)
    err = prior_error_rate(table, tests, 20)
    assert 0.0 <= err < 0.45
    # a larger table refines the neighborhoods, so the error drops on average
    prefix = ReferenceTable(table.models[:60], table.psis[:60], table.summaries[:60])
    assert err <= prior_error_rate(prefix, tests, 20) - 0.05


def test_reference_table_csv_round_trip(tmp_path):
    table = _handmade_table()
    path = tmp_path / "table.csv"
    table.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "model,psi,s_g4,s_g8"
    assert lines[1].startswith("G4,0.2,")
    back = ReferenceTable.read_csv(path)
    assert back.models == table.models
    np.testing.assert_array_equal(back.psis, table.psis)
    np.testing.assert_array_equal(back.summaries, table.summaries)
    assert back.priors is None


def test_reference_table_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("model,beta,s4,s8\nG4,0.2,0.1,0.2\n")
    with pytest.raises(ValueError):
        ReferenceTable.read_csv(path)
