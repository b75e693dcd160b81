import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dbkclique.anneal import (
    DWAVE_2X_TABLE,
    EmulatedAnnealer,
    TtsModel,
    TtsRow,
    emulated_annealer_solve,
    tts,
    tts_lookup,
)
from dbkclique.graph import Graph, density, gnp_generate
from oracles import omega_oracle

TABLE_TTS = {0.1: 0.127, 0.2: 0.296, 0.3: 0.141, 0.4: 0.105, 0.5: 0.152, 0.6: 0.948, 0.7: 0.746, 0.8: 0.273, 0.9: 0.137}


def test_tts_examples():
    assert abs(tts(1.0, 0.99) - 1.0) <= 1e-12
    assert tts(1.0, 0.5) == pytest.approx(6.6439, abs=1e-4)
    assert tts(2.0, 0.5) == pytest.approx(13.2877, abs=1e-4)
    # independent evaluation of the formula
    assert tts(1.0, 0.5) == pytest.approx(math.log(0.01) / math.log(0.5), rel=1e-14)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_tts_rejects_p_outside_open_interval(p):
    with pytest.raises(ValueError):
        tts(1.0, p)


def test_tts_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        tts(0.0, 0.5)


@given(st.floats(1e-3, 1e3), st.floats(1e-4, 0.999), st.floats(1e-4, 0.999))
def test_tts_monotone_and_linear(T, p1, p2):
    if p1 < p2:
        assert tts(T, p1) > tts(T, p2)
    assert tts(3 * T, p1) == pytest.approx(3 * tts(T, p1), rel=1e-12)


def test_table_embedded_verbatim():
    model = TtsModel.default()
    assert len(model.rows) == 9
    for row, (d, p, t_run, t) in zip(model.rows, DWAVE_2X_TABLE):
        assert (row.density, row.p, row.t_run, row.tts) == (d, p, t_run, t)


def test_lookup_reproduces_table():
    model = TtsModel.default()
    for d, value in TABLE_TTS.items():
        assert tts_lookup(model, d) == value  # bit-exact


def test_lookup_examples_and_ties():
    model = TtsModel.default()
    assert tts_lookup(model, 0.5) == 0.152
    assert tts_lookup(model, 0.93) == 0.137
    assert tts_lookup(model, 0.1) == 0.127
    assert tts_lookup(model, 0.0) == 0.127
    assert tts_lookup(model, 1.0) == 0.137
    assert tts_lookup(model, 0.15) == 0.127  # tie goes to the lower bucket
    assert tts_lookup(model, 0.55) == 0.152
    assert tts_lookup(model, 0.56) == 0.948
    with pytest.raises(ValueError):
        tts_lookup(model, 1.2)


def test_model_validation():
    with pytest.raises(ValueError):
        TtsModel(())
    with pytest.raises(ValueError):
        TtsModel((TtsRow(0.2, 0.1, 1.0, 1.0), TtsRow(0.1, 0.1, 1.0, 1.0)))
    with pytest.raises(ValueError):
        TtsModel((TtsRow(0.1, 0.0, 1.0, 1.0),))


def test_model_csv_round_trip(tmp_path):
    path = tmp_path / "table.csv"
    TtsModel.default().to_csv(path)
    assert TtsModel.from_csv(path) == TtsModel.default()
    (tmp_path / "bad.csv").write_text("density,tts\n0.1,1\n")
    with pytest.raises(ValueError):
        TtsModel.from_csv(tmp_path / "bad.csv")


def test_emulated_annealer_examples():
    clique, charge = emulated_annealer_solve(Graph.complete(3))
    assert len(clique) == 3 and charge == 0.137
    clique, charge = emulated_annealer_solve(Graph.empty(10))
    assert len(clique) == 1 and charge == 0.127
    g = gnp_generate(40, 0.5, 3)
    assert abs(density(g) - 0.5) < 0.05
    clique, charge = emulated_annealer_solve(g)
    assert len(clique) == omega_oracle(g) and g.is_clique(clique)
    assert charge == 0.152


def test_emulated_annealer_capacity():
    with pytest.raises(ValueError):
        emulated_annealer_solve(Graph.empty(47), max_size=46)
    solver = EmulatedAnnealer(max_size=46)
    clique, _ = solver(Graph.complete(46))
    assert len(clique) == 46


def test_custom_model_is_used():
    model = TtsModel((TtsRow(0.5, 0.5, 1.0, 42.0),))
    _, charge = emulated_annealer_solve(Graph.complete(3), model)
    assert charge == 42.0


def test_emulator_matches_exact_solver_on_random_leaves():
    rng = np.random.default_rng(9)
    for _ in range(30):
        g = gnp_generate(int(rng.integers(1, 46)), float(rng.uniform(0.1, 0.9)), int(rng.integers(1 << 30)))
        clique, _ = emulated_annealer_solve(g)
        assert len(clique) == omega_oracle(g)
