import json

import numpy as np
import pytest

from bellkit import io, qcore, wwzb
from bellkit.correlations import BellFunctional, JointDistribution
from bellkit.errors import InvalidInputError
from bellkit.fixtures import names, path

from conftest import random_assembly, random_state


def round_trip(doc):
    return json.loads(io.dumps(doc))


def test_dumps_is_canonical():
    text = io.dumps({"b": 1.0, "a": [0.1, 2, None, True], "c": np.float64(1 / 3)})
    assert text == '{"a": [0.10000000000000001, 2, null, true], "b": 1.0, "c": 0.33333333333333331}'
    with pytest.raises(InvalidInputError):
        io.dumps(float("nan"))


def test_seventeen_digits_round_trip_exactly(rng):
    values = rng.normal(size=50) * 10.0 ** rng.integers(-20, 20, size=50)
    assert np.array_equal(np.array(json.loads(io.dumps(values.tolist()))), values)


def test_matrix_encoding():
    m = np.array([[1, 2j], [3, 4 - 1j]])
    doc = io.matrix_to_json(m)
    assert doc == {"rows": 2, "cols": 2, "data": [[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [4.0, -1.0]]}
    assert np.array_equal(io.matrix_from_json(doc), m)
    with pytest.raises(InvalidInputError):
        io.matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0]]})


def test_state_and_assembly_round_trip(rng):
    s = random_state(rng, (2, 3))
    a = random_assembly(rng, (2, 3))
    assert np.array_equal(io.state_from_json(round_trip(io.state_to_json(s))).rho, s.rho)
    back = io.assembly_from_json(round_trip(io.assembly_to_json(a)))
    assert np.array_equal(back.effects_array(), a.effects_array())


def test_inequality_round_trip():
    q = wwzb.WwzbInequality.from_index(3, 201)
    assert io.inequality_from_json(round_trip(io.inequality_to_json(q))) == q
    t = BellFunctional(2, np.arange(16.0))
    back = io.inequality_from_json(round_trip(io.inequality_to_json(t)))
    assert np.array_equal(back.coeffs, t.coeffs)
    with pytest.raises(InvalidInputError):
        io.inequality_from_json({"type": "other", "parties": 2})


def test_distribution_flat_order():
    probs = np.full((4, 4), 0.25)
    probs[1] = [0.5, 0.0, 0.0, 0.5]  # settings (2, 1)
    doc = io.distribution_to_json(JointDistribution(2, probs))
    assert doc["probs"][4:8] == [0.5, 0.0, 0.0, 0.5]


def test_format_tag_is_checked():
    doc = io.state_to_json(qcore.singlet_state())
    doc["format"] = "bellkit/0"
    with pytest.raises(InvalidInputError):
        io.state_from_json(doc)
    doc = io.state_to_json(qcore.singlet_state())
    with pytest.raises(InvalidInputError):
        io.assembly_from_json(doc)


def test_bundled_fixtures_load():
    assert "singlet_state.json" in names()
    for name in names():
        doc = io.read_json(path(name))
        reader = {"state": io.state_from_json, "assembly": io.assembly_from_json}.get(doc["type"],
                                                                                     io.inequality_from_json)
        reader(doc)


def test_read_json_errors(tmp_path):
    with pytest.raises(InvalidInputError):
        io.read_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(InvalidInputError):
        io.read_json(bad)
