import json

import numpy as np
import pytest

from conformal_balls.conformal import LorentzMap, compose_all, pi_map, translate_minus
from conformal_balls.generators import GeneratorSpec, Twist, framed_slot, random_config
from conformal_balls.io import DocumentError, dumps_config, loads_config, read_config, write_config
from conformal_balls.operad import Configuration, InvalidConfiguration, config_distance, unit_config


def test_unit_roundtrip():
    u = unit_config(2)
    assert config_distance(loads_config(dumps_config(u)), u) <= 1e-15


@pytest.mark.parametrize("twist", list(Twist))
def test_roundtrip_is_byte_stable(twist, tmp_path):
    c = random_config(GeneratorSpec(3, 4, seed=5, twist=twist))
    path = tmp_path / "c.json"
    write_config(c, path)
    first = path.read_bytes()
    again = read_config(path)
    assert config_distance(again, c) == 0.0
    write_config(again, path)
    assert path.read_bytes() == first


def test_document_layout():
    doc = json.loads(dumps_config(unit_config(1)))
    assert doc == {"schema": 1, "n": 1, "arity": 1, "maps": [
        [-1, 0, 0, 0, -1, 0, 0, 0, 1],
        [1, 0, 0, 0, 1, 0, 0, 0, 1],
    ]}


def doc_for(maps, n=2, **extra):
    d = {"schema": 1, "n": n, "arity": len(maps) - 1, "maps": [m.ravel().tolist() for m in maps]}
    d.update(extra)
    return json.dumps(d)


def test_overlapping_balls_rejected():
    # the plane balls B((+-0.2, 0), 0.4) overlap
    maps = [pi_map(2).matrix] + [framed_slot(np.array([x, 0.0]), 0.4).matrix for x in (-0.2, 0.2)]
    with pytest.raises(InvalidConfiguration) as exc:
        loads_config(doc_for(maps))
    assert exc.value.report.violation == "disjointness"


def test_wrong_slot_zero():
    maps = [np.eye(4), framed_slot(np.zeros(2), 0.5).matrix]
    with pytest.raises(InvalidConfiguration) as exc:
        loads_config(doc_for(maps))
    assert exc.value.report.violation == "slot-0"


def test_non_lorentz_slot():
    bad = framed_slot(np.zeros(2), 0.5).matrix.copy()
    bad[0, 0] = 2.0
    with pytest.raises(InvalidConfiguration) as exc:
        loads_config(doc_for([pi_map(2).matrix, bad]))
    assert exc.value.report.violation == "lorentz"


def test_rounded_entries_are_renormalized():
    slot = compose_all(framed_slot(np.array([0.1, 0.2]), 0.3), translate_minus(np.array([0.2, 0.0]))).matrix
    rounded = np.round(slot, 12)
    c = loads_config(doc_for([pi_map(2).matrix, rounded]))
    assert np.abs(c.maps[1].matrix - slot).max() <= 1e-10


@pytest.mark.parametrize(
    "text, violation",
    [
        ("{not json", "parse"),
        ("[]", "schema"),
        ('{"schema": 2, "n": 1, "arity": 1, "maps": []}', "schema"),
        ('{"schema": 1, "n": 0, "arity": 1, "maps": []}', "schema"),
        ('{"schema": 1, "n": 1, "arity": 1, "maps": [[1,0,0,0,-1,0,0,0,1]]}', "schema"),
        ('{"schema": 1, "n": 1, "arity": 1, "maps": [[1,0,0,0,-1,0,0,0,1],[1,2]]}', "schema"),
        ('{"schema": 1, "n": "1", "arity": 1, "maps": []}', "schema"),
        ('{"schema": 1, "n": 1, "arity": 1, "maps": [[1,0,0,0,-1,0,0,0,1],[1,0,0,0,true,0,0,0,1]]}', "schema"),
        ('{"schema": 1, "n": 1, "arity": 0, "maps": [[1,0,0,0,-1,0,0,0,1]]}', "schema"),
    ],
)
def test_malformed_documents(text, violation):
    with pytest.raises(DocumentError) as exc:
        loads_config(text)
    assert exc.value.violation == violation


def test_non_finite_rejected():
    text = dumps_config(unit_config(1)).replace("[1, 0, 0, 0, 1", "[NaN, 0, 0, 0, 1")
    with pytest.raises(DocumentError):
        loads_config(text)
    bad = np.eye(3)
    bad[0, 0] = np.inf
    with pytest.raises(ValueError):
        dumps_config(Configuration(1, (pi_map(1), LorentzMap(bad))))


def test_floats_have_full_precision():
    c = random_config(GeneratorSpec(2, 2, seed=1, twist=Twist.Q))
    doc = json.loads(dumps_config(c))
    assert np.array_equal(np.array(doc["maps"][1]).reshape(4, 4), c.maps[1].matrix)
