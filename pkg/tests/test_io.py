import json
import math

import numpy as np
import pytest

from frozen_spectrum import Geometry, ValidationError
from frozen_spectrum.io import dumps, load_geometry, load_potential, load_spectrum, read_json, write_csv


def test_numbers_are_written_with_17_digits():
    text = dumps({"x": 0.1, "n": 3, "z": 1 + 2j, "bad": math.nan, "zero": -0.0, "a": np.array([1.0, 2.5])})
    data = json.loads(text)
    assert data == {"x": 0.1, "n": 3, "z": [1.0, 2.0], "bad": None, "zero": 0.0, "a": [1.0, 2.5]}
    assert "0.10000000000000001" in text


def test_dumps_is_deterministic_and_keeps_key_order():
    obj = {"b": [1.0, {"c": True}], "a": None}
    assert dumps(obj) == dumps(obj)
    assert list(json.loads(dumps(obj))) == ["b", "a"]
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_unreadable_inputs(tmp_path):
    with pytest.raises(ValidationError):
        read_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValidationError):
        read_json(bad)
    bad.write_text('{"gamma": 1}')
    with pytest.raises(ValidationError):
        load_geometry(bad)


def test_geometry_from_bare_file_or_from_an_output(tmp_path):
    p = tmp_path / "g.json"
    p.write_text('{"gamma": 1, "d": 0.5, "l": 1}')
    g = load_geometry(p)
    assert g == Geometry(1.0, 0.5, 1.0)
    out = tmp_path / "out.json"
    out.write_text(dumps({"schema": "x", "spectrum": {"geometry": g.to_dict(), "k0": 0, "values": [[1.0, 0.0]]}}))
    assert load_geometry(out) == g
    assert load_spectrum(out).values[0] == 1.0


def test_potential_forms(tmp_path):
    g = Geometry(1.0, 1.0, 1.0)
    p = tmp_path / "q.json"
    p.write_text('{"zero": true}')
    assert load_potential(p, g).is_zero
    p.write_text('{"left": "cos(pi*t)", "right": "t - 2", "dleft": "-pi*sin(pi*t)"}')
    q = load_potential(p, g)
    assert q.left(np.array([1.0]))[0] == pytest.approx(-1.0)
    assert q.right(np.array([3.0]))[0] == pytest.approx(1.0)
    assert q.dleft(np.array([0.5]))[0] == pytest.approx(-np.pi)
    p.write_text(dumps({"potential": q.to_dict(g, 65)}))
    back = load_potential(p, g)
    assert back.q_at_gamma == pytest.approx(-1.0)


@pytest.mark.parametrize("text", ['{"left": "__import__(\\"os\\")", "right": "t"}', '{"left": "t +", "right": "t"}',
                                  '{"something": 1}', '{"segments": [{"from": 0}]}'])
def test_potential_rejects_bad_input(tmp_path, text):
    p = tmp_path / "q.json"
    p.write_text(text)
    with pytest.raises(ValidationError):
        load_potential(p, Geometry(1.0, 1.0, 1.0))


def test_spectrum_needs_values(tmp_path):
    p = tmp_path / "s.json"
    p.write_text('{"k0": 0}')
    with pytest.raises(ValidationError):
        load_spectrum(p)


def test_csv_writer(tmp_path):
    p = tmp_path / "x.csv"
    write_csv(p, ["seg", "n", "v"], [("left", 1, 0.5), ("right", np.int64(2), 1e-20)])
    assert p.read_text() == "seg,n,v\nleft,1,0.5\nright,2,9.9999999999999995e-21\n"
