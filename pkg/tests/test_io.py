import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bopert.errors import FormatError
from bopert.evolution import Trajectory
from bopert.io import (
    MAGIC,
    load_coefficient_dump,
    load_snapshot,
    read_csv,
    save_coefficient_dump,
    save_snapshot,
    write_csv,
)
from bopert.spectral import TorusField

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@st.composite
def trajectories(draw):
    N = draw(st.integers(0, 6))
    k = draw(st.integers(0, 4))
    times = np.cumsum(draw(st.lists(st.floats(1e-6, 10), min_size=k, max_size=k)))
    states = []
    for _ in range(k):
        re = draw(st.lists(finite, min_size=N + 1, max_size=N + 1))
        im = draw(st.lists(finite, min_size=N, max_size=N))
        states.append(TorusField(np.array(re) + 1j * np.array([0.0] + im)))
    return Trajectory(times, states, {"note": "random"})


@settings(max_examples=40, deadline=None)
@given(trajectories())
def test_json_round_trip_bit_exact(tmp_path_factory, traj):
    path = tmp_path_factory.mktemp("snap") / "t.json"
    back = load_snapshot(save_snapshot(traj, path))
    assert np.array_equal(back.times, traj.times)
    assert back.coeff_array().tobytes() == traj.coeff_array().tobytes()
    assert back.config == traj.config


@settings(max_examples=40, deadline=None)
@given(trajectories())
def test_binary_round_trip_bit_exact(tmp_path_factory, traj):
    path = tmp_path_factory.mktemp("snap") / "t.bin"
    save_snapshot(traj, path)
    arr = load_coefficient_dump(path)
    if len(traj):
        assert arr.tobytes() == traj.coeff_array().tobytes()
    else:
        assert arr.size == 0


def test_binary_layout(tmp_path):
    u = TorusField(np.array([1.5, 2 - 3j]))
    path = save_coefficient_dump(Trajectory([0.0], [u]), tmp_path / "d.bin")
    raw = path.read_bytes()
    assert raw[:8] == b"BOPERT01"
    assert struct.unpack("<q", raw[8:16]) == (1,)
    assert struct.unpack("<4d", raw[16:]) == (1.5, 0.0, 2.0, -3.0)


def test_empty_trajectory(tmp_path):
    empty = Trajectory([], [])
    back = load_snapshot(save_snapshot(empty, tmp_path / "e.json"))
    assert len(back) == 0
    assert json.loads((tmp_path / "e.json").read_text())["states"] == []
    save_coefficient_dump(empty, tmp_path / "e.bin")
    assert (tmp_path / "e.bin").stat().st_size == 16


def test_bad_files(tmp_path):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"NOTMAGIC" + struct.pack("<q", 1) + b"\0" * 32)
    with pytest.raises(FormatError):
        load_coefficient_dump(bad)
    short = tmp_path / "short.bin"
    short.write_bytes(MAGIC)
    with pytest.raises(FormatError):
        load_coefficient_dump(short)
    ragged = tmp_path / "ragged.bin"
    ragged.write_bytes(MAGIC + struct.pack("<q", 2) + b"\0" * 40)
    with pytest.raises(FormatError):
        load_coefficient_dump(ragged)
    binary_as_json = tmp_path / "x.json"
    binary_as_json.write_bytes(MAGIC + struct.pack("<q", 0))
    with pytest.raises(FormatError):
        load_snapshot(binary_as_json)
    nojson = tmp_path / "n.json"
    nojson.write_text("{not json")
    with pytest.raises(FormatError):
        load_snapshot(nojson)
    missing = tmp_path / "m.json"
    missing.write_text('{"times": [0.0]}')
    with pytest.raises(FormatError):
        load_snapshot(missing)
    mismatched = tmp_path / "mm.json"
    mismatched.write_text('{"times": [0.0, 1.0], "states": [{"N": 0, "coeffs": [[0, 0]]}]}')
    with pytest.raises(FormatError):
        load_snapshot(mismatched)


def test_csv_round_trip(tmp_path):
    path = write_csv(tmp_path / "t.csv", ["a", "b"], [(0.1, 2), (1e-300, "x")])
    header, rows = read_csv(path)
    assert header == ["a", "b"]
    assert rows == [["0.1", "2"], ["1e-300", "x"]]
    assert float(rows[0][0]) == 0.1
