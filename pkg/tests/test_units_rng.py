import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fedga.rng import derive_seed, stream
from fedga.units import dbm_to_watts, parse_quantity, watts_to_dbm


@pytest.mark.parametrize(
    "value, unit, expected",
    [
        ("28 dBm", "W", 0.630957344480193),
        ("33 dBm", "W", 1.99526231496888),
        ("-158 dBm/Hz", "W/Hz", 10**-18.8),
        ("20 MHz", "Hz", 2e7),
        ("3 GHz", "Hz", 3e9),
        ("2.51 MB", "bit", 2.008e7),
        ("13 s", "s", 13.0),
        ("500 m", "m", 500.0),
        ("0.5km", "m", 500.0),
        (1.5, "W", 1.5),
        ("7", "s", 7.0),
    ],
)
def test_parse_quantity(value, unit, expected):
    assert parse_quantity(value, unit) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "value, unit",
    [("28 dBm", "Hz"), ("20 MHz", "W"), ("fast", "Hz"), (True, "W"), (None, "W"), ("1 parsec", "m")],
)
def test_parse_quantity_rejects(value, unit):
    with pytest.raises(ValueError):
        parse_quantity(value, unit)


@given(st.floats(-60, 60))
def test_dbm_roundtrip(dbm):
    assert watts_to_dbm(dbm_to_watts(dbm)) == pytest.approx(dbm, abs=1e-9)


def test_streams_are_reproducible_and_distinct():
    a = stream(42, "ga", 3).random(5)
    assert np.array_equal(a, stream(42, "ga", 3).random(5))
    assert not np.array_equal(a, stream(42, "ga", 4).random(5))
    assert not np.array_equal(a, stream(43, "ga", 3).random(5))
    assert derive_seed(42, "online", 0) == derive_seed(42, "online", 0)
    assert derive_seed(42, "online", 0) != derive_seed(42, "online", 1)


def test_negative_label_rejected():
    with pytest.raises(ValueError):
        stream(1, -1)
