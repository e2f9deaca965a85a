from decimal import Decimal

import pytest
from hypothesis import given, strategies as st

from heterodeploy import jsonio
from heterodeploy.errors import InputError, SchemaError


def test_keys_are_sorted_and_output_compact():
    text = jsonio.dumps({"b": 1, "a": {"z": [1, 2], "y": None}})
    assert text == '{"a":{"y":null,"z":[1,2]},"b":1}'


def test_scalar_forms():
    assert jsonio.dumps(True) == "true"
    assert jsonio.dumps(None) == "null"
    assert jsonio.dumps(3) == "3"
    assert jsonio.dumps(0.1) == "0.1"
    assert jsonio.dumps("a\nb") == '"a\\nb"'
    assert jsonio.dumps("café") == '"caf\\u00e9"'


def test_decimal_preserves_written_form():
    assert jsonio.dumps(Decimal("1.10")) == "1.10"
    assert jsonio.dumps(Decimal("5.1")) == "5.1"


def test_non_finite_rejected():
    with pytest.raises(InputError):
        jsonio.dumps(float("nan"))
    with pytest.raises(InputError):
        jsonio.dumps(float("inf"))
    with pytest.raises(InputError):
        jsonio.dumps(Decimal("Infinity"))


def test_unsupported_type_rejected():
    with pytest.raises(TypeError):
        jsonio.dumps({1, 2})


def test_loads_rejects_infinity_constant():
    with pytest.raises(SchemaError):
        jsonio.loads('{"cost": Infinity}')
    with pytest.raises(SchemaError):
        jsonio.loads("NaN")


def test_loads_parses_numbers_with_point_as_decimal():
    data = jsonio.loads('{"cost":2.5,"count":4}')
    assert data["cost"] == Decimal("2.5")
    assert isinstance(data["cost"], Decimal)
    assert isinstance(data["count"], int)


def test_loads_rejects_bad_json():
    with pytest.raises(SchemaError):
        jsonio.loads("{nope")


def test_write_and_read_round_trip(tmp_path):
    path = tmp_path / "doc.json"
    value = {"total": Decimal("5.1"), "items": ["a", "b"], "n": 3}
    jsonio.write(path, value)
    raw = path.read_text(encoding="utf-8")
    assert raw.endswith("\n")
    assert jsonio.read(path) == value


def test_read_missing_file_is_input_error(tmp_path):
    with pytest.raises(InputError):
        jsonio.read(tmp_path / "absent.json")


json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**9, 10**9)
    | st.decimals(allow_nan=False, allow_infinity=False, places=6)
    | st.text(max_size=20),
    lambda children: st.lists(children, max_size=4)
    | st.dictionaries(st.text(max_size=8), children, max_size=4),
    max_leaves=20,
)


@given(json_values)
def test_dumps_loads_round_trip_is_stable(value):
    once = jsonio.dumps(value)
    again = jsonio.dumps(jsonio.loads(once))
    assert once == again
