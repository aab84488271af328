import numpy as np
import pytest

from src.core.errors import PreconditionError
from src.utils.parsing import parse_points, parse_slice, parse_vector


def test_parse_vector():
    assert parse_vector("1,0,-2.5").tolist() == [1.0, 0.0, -2.5]
    assert parse_vector(" 3 ").tolist() == [3.0]
    for bad in ("", "1,,2", "a,b"):
        with pytest.raises(PreconditionError):
            parse_vector(bad)


def test_parse_points():
    pts = parse_points("1,2;3,4")
    assert np.array_equal(pts, [[1.0, 2.0], [3.0, 4.0]])
    assert parse_points("0,0;").shape == (1, 2)
    with pytest.raises(PreconditionError):
        parse_points("1,2;3")
    with pytest.raises(PreconditionError):
        parse_points(";")


def test_parse_slice():
    assert parse_slice("y2=0,x2=0.5") == {"y2": 0.0, "x2": 0.5}
    assert parse_slice("") == {}
    for bad in ("z1=0", "y=1", "y2", "x2=abc"):
        with pytest.raises(PreconditionError):
            parse_slice(bad)
