import numpy as np
import pytest

from persistlab import SeedSpec, ValidationError, as_seedspec


def test_same_stream_same_bytes():
    a = SeedSpec(123).generator(5).bytes(64)
    b = SeedSpec(123).generator(5).bytes(64)
    assert a == b


def test_streams_differ():
    a = SeedSpec(123).generator(0).bytes(64)
    b = SeedSpec(123).generator(1).bytes(64)
    c = SeedSpec(124).generator(0).bytes(64)
    assert a != b and a != c


def test_master_range_checked():
    with pytest.raises(ValidationError):
        SeedSpec(-1)
    with pytest.raises(ValidationError):
        SeedSpec(2**64)


def test_as_seedspec_passthrough():
    spec = SeedSpec(9)
    assert as_seedspec(spec) is spec
    assert as_seedspec(9) == spec
