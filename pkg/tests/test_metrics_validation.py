import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tomolab.grid import ImageGrid
from tomolab.metrics import metrics_record, pairwise_rel_l2, rel_l2, rel_linf
from tomolab.projector import Sinogram
from tomolab.validation import (
    check_even,
    check_image,
    check_image_batch,
    check_positive,
    check_sinogram,
    check_sinogram_batch,
    parse_arcs,
)


def test_rel_errors():
    t = np.array([[3.0, 4.0], [0.0, 0.0]])
    e = t + np.array([[0.0, 0.0], [0.5, 0.0]])
    assert rel_l2(e, t) == pytest.approx(0.1)
    assert rel_linf(e, t) == pytest.approx(0.125)
    assert rel_l2(e, t, np.array([[True, True], [False, False]])) == 0


@given(st.floats(0.1, 10))
def test_pairwise_is_symmetric_and_scaled(c):
    a = np.ones((4, 4))
    out = pairwise_rel_l2({"a": a, "b": c * a})
    assert out["a/b"] == pytest.approx(abs(1 - c) / max(1, c))


def test_record_fields():
    rec = metrics_record("fbp", 64, 100, 90, 0.01, 0.02, 5.0)
    assert list(rec) == ["method", "n", "Nr", "Ntheta", "l2_rel", "linf_rel", "runtime_ms"]


def test_checks():
    assert check_even(4, "n") == 4
    for bad in (3, 0, 2.5):
        with pytest.raises(ValueError):
            check_even(bad, "n")
    with pytest.raises(ValueError):
        check_positive(-1, "k")
    assert isinstance(check_image(np.zeros((8, 8))), ImageGrid)
    with pytest.raises(ValueError):
        check_image(np.zeros(8))
    imgs, single = check_image_batch(np.zeros((3, 8, 8)))
    assert len(imgs) == 3 and not single
    assert isinstance(check_sinogram(np.zeros((4, 4))), Sinogram)
    with pytest.raises(ValueError):
        check_sinogram_batch(np.zeros(5))


def test_parse_arcs():
    assert parse_arcs("0:1.5, 3:3.5") == [(0.0, 1.5), (3.0, 3.5)]
    for bad in ("", "1", "a:b", "1:2:3"):
        with pytest.raises(ValueError):
            parse_arcs(bad)
