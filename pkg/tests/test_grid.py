import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from anisocap import _backend
from anisocap.geometry import stock_body
from anisocap.grid import (Grid, GridError, GridFunction, GridSet, ball, box, indicator, level_set, load_function,
                           load_set, mollified_indicator, rle_decode, rle_encode, save, scale_set, set_dilate,
                           set_volume, tent, union)


def test_level_set_examples(small_grid):
    E = box(small_grid, -1, 1)
    assert np.array_equal(level_set(indicator(E), 0.5).mask, E.mask)
    f = tent(small_grid, 1.5)
    assert level_set(f, float(np.abs(f.values).max())).empty
    assert level_set(f, 0.75).issubset(level_set(f, 0.25))


def test_level_set_negative_level(small_grid):
    with pytest.raises(GridError):
        level_set(tent(small_grid), -0.1)


def test_mollified_indicator(small_grid):
    h = small_grid.spacing
    O = box(small_grid, -0.5, 0.5)
    f = mollified_indicator(O, h)
    # minimum width: the set plus one ring of zeros at distance exactly h
    assert np.array_equal(f.values > 0, O.mask)
    f2 = mollified_indicator(O, 4 * h)
    d = np.sqrt(_backend.edt_sq(O.mask)) * h
    at_half = np.isclose(d, 2 * h)
    assert at_half.any()
    assert np.allclose(f2.values[at_half], 0.5)
    with pytest.raises(GridError, match="eps"):
        mollified_indicator(O, 0.5 * h)


def test_set_dilate_examples(small_grid):
    E = box(small_grid, -0.5, 0.5)
    assert set_dilate(E, 0.0) is E
    m = np.zeros(small_grid.extent, bool)
    m[16, 16] = True
    one = GridSet(small_grid, m)
    assert set_volume(one) == pytest.approx(small_grid.spacing**2)
    for r1, r2 in [(0.1, 0.2), (0.2, 0.5), (0.3, 0.31)]:
        assert set_dilate(E, r1).issubset(set_dilate(E, r2))


def test_dilation_escaping_grid(small_grid):
    with pytest.raises(GridError, match="escapes"):
        set_dilate(box(small_grid, -1, 1), 5.0)


def test_outer_layer_rejected(small_grid):
    m = np.zeros(small_grid.extent, bool)
    m[0, 5] = True
    with pytest.raises(GridError, match="outer layer"):
        GridSet(small_grid, m)


def test_scale_set_doubles_blocks(small_grid):
    E = box(small_grid, -0.5, 0.5)
    E2 = scale_set(E, 2)
    assert E2.count == 4 * E.count
    assert E2.volume == pytest.approx(4 * E.volume)
    assert E2.polygon.area == pytest.approx(4 * E.polygon.area)


def test_ball_matches_gauge(small_grid):
    K = stock_body("diamond")
    B = ball(small_grid, K, 1.0)
    x = small_grid.centers()
    assert np.array_equal(B.mask, np.abs(x).sum(-1) <= 1 + 1e-12)


def test_union_and_issubset(small_grid):
    a, b = box(small_grid, -1, 0), box(small_grid, 0, 1)
    u = union(a, b)
    assert a.issubset(u) and b.issubset(u)
    assert u.count == np.count_nonzero(a.mask | b.mask)


@pytest.mark.parametrize("shape", [(40, 33), (12, 9, 15)])
def test_edt_matches_scipy(backend_impl, shape, rng):
    mask = rng.random(shape) < 0.03
    mask.flat[0] = True
    got = backend_impl.edt_sq(mask)
    want = ndimage.distance_transform_edt(~mask) ** 2
    assert np.allclose(got, want, rtol=0, atol=1e-9)


def test_edt_empty_mask(backend_impl):
    assert np.all(np.isinf(backend_impl.edt_sq(np.zeros((5, 6), bool))))


@settings(max_examples=60, deadline=None)
@given(arrays(bool, st.tuples(st.integers(1, 9), st.integers(1, 9))))
def test_rle_round_trip(mask):
    assert np.array_equal(rle_decode(rle_encode(mask), mask.shape), mask)


def test_rle_length_mismatch():
    with pytest.raises(GridError):
        rle_decode([3, 2], (2, 2))


def test_file_round_trip(tmp_path, small_grid):
    E = ball(small_grid, stock_body("hexagon"), 1.1)
    save(E, tmp_path / "e.json")
    E2 = load_set(tmp_path / "e.json")
    assert np.array_equal(E.mask, E2.mask) and E2.grid == E.grid
    assert np.allclose(E2.polygon.vertices, E.polygon.vertices)
    f = tent(small_grid, 1.2, levels=4)
    save(f, tmp_path / "f.json")
    assert np.array_equal(load_function(tmp_path / "f.json").values, f.values)


def test_unknown_set_key(small_grid):
    d = box(small_grid, -1, 1).to_dict()
    d["colour"] = "red"
    with pytest.raises(GridError, match="colour"):
        GridSet.from_dict(d)


def test_function_validation(small_grid):
    v = np.zeros(small_grid.extent)
    v[3, 3] = np.nan
    with pytest.raises(GridError, match="finite"):
        GridFunction(small_grid, v)
    with pytest.raises(GridError):
        Grid(2, (1, 4), 1.0, (0, 0))
