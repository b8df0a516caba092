import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guiscout.core import (
    Embedding,
    GenConfig,
    Platform,
    Query,
    RankedHit,
    ScreenRecord,
    cosine,
    normalize,
)
from guiscout.errors import DimensionMismatch, ValidationError, ZeroVector


class TestNormalize:
    def test_three_four_five(self):
        e = normalize([3.0, 4.0], dim=2)
        assert e.values == pytest.approx([0.6, 0.8], abs=1e-12)

    def test_already_unit(self):
        e = normalize([1.0, 0.0, 0.0, 0.0])
        assert e.values == pytest.approx([1.0, 0.0, 0.0, 0.0], abs=0)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            normalize([0.0, 0.0])

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            normalize([1.0, 2.0, 3.0], dim=2)

    def test_nan_rejected(self):
        with pytest.raises(ValidationError):
            normalize([float("nan"), 1.0])


class TestCosine:
    def test_identical(self):
        e = normalize([0.3, -0.2, 0.9])
        assert cosine(e, e) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine(normalize([1, 0]), normalize([0, 1])) == 0.0

    def test_45_degrees(self):
        got = cosine(normalize([1, 0]), normalize([0.707107, 0.707107]))
        assert got == pytest.approx(0.707107, abs=1e-6)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine(normalize([1, 0]), normalize([1, 0, 0]))


vectors = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False),
    min_size=2,
    max_size=32,
).filter(lambda v: math.sqrt(sum(x * x for x in v)) > 1e-6)


@given(vectors, vectors)
@settings(max_examples=200, deadline=None)
def test_cosine_symmetric(u, v):
    n = min(len(u), len(v))
    a, b = normalize(u[:n]), normalize(v[:n])
    assert cosine(a, b) == pytest.approx(cosine(b, a), abs=1e-12)
    assert -1.0 - 1e-9 <= cosine(a, b) <= 1.0 + 1e-9


@given(vectors)
@settings(max_examples=200, deadline=None)
def test_normalize_idempotent(v):
    once = normalize(v)
    twice = normalize(once.values)
    assert np.abs(twice.values - once.values).max() <= 1e-9


@given(vectors, st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=200, deadline=None)
def test_normalize_scale_invariant(v, c):
    base = normalize(v)
    scaled = normalize([c * x for x in v])
    assert np.abs(scaled.values - base.values).max() <= 1e-9


class TestEmbeddingInvariants:
    def test_non_unit_rejected(self):
        with pytest.raises(ValidationError):
            Embedding(np.array([1.0, 1.0]))

    def test_values_frozen(self):
        e = normalize([1.0, 2.0])
        with pytest.raises(ValueError):
            e.values[0] = 5.0


class TestScreenRecord:
    def test_roundtrip(self):
        r = ScreenRecord(
            id="a1", app_id="app", app_url="https://x", caption="hello",
            image_path="a.png", platform=Platform.IOS, category="health",
        )
        assert ScreenRecord.from_dict(r.to_dict()) == r

    @pytest.mark.parametrize("field,value", [
        ("id", ""), ("app_id", ""), ("caption", "   "),
    ])
    def test_invariants(self, field, value):
        kwargs = dict(id="a", app_id="b", app_url="u", caption="c", image_path="p")
        kwargs[field] = value
        with pytest.raises(ValidationError):
            ScreenRecord(**kwargs)

    def test_unknown_platform(self):
        with pytest.raises(ValidationError):
            ScreenRecord.from_dict({
                "id": "a", "app_id": "b", "caption": "c",
                "image_path": "p", "platform": "symbian",
            })


class TestQuery:
    def test_empty_text(self):
        with pytest.raises(ValidationError):
            Query(text="   ")

    def test_bad_k(self):
        with pytest.raises(ValidationError):
            Query(text="x", k=0)

    def test_bad_filter_field(self):
        with pytest.raises(ValidationError):
            Query(text="x", filters={"color": "red"})

    def test_good_filters(self):
        q = Query(text="x", k=3, filters={"platform": "ios", "category": "health"})
        assert q.filters == {"platform": "ios", "category": "health"}


class TestRankedHit:
    def test_score_range(self):
        with pytest.raises(ValidationError):
            RankedHit(record_id="a", score=1.5, rank=1)

    def test_rank_positive(self):
        with pytest.raises(ValidationError):
            RankedHit(record_id="a", score=0.5, rank=0)


class TestGenConfig:
    @pytest.mark.parametrize("t", [0.0, 1.0, 2.0])
    def test_temperature_bounds_ok(self, t):
        assert GenConfig(endpoint="http://x", temperature=t).temperature == t

    @pytest.mark.parametrize("t", [-0.1, 2.5])
    def test_temperature_rejected(self, t):
        with pytest.raises(ValidationError):
            GenConfig(endpoint="http://x", temperature=t)

    def test_batch_size(self):
        with pytest.raises(ValidationError):
            GenConfig(endpoint="http://x", batch_size=0)
