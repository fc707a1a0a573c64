import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crowdocean.errors import ConfigError, InsufficientDataError
from crowdocean.features import FeatureSummary
from crowdocean.ocean import (
    DIMENSIONS,
    DimensionWeights,
    GuardParams,
    OceanScore,
    aggregate_country,
    aggregate_video,
    answer_items,
    item_keys,
    partition_counts,
    quantize_items,
    raw_dimensions,
    reverse_items,
    score_dimensions,
    score_video,
    scores_to_csv,
    scores_to_json,
)


def summary(speed=1.0, alpha=2.0, alpha_std=0.0, coll=1.0, social=1.0, agent_id=0):
    return FeatureSummary(agent_id, speed, alpha, alpha_std, coll, social, 1.0 - social, 10)


def equations(q):
    """Dimension scores written out term by term, ``q[k]`` = quantized item k."""
    r = {k: 4 - v for k, v in q.items()}
    O = r[2] / 0.04
    C = q[1] / 0.04
    E1 = q[3] + q[12] + q[14] + sum(q[k] for k in range(16, 24))
    E2 = sum(r[k] for k in range(4, 9)) + r[11] + r[15]
    E = (E1 + E2) / 0.72
    A = (q[9] + q[10]) / 0.08
    N = (q[13] + r[24] + r[25]) / 0.12
    return {"O": O, "C": C, "E": E, "A": A, "N": N}


# --- item answers -------------------------------------------------------------

def test_answer_items_social_agent():
    q = answer_items(summary(speed=1.0, alpha=2.0, alpha_std=0.0, coll=1.0, social=1.0))
    item = {k + 1: v for k, v in enumerate(q)}
    assert [item[k] for k in range(16, 22)] == [1.0] * 6
    assert [item[k] for k in range(22, 26)] == [2.0] * 4
    assert item[14] == 2.5
    assert item[15] == pytest.approx(0.4, abs=1e-15)
    assert item[1] == 1.5 and item[2] == 2.0 and item[12] == 3.0
    assert [item[k] for k in range(3, 9)] == [0.0] * 6
    assert item[9] == item[10] == 1.0
    assert item[11] == 0.0
    assert item[13] == 1.0


def test_answer_items_alpha_guard():
    q = answer_items(summary(speed=0.7, alpha=0.0), GuardParams(eps_alpha=0.1))
    assert q[0] == pytest.approx(0.7 + 10.0)


def test_answer_items_collectivity_guard():
    q = answer_items(summary(coll=0.0, social=1.0), GuardParams(eps_phi=0.01))
    assert q[12] == pytest.approx(0.0 + 100.0)


def test_guards_must_be_positive():
    with pytest.raises(ConfigError):
        GuardParams(eps_alpha=0.0)


@given(st.floats(0, 3), st.floats(0, 180), st.floats(0, 90), st.floats(0, 1), st.floats(0, 1))
def test_answer_items_finite_non_negative(s, a, sd, c, soc):
    q = answer_items(summary(s, a, sd, c, soc))
    assert q.shape == (25,)
    assert np.all(np.isfinite(q)) and np.all(q >= 0)


# --- quantization and reversal ------------------------------------------------

def test_quantize_boundaries():
    raw = np.zeros((3, 25))
    raw[:, 0] = [10.0, 4.9, 0.0]
    raw[:, 1] = [2.0, 2.0, 2.0]
    levels = quantize_items(raw)
    assert levels[:, 0].tolist() == [4, 2, 0]
    assert levels[:, 1].tolist() == [4, 4, 4]
    assert levels[:, 2].tolist() == [0, 0, 0]  # item maximum 0


def test_quantize_uniform_bins():
    raw = np.zeros((6, 25))
    raw[:, 0] = [0.0, 0.19, 0.2, 0.59, 0.8, 1.0]
    assert quantize_items(raw)[:, 0].tolist() == [0, 0, 1, 2, 4, 4]


def test_quantize_single_agent():
    levels = quantize_items(np.arange(25, dtype=float))
    assert levels.tolist() == [[0] + [4] * 24]


def test_quantize_rejects_wrong_width():
    with pytest.raises(InsufficientDataError):
        quantize_items(np.zeros((2, 24)))


def test_reverse_examples():
    assert reverse_items(np.array([0, 4, 1])).tolist() == [4, 0, 3]


@given(st.lists(st.lists(st.floats(0, 1e6), min_size=25, max_size=25), min_size=1, max_size=12))
def test_quantize_levels_in_range_and_reverse_involution(rows):
    levels = quantize_items(np.array(rows))
    assert set(np.unique(levels)) <= {0, 1, 2, 3, 4}
    assert np.array_equal(reverse_items(reverse_items(levels)), levels)


# --- dimension scores ---------------------------------------------------------

def test_openness_maximum():
    q = np.zeros(25, dtype=int)
    assert score_dimensions(q).O == 1.0


def test_agreeableness_maximum():
    q = np.zeros(25, dtype=int)
    q[8] = q[9] = 4
    assert score_dimensions(q).A == 1.0


def test_all_fours():
    s = score_dimensions(np.full(25, 4))
    assert abs(s.E - 44 / 0.72 / 100) <= 1e-9
    assert s.E == pytest.approx(0.6111, abs=1e-4)
    assert raw_dimensions(np.full(25, 4))["E"] == pytest.approx(61.111111, abs=1e-5)


def test_partition():
    assert partition_counts() == {"O": 1, "C": 1, "E": 18, "A": 2, "N": 3}
    items = sorted(k for keyed in item_keys().values() for k, _ in keyed)
    assert items == list(range(1, 26))
    e_plain = [k for k, rev in item_keys()["E"] if not rev]
    e_rev = [k for k, rev in item_keys()["E"] if rev]
    assert len(e_plain) == 11 and len(e_rev) == 7
    assert 3 in e_plain


def test_non_strict_reverses_item_three():
    keys = dict(item_keys(strict_paper=False)["E"])
    assert keys[3] is True
    assert partition_counts(strict_paper=False) == partition_counts()
    q = np.zeros(25, dtype=int)
    q[2] = 4
    assert score_dimensions(q, strict_paper=True).E > score_dimensions(q, strict_paper=False).E


def test_weights_must_sum_to_one():
    assert sum(getattr(DimensionWeights(), d) for d in DIMENSIONS) == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        DimensionWeights(E=0.5)


@given(st.lists(st.integers(0, 4), min_size=25, max_size=25))
def test_scores_match_equations(levels):
    raw = raw_dimensions(np.array(levels))
    want = equations({k + 1: v for k, v in enumerate(levels)})
    for d in DIMENSIONS:
        assert raw[d] == pytest.approx(want[d], abs=1e-9)
        assert 0.0 <= raw[d] <= 100.0 + 1e-9
    s = score_dimensions(np.array(levels))
    assert all(0.0 <= v <= 1.0 for v in s.values())


@given(st.lists(st.integers(0, 4), min_size=25, max_size=25))
def test_monotonicity(levels):
    q = np.array(levels)
    if q[8] < 4:
        up = q.copy()
        up[8] += 1
        assert score_dimensions(up).A >= score_dimensions(q).A
    if q[1] < 4:
        up = q.copy()
        up[1] += 1
        assert score_dimensions(up).O <= score_dimensions(q).O


# --- aggregation --------------------------------------------------------------

def _score(E=0.5, O=0.5, country="BR", id="", level="video"):
    return OceanScore(O, 0.5, E, 0.5, 0.5, level=level, id=id, country=country)


def test_aggregate_video():
    one = _score(E=0.2, level="individual")
    assert aggregate_video([one]).values().tolist() == one.values().tolist()
    assert aggregate_video([one, _score(E=0.6, level="individual")]).E == pytest.approx(0.4)
    with pytest.raises(InsufficientDataError):
        aggregate_video([])


@given(st.lists(st.lists(st.floats(0, 1), min_size=5, max_size=5), min_size=1, max_size=20))
def test_aggregate_video_within_range(rows):
    people = [OceanScore(*r) for r in rows]
    v = aggregate_video(people).values()
    arr = np.array(rows)
    assert np.all(v >= arr.min(axis=0) - 1e-12) and np.all(v <= arr.max(axis=0) + 1e-12)


def test_aggregate_country_unweighted():
    videos = [_score(O=0.4, id="a"), _score(O=0.8, id="b")]
    countries = aggregate_country(videos)
    assert countries["BR"].O == pytest.approx(0.6)
    assert countries["BR"].level == "country"
    single = aggregate_country([_score(O=0.3, country="CN", id="x")])
    assert single["CN"].values().tolist() == _score(O=0.3).values().tolist()


def test_aggregate_country_order_independent():
    videos = [_score(O=o, E=e, country=c, id=f"v{i}")
              for i, (o, e, c) in enumerate([(0.1, 0.3, "BR"), (0.7, 0.2, "CN"), (0.35, 0.9, "BR"), (0.2, 0.4, "BR")])]
    ref = aggregate_country(videos)
    for perm in itertools.permutations(videos):
        assert aggregate_country(perm) == ref


# --- per-video scoring and output ---------------------------------------------

def test_score_video_pipeline_step():
    summaries = [summary(agent_id=1), summary(coll=0.2, social=0.1, agent_id=2)]
    people, video = score_video(summaries, "v9", "JP")
    assert [p.id for p in people] == ["v9:1", "v9:2"]
    assert video.level == "video" and video.id == "v9" and video.country == "JP"
    assert video.E == pytest.approx((people[0].E + people[1].E) / 2)


def test_score_outputs_format():
    s = OceanScore(0.123456, 1.0, 0.0, 0.5, 1 / 3, level="video", id="v1", country="BR")
    assert scores_to_csv([s]).splitlines() == [
        "level,id,country,O,C,E,A,N",
        "video,v1,BR,0.1235,1.0000,0.0000,0.5000,0.3333",
    ]
    assert '"O": 0.1235' in scores_to_json([s])
