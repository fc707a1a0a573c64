import json

import pytest

from crowdocean.errors import ParseError, UsageError, ValidationError
from crowdocean.ocean import OceanScore
from crowdocean.report import (
    LiteratureBaseline,
    compute_errors,
    emit_report,
    extremes,
    load_baselines,
    percentual_error,
)


def country(c, O=0.5, C=0.5, E=0.5, A=0.5, N=0.5):
    return OceanScore(O, C, E, A, N, level="country", id=c, country=c)


def test_load_baselines_minimal():
    out = load_baselines("country,O,C,E,A,N\nBR,0.5,0.5,0.5,0.5,0.5")
    assert list(out) == ["BR"]
    assert out["BR"].E == 0.5 and out["BR"].source == ""


def test_load_baselines_with_source():
    out = load_baselines("country,O,C,E,A,N,source\nJP,0.1,0.2,0.3,0.4,0.5,norms 2005\n")
    assert out["JP"].source == "norms 2005"


def test_load_baselines_out_of_range():
    with pytest.raises(ValidationError, match="line 2"):
        load_baselines("country,O,C,E,A,N\nBR,1.2,0.5,0.5,0.5,0.5")


def test_load_baselines_duplicate():
    with pytest.raises(ValidationError, match="duplicate"):
        load_baselines("country,O,C,E,A,N\nBR,0.5,0.5,0.5,0.5,0.5\nBR,0.4,0.5,0.5,0.5,0.5")


@pytest.mark.parametrize("text", ["c,O,C,E,A,N\nBR,1,1,1,1,1", "country,O,C,E,A,N\nBR,x,1,1,1,1"])
def test_load_baselines_parse_errors(text):
    with pytest.raises(ParseError):
        load_baselines(text)


def test_percentual_error_table_value():
    base = LiteratureBaseline("CN", 0.80, 0.5, 0.5, 0.5, 0.5)
    err = percentual_error(country("CN", O=0.89), base)
    assert abs(err["O"] - 11.25) <= 1e-12
    assert err["C"] == 0.0


def test_percentual_error_zero_baseline_undefined():
    err = percentual_error(country("BR"), LiteratureBaseline("BR", 0.0, 0.5, 0.5, 0.5, 0.5))
    assert err["O"] is None


def test_percentual_error_country_mismatch():
    with pytest.raises(UsageError):
        percentual_error(country("BR"), LiteratureBaseline("CN", 0.5, 0.5, 0.5, 0.5, 0.5))


def test_error_accounting_two_countries():
    scores = {"BR": country("BR", O=0.6, E=0.25), "CN": country("CN", A=0.4)}
    bases = {
        "BR": LiteratureBaseline("BR", 0.5, 0.5, 0.5, 0.5, 0.0),
        "CN": LiteratureBaseline("CN", 0.5, 0.5, 0.5, 0.5, 0.5),
    }
    rep = compute_errors(scores, bases)
    # BR: O 20%, C 0, E 50%, A 0, N undefined; CN: A 20%, others 0
    assert rep.per_country["BR"]["N"] is None
    assert rep.country_mean["BR"] == pytest.approx(70 / 4)
    assert rep.country_mean["CN"] == pytest.approx(20 / 5)
    assert rep.overall_mean == pytest.approx(90 / 9)
    assert rep.reference_ocean_error == 30.0 and rep.reference_hofstede_error == 53.0


def test_missing_baseline_listed():
    rep = compute_errors({"AT": country("AT")}, {})
    assert rep.missing_baseline == ["AT"] and rep.overall_mean is None


def test_extremes_higher_lower():
    ex = extremes({"BR": country("BR", E=0.50), "CN": country("CN", E=0.33)})
    assert ex["E"]["higher"] == {"country": "BR", "value": 0.50}
    assert ex["E"]["lower"] == {"country": "CN", "value": 0.33}


def test_extremes_single_country():
    ex = extremes({"JP": country("JP")})
    assert all(ex[d]["higher"]["country"] == ex[d]["lower"]["country"] == "JP" for d in "OCEAN")


def test_extremes_ties_and_order():
    scores = {"JP": country("JP", O=0.7), "AT": country("AT", O=0.7), "BR": country("BR", O=0.1)}
    ex = extremes(scores)
    assert ex["O"]["higher"]["country"] == "AT"
    assert ex["C"]["lower"]["country"] == "AT"
    assert extremes(dict(reversed(list(scores.items())))) == ex


def test_emit_report_deterministic_and_complete():
    scores = {"BR": country("BR", E=0.5), "CN": country("CN", E=0.33)}
    bases = {"BR": LiteratureBaseline("BR", 0.5, 0.5, 0.4, 0.5, 0.5, source="example")}
    a = emit_report(compute_errors(scores, bases), scores, bases)
    b = emit_report(compute_errors(dict(reversed(scores.items())), bases), dict(reversed(scores.items())), bases)
    assert a == b
    doc = json.loads(a[0])
    assert doc["countries"]["BR"]["error_pct"]["E"] == pytest.approx(25.0)
    assert "error_pct" not in doc["countries"]["CN"]
    assert doc["missing_baseline"] == ["CN"]
    assert doc["reference"]["published_hofstede_mean_error_pct"] == 53.0
    lines = a[1].decode().splitlines()
    assert lines[0] == "series,label,value"
    assert "computed_E,CN,0.33" in lines
    (err_line,) = [l for l in lines if l.startswith("error_pct_E,BR,")]
    assert float(err_line.split(",")[2]) == pytest.approx(25.0)
