"""Serialization: canonical JSON, hashing, CSV round trips."""

import pytest
from hypothesis import given, strategies as hst

from caterfuse import artifacts
from caterfuse.fusion import NoiseParams, Redundant, RepeatUntilSuccess, TreeEncoded


def test_canonical_json_sorts_keys():
    assert artifacts.canonical_json({"b": 1, "a": [2, 3]}) == '{"a":[2,3],"b":1}'


def test_canonical_json_rejects_nan():
    with pytest.raises(ValueError):
        artifacts.canonical_json({"x": float("nan")})


def test_config_hash_stable_and_sensitive():
    doc = {"scheme": {"kind": "tree", "b": 4}, "seed": 0}
    assert artifacts.config_hash(doc) == artifacts.config_hash(dict(reversed(doc.items())))
    assert artifacts.config_hash(doc) != artifacts.config_hash({**doc, "seed": 1})


def test_write_json_roundtrip(tmp_path):
    path = tmp_path / "doc.json"
    artifacts.write_json(path, {"z": 1, "a": [1.5, None]})
    assert artifacts.read_json(path) == {"z": 1, "a": [1.5, None]}
    first = path.read_bytes()
    artifacts.write_json(path, {"z": 1, "a": [1.5, None]})
    assert path.read_bytes() == first


SCHEMES = [Redundant(m=5), RepeatUntilSuccess(m=6), TreeEncoded(b=4, b_prep=7)]


@pytest.mark.parametrize("scheme", SCHEMES, ids=lambda s: s.name)
def test_scheme_doc_roundtrip(scheme):
    assert artifacts.scheme_from_doc(artifacts.scheme_to_doc(scheme)) == scheme


def test_scheme_from_doc_unknown_kind():
    with pytest.raises(ValueError, match="unknown scheme kind"):
        artifacts.scheme_from_doc({"kind": "ghz", "m": 2})


def test_noise_doc_roundtrip():
    noise = NoiseParams(p_fail=0.25, p_eras=0.05, rng_seed=9)
    assert artifacts.noise_from_doc(artifacts.noise_to_doc(noise)) == noise


def test_csv_roundtrip(tmp_path):
    rows = [
        {"a": 1, "b": 0.25, "c": "x"},
        {"a": 2, "b": float("nan"), "c": None},
    ]
    path = tmp_path / "t.csv"
    artifacts.write_csv(path, rows, ("a", "b", "c"))
    header, parsed = artifacts.read_csv(path)
    assert header == ["a", "b", "c"]
    assert parsed == [
        {"a": "1", "b": "0.25", "c": "x"},
        {"a": "2", "b": "", "c": ""},
    ]


def test_csv_float_cells_preserve_value():
    text = artifacts.rows_to_csv([{"v": 0.1 + 0.2}], ("v",))
    cell = text.splitlines()[1]
    assert float(cell) == 0.1 + 0.2


def test_parse_csv_rejects_empty():
    with pytest.raises(ValueError, match="empty CSV"):
        artifacts.parse_csv("")


def test_merge_rows_unions_headers_in_order():
    header, rows = artifacts.merge_rows(
        [
            (["a", "b"], [{"a": "1", "b": "2"}]),
            (["b", "c"], [{"b": "3", "c": "4"}]),
        ]
    )
    assert header == ["a", "b", "c"]
    assert rows == [{"a": "1", "b": "2"}, {"b": "3", "c": "4"}]


def test_summarize_columns_skips_non_numeric():
    summary = artifacts.summarize_columns(
        ["x", "label", "gap"],
        [
            {"x": "1.0", "label": "tree", "gap": ""},
            {"x": "3.0", "label": "rus", "gap": "2.5"},
        ],
    )
    assert summary["x"] == {"count": 2, "mean": 2.0, "min": 1.0, "max": 3.0}
    assert "label" not in summary
    assert summary["gap"]["count"] == 1


@given(
    hst.lists(
        hst.fixed_dictionaries(
            {
                "i": hst.integers(-100, 100),
                "f": hst.floats(allow_nan=False, allow_infinity=False, width=32),
                "s": hst.text(
                    alphabet=hst.characters(blacklist_categories=("Cs", "Cc")),
                    max_size=8,
                ),
            }
        ),
        max_size=6,
    )
)
def test_csv_text_roundtrip_any_rows(rows):
    text = artifacts.rows_to_csv(rows, ("i", "f", "s"))
    header, parsed = artifacts.parse_csv(text)
    assert header == ["i", "f", "s"]
    assert len(parsed) == len(rows)
    for row, back in zip(rows, parsed):
        assert int(back["i"]) == row["i"]
        assert float(back["f"]) == row["f"]
        assert back["s"] == row["s"]
