import pytest

from heterodeploy.detector import CloneMatch, DetectorConfig, detect
from heterodeploy.extractor import (UnboundPlaceholder, bind_identifiers,
                                    extract_all, instantiate_kernel)
from heterodeploy.lexer import normalize, tokenize
from heterodeploy.patterns import CodePattern


def detect_on(source, db, theta=0.8):
    raw = tokenize(source)
    matches = detect(normalize(raw), db, DetectorConfig(20, theta),
                     raw_tokens=raw)
    return raw, matches


def single_artifact(source, db, theta=0.8):
    raw, matches = detect_on(source, db, theta)
    artifacts = extract_all(matches, raw, db)
    assert len(artifacts) == 1
    return artifacts[0]


def test_identity_binding_on_verbatim_paste(seed_db, fixtures_dir):
    art = single_artifact((fixtures_dir / "app_fft.c").read_text(), seed_db)
    assert art.pattern_id == "fft_butterfly"
    assert art.binding_complete
    assert art.conflicts == [] and art.missing_slots == []
    assert art.binding == {"P1": "k", "P2": "half", "P3": "tr", "P4": "wr",
                           "P5": "xr", "P6": "wi", "P7": "xi", "P8": "ti"}
    assert art.logic_id == "fft_radix2_v1"
    assert art.device_target == "FPGA"
    assert "${" not in art.kernel_source


def test_renamed_identifiers_rebind(seed_db, fixtures_dir):
    art = single_artifact((fixtures_dir / "app_conv.c").read_text(), seed_db)
    assert art.pattern_id == "conv2d_3x3"
    assert art.binding_complete
    assert art.binding == {"P1": "row", "P2": "height", "P3": "col",
                           "P4": "width", "P5": "sum", "P6": "dr",
                           "P7": "dc", "P8": "pix", "P9": "weight",
                           "P10": "out"}
    assert art.logic_id is None
    # the template text picked up the user's names
    assert "sum = sum + pix[" in art.kernel_source
    assert "out[row * width + col] = sum;" in art.kernel_source


def test_kernel_text_equals_hand_substitution(seed_db, fixtures_dir):
    art = single_artifact((fixtures_dir / "app_conv.c").read_text(), seed_db)
    template = seed_db.pattern("conv2d_3x3").kernel_template
    expected = template
    for slot in sorted(art.binding, key=lambda s: -int(s[1:])):
        expected = expected.replace("${" + slot + "}", art.binding[slot])
    assert art.kernel_source == expected


def test_conflicting_occurrences_are_reported_with_both_positions(
        seed_db, fixtures_dir):
    source = (fixtures_dir / "app_conflict.c").read_text()
    art = single_artifact(source, seed_db)
    assert art.pattern_id == "fft_butterfly"
    assert not art.binding_complete
    assert len(art.conflicts) == 1
    c = art.conflicts[0]
    assert c.slot == "P3"
    assert (c.first_lexeme, c.other_lexeme) == ("tr", "tmp")
    raw = tokenize(source)
    assert raw[c.first_token_index].text == "tr"
    assert raw[c.other_token_index].text == "tmp"
    assert c.first_token_index < c.other_token_index
    # conflicted slot is not also reported as missing
    assert art.missing_slots == []
    # unresolved placeholder stays in the partial kernel
    assert "${P3}" in art.kernel_source
    assert "wr[" in art.kernel_source  # other slots did substitute


def test_partial_match_missing_slots(seed_db, fixtures_dir):
    art = single_artifact((fixtures_dir / "app_partial.c").read_text(),
                          seed_db, theta=0.7)
    assert art.pattern_id == "cipher_rounds"
    assert not art.binding_complete
    assert art.conflicts == []
    assert art.missing_slots == ["P7"]
    # the matched prefix still binds, including the renamed key table
    assert art.binding["P6"] == "rk"
    assert "${P7}" in art.kernel_source


def test_extract_all_keeps_match_order(seed_db, fixtures_dir):
    raw, matches = detect_on((fixtures_dir / "app_all3.c").read_text(),
                             seed_db)
    artifacts = extract_all(matches, raw, seed_db)
    assert [a.pattern_id for a in artifacts] == [m.pattern_id for m in matches]
    assert all(a.binding_complete for a in artifacts)
    assert [a.source_line_range for a in artifacts] == \
        [m.source_line_range for m in matches]


def test_instantiate_kernel_requires_full_binding():
    pattern = CodePattern(id="p", name="p", device_target="GPU",
                          reference_snippet="", kernel_template="${P1} ${P2}")
    assert instantiate_kernel(pattern, {"P1": "a", "P2": "b"}) == "a b"
    with pytest.raises(UnboundPlaceholder) as err:
        instantiate_kernel(pattern, {"P1": "a"})
    assert err.value.index == 2


def test_bind_identifiers_alignment(seed_db, fixtures_dir):
    source = (fixtures_dir / "app_fft.c").read_text()
    raw, matches = detect_on(source, seed_db)
    outcome = bind_identifiers(matches[0], raw,
                               seed_db.pattern("fft_butterfly"))
    assert outcome.conflicts == []
    assert outcome.binding["P2"] == "half"
