import pytest
from hypothesis import given, strategies as st

from heterodeploy import lexer
from heterodeploy.lexer import (CHAR_LIT, FLOAT_LIT, IDENT, INT_LIT, KEYWORD,
                                PUNCT, STRING_LIT, LexError, normalize,
                                tokenize)


def kinds(source):
    return [t.kind for t in tokenize(source)]


def texts(source):
    return [t.text for t in tokenize(source)]


def test_simple_statement():
    toks = tokenize("int x = 42;")
    assert [(t.kind, t.text) for t in toks] == [
        (KEYWORD, "int"), (IDENT, "x"), (PUNCT, "="),
        (INT_LIT, "42"), (PUNCT, ";")]


def test_line_and_column_are_one_based():
    toks = tokenize("a\n  b")
    assert (toks[0].line, toks[0].col) == (1, 1)
    assert (toks[1].line, toks[1].col) == (2, 3)


def test_keywords_are_not_identifiers():
    assert kinds("while return for if") == [KEYWORD] * 4
    assert kinds("whiled returns fort") == [IDENT] * 3


def test_comments_are_skipped():
    assert texts("a /* b c */ d // e\nf") == ["a", "d", "f"]


def test_block_comment_may_span_lines():
    toks = tokenize("a /* one\ntwo */ b")
    assert [(t.text, t.line) for t in toks] == [("a", 1), ("b", 2)]


def test_unterminated_block_comment_reports_opener():
    with pytest.raises(LexError) as err:
        tokenize("x\n  /* never closed")
    assert "(line 2, col 3)" in str(err.value)


def test_preprocessor_lines_are_skipped():
    src = "#include <stdio.h>\n#define N 4\nint x = N;\n"
    assert texts(src) == ["int", "x", "=", "N", ";"]


def test_hash_mid_line_is_punctuation():
    # Only a line-leading hash starts a directive; elsewhere it is the
    # macro operator token.
    assert [(t.kind, t.text) for t in tokenize("a # b")] == [
        (IDENT, "a"), (PUNCT, "#"), (IDENT, "b")]
    assert texts("a ## b") == ["a", "##", "b"]


def test_string_and_char_literals():
    toks = tokenize('s = "a\\"b"; c = \'x\';')
    assert toks[2].kind == STRING_LIT
    assert toks[2].text == '"a\\"b"'
    assert toks[6].kind == CHAR_LIT
    assert toks[6].text == "'x'"


def test_unterminated_string_is_an_error():
    with pytest.raises(LexError):
        tokenize('"runs off the line\nnext')


def test_number_forms():
    assert kinds("10 0x1F 10u 3UL") == [INT_LIT] * 4
    assert kinds("1.5 .5 2. 1e3 1.5e-2 2.0f 3.f") == [FLOAT_LIT] * 7
    # a dot with no digits around it is punctuation
    assert kinds("a.b") == [IDENT, PUNCT, IDENT]


def test_maximal_munch_punctuation():
    assert texts("a<<=b") == ["a", "<<=", "b"]
    assert texts("a<<b") == ["a", "<<", "b"]
    assert texts("i++ + ++j") == ["i", "++", "+", "++", "j"]
    assert texts("x...") == ["x", "..."]


def test_unexpected_character_reports_position():
    with pytest.raises(LexError) as err:
        tokenize("int a = 1 @ 2;")
    assert "(line 1, col 11)" in str(err.value)


def test_normalize_classes_and_origin():
    seq = normalize(tokenize('if (count > 10) { name = "x"; }'))
    assert seq.tokens == ["if", "(", "P", ">", "L", ")", "{",
                          "P", "=", "L", ";", "}"]
    assert len(seq.tokens) == len(seq.origin)
    # origin points back at the raw token positions
    assert seq.origin == list(range(12))


def test_normalize_keeps_keywords_and_punct_verbatim():
    seq = normalize(tokenize("for (i = 0; i < n; i++) sum += a[i];"))
    assert "for" in seq.tokens
    assert "P" in seq.tokens
    assert "L" in seq.tokens
    assert "+=" in seq.tokens
    assert "i" not in seq.tokens


ident_st = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,8}", fullmatch=True)


@given(st.lists(ident_st, min_size=1, max_size=30))
def test_space_joined_identifiers_relex_one_token_each(names):
    source = " ".join(names)
    toks = tokenize(source)
    assert [t.text for t in toks] == names
    for t in toks:
        expected = KEYWORD if t.text in lexer.C_KEYWORDS else IDENT
        assert t.kind == expected


def test_empty_source_yields_no_tokens():
    assert tokenize("") == []
    seq = normalize([])
    assert seq.tokens == [] and seq.origin == []
