"""Tokenizer and normalizer for C-like source text.

tokenize() turns source text into a flat token stream; comments and
preprocessor lines produce no tokens. normalize() collapses identifiers
and literals into abstract classes so that two token sequences can be
compared up to consistent renaming and literal changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError

KEYWORD = "KEYWORD"
IDENT = "IDENT"
INT_LIT = "INT_LIT"
FLOAT_LIT = "FLOAT_LIT"
STRING_LIT = "STRING_LIT"
CHAR_LIT = "CHAR_LIT"
PUNCT = "PUNCT"

LITERAL_KINDS = frozenset({INT_LIT, FLOAT_LIT, STRING_LIT, CHAR_LIT})

#: Class names used by normalize(). Keywords and punctuation normalize to
#: their own lexeme, which never collides with these single capitals.
IDENT_CLASS = "P"
LITERAL_CLASS = "L"

C_KEYWORDS = frozenset("""
    auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    _Bool _Complex _Imaginary
""".split())

# Longest punctuators first; the scanner munches greedily.
_PUNCT3 = ("<<=", ">>=", "...")
_PUNCT2 = ("->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
           "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=", "##")
_PUNCT1 = frozenset("[](){}.&*+-~!/%<>^|?:;=,#")

_DIGITS = frozenset("0123456789")
_HEX_DIGITS = frozenset("0123456789abcdefABCDEF")
_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CHARS = _IDENT_START | _DIGITS


class LexError(InputError):
    """Tokenization failure located at a 1-based line and column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class UnterminatedString(LexError):
    pass


class UnterminatedComment(LexError):
    pass


class UnexpectedCharacter(LexError):
    pass


@dataclass
class Token:
    """One lexical token with its 1-based source position."""

    kind: str
    text: str
    line: int
    col: int


@dataclass
class NormalizedSequence:
    """Token classes plus, for each class, the index of the raw token it
    came from. tokens and origin always have equal length and origin is
    strictly increasing."""

    tokens: list[str] = field(default_factory=list)
    origin: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tokens)


def tokenize(source: str) -> list[Token]:
    """Lex C-subset source text into a token list.

    Line comments (//), block comments (/* */) and preprocessor lines
    (first non-blank character is '#') are skipped. Multi-character
    punctuation is matched greedily. String and character literals must
    close on the line they open; violations raise UnterminatedString,
    and an unclosed block comment raises UnterminatedComment, both
    carrying the position of the opener.
    """
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)
    line_blank = True  # only whitespace seen so far on the current line

    while i < n:
        ch = source[i]

        if ch == "\n":
            i += 1
            line += 1
            col = 1
            line_blank = True
            continue
        if ch in " \t\r\f\v":
            i += 1
            col += 1
            continue
        if ch == "#" and line_blank:
            # Preprocessor directive: discard the rest of the line.
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("/*", i):
            open_line, open_col = line, col
            i += 2
            col += 2
            while True:
                if i >= n:
                    raise UnterminatedComment("unterminated block comment",
                                              open_line, open_col)
                if source.startswith("*/", i):
                    i += 2
                    col += 2
                    break
                if source[i] == "\n":
                    i += 1
                    line += 1
                    col = 1
                else:
                    i += 1
                    col += 1
            continue

        line_blank = False
        tok_line, tok_col = line, col

        if ch == '"' or ch == "'":
            j = i + 1
            while j < n:
                c2 = source[j]
                if c2 == ch or c2 == "\n":
                    break
                if c2 == "\\":
                    if j + 1 < n and source[j + 1] == "\n":
                        break
                    j += 2
                else:
                    j += 1
            if j >= n or source[j] != ch:
                what = "string" if ch == '"' else "character"
                raise UnterminatedString(f"unterminated {what} literal",
                                         tok_line, tok_col)
            j += 1
            kind = STRING_LIT if ch == '"' else CHAR_LIT
            tokens.append(Token(kind, source[i:j], tok_line, tok_col))
            col += j - i
            i = j
            continue

        if ch in _DIGITS or (ch == "." and i + 1 < n and source[i + 1] in _DIGITS):
            j, kind = _scan_number(source, i)
            tokens.append(Token(kind, source[i:j], tok_line, tok_col))
            col += j - i
            i = j
            continue

        if ch in _IDENT_START:
            j = i + 1
            while j < n and source[j] in _IDENT_CHARS:
                j += 1
            text = source[i:j]
            kind = KEYWORD if text in C_KEYWORDS else IDENT
            tokens.append(Token(kind, text, tok_line, tok_col))
            col += j - i
            i = j
            continue

        punct = None
        for cand in _PUNCT3:
            if source.startswith(cand, i):
                punct = cand
                break
        if punct is None:
            for cand in _PUNCT2:
                if source.startswith(cand, i):
                    punct = cand
                    break
        if punct is None and ch in _PUNCT1:
            punct = ch
        if punct is None:
            raise UnexpectedCharacter(f"unexpected character {ch!r}",
                                      tok_line, tok_col)
        tokens.append(Token(PUNCT, punct, tok_line, tok_col))
        col += len(punct)
        i += len(punct)

    return tokens


def _scan_number(source: str, i: int) -> tuple[int, str]:
    """Scan an integer or floating literal starting at i.

    Returns (end index, token kind). Handles hex integers, optional
    fraction and exponent, and the usual u/U/l/L and f/F suffixes.
    """
    n = len(source)
    if (source.startswith(("0x", "0X"), i)
            and i + 2 < n and source[i + 2] in _HEX_DIGITS):
        j = i + 2
        while j < n and source[j] in _HEX_DIGITS:
            j += 1
        while j < n and source[j] in "uUlL":
            j += 1
        return j, INT_LIT

    j = i
    is_float = False
    while j < n and source[j] in _DIGITS:
        j += 1
    if j < n and source[j] == ".":
        is_float = True
        j += 1
        while j < n and source[j] in _DIGITS:
            j += 1
    if j < n and source[j] in "eE":
        k = j + 1
        if k < n and source[k] in "+-":
            k += 1
        if k < n and source[k] in _DIGITS:
            is_float = True
            j = k
            while j < n and source[j] in _DIGITS:
                j += 1
    if is_float:
        if j < n and source[j] in "fFlL":
            j += 1
        return j, FLOAT_LIT
    while j < n and source[j] in "uUlL":
        j += 1
    return j, INT_LIT


def normalize(tokens: list[Token]) -> NormalizedSequence:
    """Map raw tokens onto match classes.

    Identifiers become IDENT_CLASS, every literal becomes LITERAL_CLASS,
    and keywords and punctuation keep their own lexeme. The output has
    one class per input token, with origin[i] == i.
    """
    classes: list[str] = []
    for tok in tokens:
        if tok.kind == IDENT:
            classes.append(IDENT_CLASS)
        elif tok.kind in LITERAL_KINDS:
            classes.append(LITERAL_CLASS)
        else:
            classes.append(tok.text)
    return NormalizedSequence(classes, list(range(len(tokens))))
