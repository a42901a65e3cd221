"""Tokenizer for the Cypher subset."""

from __future__ import annotations

from dataclasses import dataclass

KEYWORDS = frozenset(
    {
        "MATCH", "WHERE", "RETURN", "ORDER", "BY", "ASC", "DESC", "LIMIT", "AS",
        "AND", "OR", "NOT", "TRUE", "FALSE", "NULL", "MERGE",
    }
)

# Longest first so that "<=" wins over "<".
PUNCTUATION = ("<>", "<=", ">=", "->", "<-", "(", ")", "[", "]", "{", "}", ":", ",", ".", "-", "<", ">", "=", ";")

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", "\\": "\\", "'": "'", '"': '"'}


class QueryError(Exception):
    """Base class for lexing, parsing and semantic errors carrying a position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        self.detail = message
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)


class LexError(QueryError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # KEYWORD, IDENT, INT, FLOAT, STRING, PUNCT, EOF
    value: object
    line: int
    column: int
    text: str = ""

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.value!r}, {self.line}:{self.column})"


def tokenize(text: str) -> list[Token]:
    """Split query text into tokens, ending with an ``EOF`` token.

    Keywords are matched case-insensitively and normalised to upper case;
    identifiers keep their case. Backtick-quoted identifiers are supported;
    a doubled backtick inside one stands for a literal backtick.
    ``//`` starts a comment that runs to the end of the line.
    """
    tokens: list[Token] = []
    pos, line, col = 0, 1, 1
    n = len(text)

    def advance(count: int) -> None:
        nonlocal pos, line, col
        for ch in text[pos : pos + count]:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos += count

    while pos < n:
        ch = text[pos]
        if ch.isspace():
            advance(1)
            continue
        if text.startswith("//", pos):
            end = text.find("\n", pos)
            advance((n if end < 0 else end) - pos)
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            end = pos
            while end < n and (text[end].isalnum() or text[end] == "_"):
                end += 1
            word = text[pos:end]
            if word.upper() in KEYWORDS:
                tokens.append(Token("KEYWORD", word.upper(), start_line, start_col, word))
            else:
                tokens.append(Token("IDENT", word, start_line, start_col, word))
            advance(end - pos)
            continue
        if ch == "`":
            # a doubled backtick inside the quotes stands for one backtick
            end = pos + 1
            while True:
                end = text.find("`", end)
                if end < 0:
                    raise LexError("unterminated quoted identifier", start_line, start_col)
                if text.startswith("``", end):
                    end += 2
                    continue
                break
            name = text[pos + 1 : end].replace("``", "`")
            if not name:
                raise LexError("empty quoted identifier", start_line, start_col)
            tokens.append(Token("IDENT", name, start_line, start_col, text[pos : end + 1]))
            advance(end + 1 - pos)
            continue
        if ch.isdigit():
            end = pos
            while end < n and text[end].isdigit():
                end += 1
            is_float = False
            if end + 1 < n and text[end] == "." and text[end + 1].isdigit():
                is_float = True
                end += 1
                while end < n and text[end].isdigit():
                    end += 1
            if end < n and text[end] in "eE":
                probe = end + 1
                if probe < n and text[probe] in "+-":
                    probe += 1
                if probe < n and text[probe].isdigit():
                    is_float = True
                    end = probe
                    while end < n and text[end].isdigit():
                        end += 1
            literal = text[pos:end]
            if end < n and (text[end].isalpha() or text[end] == "_"):
                raise LexError(f"malformed number {text[pos:end + 1]!r}", start_line, start_col)
            value = float(literal) if is_float else int(literal)
            tokens.append(Token("FLOAT" if is_float else "INT", value, start_line, start_col, literal))
            advance(end - pos)
            continue
        if ch in "'\"":
            quote = ch
            chars = []
            end = pos + 1
            while True:
                if end >= n:
                    raise LexError("unterminated string literal", start_line, start_col)
                c = text[end]
                if c == quote:
                    break
                if c == "\\":
                    if end + 1 >= n:
                        raise LexError("unterminated string literal", start_line, start_col)
                    esc = text[end + 1]
                    if esc == "u":
                        digits = text[end + 2 : end + 6]
                        if len(digits) != 4 or any(d not in "0123456789abcdefABCDEF" for d in digits):
                            raise LexError("invalid \\u escape", start_line, start_col)
                        chars.append(chr(int(digits, 16)))
                        end += 6
                        continue
                    if esc not in _ESCAPES:
                        raise LexError(f"invalid escape \\{esc}", start_line, start_col)
                    chars.append(_ESCAPES[esc])
                    end += 2
                    continue
                chars.append(c)
                end += 1
            tokens.append(Token("STRING", "".join(chars), start_line, start_col, text[pos : end + 1]))
            advance(end + 1 - pos)
            continue
        for punct in PUNCTUATION:
            if text.startswith(punct, pos):
                tokens.append(Token("PUNCT", punct, start_line, start_col, punct))
                advance(len(punct))
                break
        else:
            raise LexError(f"illegal character {ch!r}", start_line, start_col)
    tokens.append(Token("EOF", None, line, col))
    return tokens
