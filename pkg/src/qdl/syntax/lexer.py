from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import QdlSyntaxError
from .ast import Span

KEYWORDS = {
    "forall", "exists", "forallE", "existsE", "true", "false", "if", "then",
    "else", "new", "upd", "sort", "func", "var", "problem", "invariant",
    "variant", "velocity", "of", "def", "with",
}

# longest symbols first
SYMBOLS = [
    "<->", ":=", "++", "->", "<=", ">=", "!=", "''",
    "'", "=", "<", ">", "+", "-", "*", "^", "/", "(", ")", "[", "]", "{",
    "}", ",", ";", ".", "?", "&", "|", "!", ":", "@",
]

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+|//[^\n]*)"
    r"|(?P<num>[0-9]+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\$[0-9]+)?|\$[0-9]+)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in SYMBOLS) + ")"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num" | "ident" | "kw" | "sym" | "eof"
    text: str
    span: Span


def tokenize(text: str, allow_internal: bool = False) -> list:
    """Split source text into tokens.

    Internal names (``sk$3``, ``$7``) are only accepted when
    ``allow_internal`` is set; problem files cannot mention them.
    """
    out = []
    pos, line, col = 0, 1, 1
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if not m:
            raise QdlSyntaxError(f"unexpected character {text[pos]!r}", Span(line, col, pos, pos + 1))
        kind = m.lastgroup
        s = m.group(0)
        span = Span(line, col, pos, m.end())
        if kind == "ident":
            if "$" in s and not allow_internal:
                raise QdlSyntaxError(f"reserved name {s!r}", span)
            out.append(Token("kw" if s in KEYWORDS else "ident", s, span))
        elif kind != "ws":
            out.append(Token(kind, s, span))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", Span(line, col, pos, pos)))
    return out
