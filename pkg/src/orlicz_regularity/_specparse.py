"""Tiny recursive-descent parser for structured-text value expressions.

Grammar::

    expr  := NAME '(' args ')' | NUMBER | STRING | '(' expr ',' expr ')'
    args  := ( arg (',' arg)* )?
    arg   := ( NAME '=' )? expr
    NUMBER := float literal, or integer '/' integer (exact fraction)

Used for the phi-family, coefficient-field, domain and boundary-data specs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ConfigError

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_-]*)"
    r"|(?P<punct>[(),=/]))"
)


@dataclass
class Call:
    name: str
    args: list = field(default_factory=list)      # positional values
    kwargs: dict = field(default_factory=dict)    # name -> value

    def arg(self, i, key=None, default=None):
        if key is not None and key in self.kwargs:
            return self.kwargs[key]
        if i is not None and i < len(self.args):
            return self.args[i]
        return default


class _Tokens:
    def __init__(self, text):
        self.text = text
        self.items = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                if text[pos:].strip() == "":
                    break
                raise ConfigError(f"cannot tokenize {text[pos:]!r} (offset {pos})")
            self.items.append((m.lastgroup, m.group(m.lastgroup), pos))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.items[self.i] if self.i < len(self.items) else (None, None, len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.next()
        if text != value:
            raise ConfigError(f"expected {value!r} at offset {pos}, got {text!r}")


def _parse_number(tokens, first):
    value = float(first)
    kind, text, _ = tokens.peek()
    if text == "/":
        tokens.next()
        kind, text, pos = tokens.next()
        if kind != "num":
            raise ConfigError(f"expected denominator at offset {pos}")
        value = value / float(text)
    return value


def _parse_expr(tokens):
    kind, text, pos = tokens.next()
    if kind == "num":
        return _parse_number(tokens, text)
    if kind == "name":
        nkind, ntext, _ = tokens.peek()
        if ntext == "(":
            tokens.next()
            call = Call(text)
            _parse_args(tokens, call)
            tokens.expect(")")
            return call
        return text
    if text == "(":
        items = [_parse_expr(tokens)]
        while tokens.peek()[1] == ",":
            tokens.next()
            items.append(_parse_expr(tokens))
        tokens.expect(")")
        return tuple(items)
    raise ConfigError(f"unexpected token {text!r} at offset {pos}")


def _parse_args(tokens, call):
    if tokens.peek()[1] == ")":
        return
    while True:
        kind, text, pos = tokens.peek()
        key = None
        if kind == "name":
            save = tokens.i
            tokens.next()
            if tokens.peek()[1] == "=":
                tokens.next()
                key = text
            else:
                tokens.i = save
        value = _parse_expr(tokens)
        if key is None:
            call.args.append(value)
        else:
            if key in call.kwargs:
                raise ConfigError(f"duplicate keyword {key!r} at offset {pos}")
            call.kwargs[key] = value
        nkind, ntext, npos = tokens.peek()
        if ntext == ",":
            tokens.next()
            continue
        return


def parse_value(text):
    """Parse a full spec expression; raises ConfigError on trailing garbage."""
    tokens = _Tokens(text)
    value = _parse_expr(tokens)
    kind, tok, pos = tokens.peek()
    if kind is not None:
        raise ConfigError(f"trailing input {tok!r} at offset {pos}")
    return value
