"""Backend-independent tokenization used for length accounting and flattening.

Punctuation marks , . ? ! are split into standalone tokens.  A colon is
split too, except when it sits between two digits (clock times such as
13:00 stay as one token).  Placeholders like [value_name] and special
delimiter tokens like <EOB> are never split.
"""

import re

_PUNCT = re.compile(r"([,.?!])")
_COLON = re.compile(r"(?<!\d):|:(?!\d)")


def tokenize(text: str) -> list[str]:
    """Split text into whitespace tokens after punctuation separation."""
    text = _PUNCT.sub(r" \1 ", text)
    text = _COLON.sub(" : ", text)
    return text.split()


def count_tokens(text: str) -> int:
    return len(tokenize(text))


def detokenize(tokens: list[str]) -> str:
    """Inverse of tokenize up to whitespace: single-space join."""
    return " ".join(tokens)
