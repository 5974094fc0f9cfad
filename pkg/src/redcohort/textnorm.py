"""Text normalization: tokenizer plus lookup-table lemmatization."""

from __future__ import annotations

import re
from pathlib import Path

# Maximal runs of Unicode letters/digits; apostrophes are kept when they sit
# between two such runs ("don't" is one token). Underscore counts as
# punctuation here, not as a word character.
_TOKEN_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*")


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into tokens."""
    return _TOKEN_RE.findall(text.lower())


def normalize_text(raw: str, lemma_table: dict[str, str] | None = None) -> list[str]:
    """Tokenize ``raw`` and map each token through the lemma table.

    Tokens missing from the table pass through unchanged. An empty or
    punctuation-only string yields an empty list.
    """
    tokens = tokenize(raw)
    if not lemma_table:
        return tokens
    return [lemma_table.get(tok, tok) for tok in tokens]


def load_lemma_table(path: str | Path) -> dict[str, str]:
    """Read a two-column TSV (token TAB lemma) into a lookup table.

    Both columns are lowercased; on duplicate tokens the last row wins.
    Blank lines are skipped; anything else with fewer than two columns is an
    error, since a silently dropped row would change counting downstream.
    """
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected 'token<TAB>lemma'")
            token = parts[0].strip().lower()
            lemma = parts[1].strip().lower()
            if token and lemma:
                table[token] = lemma
    return table
