"""Text featurization: cleaning, tokenization, TF-IDF, hashed and
precomputed embeddings.

All featurizers are pure functions of their inputs plus config/seed, so
repeated runs produce bit-identical vectors.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

_WS_RE = re.compile(r"\s+")
_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Digits commonly produced by OCR in place of letters. Applied only inside
# runs that contain at least one letter, so standalone numbers survive.
_OCR_CONFUSABLES = {"0": "o", "1": "l"}


class TextError(ValueError):
    """Malformed embedding file or invalid featurizer input."""


def _fix_ocr_confusables(text: str) -> str:
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if not ch.isalnum():
            out.append(ch)
            i += 1
            continue
        j = i
        while j < n and text[j].isalnum():
            j += 1
        run = text[i:j]
        if any(c.isalpha() for c in run):
            run = "".join(_OCR_CONFUSABLES.get(c, c) for c in run)
        out.append(run)
        i = j
    return "".join(out)


def normalize_text(raw: str) -> str:
    """Clean a document: lowercase, drop control characters, collapse
    whitespace, NFC-normalize, and undo common OCR digit/letter swaps.

    Idempotent: normalizing twice equals normalizing once.
    """
    text = raw.lower()
    text = "".join(
        ch for ch in text if not (unicodedata.category(ch) == "Cc" and not ch.isspace())
    )
    text = _WS_RE.sub(" ", text).strip()
    text = unicodedata.normalize("NFC", text)
    return _fix_ocr_confusables(text)


def load_stopwords(path=None) -> frozenset[str]:
    """Load a stop-word list (default: the bundled English list)."""
    if path is None:
        content = resources.files("foodrisk").joinpath("stopwords.txt").read_text("utf-8")
    else:
        content = Path(path).read_text(encoding="utf-8")
    words = set()
    for line in content.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def tokenize(cleaned: str, stopwords: frozenset[str] | set[str] = frozenset()) -> list[str]:
    """Split normalized text into lowercase alphanumeric tokens.

    Tokens shorter than two characters and stop-words are dropped;
    original order is preserved.
    """
    return [t for t in _TOKEN_RE.findall(cleaned) if len(t) >= 2 and t not in stopwords]


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    num_docs: int
    max_features: int

    def __post_init__(self):
        idf = np.asarray(self.idf, dtype=float)
        if idf.shape != (len(self.vocabulary),):
            raise TextError("idf length must match vocabulary size")
        if not np.all(np.isfinite(idf)) or np.any(idf < 0):
            raise TextError("idf values must be finite and >= 0")
        object.__setattr__(self, "idf", idf)

    def to_dict(self) -> dict:
        tokens = sorted(self.vocabulary, key=self.vocabulary.get)
        return {
            "tokens": tokens,
            "idf": [float(v) for v in self.idf],
            "num_docs": self.num_docs,
            "max_features": self.max_features,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TfidfModel":
        vocab = {t: i for i, t in enumerate(d["tokens"])}
        return cls(
            vocabulary=vocab,
            idf=np.array(d["idf"], dtype=float),
            num_docs=int(d["num_docs"]),
            max_features=int(d["max_features"]),
        )


def fit_tfidf(corpus: list[list[str]], max_features: int = 2048) -> TfidfModel:
    """Fit vocabulary and smoothed IDF weights on tokenized documents.

    Vocabulary keeps the ``max_features`` most document-frequent tokens,
    ties broken lexicographically; idf(t) = ln((1 + N) / (1 + df(t))) + 1.
    """
    if not corpus:
        raise TextError("cannot fit TF-IDF on an empty corpus")
    if max_features < 1:
        raise TextError(f"max_features must be >= 1, got {max_features}")
    df = Counter()
    for tokens in corpus:
        df.update(set(tokens))
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))[:max_features]
    vocabulary = {tok: i for i, (tok, _) in enumerate(ranked)}
    n = len(corpus)
    idf = np.array(
        [math.log((1 + n) / (1 + df[tok])) + 1.0 for tok, _ in ranked], dtype=float
    )
    return TfidfModel(vocabulary=vocabulary, idf=idf, num_docs=n, max_features=max_features)


def transform_tfidf(model: TfidfModel, tokens: list[str]) -> np.ndarray:
    """Weighted term-frequency vector, L2-normalized when nonzero.

    Out-of-vocabulary tokens are ignored; an all-OOV document maps to the
    zero vector.
    """
    vec = np.zeros(len(model.vocabulary), dtype=float)
    for tok in tokens:
        idx = model.vocabulary.get(tok)
        if idx is not None:
            vec[idx] += 1.0
    vec *= model.idf
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def _stable_hash(token: str, seed: int) -> int:
    key = int(seed).to_bytes(8, "little", signed=True)
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")


def hash_embed(tokens: list[str], dim: int = 256, seed: int = 0) -> np.ndarray:
    """Signed feature-hashing embedding of a token bag.

    Each token maps to a bucket and a sign through a seeded hash that is
    stable across runs and platforms; the result is L2-normalized when
    nonzero and invariant to token order.
    """
    if dim < 8:
        raise TextError(f"hash embedding dim must be >= 8, got {dim}")
    vec = np.zeros(dim, dtype=float)
    for tok in tokens:
        h = _stable_hash(tok, seed)
        idx = h % dim
        sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
        vec[idx] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


@dataclass(frozen=True)
class EmbeddingTable:
    """Precomputed per-record text vectors ingested from a JSONL file."""

    dim: int | None
    entries: dict[str, np.ndarray]

    def lookup(self, record_id: str) -> np.ndarray:
        if self.dim is None:
            raise TextError("embedding table is empty; no dimension defined")
        try:
            return self.entries[record_id]
        except KeyError:
            raise TextError(f"no embedding for record {record_id!r}") from None


def load_embeddings(path) -> EmbeddingTable:
    """Parse a JSONL embedding file: one ``{"record_id", "vector"}`` object
    per line.

    Rows must share one dimensionality; duplicate record ids keep the last
    row with a warning.
    """
    entries: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rid = obj["record_id"]
                vector = obj["vector"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise TextError(f"{path}:{lineno}: malformed embedding row: {exc}") from exc
            arr = np.asarray(vector, dtype=float)
            if arr.ndim != 1:
                raise TextError(f"{path}:{lineno}: vector must be a flat list")
            if not np.all(np.isfinite(arr)):
                raise TextError(f"{path}:{lineno}: vector contains NaN or Inf")
            if dim is None:
                dim = int(arr.shape[0])
            elif arr.shape[0] != dim:
                raise TextError(
                    f"{path}:{lineno}: vector has dim {arr.shape[0]}, expected {dim}"
                )
            if rid in entries:
                log.warning("duplicate embedding for record %r at line %d; keeping last", rid, lineno)
            entries[str(rid)] = arr
    return EmbeddingTable(dim=dim, entries=entries)
