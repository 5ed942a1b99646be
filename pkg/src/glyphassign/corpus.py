"""Alphabets, text normalization and letter bigram statistics."""
from __future__ import annotations

import os
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import matrix_csv


class ConfigError(ValueError):
    pass


class EmptyCorpusError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    language: str
    letters: tuple[str, ...]

    def __post_init__(self):
        letters = tuple(self.letters)
        if len(set(letters)) != len(letters):
            raise ValueError("alphabet letters must be unique")
        if any(len(ch) != 1 for ch in letters):
            raise ValueError("alphabet letters must be single code points")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def index(self) -> dict[str, int]:
        return {ch: i for i, ch in enumerate(self.letters)}


ENGLISH = Alphabet("english", tuple("abcdefghijklmnopqrstuvwxyz"))
BULGARIAN = Alphabet("bulgarian", tuple("абвгдежзийклмнопрстуфхцчшщъьюя"))
ARABIC = Alphabet("arabic", tuple(
    "ابتثجحخدذرزسشص"
    "ضطظعغفقكلمنهوي"))

ALPHABETS = {a.language: a for a in (ARABIC, BULGARIAN, ENGLISH)}

_TATWEEL = "ـ"
_HAMZA = "ء"
_ARABIC_MAP = {"ى": "ي", "ة": "ت"}  # alif maqsura -> yeh, ta marbuta -> teh


def get_alphabet(language) -> Alphabet:
    if isinstance(language, Alphabet):
        return language
    try:
        return ALPHABETS[language]
    except KeyError:
        raise ConfigError(f"unknown language {language!r}; choose from {sorted(ALPHABETS)}") from None


def _prepare(raw: str, language: str) -> str:
    if language == "english":
        return raw.casefold()
    if language == "bulgarian":
        return unicodedata.normalize("NFC", raw).casefold().replace("ѝ", "и")
    if language == "arabic":
        text = unicodedata.normalize("NFKD", raw)
        out = []
        for ch in text:
            if ch == _TATWEEL or unicodedata.category(ch) == "Mn":
                continue
            if ch == _HAMZA:
                out.append(" ")
                continue
            out.append(_ARABIC_MAP.get(ch, ch))
        return "".join(out)
    # custom alphabets
    return unicodedata.normalize("NFC", raw).casefold()


def normalize_text(raw: str, language) -> list[str]:
    """Maximal runs of in-alphabet letters after language-specific cleanup."""
    alpha = get_alphabet(language)
    keep = frozenset(alpha.letters)
    runs = []
    cur: list[str] = []
    for ch in _prepare(raw, alpha.language):
        if ch in keep:
            cur.append(ch)
        elif cur:
            runs.append("".join(cur))
            cur = []
    if cur:
        runs.append("".join(cur))
    return runs


@dataclass(frozen=True, eq=False)
class BigramMatrix:
    """Letter transition statistics; ``probs[i, j] = P(next = j | current = i)``.

    ``counts`` is ``None`` when the matrix was loaded from a probability CSV.
    """

    alphabet: Alphabet
    probs: np.ndarray
    counts: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.alphabet)
        p = np.array(self.probs, dtype=np.float64)
        if p.shape != (n, n):
            raise ValueError(f"probs shape {p.shape} does not match alphabet size {n}")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("bigram probabilities must be finite and non-negative")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        if self.counts is not None:
            c = np.array(self.counts, dtype=np.int64)
            if c.shape != (n, n) or np.any(c < 0):
                raise ValueError("counts must be a non-negative L x L integer matrix")
            c.setflags(write=False)
            object.__setattr__(self, "counts", c)

    @classmethod
    def from_counts(cls, alphabet: Alphabet, counts) -> "BigramMatrix":
        c = np.asarray(counts, dtype=np.int64)
        tot = c.sum(axis=1, keepdims=True)
        probs = np.divide(c, tot, out=np.zeros(c.shape), where=tot > 0)
        return cls(alphabet, probs, c)

    @property
    def size(self) -> int:
        return len(self.alphabet)


def document_counts(text: str, alphabet: Alphabet):
    """(bigram counts, number of in-alphabet letters) for one document."""
    idx = alphabet.index()
    n = len(alphabet)
    counts = np.zeros(n * n, dtype=np.int64)
    letters = 0
    for run in normalize_text(text, alphabet):
        letters += len(run)
        if len(run) < 2:
            continue
        codes = np.fromiter((idx[ch] for ch in run), dtype=np.int64, count=len(run))
        counts += np.bincount(codes[:-1] * n + codes[1:], minlength=n * n)
    return counts.reshape(n, n), letters


def count_bigrams(documents: Iterable[str], language, min_letters: int = 500) -> BigramMatrix:
    """Accumulate within-run bigrams over documents with >= min_letters letters."""
    if min_letters < 0:
        raise ValueError("min_letters must be >= 0")
    alpha = get_alphabet(language)
    n = len(alpha)
    total = np.zeros((n, n), dtype=np.int64)
    kept = 0
    seen = 0
    for doc in documents:
        seen += 1
        c, letters = document_counts(doc, alpha)
        if letters < min_letters:
            continue
        total += c
        kept += 1
    if kept == 0:
        raise EmptyCorpusError(
            f"no documents left after filtering: {seen} read, none with at least "
            f"min_letters={min_letters} valid {alpha.language} letters")
    return BigramMatrix.from_counts(alpha, total)


def read_documents(path, one_per_line: bool = False) -> list[str]:
    """Documents from a directory of UTF-8 files, a single file, or its lines.

    Directory entries are read in sorted name order; ``.txt`` files only when
    any exist, otherwise every regular file.
    """
    if os.path.isdir(path):
        names = sorted(n for n in os.listdir(path) if os.path.isfile(os.path.join(path, n)))
        txt = [n for n in names if n.endswith(".txt")]
        files = [os.path.join(path, n) for n in (txt or names)]
    elif os.path.isfile(path):
        files = [path]
    else:
        raise FileNotFoundError(f"corpus path {path} does not exist")
    docs = []
    for f in files:
        with open(f, encoding="utf-8") as fh:
            text = fh.read()
        if one_per_line:
            docs.extend(line for line in text.split("\n") if line.strip())
        else:
            docs.append(text)
    return docs


def write_bigram_csv(m: BigramMatrix, path) -> None:
    matrix_csv.write_matrix_csv(path, m.alphabet.letters, m.probs)


def read_bigram_csv(path, language: str | None = None, tol: float = 1e-6) -> BigramMatrix:
    """Load transition probabilities.

    Non-zero rows must sum to 1 within ``tol`` and are rescaled to sum to 1.
    The alphabet is matched to a preset when the labels agree, otherwise it
    becomes a ``custom`` alphabet.
    """
    labels, values = matrix_csv.read_matrix_csv(path)
    for c, lab in enumerate(labels, start=2):
        if len(lab) != 1:
            raise matrix_csv.MatrixCSVError(f"{path}: row 1, column {c}: label {lab!r} is not a single letter")
    sums = values.sum(axis=1)
    for r, sm in enumerate(sums):
        if sm != 0 and abs(sm - 1.0) > tol:
            raise matrix_csv.MatrixCSVError(f"{path}: row {r + 2}: probabilities sum to {sm:.12g}, expected 1")
    fix = (sums > 0) & (np.abs(sums - 1.0) > 1e-12)
    values[fix] = values[fix] / sums[fix, None]
    letters = tuple(labels)
    if language is not None:
        alpha = get_alphabet(language)
        if alpha.letters != letters:
            raise matrix_csv.MatrixCSVError(f"{path}: labels do not match the {alpha.language} alphabet")
    else:
        alpha = next((a for a in ALPHABETS.values() if a.letters == letters), Alphabet("custom", letters))
    return BigramMatrix(alpha, values)
