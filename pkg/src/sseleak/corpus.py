"""Document corpora, keyword universes, and binary incidence indexes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

# Tokenizer contract: lowercase, strip non-alphabetic characters, drop short
# tokens, then drop caller-supplied stopwords.
MIN_TOKEN_LEN = 3


@dataclass(frozen=True)
class Document:
    doc_id: str
    keywords: frozenset[str]


@dataclass
class Corpus:
    """An ordered document collection; ids must be unique."""

    documents: list[Document]
    provenance: str = "loaded"  # loaded | synthetic | derived

    def __post_init__(self):
        if not self.documents:
            raise ValueError("corpus must contain at least one document")
        ids = {d.doc_id for d in self.documents}
        if len(ids) != len(self.documents):
            raise ValueError("corpus contains duplicate document ids")

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)


class KeywordUniverse:
    """Ordered, duplicate-free keyword list.

    Positions are stable and define the row indexing of every matrix built
    downstream, so two universes compare equal only when the order matches.
    """

    def __init__(self, keywords: Iterable[str]):
        self.keywords: tuple[str, ...] = tuple(keywords)
        self._index = {kw: i for i, kw in enumerate(self.keywords)}
        if len(self._index) != len(self.keywords):
            raise ValueError("keyword universe contains duplicates")

    def __len__(self) -> int:
        return len(self.keywords)

    def __iter__(self) -> Iterator[str]:
        return iter(self.keywords)

    def __getitem__(self, i: int) -> str:
        return self.keywords[i]

    def __contains__(self, keyword: str) -> bool:
        return keyword in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, KeywordUniverse) and self.keywords == other.keywords

    def __hash__(self):
        return hash(self.keywords)

    def __repr__(self) -> str:
        return f"KeywordUniverse({len(self)} keywords)"

    def index_of(self, keyword: str) -> int:
        return self._index[keyword]


@dataclass
class BinaryIndex:
    """Keyword-by-document incidence matrix.

    ``matrix[i, j] == 1`` iff document ``j`` is returned for keyword ``i``.
    Columns appended by padding defenses are counted in ``fake_doc_count``
    (and therefore in ``n_docs``).
    """

    universe: KeywordUniverse
    matrix: np.ndarray
    fake_doc_count: int = 0

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.uint8)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.universe):
            raise ValueError("index matrix must be |universe| x n_docs")
        if self.matrix.size and self.matrix.max() > 1:
            raise ValueError("index matrix entries must be 0/1")

    @property
    def n_docs(self) -> int:
        return int(self.matrix.shape[1])

    def volumes(self) -> np.ndarray:
        """Document count per keyword (row sums)."""
        return self.matrix.sum(axis=1, dtype=np.int64)


def tokenize(text: str, stopwords: frozenset[str] | set[str] = frozenset()) -> list[str]:
    """Deterministic minimal tokenizer; see MIN_TOKEN_LEN."""
    out = []
    for raw in text.lower().split():
        tok = "".join(ch for ch in raw if ch.isalpha())
        if len(tok) >= MIN_TOKEN_LEN and tok not in stopwords:
            out.append(tok)
    return out


def load_corpus(path: str | Path, format: str,
                stopwords: frozenset[str] | set[str] = frozenset()) -> Corpus:
    """Load documents from a jsonl file or a directory of text files.

    jsonl lines carry ``{"id": ..., "keywords": [...]}`` and are used verbatim;
    text_dir files are tokenized (one document per file, id = file name).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus path does not exist: {path}")
    if format == "jsonl":
        docs = _load_jsonl(path)
    elif format == "text_dir":
        docs = _load_text_dir(path, stopwords)
    else:
        raise ValueError(f"unknown corpus format: {format!r}")
    if not docs:
        raise ValueError(f"empty corpus: {path}")
    return Corpus(docs, provenance="loaded")


def _load_jsonl(path: Path) -> list[Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed json ({exc.msg})") from exc
            if (not isinstance(obj, dict) or "id" not in obj
                    or not isinstance(obj.get("keywords"), list)):
                raise ValueError(
                    f"{path}:{lineno}: expected object with 'id' and 'keywords' list")
            docs.append(Document(str(obj["id"]), frozenset(map(str, obj["keywords"]))))
    return docs


def _load_text_dir(path: Path, stopwords) -> list[Document]:
    docs = []
    # sorted for a stable document order
    for file in sorted(p for p in path.iterdir() if p.is_file()):
        text = file.read_text(encoding="utf-8", errors="replace")
        docs.append(Document(file.name, frozenset(tokenize(text, stopwords))))
    return docs


def generate_zipf_corpus(n_docs: int, vocab_size: int, mean_doc_len: int,
                         zipf_exponent: float, seed: int) -> Corpus:
    """Synthesize a corpus whose keyword volumes follow a Zipfian law.

    Document lengths are Poisson(mean_doc_len) with a floor of one token;
    tokens are drawn i.i.d. from rank probabilities proportional to
    ``rank**-zipf_exponent`` and deduplicated per document. Keyword names are
    zero-padded by rank so lexicographic order equals rank order.
    """
    if min(n_docs, vocab_size, mean_doc_len) < 1:
        raise ValueError("n_docs, vocab_size and mean_doc_len must be >= 1")
    if zipf_exponent <= 0:
        raise ValueError("zipf_exponent must be > 0")
    rng = np.random.default_rng(seed)
    probs = np.arange(1, vocab_size + 1, dtype=np.float64) ** -zipf_exponent
    probs /= probs.sum()
    lengths = np.maximum(1, rng.poisson(mean_doc_len, size=n_docs))
    draws = rng.choice(vocab_size, size=int(lengths.sum()), p=probs)

    kw_width = len(str(vocab_size))
    names = [f"kw{r:0{kw_width}d}" for r in range(1, vocab_size + 1)]
    id_width = len(str(n_docs - 1)) if n_docs > 1 else 1

    docs = []
    pos = 0
    for i, length in enumerate(lengths):
        chunk = draws[pos:pos + length]
        pos += length
        docs.append(Document(f"doc{i:0{id_width}d}",
                             frozenset(names[r] for r in chunk)))
    return Corpus(docs, provenance="synthetic")


def top_volume_universe(corpus: Corpus, size: int,
                        stopwords: frozenset[str] | set[str] = frozenset()) -> KeywordUniverse:
    """The ``size`` non-stopword keywords with the highest document counts.

    Ties break lexicographically ascending, so the result is deterministic and
    ordered by decreasing volume.
    """
    counts: dict[str, int] = {}
    for doc in corpus:
        for kw in doc.keywords:
            if kw not in stopwords:
                counts[kw] = counts.get(kw, 0) + 1
    if len(counts) < size:
        raise ValueError(
            f"corpus has only {len(counts)} distinct non-stopword keywords, need {size}")
    ranked = sorted(counts, key=lambda kw: (-counts[kw], kw))
    return KeywordUniverse(ranked[:size])


def split_corpus(corpus: Corpus, fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Random disjoint partition; the first part gets round(fraction * n) docs
    (round half up)."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    n = len(corpus)
    n_real = int(math.floor(fraction * n + 0.5))
    perm = np.random.default_rng(seed).permutation(n)
    real_ids = np.sort(perm[:n_real])
    sim_ids = np.sort(perm[n_real:])
    docs = corpus.documents
    return (Corpus([docs[i] for i in real_ids], provenance="derived"),
            Corpus([docs[i] for i in sim_ids], provenance="derived"))


def build_index(corpus: Corpus, universe: KeywordUniverse) -> BinaryIndex:
    """Incidence matrix over ``universe``; keywords outside it are ignored."""
    matrix = np.zeros((len(universe), len(corpus)), dtype=np.uint8)
    lookup = universe._index
    for j, doc in enumerate(corpus):
        for kw in doc.keywords:
            i = lookup.get(kw)
            if i is not None:
                matrix[i, j] = 1
    return BinaryIndex(universe, matrix, fake_doc_count=0)
