"""From-scratch inverted index with BM25 scoring.

The thread index is built offline and persisted with a versioned header; the
answer index is rebuilt per query over the surviving threads' answers and
never touches disk. IDF inside BM25 is log10(N/df), the same definition the
rest of the scoring stack uses.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import Thread

INDEX_FORMAT = "crowdrank-index"
INDEX_VERSION = 1

DEFAULT_K = 1.2
DEFAULT_B = 0.9


@dataclass
class IndexStats:
    n_docs: int = 0
    df: dict[str, int] = field(default_factory=dict)
    avgdl: float = 0.0
    k: float = DEFAULT_K
    b: float = DEFAULT_B


class InvertedIndex:
    """postings: term -> [(doc_id, tf)] sorted by doc_id; doc_len: id -> |T|."""

    def __init__(self, k: float = DEFAULT_K, b: float = DEFAULT_B):
        self.postings: dict[str, list[tuple[int, int]]] = {}
        self.doc_len: dict[int, int] = {}
        self.stats = IndexStats(k=k, b=b)
        self._total_len = 0

    def add_document(self, doc_id: int, bag: Mapping[str, int]) -> None:
        if doc_id in self.doc_len:
            raise ValueError(f"duplicate doc_id {doc_id}")
        length = sum(bag.values())
        self.doc_len[doc_id] = length
        for term, tf in bag.items():
            plist = self.postings.setdefault(term, [])
            plist.append((doc_id, tf))
            self.stats.df[term] = len(plist)
        self.stats.n_docs += 1
        self._total_len += length
        self.stats.avgdl = self._total_len / self.stats.n_docs

    def finalize(self) -> None:
        for plist in self.postings.values():
            plist.sort(key=lambda e: e[0])


def build_index(docs: Mapping[int, Mapping[str, int]], k: float = DEFAULT_K,
                b: float = DEFAULT_B) -> InvertedIndex:
    """Index a doc_id -> bag mapping. An empty mapping yields a valid empty index."""
    index = InvertedIndex(k=k, b=b)
    for doc_id in sorted(docs):
        index.add_document(doc_id, docs[doc_id])
    index.finalize()
    return index


def bm25_search(index: InvertedIndex, query: Iterable[str], top_n: int) -> list[tuple[int, float]]:
    """Rank documents against the query bag.

    Scores follow the saturating term-frequency formula with
    idf(q) = log10(N/df); zero-score documents are excluded; ties break by
    ascending doc_id; at most top_n results.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    stats = index.stats
    if stats.n_docs == 0:
        return []
    scores: dict[int, float] = {}
    k, b, avgdl = stats.k, stats.b, stats.avgdl
    for term in sorted(set(query)):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = math.log10(stats.n_docs / stats.df[term])
        for doc_id, tf in plist:
            norm = tf + k * (1.0 - b + b * index.doc_len[doc_id] / avgdl)
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (k + 1.0) / norm
    ranked = [(doc_id, s) for doc_id, s in scores.items() if s > 0.0]
    ranked.sort(key=lambda e: (-e[1], e[0]))
    return ranked[:top_n]


def thread_document_bag(thread: Thread) -> Counter:
    """Indexed text of a thread: title + question body + answers' bodies + answers' code."""
    bag = Counter(thread.question.title_bag)
    bag.update(thread.question.body_bag)
    for answer in thread.answers:
        bag.update(answer.body_bag)
        bag.update(answer.code_bag)
    return bag


def answer_document_bag(thread: Thread, answer_index: int) -> Counter:
    """Indexed text of an answer: its body + code + parent title + parent body."""
    answer = thread.answers[answer_index]
    bag = Counter(answer.body_bag)
    bag.update(answer.code_bag)
    bag.update(thread.question.title_bag)
    bag.update(thread.question.body_bag)
    return bag


def build_thread_index(threads: Iterable[Thread], k: float = DEFAULT_K,
                       b: float = DEFAULT_B) -> InvertedIndex:
    docs = {t.question.id: thread_document_bag(t) for t in threads}
    return build_index(docs, k=k, b=b)


def build_ephemeral_answer_index(threads: Iterable[Thread], k: float = DEFAULT_K,
                                 b: float = DEFAULT_B) -> InvertedIndex:
    """Per-query index over the retained answers of the surviving threads."""
    docs: dict[int, Counter] = {}
    for thread in threads:
        for i in range(len(thread.answers)):
            docs[thread.answers[i].id] = answer_document_bag(thread, i)
    return build_index(docs, k=k, b=b)


def save_index(index: InvertedIndex, path: str | Path, meta: dict | None = None) -> None:
    """Persist with a versioned header; serialization is canonical for determinism."""
    payload = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "k": index.stats.k,
        "b": index.stats.b,
        "doc_len": {str(d): l for d, l in sorted(index.doc_len.items())},
        "postings": {t: sorted(p) for t, p in index.postings.items()},
        "meta": meta or {},
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_index(path: str | Path) -> InvertedIndex:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != INDEX_FORMAT:
        raise ValueError(f"not an index file: {path}")
    if payload.get("version") != INDEX_VERSION:
        raise ValueError(f"unsupported index version {payload.get('version')}")
    index = InvertedIndex(k=payload["k"], b=payload["b"])
    index.doc_len = {int(d): int(l) for d, l in payload["doc_len"].items()}
    index.postings = {t: [(int(d), int(tf)) for d, tf in p]
                      for t, p in payload["postings"].items()}
    index.stats.n_docs = len(index.doc_len)
    index.stats.df = {t: len(p) for t, p in index.postings.items()}
    index._total_len = sum(index.doc_len.values())
    if index.stats.n_docs:
        index.stats.avgdl = index._total_len / index.stats.n_docs
    return index
