"""End-to-end online search: query -> threads -> two-stage rank -> answers.

The funnel: BM25 over the thread index (top 500), optional thread-level
antonym filter, stage-1 fusion of the four similarity features (keep 250),
stage-2 fusion of all seven thread features (keep 100), ephemeral BM25 over
the surviving answers (top 150), optional answer-level antonym filter, then
four-feature answer fusion and the top-N cut.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import features as ft
from .antonyms import AntonymDictionary, AntonymQueryContext
from .corpus import Thread, preprocess
from .embeddings import EmbeddingStore, IdfMap, asym_score, cosine, sentence_embed
from .index import (InvertedIndex, bm25_search,
                    build_ephemeral_answer_index, build_thread_index)


@dataclass
class QueryContext:
    raw_query: str
    bag: Counter
    antonym_ctx: AntonymQueryContext
    sentence_vec: np.ndarray


@dataclass
class ResultEntry:
    answer_id: int
    thread_id: int
    score: float
    answer_body: str
    thread_title: str
    features: ft.FeatureVector


@dataclass
class SearchResult:
    entries: list[ResultEntry]
    diagnostics: dict = field(default_factory=dict)

    def answer_ids(self) -> list[int]:
        return [e.answer_id for e in self.entries]


def _thread_antonym_bag(thread: Thread) -> set[str]:
    return set(thread.question.title_bag) | set(thread.question.body_bag)


def _answer_antonym_bag(thread: Thread, answer_idx: int) -> set[str]:
    answer = thread.answers[answer_idx]
    return (set(thread.question.title_bag) | set(answer.body_bag)
            | set(answer.code_bag))


class SearchEngine:
    """Holds the immutable per-corpus state and executes searches against it."""

    def __init__(self, threads: Iterable[Thread], store: EmbeddingStore,
                 idf_map: IdfMap, antonym_dict: AntonymDictionary,
                 thread_index: InvertedIndex | None = None,
                 stopwords: frozenset[str] | None = None):
        self.threads = {t.question.id: t for t in threads}
        self.store = store
        self.idf_map = idf_map
        self.antonym_dict = antonym_dict
        self.thread_index = thread_index or build_thread_index(self.threads.values())
        self.stopwords = stopwords
        self._ensure_sentence_vectors()
        self._thread_cache: dict[int, dict] = {}

    def _ensure_sentence_vectors(self) -> None:
        # Title vectors not supplied by a sentence-vector file come from the
        # built-in IDF-weighted-mean embedder.
        for thread_id, thread in self.threads.items():
            if thread_id not in self.store.sentence_vecs:
                self.store.sentence_vecs[thread_id] = sentence_embed(
                    thread.question.title_bag, self.store, self.idf_map)

    def _thread_bags(self, thread_id: int) -> dict:
        cached = self._thread_cache.get(thread_id)
        if cached is None:
            thread = self.threads[thread_id]
            answers_body = Counter()
            answers_code = Counter()
            for answer in thread.answers:
                answers_body.update(answer.body_bag)
                answers_code.update(answer.code_bag)
            body_plus_answers = Counter(thread.question.body_bag)
            body_plus_answers.update(answers_body)
            tf_bag = Counter(thread.question.title_bag)
            tf_bag.update(body_plus_answers)
            tf_bag.update(answers_code)
            cached = {
                "title": thread.question.title_bag,
                "body_plus_answers": body_plus_answers,
                "tf_bag": tf_bag,
                "antonym": _thread_antonym_bag(thread),
            }
            self._thread_cache[thread_id] = cached
        return cached

    def make_query_context(self, query: str, config: ft.WeightConfig) -> QueryContext:
        bag = preprocess(query, "query", self.stopwords)
        ctx = self.antonym_dict.context(set(bag), config.antonym_pos_mode)
        vec = sentence_embed(bag, self.store, self.idf_map)
        return QueryContext(raw_query=query, bag=bag, antonym_ctx=ctx, sentence_vec=vec)

    def _thread_raw_features(self, qc: QueryContext, thread_id: int, stage: int,
                             config: ft.WeightConfig) -> dict[str, float]:
        thread = self.threads[thread_id]
        bags = self._thread_bags(thread_id)
        clamp = config.clamp_negative_cosine
        raw = {
            "sentence": cosine(qc.sentence_vec, self.store.sentence_vecs[thread_id]),
            "asym_title": asym_score(qc.bag, bags["title"], self.store, self.idf_map, clamp),
            "asym_body": asym_score(qc.bag, bags["body_plus_answers"], self.store,
                                    self.idf_map, clamp),
            "tf": ft.tf_score(qc.bag, bags["tf_bag"]),
        }
        if stage == 2:
            raw["answer_count"] = float(thread.answer_count)
            raw["total_answer_score"] = float(thread.total_answer_score)
            raw["question_score"] = float(thread.question_score)
        return raw

    def search(self, query: str, config: ft.WeightConfig | None = None,
               final_n: int | None = None) -> SearchResult:
        config = config or ft.WeightConfig()
        final_n = config.final_n if final_n is None else final_n
        diagnostics: dict = {"stage_counts": {}}
        counts = diagnostics["stage_counts"]

        qc = self.make_query_context(query, config)
        if not qc.bag:
            diagnostics["empty_query"] = True
            return SearchResult(entries=[], diagnostics=diagnostics)

        # Step 2: lexical thread retrieval
        hits = bm25_search(self.thread_index, qc.bag, config.bm25_top)
        candidates = [doc_id for doc_id, _ in hits]
        counts["bm25_threads"] = len(candidates)

        # Step 2b: thread-level antonym filter
        if config.filter_threads:
            candidates = [t for t in candidates
                          if qc.antonym_ctx.score(self._thread_bags(t)["antonym"]) == 0]
        counts["after_thread_filter"] = len(candidates)

        # Stage 1: similarity features only
        stage1_weights = {f: config.thread_weights[f] for f in ft.THREAD_SIMILARITY_FEATURES}
        raws = [self._thread_raw_features(qc, t, 1, config) for t in candidates]
        fused = ft.normalize_and_fuse(raws, stage1_weights)
        ranked = sorted(zip(candidates, fused), key=lambda e: (-e[1][1], e[0]))
        candidates = [t for t, _ in ranked[:config.stage1_keep]]
        counts["stage1_kept"] = len(candidates)

        # Stage 2: all seven thread features
        raws = [self._thread_raw_features(qc, t, 2, config) for t in candidates]
        fused = ft.normalize_and_fuse(raws, config.thread_weights)
        ranked = sorted(zip(candidates, fused), key=lambda e: (-e[1][1], e[0]))
        ranked = ranked[:config.stage2_keep]
        thread_scores = {t: score for t, (_, score) in ranked}
        counts["stage2_kept"] = len(ranked)
        diagnostics["thread_features"] = {t: fv.raw for t, (fv, _) in ranked}

        # Steps 5-7: ephemeral answer index and lexical answer retrieval
        surviving = [self.threads[t] for t, _ in ranked]
        answer_meta: dict[int, tuple[int, int]] = {}  # answer_id -> (thread_id, idx)
        for thread in surviving:
            for i, answer in enumerate(thread.answers):
                answer_meta[answer.id] = (thread.question.id, i)
        answer_index = build_ephemeral_answer_index(surviving)
        answer_hits = bm25_search(answer_index, qc.bag, config.answer_k)
        answer_ids = [a for a, _ in answer_hits]
        counts["bm25_answers"] = len(answer_ids)

        # Step 7b: answer-level antonym filter
        if config.filter_answers:
            answer_ids = [a for a in answer_ids
                          if qc.antonym_ctx.score(
                              _answer_antonym_bag(self.threads[answer_meta[a][0]],
                                                  answer_meta[a][1])) == 0]
        counts["after_answer_filter"] = len(answer_ids)

        # Step 8: answer features
        method_input = []
        for a in answer_ids:
            thread = self.threads[answer_meta[a][0]]
            method_input.append((a, thread.answers[answer_meta[a][1]].code_text))
        method_scores = ft.top_method_score(method_input, config.method_scale)

        raws = []
        for a in answer_ids:
            thread_id, idx = answer_meta[a]
            thread = self.threads[thread_id]
            answer = thread.answers[idx]
            asym_bag = Counter(answer.body_bag)
            asym_bag.update(thread.question.title_bag)
            tfidf_bag = Counter(thread.question.title_bag)
            tfidf_bag.update(thread.question.body_bag)
            tfidf_bag.update(answer.body_bag)
            tfidf_bag.update(answer.code_bag)
            raws.append({
                "asym": asym_score(qc.bag, asym_bag, self.store, self.idf_map,
                                   config.clamp_negative_cosine),
                "tfidf": ft.tfidf_score(qc.bag, tfidf_bag, self.idf_map),
                "top_method": method_scores[a],
                "thread_score": thread_scores[thread_id],
            })
        fused = ft.normalize_and_fuse(raws, config.answer_weights)

        # Step 9: final ranking and cut
        final = sorted(zip(answer_ids, fused), key=lambda e: (-e[1][1], e[0]))
        entries = []
        for a, (fv, score) in final[:max(final_n, 0)]:
            thread_id, idx = answer_meta[a]
            thread = self.threads[thread_id]
            entries.append(ResultEntry(
                answer_id=a,
                thread_id=thread_id,
                score=score,
                answer_body=thread.answers[idx].original_body,
                thread_title=thread.question.original_title,
                features=fv,
            ))
        counts["returned"] = len(entries)
        return SearchResult(entries=entries, diagnostics=diagnostics)


def _canon(name: str) -> str:
    return name.strip().lower().replace(" ", "-").replace("_", "-")


def _social_only(enabled: set[str]) -> ft.WeightConfig:
    config = ft.WeightConfig()
    for feature in ft.SOCIAL_FEATURES:
        if feature not in enabled:
            config.thread_weights[feature] = 0.0
    return config


def _antonym(pos_mode: str, targets: str) -> ft.WeightConfig:
    config = ft.WeightConfig()
    config.antonym_enabled = True
    config.antonym_pos_mode = pos_mode
    config.antonym_targets = targets
    return config


def _crar() -> ft.WeightConfig:
    return _antonym("NN", "ANS")


def _crar_without(feature: str, kind: str) -> ft.WeightConfig:
    config = _crar()
    weights = config.thread_weights if kind == "thread" else config.answer_weights
    weights[feature] = 0.0
    return config


def _thread_isolated(feature: str) -> ft.WeightConfig:
    config = ft.WeightConfig()
    for name in ft.THREAD_FEATURES:
        if name != feature:
            config.thread_weights[name] = 0.0
    return config


def _answer_isolated(feature: str) -> ft.WeightConfig:
    config = ft.WeightConfig()
    for name in ft.ANSWER_FEATURES:
        if name != feature:
            config.answer_weights[name] = 0.0
    return config


_SOCIAL_CODES = {"tas": "total_answer_score", "qs": "question_score", "ac": "answer_count"}


def _baseline_builders() -> dict:
    builders = {
        "template": ft.WeightConfig,
        "template-without-sf": lambda: _social_only(set()),
        "crar": _crar,
        "crar-without-tf": lambda: _crar_without("tf", "thread"),
        "crar-without-sent2vec": lambda: _crar_without("sentence", "thread"),
        "crar-without-asym-title": lambda: _crar_without("asym_title", "thread"),
        "crar-without-asym-body": lambda: _crar_without("asym_body", "thread"),
        "crar-without-tfidf": lambda: _crar_without("tfidf", "answer"),
        "crar-without-asym": lambda: _crar_without("asym", "answer"),
        "crar-without-thread-score": lambda: _crar_without("thread_score", "answer"),
        "crar-without-top-method": lambda: _crar_without("top_method", "answer"),
        "thread-tf": lambda: _thread_isolated("tf"),
        "thread-sent2vec": lambda: _thread_isolated("sentence"),
        "thread-asym-title": lambda: _thread_isolated("asym_title"),
        "thread-asym-body": lambda: _thread_isolated("asym_body"),
        "answer-tfidf": lambda: _answer_isolated("tfidf"),
        "answer-asym": lambda: _answer_isolated("asym"),
        "answer-thread-score": lambda: _answer_isolated("thread_score"),
        "answer-top-method": lambda: _answer_isolated("top_method"),
    }
    # Template-SF-<combo>: only the named social features stay on.
    combos = ["tas", "qs", "ac", "tas-ac", "qs-tas", "qs-ac", "tas-qs", "ac-tas", "ac-qs"]
    for combo in combos:
        enabled = {_SOCIAL_CODES[c] for c in combo.split("-")}
        builders[f"template-sf-{combo}"] = (lambda e=enabled: _social_only(e))
    # Template-Ant-<POS>-<targets>
    for pos in ("nn", "vb", "nn-vb"):
        for target in ("tr", "ans", "tr-ans"):
            builders[f"template-ant-{pos}-{target}"] = (
                lambda p=pos, t=target: _antonym(p.replace("-", "_").upper(),
                                                 t.replace("-", "_").upper()))
    return builders


_BUILDERS = _baseline_builders()

BASELINE_NAMES = tuple(sorted(_BUILDERS))


def configure_ablation(name: str) -> ft.WeightConfig:
    """Return the weight configuration for a named baseline.

    Raises ValueError listing the valid names when the baseline is unknown.
    """
    builder = _BUILDERS.get(_canon(name))
    if builder is None:
        raise ValueError(f"unknown baseline {name!r}; valid names: "
                         + ", ".join(BASELINE_NAMES))
    return builder()
