"""Offline artifact construction and loading.

``build_artifacts`` turns a JSONL dump into an index directory:

    threads.jsonl   versioned thread store
    index.json      persistent thread inverted index
    idf.json        document frequencies + doc count (IDF derives from these)
    titles.txt      preprocessed question titles, one per line
    contents.txt    one preprocessed thread per line (title+body+code of Q&A)
    meta.json       format version, embedding config, corpus stats

``load_engine`` validates the version tags and assembles a SearchEngine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .antonyms import AntonymDictionary, default_dictionary, merge_lists
from .corpus import (BuildStats, LoadStats, TagFilter, Thread, build_threads,
                     load_dump, load_threads, save_threads,
                     PREPROCESS_VERSION)
from .embeddings import (DEFAULT_DIM, DEFAULT_SEED, EmbeddingConfig, EmbeddingStore,
                         IdfMap, load_sentence_vectors, load_word_vectors)
from .index import build_thread_index, load_index, save_index
from .pipeline import SearchEngine

META_FORMAT = "crowdrank-meta"
META_VERSION = 1


def _bag_tokens(bag) -> list[str]:
    out: list[str] = []
    for word in sorted(bag):
        out.extend([word] * bag[word])
    return out


def thread_content_tokens(thread: Thread) -> list[str]:
    tokens = _bag_tokens(thread.question.title_bag)
    tokens += _bag_tokens(thread.question.body_bag)
    tokens += _bag_tokens(thread.question.code_bag)
    for answer in thread.answers:
        tokens += _bag_tokens(answer.body_bag)
        tokens += _bag_tokens(answer.code_bag)
    return tokens


def build_idf(threads: list[Thread]) -> IdfMap:
    return IdfMap.from_documents(thread_content_tokens(t) for t in threads)


@dataclass
class BuildReport:
    thread_count: int
    vocab_size: int
    load_stats: LoadStats
    build_stats: BuildStats


def build_artifacts(corpus_path: str | Path, out_dir: str | Path,
                    tag_filter: TagFilter | None = None,
                    stopwords: frozenset[str] | None = None,
                    embedding_config: EmbeddingConfig | None = None) -> BuildReport:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    embedding_config = embedding_config or EmbeddingConfig()

    load_stats = LoadStats()
    posts = load_dump(corpus_path, tag_filter, load_stats)
    build_stats = BuildStats()
    threads = build_threads(posts, stopwords, build_stats)

    save_threads(threads, out / "threads.jsonl")
    index = build_thread_index(threads)
    save_index(index, out / "index.json",
               meta={"preprocess_version": PREPROCESS_VERSION})

    idf = build_idf(threads) if threads else IdfMap({}, 1)
    idf_payload = {"format": "crowdrank-idf", "version": 1,
                   "doc_count": idf.doc_count,
                   "df": {w: idf.df[w] for w in sorted(idf.df)}}
    (out / "idf.json").write_text(
        json.dumps(idf_payload, sort_keys=True, separators=(",", ":")) + "\n", "utf-8")

    ordered = sorted(threads, key=lambda t: t.question.id)
    titles = [" ".join(_bag_tokens(t.question.title_bag)) for t in ordered]
    contents = [" ".join(thread_content_tokens(t)) for t in ordered]
    (out / "titles.txt").write_text("\n".join(titles) + ("\n" if titles else ""), "utf-8")
    (out / "contents.txt").write_text("\n".join(contents) + ("\n" if contents else ""), "utf-8")

    meta = {
        "format": META_FORMAT,
        "version": META_VERSION,
        "preprocess_version": PREPROCESS_VERSION,
        "embedding": embedding_config.to_json(),
        "stats": {"threads": len(threads), "vocab": len(idf.df)},
    }
    (out / "meta.json").write_text(
        json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n", "utf-8")

    return BuildReport(thread_count=len(threads), vocab_size=len(idf.df),
                       load_stats=load_stats, build_stats=build_stats)


def load_idf(path: str | Path) -> IdfMap:
    payload = json.loads(Path(path).read_text("utf-8"))
    if payload.get("format") != "crowdrank-idf" or payload.get("version") != 1:
        raise ValueError(f"not a supported idf file: {path}")
    return IdfMap(payload["df"], payload["doc_count"])


def load_engine(index_dir: str | Path,
                word_vectors: str | Path | None = None,
                sentence_vectors: str | Path | None = None,
                antonym_path: str | Path | None = None,
                stopwords: frozenset[str] | None = None,
                seed: int = DEFAULT_SEED) -> SearchEngine:
    root = Path(index_dir)
    meta = json.loads((root / "meta.json").read_text("utf-8"))
    if meta.get("format") != META_FORMAT or meta.get("version") != META_VERSION:
        raise ValueError(f"unsupported index directory format in {root}")
    if meta.get("preprocess_version") != PREPROCESS_VERSION:
        raise ValueError("index was built with an incompatible preprocessing version")

    threads = load_threads(root / "threads.jsonl")
    thread_index = load_index(root / "index.json")
    idf = load_idf(root / "idf.json")

    if word_vectors is not None:
        store = load_word_vectors(word_vectors, fallback=False, seed=seed)
    else:
        dim = meta.get("embedding", {}).get("dim", DEFAULT_DIM)
        store = EmbeddingStore(dim=dim, fallback=True, seed=seed)
    if sentence_vectors is not None:
        load_sentence_vectors(sentence_vectors, store)

    if antonym_path is not None:
        antonym_dict = merge_lists([antonym_path])
    else:
        antonym_dict = default_dictionary()

    return SearchEngine(threads, store, idf, antonym_dict,
                        thread_index=thread_index, stopwords=stopwords)
