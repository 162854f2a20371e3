import json
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from crowdrank.corpus import (BuildStats, LoadStats, RawPost, TagFilter,
                              build_threads, load_dump, load_threads,
                              preprocess, save_threads, separate_code)


def make_posts(objs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj) + "\n")
    return path


class TestTagFilter:
    def test_java_swing_kept(self):
        assert TagFilter().accepts(["java", "swing"])

    def test_javascript_dropped(self):
        assert not TagFilter().accepts(["javascript"])

    def test_java_and_javascript_dropped(self):
        assert not TagFilter().accepts(["java", "javascript"])


class TestLoadDump:
    def test_filters_questions_and_keeps_their_answers(self, tmp_path):
        path = make_posts([
            {"id": 1, "post_kind": "question", "title": "t", "body_html": "b",
             "score": 1, "tags": ["java"]},
            {"id": 2, "post_kind": "answer", "parent_id": 1, "body_html": "a", "score": 1},
            {"id": 3, "post_kind": "question", "title": "t", "body_html": "b",
             "score": 1, "tags": ["javascript"]},
            {"id": 4, "post_kind": "answer", "parent_id": 3, "body_html": "a", "score": 1},
        ], tmp_path / "dump.jsonl")
        posts = load_dump(path)
        assert [p.id for p in posts] == [1, 2]

    def test_malformed_line_counted(self, tmp_path):
        path = tmp_path / "dump.jsonl"
        with open(path, "w") as fh:
            fh.write(json.dumps({"id": 1, "post_kind": "question", "title": "t",
                                 "body_html": "b", "score": 1, "tags": ["java"]}) + "\n")
            fh.write("{not json\n")
            fh.write(json.dumps({"id": 2, "post_kind": "answer", "parent_id": 1,
                                 "body_html": "a", "score": 1}) + "\n")
        stats = LoadStats()
        posts = load_dump(path, stats=stats)
        assert len(posts) == 2
        assert stats.warnings == 1

    def test_missing_required_field_counted(self, tmp_path):
        path = make_posts([{"id": 5, "post_kind": "answer", "body_html": "a", "score": 1}],
                          tmp_path / "dump.jsonl")
        stats = LoadStats()
        assert load_dump(path, stats=stats) == []
        assert stats.warnings == 1

    def test_unreadable_file_is_fatal(self, tmp_path):
        with pytest.raises(OSError):
            load_dump(tmp_path / "missing.jsonl")


class TestSeparateCode:
    def test_code_tag(self):
        assert separate_code("use <code>substring</code> here") == ("use  here", "substring")

    def test_nested_pre_code(self):
        assert separate_code("<pre><code>int x;</code></pre>") == ("", "int x;")

    def test_unbalanced_tag_runs_to_eof(self):
        assert separate_code("a <code>b") == ("a ", "b")

    def test_other_tags_stripped_from_prose(self):
        prose, code = separate_code("<p>hello <b>world</b></p>")
        assert prose == "hello world"
        assert code == ""

    @given(st.text(alphabet="abc <>/codepr", max_size=80))
    def test_coverage_up_to_whitespace(self, text):
        import re
        prose, code = separate_code(text)
        stripped = re.sub(r"<[^>]*>", "", text)
        import html
        joined = sorted((html.unescape(stripped)).split())
        assert sorted(prose.split() + code.split()) == joined


class TestPreprocess:
    def test_query_example(self):
        bag = preprocess("How do I convert angle from radians to degrees?", "query")
        assert bag == Counter({"convert": 1, "angle": 1, "radians": 1, "degrees": 1})

    def test_empty(self):
        assert preprocess("", "corpus") == Counter()

    def test_all_tokens_removed(self):
        assert preprocess("a 42 !!", "corpus") == Counter()

    def test_corpus_keeps_multiplicity(self):
        assert preprocess("parse parse dates", "corpus") == Counter({"parse": 2, "dates": 1})

    def test_query_dedupes(self):
        assert preprocess("parse parse dates", "query") == Counter({"parse": 1, "dates": 1})

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            preprocess("x", "nope")

    @given(st.text(max_size=120))
    def test_idempotent(self, text):
        bag = preprocess(text, "corpus")
        again = preprocess(" ".join(w for w, c in sorted(bag.items()) for _ in range(c)),
                           "corpus")
        assert again == bag


class TestBuildThreads:
    def raw(self, **kw):
        return RawPost(**kw)

    def test_negative_answer_filtered(self):
        posts = [
            self.raw(id=1, post_kind="question", score=5, body_html="b", title="t"),
            self.raw(id=2, post_kind="answer", score=3, parent_id=1,
                     body_html="x <code>work()</code>"),
            self.raw(id=3, post_kind="answer", score=-1, parent_id=1,
                     body_html="x <code>work()</code>"),
        ]
        threads = build_threads(posts)
        assert len(threads) == 1
        assert threads[0].answer_count == 1
        assert threads[0].total_answer_score == 3

    def test_zero_score_question_dropped(self):
        posts = [
            self.raw(id=1, post_kind="question", score=0, body_html="b", title="t"),
            self.raw(id=2, post_kind="answer", score=3, parent_id=1,
                     body_html="x <code>work()</code>"),
        ]
        assert build_threads(posts) == []

    def test_answer_without_code_excluded(self):
        posts = [
            self.raw(id=1, post_kind="question", score=5, body_html="b", title="t"),
            self.raw(id=2, post_kind="answer", score=4, parent_id=1, body_html="no code"),
            self.raw(id=3, post_kind="answer", score=1, parent_id=1,
                     body_html="ok <code>call()</code>"),
        ]
        threads = build_threads(posts)
        assert [a.id for a in threads[0].answers] == [3]

    def test_orphan_answer_counted(self):
        stats = BuildStats()
        posts = [self.raw(id=2, post_kind="answer", score=3, parent_id=99,
                          body_html="x <code>work()</code>")]
        assert build_threads(posts, stats=stats) == []
        assert stats.orphan_answers == 1

    def test_thread_invariants(self):
        posts = [
            self.raw(id=1, post_kind="question", score=5, body_html="b", title="t"),
            self.raw(id=2, post_kind="answer", score=3, parent_id=1,
                     body_html="x <code>stuff()</code>"),
        ]
        for thread in build_threads(posts):
            assert thread.question_score >= 1
            for ans in thread.answers:
                assert ans.score >= 1
                assert ans.code_bag


class TestThreadStore:
    def test_round_trip_and_determinism(self, tmp_path):
        posts = [
            RawPost(id=1, post_kind="question", score=5, body_html="hello <code>alpha()</code>",
                    title="greetings program"),
            RawPost(id=2, post_kind="answer", score=3, parent_id=1,
                    body_html="reply <code>beta()</code>"),
        ]
        threads = build_threads(posts)
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_threads(threads, p1)
        save_threads(build_threads(posts), p2)
        assert p1.read_bytes() == p2.read_bytes()
        loaded = load_threads(p1)
        assert len(loaded) == 1
        assert loaded[0].question.title_bag == threads[0].question.title_bag
        assert loaded[0].answers[0].code_text == threads[0].answers[0].code_text

    def test_rejects_wrong_format(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"format": "other", "version": 1}\n')
        with pytest.raises(ValueError):
            load_threads(path)
