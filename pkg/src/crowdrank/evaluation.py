"""Hit@K, MRR@K, MAP@K, MR@K against a ground-truth file, plus the ablation grid.

Ground truth is JSONL: {"query_id", "query_text", "relevant_answer_ids": [...]}
one object per line. Reports serialize to CSV with one row per baseline.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .pipeline import SearchEngine, configure_ablation


@dataclass
class GroundTruth:
    entries: dict[int, tuple[str, frozenset[int]]] = field(default_factory=dict)

    def add(self, query_id: int, query_text: str, relevant: Iterable[int]) -> None:
        if query_id in self.entries:
            raise ValueError(f"duplicate query_id {query_id}")
        relevant = frozenset(int(r) for r in relevant)
        if not relevant or query_id <= 0 or any(r <= 0 for r in relevant):
            raise ValueError(f"bad ground-truth entry for query {query_id}")
        self.entries[query_id] = (query_text, relevant)

    @classmethod
    def load(cls, path: str | Path) -> "GroundTruth":
        truth = cls()
        for line in Path(path).read_text("utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            truth.add(int(obj["query_id"]), str(obj["query_text"]),
                      obj["relevant_answer_ids"])
        return truth


@dataclass
class QueryMetrics:
    hit: float
    rr: float
    ap: float
    recall: float


@dataclass
class MetricsReport:
    k: int
    per_query: dict[int, QueryMetrics]
    hit: float
    mrr: float
    map: float
    mr: float

    def metric_sum(self) -> float:
        return self.hit + self.mrr + self.map + self.mr


def query_metrics(ranked: Sequence[int], relevant: frozenset[int], k: float) -> QueryMetrics:
    """Metrics for one ranking; k may be math.inf for uncut evaluation."""
    top = list(ranked) if math.isinf(k) else list(ranked[:int(k)])
    hit = 0.0
    rr = 0.0
    ap_sum = 0.0
    found = 0
    for i, answer_id in enumerate(top, start=1):
        if answer_id in relevant:
            found += 1
            if rr == 0.0:
                rr = 1.0 / i
                hit = 1.0
            ap_sum += found / i
    denom = len(relevant) if math.isinf(k) else min(len(relevant), int(k))
    ap = ap_sum / denom if denom else 0.0
    recall = found / len(relevant)
    return QueryMetrics(hit=hit, rr=rr, ap=ap, recall=recall)


def evaluate(results: Mapping[int, Sequence[int]], truth: GroundTruth,
             k: float = 10) -> MetricsReport:
    """Evaluate ranked answer ids per query; queries without results score 0."""
    unknown = set(results) - set(truth.entries)
    if unknown:
        raise ValueError(f"results contain unknown query ids: {sorted(unknown)}")
    per_query: dict[int, QueryMetrics] = {}
    for query_id, (_, relevant) in truth.entries.items():
        ranked = results.get(query_id, ())
        per_query[query_id] = query_metrics(ranked, relevant, k)
    n = len(per_query)
    return MetricsReport(
        k=int(k) if not math.isinf(k) else -1,
        per_query=per_query,
        hit=sum(m.hit for m in per_query.values()) / n,
        mrr=sum(m.rr for m in per_query.values()) / n,
        map=sum(m.ap for m in per_query.values()) / n,
        mr=sum(m.recall for m in per_query.values()) / n,
    )


def run_baseline(engine: SearchEngine, baseline: str, truth: GroundTruth,
                 k: int = 10, final_n: int | None = None) -> MetricsReport:
    config = configure_ablation(baseline)
    results = {}
    for query_id, (query_text, _) in truth.entries.items():
        result = engine.search(query_text, config, final_n)
        results[query_id] = result.answer_ids()
    return evaluate(results, truth, k)


def run_ablation_grid(engine: SearchEngine, baseline_names: Sequence[str],
                      truth: GroundTruth, k: int = 10,
                      final_n: int | None = None) -> list[tuple[str, MetricsReport]]:
    """One report per baseline, sorted ascending by the sum of the four metrics."""
    rows = [(name, run_baseline(engine, name, truth, k, final_n))
            for name in baseline_names]
    rows.sort(key=lambda r: (r[1].metric_sum(), r[0]))
    return rows


def write_report_csv(rows: Sequence[tuple[str, MetricsReport]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["baseline", "hit", "mrr", "map", "mr"])
        for name, report in rows:
            writer.writerow([name, f"{report.hit:.6f}", f"{report.mrr:.6f}",
                             f"{report.map:.6f}", f"{report.mr:.6f}"])
