"""Ranking metrics, POS-setting breakdowns, image dispersion, reports.

Metrics follow the usual retrieval definitions: MRR is the mean of
1/rank of the gold translation, P@k the fraction of words whose gold
translation appears in the top k. Reports slice both by part of speech.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .corpus import Dataset, TranslationPair
from .errors import (
    BadConfig,
    DuplicateSource,
    GoldNotInCandidates,
    InsufficientOverlap,
    MissingGold,
    TooFewImages,
)
from .numerics import pairwise_cosine
from .similarity import RankedList

P_AT_KS = (1, 10)


class Setting(str, enum.Enum):
    ALL = "ALL"
    NN = "NN"
    VB = "VB"
    ADJ = "ADJ"


POS_TO_SETTING = {"NOUN": Setting.NN, "VERB": Setting.VB, "ADJ": Setting.ADJ}


@dataclass(frozen=True)
class SettingMetrics:
    """Metrics for one POS slice. mrr is None when only P@1 is defined
    (single-prediction methods); p_at holds whichever k were computed."""
    mrr: float | None
    p_at: dict[int, float]
    num_words: int
    oov_excluded: int = 0

    def __post_init__(self):
        for k, v in self.p_at.items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"P@{k} out of range: {v}")
        if self.mrr is not None and not 0.0 <= self.mrr <= 1.0:
            raise ValueError(f"MRR out of range: {self.mrr}")


@dataclass(frozen=True)
class EvalReport:
    method: str
    settings: dict[Setting, SettingMetrics | None]

    def metrics(self, setting: Setting) -> SettingMetrics | None:
        return self.settings.get(Setting(setting))


class CorrelationResult(NamedTuple):
    rho: float
    degenerate: bool


def _gold_by_source(gold: list[TranslationPair]) -> dict[str, TranslationPair]:
    by_source: dict[str, TranslationPair] = {}
    for pair in gold:
        if pair.source.word in by_source:
            raise DuplicateSource(f"multiple gold targets for {pair.source.word!r}")
        by_source[pair.source.word] = pair
    return by_source


def _gold_ranks(rankings: list[RankedList], gold: list[TranslationPair]) -> list[int]:
    by_source = _gold_by_source(gold)
    if not rankings:
        raise MissingGold("no rankings to score")
    ranks = []
    for rl in rankings:
        pair = by_source.get(rl.source)
        if pair is None:
            raise MissingGold(f"no gold translation for {rl.source!r}")
        rank = rl.rank_of(pair.target.word)
        if rank is None:
            raise GoldNotInCandidates(
                f"{pair.target.word!r} not among candidates for {rl.source!r}")
        ranks.append(rank)
    return ranks


def mrr(rankings: list[RankedList], gold: list[TranslationPair]) -> float:
    """Mean over source words of 1 / rank of the gold translation."""
    ranks = _gold_ranks(rankings, gold)
    return float(np.mean([1.0 / r for r in ranks]))


def precision_at_k(rankings: list[RankedList], gold: list[TranslationPair],
                   k: int) -> float:
    """Fraction of source words whose gold translation ranks within k."""
    if k < 1:
        raise BadConfig(f"k must be >= 1, got {k}")
    ranks = _gold_ranks(rankings, gold)
    return float(np.mean([1.0 if r <= k else 0.0 for r in ranks]))


def image_dispersion(image_set) -> float:
    """Mean cosine distance over all unordered image pairs of the set."""
    n = len(image_set)
    if n < 2:
        raise TooFewImages(f"{image_set.word}: dispersion needs >= 2 images, got {n}")
    sims = pairwise_cosine(image_set.vectors, image_set.vectors)
    upper = sims[np.triu_indices(n, k=1)]
    return float(np.mean(1.0 - upper))


@dataclass(frozen=True)
class DispersionReport:
    rows: tuple[tuple[str, str, float], ...]  # (word, pos, d) in lexicon order
    pos_means: dict[str, float]

    @property
    def per_word(self) -> dict[str, float]:
        return {word: d for word, _, d in self.rows}


def dispersion_summary(dataset: Dataset) -> DispersionReport:
    """Per-word dispersion plus unweighted per-POS means.

    Words with fewer than two images are skipped (dispersion undefined).
    Multi-POS words are attributed to their first lexicon entry's POS.
    """
    rows = []
    seen = set()
    for entry in dataset.lexicon:
        if entry.word in seen:
            continue
        seen.add(entry.word)
        image_set = dataset.sets.get(entry.word)
        if image_set is None or len(image_set) < 2:
            continue
        rows.append((entry.word, entry.pos, image_dispersion(image_set)))
    pos_means = {}
    for pos in ("NOUN", "VERB", "ADJ"):
        ds = [d for _, p, d in rows if p == pos]
        if ds:
            pos_means[pos] = float(np.mean(ds))
    return DispersionReport(rows=tuple(rows), pos_means=pos_means)


def write_dispersion_tsv(report: DispersionReport, path, sort_by_d: bool = True):
    """`word<TAB>pos<TAB>d` lines, most dispersed first by default."""
    rows = report.rows
    if sort_by_d:
        rows = sorted(rows, key=lambda r: (-r[2], r[0]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word, pos, d in rows:
            fh.write(f"{word}\t{pos}\t{d:.9f}\n")


def per_setting_report(rankings: list[RankedList], gold: list[TranslationPair],
                       method: str = "") -> EvalReport:
    """MRR, P@1 and P@10 for ALL words and per POS.

    Gold pairs without a ranking (e.g. embedding-vocabulary misses) are
    excluded from both numerator and denominator and counted in
    oov_excluded. Settings with no scored words are marked absent.
    POS comes from the gold pair's source entry.
    """
    by_source = {rl.source: rl for rl in rankings}
    if len(by_source) != len(rankings):
        raise DuplicateSource("two rankings share a source word")
    gold_sources = {p.source.word for p in _gold_by_source(gold).values()}
    for rl in rankings:
        if rl.source not in gold_sources:
            raise MissingGold(f"no gold translation for {rl.source!r}")

    settings: dict[Setting, SettingMetrics | None] = {}
    for setting in Setting:
        pairs = [p for p in gold
                 if setting is Setting.ALL or POS_TO_SETTING[p.source.pos] is setting]
        scored = [p for p in pairs if p.source.word in by_source]
        oov = len(pairs) - len(scored)
        if not scored:
            settings[setting] = None
            continue
        subset = [by_source[p.source.word] for p in scored]
        settings[setting] = SettingMetrics(
            mrr=mrr(subset, scored),
            p_at={k: precision_at_k(subset, scored, k) for k in P_AT_KS},
            num_words=len(scored),
            oov_excluded=oov)
    return EvalReport(method=method, settings=settings)


def average_reports(a: EvalReport, b: EvalReport) -> EvalReport:
    """Unweighted metric mean per setting; word counts are summed.

    A setting absent on one side passes through unchanged; metrics
    defined on only one side (e.g. a lone P@10) also pass through.
    """
    def mean_opt(x: float | None, y: float | None) -> float | None:
        if x is None:
            return y
        if y is None:
            return x
        return (x + y) / 2.0

    settings: dict[Setting, SettingMetrics | None] = {}
    for setting in Setting:
        ma, mb = a.settings.get(setting), b.settings.get(setting)
        if ma is None and mb is None:
            settings[setting] = None
            continue
        if ma is None or mb is None:
            settings[setting] = ma if mb is None else mb
            continue
        ks = sorted(set(ma.p_at) | set(mb.p_at))
        settings[setting] = SettingMetrics(
            mrr=mean_opt(ma.mrr, mb.mrr),
            p_at={k: mean_opt(ma.p_at.get(k), mb.p_at.get(k)) for k in ks},
            num_words=ma.num_words + mb.num_words,
            oov_excluded=ma.oov_excluded + mb.oov_excluded)
    return EvalReport(method=a.method or b.method, settings=settings)


def dispersion_rank_correlation(dispersions: dict[str, float],
                                rankings: list[RankedList],
                                gold: list[TranslationPair]) -> CorrelationResult:
    """Spearman correlation between a word's image dispersion and the
    reciprocal rank of its gold translation.

    Ties receive average ranks. If either variable is constant the
    correlation is reported as 0.0 with the degenerate flag set.
    """
    by_source = _gold_by_source(gold)
    xs, ys = [], []
    for rl in rankings:
        pair = by_source.get(rl.source)
        if pair is None or rl.source not in dispersions:
            continue
        rank = rl.rank_of(pair.target.word)
        if rank is None:
            raise GoldNotInCandidates(
                f"{pair.target.word!r} not among candidates for {rl.source!r}")
        xs.append(dispersions[rl.source])
        ys.append(1.0 / rank)
    if len(xs) < 3:
        raise InsufficientOverlap(
            f"need >= 3 words with both dispersion and ranking, got {len(xs)}")
    rx, ry = _average_ranks(np.array(xs)), _average_ranks(np.array(ys))
    if np.ptp(rx) == 0 or np.ptp(ry) == 0:
        return CorrelationResult(rho=0.0, degenerate=True)
    rho = float(np.corrcoef(rx, ry)[0, 1])
    return CorrelationResult(rho=rho, degenerate=False)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


_COLUMNS = [(s, m) for s in Setting for m in ("MRR", "P@1", "P@10")]


def _cell(metrics: SettingMetrics | None, name: str) -> float | None:
    if metrics is None:
        return None
    if name == "MRR":
        return metrics.mrr
    return metrics.p_at.get(int(name.split("@")[1]))


def render_report(reports, fmt: str = "text") -> bytes:
    """Render one or more method rows as a 4-setting x 3-metric table.

    Text uses 2-decimal floats, CSV full precision; missing values
    render as "--" in both.
    """
    if isinstance(reports, EvalReport):
        reports = [reports]
    header = ["method"] + [f"{s.value} {m}" for s, m in _COLUMNS]

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for report in reports:
            row = [report.method]
            for setting, metric in _COLUMNS:
                value = _cell(report.settings.get(setting), metric)
                row.append("--" if value is None else format(value, ".17g"))
            writer.writerow(row)
        return buf.getvalue().encode("utf-8")

    if fmt != "text":
        raise BadConfig(f"unknown report format {fmt!r}")
    rows = [header]
    for report in reports:
        row = [report.method]
        for setting, metric in _COLUMNS:
            value = _cell(report.settings.get(setting), metric)
            row.append("--" if value is None else f"{value:.2f}")
        rows.append(row)
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip()
             for row in rows]
    return ("\n".join(lines) + "\n").encode("utf-8")
