"""Hierarchical benchmark scores from per-sample metric values.

Caption scoring rolls nine cells up through fixed weights:

    score_cap = 0.4 * systemic + 0.4 * content_specific + 0.2 * env
    systemic = 0.8 * long + 0.2 * short
    content_specific = 0.6 * speech + 0.3 * music + 0.1 * sound

where each content type averages its pure-domain and mixed-domain
cells. QA scoring is the plain mean of the six sub-category cells.

Weights are applied as exact rationals so that the closure property
(constant input c aggregates to exactly c) holds for every float, not
just approximately. Cells live on the 0..100 scale; rounding to one
decimal happens only at rendering.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .records import Corpus, Task

# A cell is a sub-category plus an optional domain group. Content-type
# sub-categories split into pure/mixed by the record's domain code;
# the other sub-categories keep a single pooled group.
Group = str | None
CellKey = tuple[str, Group]

PURE = "pure"
MIXED = "mixed"

CAPTION_CELLS: tuple[CellKey, ...] = (
    ("long", None),
    ("short", None),
    ("speech", PURE),
    ("speech", MIXED),
    ("music", PURE),
    ("music", MIXED),
    ("sound", PURE),
    ("sound", MIXED),
    ("environment", None),
)
QA_CELLS: tuple[CellKey, ...] = (
    ("dp", None),
    ("sc", None),
    ("qas", None),
    ("er", None),
    ("ij", None),
    ("ac", None),
)

_SPLIT_SUB_CATEGORIES = frozenset({"speech", "music", "sound"})

_W_TOP = (Fraction(2, 5), Fraction(2, 5), Fraction(1, 5))
_W_SYSTEMIC = (Fraction(4, 5), Fraction(1, 5))
_W_CONTENT = (Fraction(3, 5), Fraction(3, 10), Fraction(1, 10))
_HALF = Fraction(1, 2)


class MissingCellError(ValueError):
    """Raised when an aggregation is attempted with empty leaf cells."""

    def __init__(self, missing: Sequence[CellKey]):
        self.missing = tuple(missing)
        names = ", ".join(cell_name(key) for key in self.missing)
        super().__init__(f"no samples for required cells: {names}")


def cell_name(key: CellKey) -> str:
    sub, group = key
    return sub if group is None else f"{sub}.{group}"


def expected_cells(task: Task) -> tuple[CellKey, ...]:
    return CAPTION_CELLS if task is Task.CAPTION else QA_CELLS


@dataclass(frozen=True)
class CellScores:
    """Non-empty cells (mean sample score x 100) with their sizes."""

    task: Task
    cells: Mapping[CellKey, float]
    counts: Mapping[CellKey, int]
    missing: tuple[CellKey, ...]


@dataclass(frozen=True)
class CaptionBreakdown:
    s_long: float
    s_short: float
    s_speech_pure: float
    s_speech_mixed: float
    s_music_pure: float
    s_music_mixed: float
    s_sound_pure: float
    s_sound_mixed: float
    s_env: float
    s_systemic: float
    s_content_specific: float
    score_cap: float
    convention: str

    def cells_in_table_order(self) -> tuple[float, ...]:
        return (
            self.s_long,
            self.s_short,
            self.s_speech_pure,
            self.s_speech_mixed,
            self.s_music_pure,
            self.s_music_mixed,
            self.s_sound_pure,
            self.s_sound_mixed,
            self.s_env,
        )


@dataclass(frozen=True)
class QaBreakdown:
    s_dp: float
    s_sc: float
    s_qas: float
    s_er: float
    s_ij: float
    s_ac: float
    score_qa: float

    def cells_in_table_order(self) -> tuple[float, ...]:
        return (self.s_dp, self.s_sc, self.s_qas, self.s_er, self.s_ij, self.s_ac)


def _score_map(sample_scores) -> dict[str, float]:
    if isinstance(sample_scores, Mapping):
        return dict(sample_scores)
    # anything with .id and a main score attribute (SampleScore, BaselineScore)
    out: dict[str, float] = {}
    for item in sample_scores:
        value = getattr(item, "date", None)
        if value is None:
            value = item.score
        out[item.id] = value
    return out


def per_cell_scores(corpus: Corpus, sample_scores) -> CellScores:
    """Group per-sample scores into benchmark cells.

    ``sample_scores`` maps record id to a score in [0, 1], or is an
    iterable of scored samples carrying ``id``. Ids must match the
    corpus exactly. Cells with no samples are listed in ``missing``
    rather than reported as zero.
    """
    scores = _score_map(sample_scores)
    corpus_ids = {rec.id for rec in corpus}
    stray = sorted(set(scores) - corpus_ids)
    if stray:
        raise ValueError(f"scores reference unknown record ids: {stray[:5]}")
    unscored = sorted(corpus_ids - set(scores))
    if unscored:
        raise ValueError(f"records missing a score: {unscored[:5]}")

    sums: dict[CellKey, Fraction] = {}
    counts: dict[CellKey, int] = {}
    for rec in corpus:
        value = scores[rec.id]
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"score for {rec.id!r} outside [0, 1]: {value}")
        sub = rec.sub_category.value
        if sub in _SPLIT_SUB_CATEGORIES:
            key: CellKey = (sub, PURE if rec.domain.is_pure else MIXED)
        else:
            key = (sub, None)
        sums[key] = sums.get(key, Fraction(0)) + Fraction(value)
        counts[key] = counts.get(key, 0) + 1

    cells = {
        key: float(100 * total / counts[key]) for key, total in sums.items()
    }
    missing = tuple(key for key in expected_cells(corpus.task) if key not in cells)
    return CellScores(task=corpus.task, cells=cells, counts=counts, missing=missing)


def _require(cells: Mapping[CellKey, float], expected: Sequence[CellKey]) -> None:
    missing = [key for key in expected if key not in cells]
    if missing:
        raise MissingCellError(missing)
    for key in expected:
        value = cells[key]
        if not 0.0 <= value <= 100.0:
            raise ValueError(f"cell {cell_name(key)} outside [0, 100]: {value}")


def _content_score(
    cells: Mapping[CellKey, float],
    counts: Mapping[CellKey, int] | None,
    sub: str,
    convention: str,
) -> Fraction:
    pure = Fraction(cells[(sub, PURE)])
    mixed = Fraction(cells[(sub, MIXED)])
    if convention == "cell-mean":
        return (pure + mixed) * _HALF
    if convention == "sample-mean":
        if counts is None:
            raise ValueError("sample-mean convention needs per-cell counts")
        n_pure = counts[(sub, PURE)]
        n_mixed = counts[(sub, MIXED)]
        return (n_pure * pure + n_mixed * mixed) / (n_pure + n_mixed)
    raise ValueError(
        f"convention must be 'cell-mean' or 'sample-mean', got {convention!r}"
    )


def score_caption(
    cells: CellScores | Mapping[CellKey, float],
    *,
    convention: str = "cell-mean",
    counts: Mapping[CellKey, int] | None = None,
) -> CaptionBreakdown:
    """Roll the nine caption cells up to the overall score.

    ``cell-mean`` averages each content type's pure and mixed cells
    with equal weight (the published convention); ``sample-mean`` pools
    them weighted by sample counts instead. All nine cells must be
    present; partial corpora are a hard error so the fixed weighting is
    never silently renormalized.
    """
    if isinstance(cells, CellScores):
        counts = counts or dict(cells.counts)
        cells = cells.cells
    _require(cells, CAPTION_CELLS)

    systemic = _W_SYSTEMIC[0] * Fraction(cells[("long", None)]) + _W_SYSTEMIC[
        1
    ] * Fraction(cells[("short", None)])
    content = (
        _W_CONTENT[0] * _content_score(cells, counts, "speech", convention)
        + _W_CONTENT[1] * _content_score(cells, counts, "music", convention)
        + _W_CONTENT[2] * _content_score(cells, counts, "sound", convention)
    )
    env = Fraction(cells[("environment", None)])
    total = _W_TOP[0] * systemic + _W_TOP[1] * content + _W_TOP[2] * env

    return CaptionBreakdown(
        s_long=cells[("long", None)],
        s_short=cells[("short", None)],
        s_speech_pure=cells[("speech", PURE)],
        s_speech_mixed=cells[("speech", MIXED)],
        s_music_pure=cells[("music", PURE)],
        s_music_mixed=cells[("music", MIXED)],
        s_sound_pure=cells[("sound", PURE)],
        s_sound_mixed=cells[("sound", MIXED)],
        s_env=cells[("environment", None)],
        s_systemic=float(systemic),
        s_content_specific=float(content),
        score_cap=float(total),
        convention=convention,
    )


def score_qa(cells: CellScores | Mapping[CellKey, float]) -> QaBreakdown:
    """Mean of the six QA sub-category cells, each weighted equally."""
    if isinstance(cells, CellScores):
        cells = cells.cells
    _require(cells, QA_CELLS)
    values = [Fraction(cells[key]) for key in QA_CELLS]
    return QaBreakdown(
        s_dp=cells[("dp", None)],
        s_sc=cells[("sc", None)],
        s_qas=cells[("qas", None)],
        s_er=cells[("er", None)],
        s_ij=cells[("ij", None)],
        s_ac=cells[("ac", None)],
        score_qa=float(sum(values) / 6),
    )
