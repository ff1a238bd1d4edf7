"""Domain types and corpus ingestion for caption / QA evaluation records.

A corpus is a line-delimited UTF-8 file, one JSON object per line:

    {"id": str, "task": "caption"|"qa", "sub_category": str,
     "domain": str (optional for qa), "candidate": str,
     "references": [str, ...]}

Sub-categories are lowercase (``long``, ``short``, ``speech``, ``music``,
``sound``, ``environment`` for captions; ``dp``, ``sc``, ``qas``, ``er``,
``ij``, ``ac`` for QA). Domains are one of the eight three-letter codes
(``000``, ``S00``, ``0M0``, ``00A``, ``SM0``, ``S0A``, ``0MA``, ``SMA``).
Unknown extra keys are ignored with a warning. QA lines may omit the
domain; it defaults to ``000`` (QA aggregation never reads it).
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Union

logger = logging.getLogger(__name__)

_EXPECTED_KEYS = {"id", "task", "sub_category", "domain", "candidate", "references"}

MAX_REFERENCES = 3


class CorpusFormatError(ValueError):
    """Raised when a record line violates the corpus schema."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class Task(str, enum.Enum):
    CAPTION = "caption"
    QA = "qa"


class DomainCode(str, enum.Enum):
    """Three-letter audio domain code: speech / music / sound-event flags.

    Position 1 is ``S`` when speech is present, position 2 is ``M`` for
    music, position 3 is ``A`` for sound events; ``0`` marks absence.
    ``000`` is silence.
    """

    SILENCE = "000"
    SPEECH = "S00"
    MUSIC = "0M0"
    SOUND = "00A"
    SPEECH_MUSIC = "SM0"
    SPEECH_SOUND = "S0A"
    MUSIC_SOUND = "0MA"
    SPEECH_MUSIC_SOUND = "SMA"

    @property
    def contains_speech(self) -> bool:
        return self.value[0] == "S"

    @property
    def contains_music(self) -> bool:
        return self.value[1] == "M"

    @property
    def contains_sound(self) -> bool:
        return self.value[2] == "A"

    @property
    def is_pure(self) -> bool:
        """At most one content type present (silence counts as pure)."""
        return self.content_flags.count(True) <= 1

    @property
    def is_mixed(self) -> bool:
        return not self.is_pure

    @property
    def content_flags(self) -> tuple[bool, bool, bool]:
        return (self.contains_speech, self.contains_music, self.contains_sound)


class CaptionCategory(str, enum.Enum):
    SYSTEMIC = "systemic"
    CONTENT_SPECIFIC = "content_specific"
    CONTENT_UNRELATED = "content_unrelated"


class CaptionSubCategory(str, enum.Enum):
    LONG = "long"
    SHORT = "short"
    SPEECH = "speech"
    MUSIC = "music"
    SOUND = "sound"
    ENVIRONMENT = "environment"

    @property
    def category(self) -> CaptionCategory:
        if self in (CaptionSubCategory.LONG, CaptionSubCategory.SHORT):
            return CaptionCategory.SYSTEMIC
        if self is CaptionSubCategory.ENVIRONMENT:
            return CaptionCategory.CONTENT_UNRELATED
        return CaptionCategory.CONTENT_SPECIFIC


class QaCategory(str, enum.Enum):
    PERCEPTION = "perception"
    ANALYSIS = "analysis"
    REASONING = "reasoning"


class QaSubCategory(str, enum.Enum):
    DP = "dp"
    SC = "sc"
    QAS = "qas"
    ER = "er"
    IJ = "ij"
    AC = "ac"

    @property
    def category(self) -> QaCategory:
        if self is QaSubCategory.DP:
            return QaCategory.PERCEPTION
        if self in (QaSubCategory.SC, QaSubCategory.QAS):
            return QaCategory.ANALYSIS
        return QaCategory.REASONING


SubCategory = Union[CaptionSubCategory, QaSubCategory]


@dataclass(frozen=True)
class EvalRecord:
    """One audio item's candidate text plus its reference set.

    The candidate may be empty (models may emit nothing); references must
    hold 1 to 3 texts. All fields are immutable after construction.
    """

    id: str
    task: Task
    sub_category: SubCategory
    domain: DomainCode
    candidate: str
    references: tuple[str, ...]

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be non-empty")
        if not isinstance(self.references, tuple):
            object.__setattr__(self, "references", tuple(self.references))
        if not 1 <= len(self.references) <= MAX_REFERENCES:
            raise ValueError(
                f"record {self.id!r}: expected 1..{MAX_REFERENCES} references, "
                f"got {len(self.references)}"
            )
        expected = CaptionSubCategory if self.task is Task.CAPTION else QaSubCategory
        if not isinstance(self.sub_category, expected):
            raise ValueError(
                f"record {self.id!r}: sub-category {self.sub_category!r} does not "
                f"belong to task {self.task.value!r}"
            )


@dataclass(frozen=True)
class Corpus:
    """An immutable, validated collection of records sharing one task."""

    records: tuple[EvalRecord, ...]
    task: Task

    def __post_init__(self):
        if not isinstance(self.records, tuple):
            object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for rec in self.records:
            if rec.task is not self.task:
                raise ValueError(
                    f"record {rec.id!r} has task {rec.task.value!r}, "
                    f"corpus is {self.task.value!r}"
                )
            if rec.id in seen:
                raise ValueError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[EvalRecord]:
        return iter(self.records)

    def reference_texts(self) -> list[str]:
        """Every reference string in record order (idf document collection)."""
        return [ref for rec in self.records for ref in rec.references]


def _parse_record(obj: dict, task: Task, line_number: int) -> EvalRecord:
    for key in ("id", "task", "sub_category", "candidate", "references"):
        if key not in obj:
            raise CorpusFormatError(f"missing required key {key!r}", line_number)

    extra = set(obj) - _EXPECTED_KEYS
    if extra:
        logger.warning("line %d: ignoring unknown keys %s", line_number, sorted(extra))

    try:
        line_task = Task(obj["task"])
    except ValueError:
        raise CorpusFormatError(f"unknown task {obj['task']!r}", line_number) from None
    if line_task is not task:
        raise CorpusFormatError(
            f"task mismatch: line says {line_task.value!r}, corpus is {task.value!r}",
            line_number,
        )

    sub_enum = CaptionSubCategory if task is Task.CAPTION else QaSubCategory
    try:
        sub_category = sub_enum(obj["sub_category"])
    except ValueError:
        raise CorpusFormatError(
            f"unknown sub-category {obj['sub_category']!r} for task {task.value!r}",
            line_number,
        ) from None

    if "domain" in obj and obj["domain"] is not None:
        try:
            domain = DomainCode(obj["domain"])
        except ValueError:
            raise CorpusFormatError(
                f"unknown domain code {obj['domain']!r}", line_number
            ) from None
    elif task is Task.QA:
        logger.warning(
            "line %d: QA record %r has no domain, defaulting to 000",
            line_number,
            obj["id"],
        )
        domain = DomainCode.SILENCE
    else:
        raise CorpusFormatError("caption record is missing its domain", line_number)

    references = obj["references"]
    if not isinstance(references, list) or not all(isinstance(r, str) for r in references):
        raise CorpusFormatError("references must be a list of strings", line_number)
    if len(references) == 0:
        raise CorpusFormatError("record has zero references", line_number)
    if len(references) > MAX_REFERENCES:
        raise CorpusFormatError(
            f"record has {len(references)} references, at most {MAX_REFERENCES} allowed",
            line_number,
        )
    if not isinstance(obj["id"], str) or not obj["id"]:
        raise CorpusFormatError("id must be a non-empty string", line_number)
    if not isinstance(obj["candidate"], str):
        raise CorpusFormatError("candidate must be a string", line_number)

    return EvalRecord(
        id=obj["id"],
        task=task,
        sub_category=sub_category,
        domain=domain,
        candidate=obj["candidate"],
        references=tuple(references),
    )


def parse_corpus(stream: Union[str, IO[str], Iterable[str]], task: Task | str) -> Corpus:
    """Parse line-delimited records into a validated :class:`Corpus`.

    ``stream`` may be a file object, any iterable of lines, or a single
    string (split on newlines). Blank lines are skipped. Errors carry the
    offending 1-based line number.
    """
    task = Task(task)
    if isinstance(stream, str):
        # split on newline only: texts may legally contain U+0085/U+2028,
        # which str.splitlines would treat as line breaks
        lines: Iterable[str] = stream.split("\n")
    else:
        lines = stream

    records = []
    seen_ids = set()
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"malformed JSON: {exc.msg}", line_number) from None
        if not isinstance(obj, dict):
            raise CorpusFormatError("record line must be a JSON object", line_number)
        record = _parse_record(obj, task, line_number)
        if record.id in seen_ids:
            raise CorpusFormatError(f"duplicate record id {record.id!r}", line_number)
        seen_ids.add(record.id)
        records.append(record)

    return Corpus(records=tuple(records), task=task)


def load_corpus(path, task: Task | str) -> Corpus:
    with open(path, encoding="utf-8") as handle:
        return parse_corpus(handle, task)


def serialize_record(record: EvalRecord) -> str:
    return json.dumps(
        {
            "id": record.id,
            "task": record.task.value,
            "sub_category": record.sub_category.value,
            "domain": record.domain.value,
            "candidate": record.candidate,
            "references": list(record.references),
        },
        ensure_ascii=False,
        sort_keys=True,
    )


def serialize_corpus(corpus: Corpus) -> str:
    """Inverse of :func:`parse_corpus`: one JSON object per line."""
    return "\n".join(serialize_record(rec) for rec in corpus) + ("\n" if len(corpus) else "")


def group_by(corpus: Corpus, key: str) -> dict:
    """Partition records by ``sub_category``, ``domain``, or both.

    ``key`` is one of ``"sub_category"``, ``"domain"``,
    ``"sub_category_domain"``. Groups appear in first-appearance order and
    every record lands in exactly one group.
    """
    if key == "sub_category":
        extract = lambda rec: rec.sub_category
    elif key == "domain":
        extract = lambda rec: rec.domain
    elif key == "sub_category_domain":
        extract = lambda rec: (rec.sub_category, rec.domain)
    else:
        raise ValueError(
            "key must be 'sub_category', 'domain', or 'sub_category_domain', "
            f"got {key!r}"
        )
    groups: dict = {}
    for rec in corpus:
        groups.setdefault(extract(rec), []).append(rec)
    return groups
