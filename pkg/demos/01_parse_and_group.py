"""
Corpus records: build, serialize, parse, group
==============================================

A record is one clip's worth of evaluation input: an id, a task,
the caption/answer sub-category, a three-letter domain code, the
model's candidate text, and up to three references.
"""

from dateval import (
    CaptionSubCategory,
    Corpus,
    DomainCode,
    EvalRecord,
    Task,
    group_by,
    parse_corpus,
    serialize_corpus,
)

records = (
    EvalRecord(
        id="clip-001",
        task=Task.CAPTION,
        sub_category=CaptionSubCategory.LONG,
        domain=DomainCode.SPEECH,
        candidate="a man talks about the weather",
        references=(
            "a male voice discusses the forecast",
            "someone speaks about tomorrow's weather",
        ),
    ),
    EvalRecord(
        id="clip-002",
        task=Task.CAPTION,
        sub_category=CaptionSubCategory.SOUND,
        domain=DomainCode.SPEECH_SOUND,  # speech plus sound events: mixed
        candidate="rain falls while people chat",
        references=("rain patters over a quiet conversation",),
    ),
    EvalRecord(
        id="clip-003",
        task=Task.CAPTION,
        sub_category=CaptionSubCategory.SOUND,
        domain=DomainCode.SOUND,
        candidate="a door slams",
        references=("a heavy door bangs shut", "a door is slammed"),
    ),
)
corpus = Corpus(records=records, task=Task.CAPTION)

# round-trip through the JSONL wire format
text = serialize_corpus(corpus)
print(text)
again = parse_corpus(text, Task.CAPTION)
assert list(again) == list(corpus)

# domain codes carry the speech/music/sound-event flags
for rec in corpus:
    d = rec.domain
    print(
        f"{rec.id}: domain={d.value} pure={d.is_pure} "
        f"speech={d.contains_speech} sound={d.contains_sound}"
    )

# grouping drives both the per-cell benchmark tables and the
# per-sub-category similarity matrices
for sub, members in group_by(corpus, "sub_category").items():
    print(sub.value, "->", [rec.id for rec in members])
