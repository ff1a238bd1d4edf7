"""Shared builders for corpora used across the test modules."""

import json
import random

import pytest

from dateval import (
    CaptionSubCategory,
    Corpus,
    DomainCode,
    EvalRecord,
    QaSubCategory,
    Task,
)

WORDS = [
    "dog", "cat", "piano", "guitar", "rain", "wind", "engine", "crowd",
    "bell", "voice", "drum", "violin", "thunder", "siren", "whistle",
    "hammer", "stream", "train", "bird", "applause",
]

CAPTION_SUBS = list(CaptionSubCategory)
QA_SUBS = list(QaSubCategory)
DOMAINS = list(DomainCode)


def make_record(i, task=Task.CAPTION, sub=None, domain=DomainCode.SOUND,
                candidate=None, references=None, rng=None):
    rng = rng or random.Random(i)
    if sub is None:
        subs = CAPTION_SUBS if task is Task.CAPTION else QA_SUBS
        sub = rng.choice(subs)
    topic = rng.choice(WORDS)
    other = rng.choice(WORDS)
    if candidate is None:
        candidate = f"a {topic} sound mixes with {other} noise"
    if references is None:
        references = (
            f"the sound of a {topic} with faint {other}",
            f"a {topic} can be heard alongside {other}",
        )
    return EvalRecord(
        id=f"r{i:04d}",
        task=task,
        sub_category=sub,
        domain=domain,
        candidate=candidate,
        references=tuple(references),
    )


def make_corpus(n, task=Task.CAPTION, seed=0, sub=None, domain=None):
    """n records with deterministic pseudo-random topics."""
    rng = random.Random(seed)
    records = []
    for i in range(n):
        records.append(
            make_record(
                i,
                task=task,
                sub=sub,
                domain=domain if domain is not None else rng.choice(DOMAINS),
                rng=rng,
            )
        )
    return Corpus(records=tuple(records), task=task)


def corpus_lines(corpus):
    out = []
    for rec in corpus:
        out.append(json.dumps({
            "id": rec.id,
            "task": rec.task.value,
            "sub_category": rec.sub_category.value,
            "domain": rec.domain.value,
            "candidate": rec.candidate,
            "references": list(rec.references),
        }))
    return "\n".join(out) + "\n"


@pytest.fixture
def small_caption_corpus():
    return make_corpus(6, sub=CaptionSubCategory.LONG, seed=3)
