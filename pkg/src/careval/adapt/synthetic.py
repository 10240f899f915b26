"""Synthetic topic-triplet corpus for exercising the adaptation lab.

Every anchor and its positive mention the same topic token (kitchen,
garden, ...) while the hard negative swaps in a different topic; all other
words are drawn from shared filler pools. Training on such a corpus should
raise anchor-positive cosine above anchor-negative cosine on held-out
triplets, and should push the anchor's topic token up the
vocabulary-projection ranking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .triplets import NliTriplet

TOPICS = (
    "kitchen",
    "garden",
    "pool",
    "gym",
    "beach",
    "garage",
    "studio",
    "office",
)

_ACTORS = ("man", "woman", "chef", "athlete", "worker", "artist", "child", "coach")
_VERBS = (
    "cutting",
    "washing",
    "running",
    "painting",
    "stretching",
    "cleaning",
    "lifting",
    "folding",
)
_ADVERBS = ("quickly", "slowly", "carefully", "energetically", "calmly", "steadily")


@dataclass
class SyntheticTopicData:
    train: list[NliTriplet]
    heldout: list[NliTriplet]
    train_topics: list[str]
    heldout_topics: list[str]


def _sentence(rng: np.random.Generator, topic: str) -> str:
    actor = rng.choice(_ACTORS)
    verb = rng.choice(_VERBS)
    adverb = rng.choice(_ADVERBS)
    return f"the {actor} is {verb} {adverb} in the {topic}"


def make_topic_triplets(
    n_train: int = 50, n_heldout: int = 25, seed: int = 0
) -> SyntheticTopicData:
    rng = np.random.default_rng(seed)
    train, train_topics = [], []
    heldout, heldout_topics = [], []
    for bucket, topics, count in (
        (train, train_topics, n_train),
        (heldout, heldout_topics, n_heldout),
    ):
        for _ in range(count):
            topic = str(rng.choice(TOPICS))
            other = str(rng.choice([t for t in TOPICS if t != topic]))
            bucket.append(
                NliTriplet(
                    anchor=_sentence(rng, topic),
                    positive=_sentence(rng, topic),
                    negative=_sentence(rng, other),
                )
            )
            topics.append(topic)
    return SyntheticTopicData(
        train=train,
        heldout=heldout,
        train_topics=train_topics,
        heldout_topics=heldout_topics,
    )
