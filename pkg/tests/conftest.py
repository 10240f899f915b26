import json
from pathlib import Path

import pytest

from careval.corpus import load_corpus, load_predictions

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fixture_corpus_path() -> Path:
    return DATA_DIR / "fixture_corpus.jsonl"


@pytest.fixture(scope="session")
def fixture_predictions_path() -> Path:
    return DATA_DIR / "fixture_predictions.jsonl"


@pytest.fixture(scope="session")
def fixture_corpus(fixture_corpus_path):
    return load_corpus(fixture_corpus_path)


@pytest.fixture(scope="session")
def fixture_predictions(fixture_corpus, fixture_predictions_path):
    return load_predictions(fixture_predictions_path, fixture_corpus)


def make_caption(n_words: int, stem: str = "word") -> str:
    return " ".join(f"{stem}{i}" for i in range(n_words))


def write_corpus_lines(path: Path, records: list[dict]) -> Path:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record) + "\n")
    return path


def corpus_record(entry_id: str, **overrides) -> dict:
    record = {
        "id": entry_id,
        "video_uri": f"videos/{entry_id}.mp4",
        "duration_s": 10.0,
        "category": "personal care",
        "subcategory": "misc",
        "captions": {
            "general": make_caption(200),
            "spatial": "a man with a red hat",
            "temporal": "the man cuts a melon",
        },
    }
    captions = overrides.pop("captions", None)
    record.update(overrides)
    if captions is not None:
        record["captions"] = captions
    return record
