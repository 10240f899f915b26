"""Toy contrastive retrieval-adaptation lab."""

from .encoder import (
    CHECKPOINT_MAGIC,
    UNK_INDEX,
    UNK_TOKEN,
    CheckpointFormatError,
    ToyEncoder,
    VocabProjection,
    build_vocab,
    encode,
    load_encoder,
    save_encoder,
    tokenize,
    topk_tokens,
    vocab_projection,
)
from .objective import ParameterGrads, batch_loss, info_nce_loss, loss_gradient
from .synthetic import TOPICS, SyntheticTopicData, make_topic_triplets
from .train import TrainConfig, TrainResult, TrainingDiverged, init_encoder, train
from .triplets import NliTriplet, TripletFormatError, load_triplets, save_triplets

__all__ = [
    "CHECKPOINT_MAGIC",
    "UNK_INDEX",
    "UNK_TOKEN",
    "CheckpointFormatError",
    "ToyEncoder",
    "VocabProjection",
    "build_vocab",
    "encode",
    "load_encoder",
    "save_encoder",
    "tokenize",
    "topk_tokens",
    "vocab_projection",
    "ParameterGrads",
    "batch_loss",
    "info_nce_loss",
    "loss_gradient",
    "TOPICS",
    "SyntheticTopicData",
    "make_topic_triplets",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "init_encoder",
    "train",
    "NliTriplet",
    "TripletFormatError",
    "load_triplets",
    "save_triplets",
]
