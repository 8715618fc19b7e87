"""Video captioning engine: bidirectional recurrent encoder, soft-attention
decoder, beam-search generation, BLEU/CIDEr evaluation."""

from bivicap._core import (
    Model,
    corpus_bleu,
    corpus_cider,
    evaluate_files,
    init_matrix,
    load_model,
    log_softmax,
    make_toy_dataset,
    read_feature_file,
    sigmoid,
    softmax,
    tokenize,
    train,
    write_feature_file,
)

__all__ = [
    "Model",
    "corpus_bleu",
    "corpus_cider",
    "evaluate_files",
    "init_matrix",
    "load_model",
    "log_softmax",
    "make_toy_dataset",
    "read_feature_file",
    "sigmoid",
    "softmax",
    "tokenize",
    "train",
    "write_feature_file",
]
