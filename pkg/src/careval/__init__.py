"""Fine-grained video caption and retrieval evaluation toolkit.

Subpackages and modules:

* ``careval.corpus`` -- annotated-corpus data model, JSONL ingestion,
  structural validation, summary statistics.
* ``careval.embeddings`` -- the CAREEMB1 binary embedding format,
  L2 normalization, cosine similarity matrices.
* ``careval.retrieval`` -- text<->video recall@K, spatiotemporal
  retrieval-bias score, unified score.
* ``careval.judge`` -- pluggable LLM judge (HTTP chat backend or
  deterministic offline mock) for element extraction and entailment.
* ``careval.capst`` -- caption precision/recall/F1 over extracted
  object and event elements, per-category aggregation.
* ``careval.adapt`` -- toy contrastive retrieval-adaptation lab:
  trainable bag-of-tokens encoder, InfoNCE objective with analytic
  gradients, vocabulary-projection analysis.
* ``careval.report`` / ``careval.figures`` / ``careval.cli`` -- report
  rendering (JSON, markdown, CSV, figures) and the command-line surface.
"""

__version__ = "0.1.0"
