"""Reference exporter of match scores for (argument, key point) pairs.

Consumes the matching toolkit's dataset CSV and produces score files in
its score-file format, using averaged word embeddings or a fine-tuned
sequence-pair classifier.
"""

__version__ = "0.1.0"
