"""Neural label search for zero-shot multilingual extractive summarization."""

__version__ = "0.1.0"
