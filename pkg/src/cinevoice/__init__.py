"""Voice-driven movie browser: utterances in, ranked views pushed out."""

__version__ = "0.1.0"
