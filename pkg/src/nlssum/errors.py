"""Exception types shared across the package.

``InputError`` marks problems with user-supplied data (bad files, bad flags);
the CLI maps it to exit code 1. Anything else escaping a command is treated as
an internal error.
"""


class InputError(ValueError):
    """Malformed or inconsistent user input."""


class ParseError(InputError):
    """A line-oriented file could not be parsed."""

    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{self.path}:{lineno}: {message}")


class MissingTranslation(InputError):
    """A translation provider has no entry for a sentence."""

    def __init__(self, sentence):
        self.sentence = sentence
        super().__init__(f"no translation for sentence: {sentence!r}")


class CheckpointError(InputError):
    """A checkpoint file is unreadable or incompatible with the requested config."""


class TrainingError(RuntimeError):
    """Training diverged (non-finite loss)."""
