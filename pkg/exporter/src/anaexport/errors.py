"""Error type shared by every export stage."""


class ExportError(ValueError):
    """Invalid job input, unusable vocabulary file, or an unavailable backend."""
