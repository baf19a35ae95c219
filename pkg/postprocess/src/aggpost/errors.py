"""Error types raised while decoding solver output files."""


class SeriesSchemaError(ValueError):
    """The diagnostics CSV deviates from the published column schema."""


class SnapshotFormatError(ValueError):
    """The binary snapshot file violates the published layout."""
