"""Exception hierarchy. Every data/validation failure raised by this package
derives from ScoreFuseError so callers (and the CLI) can map them to exit codes."""


class ScoreFuseError(Exception):
    pass


# --- table construction ---

class DuplicatePair(ScoreFuseError):
    pass


class AllScoresMissing(ScoreFuseError):
    pass


class NonFiniteScore(ScoreFuseError):
    pass


class TooFewIdentities(ScoreFuseError):
    pass


# --- file I/O ---

class MalformedLine(ScoreFuseError):
    pass


class UnknownModality(ScoreFuseError):
    pass


class DuplicateCell(ScoreFuseError):
    pass


class RaggedRow(ScoreFuseError):
    pass


class NonNumericScore(ScoreFuseError):
    pass


class ShapeMismatch(ScoreFuseError):
    pass


class InventoryMismatch(ScoreFuseError):
    pass


class IoFailure(ScoreFuseError):
    pass


# --- synthetic generator ---

class InvalidSpec(ScoreFuseError):
    pass


# --- masking scenarios ---

class LevelOutOfRange(ScoreFuseError):
    pass


class InfeasibleLevel(ScoreFuseError):
    pass


# --- normalization ---

class DegenerateModality(ScoreFuseError):
    pass


# --- imputation ---

class EmptyColumn(ScoreFuseError):
    pass


class NotEnoughObservedRows(ScoreFuseError):
    pass


class RegressorFitFailure(ScoreFuseError):
    pass


class TooFewRows(ScoreFuseError):
    pass


# --- fusion / evaluation ---

class IncompleteWithSkipDisabled(ScoreFuseError):
    pass


class RowWithNoScores(ScoreFuseError):
    pass


class OneClassOnly(ScoreFuseError):
    pass


class ProbeWithoutMate(ScoreFuseError):
    pass


class ProbeWithMultipleMates(ScoreFuseError):
    pass


# --- experiment runner ---

class ConfigError(ScoreFuseError):
    pass


class GridCellError(ScoreFuseError):
    """A grid cell failed; message carries (level, rep, method) provenance."""
