"""Exception types shared across the toolkit.

Every error raised on a documented failure path has its own class so callers
(and the CLI exit-code mapping) can branch on type rather than message text.
"""


class DqkitError(Exception):
    """Base class for all toolkit errors."""


# --- corpus ---------------------------------------------------------------

class MalformedRecord(DqkitError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateId(DqkitError):
    def __init__(self, sample_id: str):
        super().__init__(f"duplicate sample id {sample_id!r}")
        self.sample_id = sample_id


class UnknownLabel(DqkitError):
    def __init__(self, sample_id: str, label: str):
        super().__init__(f"sample {sample_id!r} has label {label!r} outside the schema")
        self.sample_id = sample_id
        self.label = label


class DatasetTooSmall(DqkitError):
    pass


class IoFailure(DqkitError):
    pass


# --- textstats ------------------------------------------------------------

class InvalidOrder(DqkitError):
    pass


class EmptyDataset(DqkitError):
    pass


# --- embeddings -----------------------------------------------------------

class InvariantViolation(DqkitError):
    pass


class BadMagic(DqkitError):
    pass


class VersionMismatch(DqkitError):
    pass


class DimMismatch(DqkitError):
    pass


class TruncatedFile(DqkitError):
    pass


class KOutOfRange(DqkitError):
    pass


class UnknownId(DqkitError):
    pass


# --- linmodels ------------------------------------------------------------

class SingleClassInput(DqkitError):
    pass


# --- dqi ------------------------------------------------------------------

class MissingEmbeddings(DqkitError):
    pass


class NoDefinedComponents(DqkitError):
    pass


class SchemaMismatch(DqkitError):
    pass


class EmptyState(DqkitError):
    pass


# --- aflite / pruner ------------------------------------------------------

class TrainTooLarge(DqkitError):
    pass


class SingleClassTrainDraw(DqkitError):
    pass


class EmbeddingCoverageGap(DqkitError):
    pass


class TargetTooLarge(DqkitError):
    pass


class CoarseDisabled(DqkitError):
    pass


# --- evalharness ----------------------------------------------------------

class CoverageGap(DqkitError):
    pass


class LabelMismatch(DqkitError):
    pass


class EmptyEvalSet(DqkitError):
    pass


# --- service --------------------------------------------------------------

class UnknownDraft(DqkitError):
    pass


class UnknownSample(DqkitError):
    pass


class WrongState(DqkitError):
    pass


class MissingFeedback(DqkitError):
    pass


# --- config / cli ---------------------------------------------------------

class ConfigError(DqkitError):
    pass


class EncoderUnavailable(DqkitError):
    pass
