"""Exception and warning classes shared across the package.

Failures fall in two families that the CLI maps to distinct exit codes:
``DataError`` (bad input, unparseable model output) and ``BackendError``
(anything that went wrong talking to a completion backend).
"""


class JobRecoError(Exception):
    """Base class. ``context`` holds labels added while the error propagates."""

    def __init__(self, *args):
        super().__init__(*args)
        self.context: list[str] = []

    def __str__(self):
        base = super().__str__()
        if not self.context:
            return base
        return " / ".join(reversed(self.context)) + ": " + base


def annotate(exc: BaseException, label: str) -> BaseException:
    """Attach a location label (stage, subset index) to a package error."""
    if isinstance(exc, JobRecoError):
        exc.context.append(label)
    return exc


class DataError(JobRecoError, ValueError):
    pass


class SchemaError(DataError):
    """Structured JSON does not match the expected field layout."""


class InvalidInputError(DataError):
    """An operation precondition does not hold."""


class ScoringError(DataError):
    pass


class ParseError(DataError):
    """A model response could not be turned into recommendations."""

    def __init__(self, message, text=None):
        super().__init__(message)
        self.text = text


class UnknownJobIdError(ParseError):
    def __init__(self, job_id, text=None):
        super().__init__(f"response references unknown job id {job_id!r}", text)
        self.job_id = job_id


class ExtractionError(ParseError):
    pass


class RatingError(ParseError):
    pass


class BudgetExceededError(DataError):
    pass


class OversizeInputError(BudgetExceededError):
    def __init__(self, job_id, tokens, budget):
        super().__init__(
            f"job {job_id!r} does not fit the token budget on its own "
            f"({tokens} > {budget} estimated tokens)"
        )
        self.job_id = job_id


class ChunkingError(DataError):
    pass


class EvaluationError(DataError):
    pass


class ConfigError(DataError):
    pass


class BackendError(JobRecoError):
    pass


class BackendMissingError(BackendError):
    pass


class UnmatchedPromptError(BackendError):
    pass


class TransportError(BackendError):
    pass


class BackendTimeoutError(TransportError):
    pass


class RateLimitError(TransportError):
    pass


class ProviderError(BackendError):
    def __init__(self, status, body):
        super().__init__(f"provider returned HTTP {status}: {body}")
        self.status = status
        self.body = body


class RefusalError(BackendError):
    pass


class JobRecoWarning(UserWarning):
    pass


class ClampWarning(JobRecoWarning):
    """A numeric value from model output was outside its range and was clamped."""


class PartialResultWarning(JobRecoWarning):
    """Fewer recommendations were returned than requested."""


class RenderIncompleteWarning(JobRecoWarning):
    pass


class RatingWarning(JobRecoWarning):
    pass
