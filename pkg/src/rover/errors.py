"""Exception types shared across the pipeline."""


class RoverError(Exception):
    """Base class for all pipeline errors."""


# --- report parsing ---

class MalformedReport(RoverError):
    """No sanitizer banner and no stack-frame lines in the input."""


# --- code index ---

class EmptyCodebase(RoverError):
    """Indexing found no source files under the given root."""


class UnknownTool(RoverError):
    """Tool call names a tool the index does not expose."""


class MalformedArgs(RoverError):
    """Tool call arguments are missing or of the wrong shape."""


class FileNotIndexed(RoverError):
    """Requested file is not part of the index."""


class LineOutOfRange(RoverError):
    """Requested line lies outside the file."""


# --- call graph ---

class EmptyTrace(RoverError):
    """Trace input contained no events."""


class FunctionNotFound(RoverError):
    """Named function missing from the index."""


# --- type context ---

class CyclicAlias(RoverError):
    """Typedef chain loops back on itself."""


# --- agent ---

class BackendFailure(RoverError):
    """Model backend failed after bounded retries."""


class ReplayExhausted(BackendFailure):
    """Replay script has no response left for this request."""


class NoLocationsProposed(RoverError):
    """Retrieval budget ran out before a valid buggy location was proposed."""


class UnparsablePatch(RoverError):
    """Model output did not contain a well-formed edit block."""


# --- patch application / validation ---

class BundleInvalid(RoverError):
    """Task bundle is missing files or has empty commands."""


class SearchTextNotFound(RoverError):
    """An edit's search text matched nothing, even whitespace-normalized."""


class AmbiguousMatch(RoverError):
    """An edit's search text matched more than one location."""


# --- metrics ---

class NoFailingRuns(RoverError):
    """Coverage matrix has no failing run, suspiciousness is undefined."""


class DegenerateInput(RoverError):
    """Correlation input has a single group or zero variance."""


class EmptyInput(RoverError):
    """Metric input text is empty."""
