"""Exception hierarchy for the long-tail re-ranking toolkit"""


class TailRerankError(Exception):
    """Base class for every error raised by this package"""


class MalformedRecordError(TailRerankError, ValueError):
    """A single input line could not be turned into a Rating"""


class EmptyDatasetError(TailRerankError, ValueError):
    """Filtering or partitioning left nothing to work with"""


class TrainingError(TailRerankError, RuntimeError):
    """Base recommender training diverged"""

    def __init__(self, sweep: int, message: str = "non-finite factors"):
        self.sweep = sweep
        super().__init__(f"Training diverged at sweep {sweep}: {message}")


class UnknownEntityError(TailRerankError, KeyError):
    """User or item id is not part of the model's index maps"""


class UndefinedMetricError(TailRerankError, ValueError):
    """Metric has no defined value for the given inputs"""


class OutOfScopeError(TailRerankError, NotImplementedError):
    """Algorithm label is reserved but not implemented"""


class UnknownAlgorithmError(TailRerankError, ValueError):
    """Algorithm label is not in the registry"""


class CacheMissingError(TailRerankError, FileNotFoundError):
    """A prepared dataset or checkpoint the command depends on is missing"""


class SimulationError(TailRerankError, RuntimeError):
    """A run inside a suite failed"""


class PipelineError(TailRerankError, RuntimeError):
    """The experiment workflow stopped at a failed stage"""
