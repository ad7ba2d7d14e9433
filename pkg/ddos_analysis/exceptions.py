class DDoSAnalysisError(Exception):
    """
    Base class for every error raised by the workbench.
    """


class ParameterError(DDoSAnalysisError, ValueError):
    """
    Invalid distribution parameters (non-positive scale, empty support, ...).
    """


class DomainError(DDoSAnalysisError, ValueError):
    """
    Argument outside the domain of an operation, e.g. a probability outside [0, 1].
    """


class FitError(DDoSAnalysisError, ValueError):
    """
    Sample that cannot be fitted (empty, constant or negative volumes).
    """


class IngestionError(DDoSAnalysisError, ValueError):
    """
    Raw event log that violates ordering/alternation or cannot be parsed.

    Attributes:
        node (str, optional): offending node identifier.
        line (int, optional): 1-based line number in the source CSV.
    """

    def __init__(self, message: str, node: str | None = None, line: int | None = None) -> None:
        super().__init__(message)
        self.node = node
        self.line = line


class ScenarioError(DDoSAnalysisError, ValueError):
    """
    Attack scenario that cannot be applied to a dataset.
    """


class ConfigurationError(DDoSAnalysisError, ValueError):
    """
    Inconsistent or missing configuration.
    """


class PipelineError(DDoSAnalysisError, ValueError):
    """
    Dataset handed between stages is incomplete.
    """


class DegenerateClassError(DDoSAnalysisError, ValueError):
    """
    Only one class present where both attacked and benign samples are needed.
    """


class InputError(DDoSAnalysisError, ValueError):
    """
    Mismatched or incomplete inputs to a pure computation.
    """


class ShapeError(DDoSAnalysisError, ValueError):
    """
    Tensor shape incompatible with a model or layer.
    """


class UndefinedMetricError(DDoSAnalysisError, ValueError):
    """
    Metric undefined for the given labels (e.g. AUC with a single class).
    """


class AggregationError(DDoSAnalysisError, ValueError):
    """
    Empty group while aggregating reports.
    """
