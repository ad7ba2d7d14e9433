from ddos_analysis.exceptions import DDoSAnalysisError

__all__ = [
    "DDoSAnalysisError",
]
