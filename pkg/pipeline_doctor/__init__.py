"""pipeline-doctor: localize, remediate and explain failures in AutoML planned pipelines"""

__version__ = "0.1.0"
