from .extractors import ArtifactExtractor
from .transformers import FitTransformer
from .loaders import ArtifactLoader
from .orchestrator import FitOrchestrator, StudyOrchestrator

__all__ = ["ArtifactExtractor", "FitTransformer", "ArtifactLoader", "FitOrchestrator", "StudyOrchestrator"]
