from .protocols import EmbedderProtocol, FeatureExtractorProtocol, ImageBatch

__all__ = ["EmbedderProtocol", "FeatureExtractorProtocol", "ImageBatch"]
