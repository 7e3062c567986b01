"""Image-folder to TFEA feature extraction via Inception-v3 pooling."""

from .extract import NoImagesError, extract_features, extract_to_file
from .model import FEATURE_DIM, EmbeddingModel
from .tfea import read_tfea, write_tfea

__version__ = "0.1.0"
