"""Query-by-example image retrieval with sub-block region matching.

Local colour and texture features are taken from edge-selected sub-blocks of
three partitions (3x3 grid, horizontal and vertical strips) plus a central
block; global colour and edge-histogram features complete the signature.
Images are ranked by a greedy significance-weighted region matching
distance.
"""

from .errors import CbirError
from .features import ExtractionParams, ImageSignature, RegionDescriptor, build_signature
from .index import FeatureIndex, Hit, IndexEntry, build_index, query, read_index, write_index
from .matching import BACKEND, euclidean, irm_distance, total_distance

__all__ = [
    "BACKEND",
    "CbirError",
    "ExtractionParams",
    "FeatureIndex",
    "Hit",
    "ImageSignature",
    "IndexEntry",
    "RegionDescriptor",
    "build_index",
    "build_signature",
    "euclidean",
    "irm_distance",
    "query",
    "read_index",
    "total_distance",
    "write_index",
]

__version__ = "0.1.0"
