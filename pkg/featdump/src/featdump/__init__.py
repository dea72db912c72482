"""Deep-feature and perceptual-similarity export helper.

Writes the FVEC feature files and LPIPS CSVs that the main real2sim toolkit
ingests; communicates with it only through those file formats.
"""

__version__ = "0.1.0"

from .backbone import FEATURE_DIM, extract_features, perceptual_distance
from .jobs import DumpJob, dump_features, dump_lpips

__all__ = [
    "DumpJob",
    "FEATURE_DIM",
    "dump_features",
    "dump_lpips",
    "extract_features",
    "perceptual_distance",
]
