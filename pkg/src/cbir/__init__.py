"""Query-by-example image retrieval from fused color and shape descriptors."""

from .descriptors import Descriptor, extract_descriptor
from .imaging import RgbImage, decode_image, resize_canonical
from .index import (
    RetrievalIndex,
    build_index,
    load_index,
    manhattan,
    save_index,
    search_topk,
)

__all__ = [
    "Descriptor",
    "RgbImage",
    "RetrievalIndex",
    "build_index",
    "decode_image",
    "extract_descriptor",
    "load_index",
    "manhattan",
    "resize_canonical",
    "save_index",
    "search_topk",
]
