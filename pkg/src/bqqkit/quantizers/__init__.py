"""BQQ and the baseline quantizers.

Every code type exposes ``shape``, ``dequantize()`` and ``footprint(scalar_bits)``.
"""

from .bcq import BcqCode, bcq, bcq_as_bqq
from .bqq import BqqCode, BqqStack, bqq_quantize, intermediate_dim, pseudo_bits
from .e8 import E8Code, e8_codebook, e8_lvq
from .grouped import GroupedCode, groupwise_quantize
from .svd import SvdCode, svd_lowrank, svd_uq
from .uq import UqCode, uq_grid
from .vq import VqCode, vq_kmeans

__all__ = [
    "BcqCode",
    "BqqCode",
    "BqqStack",
    "E8Code",
    "GroupedCode",
    "SvdCode",
    "UqCode",
    "VqCode",
    "bcq",
    "bcq_as_bqq",
    "bqq_quantize",
    "e8_codebook",
    "e8_lvq",
    "groupwise_quantize",
    "intermediate_dim",
    "pseudo_bits",
    "svd_lowrank",
    "svd_uq",
    "uq_grid",
    "vq_kmeans",
]
