"""Registry of quantization methods with their parameters and defaults."""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .config import (
    DEFAULT_E8_SCALE_BITS,
    DEFAULT_UQ_SPLIT,
    DEFAULT_VQ_DIM,
    DEFAULT_VQ_K,
)
from .errors import ConfigError
from .pubo import AnnealParams
from .quantizers import (
    BcqCode,
    BqqCode,
    E8Code,
    SvdCode,
    UqCode,
    VqCode,
    bcq,
    bqq_quantize,
    e8_lvq,
    groupwise_quantize,
    svd_lowrank,
    svd_uq,
    uq_grid,
    vq_kmeans,
)


@dataclass(frozen=True)
class MethodParam:
    name: str
    kind: type
    default: int | float
    help: str


@dataclass(frozen=True)
class Method:
    """A quantizer entry point.

    ``run(w, params, seed, anneal)`` receives fully resolved parameters.
    """

    id: str
    description: str
    params: tuple[MethodParam, ...]
    code_type: type
    run: Callable[[np.ndarray, dict, int, AnnealParams], object]

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(param.name for param in self.params)

    def resolve(self, given: dict | None = None) -> dict:
        """Fill defaults and coerce values; unknown names are rejected.

        Raises:
            ConfigError: For an unknown parameter or a value of the wrong type
        """
        given = dict(given or {})
        unknown = sorted(set(given) - set(self.param_names))
        if unknown:
            msg = (
                f"unknown parameter(s) {', '.join(unknown)} for method {self.id}; "
                f"expected {', '.join(self.param_names)}"
            )
            raise ConfigError(msg)
        resolved = {}
        for param in self.params:
            value = given.get(param.name, param.default)
            try:
                resolved[param.name] = param.kind(value)
            except (TypeError, ValueError):
                msg = f"{self.id}.{param.name} expects {param.kind.__name__}, got {value!r}"
                raise ConfigError(msg) from None
        return resolved


def _bqq(w, params, seed, anneal):
    return bqq_quantize(w, params["p"], params["l_scale"], anneal, seed)


def _uq(w, params, seed, anneal):  # noqa: ARG001
    return uq_grid(w, params["bits"], params["n_split"])


def _bcq(w, params, seed, anneal):  # noqa: ARG001
    return bcq(w, params["p"])


def _svd(w, params, seed, anneal):  # noqa: ARG001
    return svd_lowrank(w, params["rank"])


def _svd_uq(w, params, seed, anneal):  # noqa: ARG001
    return svd_uq(w, params["rank"], params["bits"], params["n_split"])


def _vq(w, params, seed, anneal):  # noqa: ARG001
    return vq_kmeans(w, params["vec_dim"], params["k"], seed)


def _vq_uq(w, params, seed, anneal):  # noqa: ARG001
    return vq_kmeans(w, params["vec_dim"], params["k"], seed, params["bits"])


def _e8(w, params, seed, anneal):  # noqa: ARG001
    return e8_lvq(w, params["n_bits"], params["scale_bits"] or None)


_P = MethodParam("p", int, 1, "number of stacks / rounds")
_L_SCALE = MethodParam("l_scale", float, 1.0, "multiplier on round(mn/(m+n))")
_BITS = MethodParam("bits", int, 2, "uniform quantizer bit width")
_N_SPLIT = MethodParam("n_split", int, DEFAULT_UQ_SPLIT, "grid points per range end")
_RANK = MethodParam("rank", int, 8, "truncation rank")
_VEC_DIM = MethodParam("vec_dim", int, DEFAULT_VQ_DIM, "vector length")
_K = MethodParam("k", int, DEFAULT_VQ_K, "codebook size")

METHODS: dict[str, Method] = {
    method.id: method
    for method in (
        Method("bqq", "binary quadratic quantization", (_P, _L_SCALE), BqqCode, _bqq),
        Method("uq", "grid-search uniform quantization", (_BITS, _N_SPLIT), UqCode, _uq),
        Method(
            "bcq",
            "binary coding quantization",
            (MethodParam("p", int, 2, "number of sign bases"),),
            BcqCode,
            _bcq,
        ),
        Method("svd", "truncated SVD", (_RANK,), SvdCode, _svd),
        Method(
            "svd_uq",
            "truncated SVD with uniform-quantized factors",
            (_RANK, _BITS, _N_SPLIT),
            SvdCode,
            _svd_uq,
        ),
        Method("vq", "k-means vector quantization", (_VEC_DIM, _K), VqCode, _vq),
        Method(
            "vq_uq",
            "k-means vector quantization with a uniform-quantized codebook",
            (_VEC_DIM, _K, _BITS),
            VqCode,
            _vq_uq,
        ),
        Method(
            "e8",
            "residual E8 lattice vector quantization",
            (
                MethodParam("n_bits", int, 2, "residual rounds"),
                MethodParam(
                    "scale_bits", int, DEFAULT_E8_SCALE_BITS, "scale UQ bits, 0 disables"
                ),
            ),
            E8Code,
            _e8,
        ),
    )
}


def get_method(method_id: str) -> Method:
    try:
        return METHODS[method_id]
    except KeyError:
        msg = f"unknown method {method_id!r}; expected one of {', '.join(METHODS)}"
        raise ConfigError(msg) from None


def quantize_matrix(
    method_id: str,
    w: np.ndarray,
    params: dict | None = None,
    *,
    seed: int = 0,
    anneal: AnnealParams | None = None,
    group_rows: int | None = None,
    group_cols: int | None = None,
):
    """Quantize ``w`` with a registered method, whole or tile by tile.

    With either group dimension set, the matrix is tiled (a missing dimension spans the
    whole matrix) and tile i is quantized with seed ``seed + i``.
    """
    method = get_method(method_id)
    resolved = method.resolve(params)
    anneal = anneal or AnnealParams.auto_detect()
    if group_rows is None and group_cols is None:
        return method.run(w, resolved, seed, anneal)
    m, n = w.shape
    return groupwise_quantize(
        w,
        group_rows or m,
        group_cols or n,
        lambda block, index: method.run(block, resolved, seed + index, anneal),
    )


def format_params(params: dict) -> str:
    """``key=value`` pairs joined by ';' in the given order."""
    return ";".join(f"{key}={value}" for key, value in params.items())
