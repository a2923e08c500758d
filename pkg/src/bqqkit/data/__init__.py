from .fvecs import FvecsRecordSet, parse_fvecs, write_fvecs
from .loader import GeneratorSpec, load_matrix
from .raw import read_raw, write_raw
from .synthetic import gen_gaussian, gen_lowrank_noise, gen_random_cities
from .text import format_delimited, parse_delimited
from .tsplib import TspInstance, distance_matrix, format_tsplib, parse_tsplib

__all__ = [
    "FvecsRecordSet",
    "GeneratorSpec",
    "TspInstance",
    "distance_matrix",
    "format_delimited",
    "format_tsplib",
    "gen_gaussian",
    "gen_lowrank_noise",
    "gen_random_cities",
    "load_matrix",
    "parse_delimited",
    "parse_fvecs",
    "parse_tsplib",
    "read_raw",
    "write_fvecs",
    "write_raw",
]
