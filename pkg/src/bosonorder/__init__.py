"""Exact normal ordering of single-mode boson expressions, with the Stirling/Bell
combinatorics, Wick contractions and coherent-state tools that go with it."""

from .algebra import (
    A,
    ADAG,
    BosonPolynomial,
    BosonWord,
    NormalForm,
    ParseError,
    double_dot,
    multiply,
    nf_to_polynomial,
    normal_order,
    parse_expr,
)
from .combinatorics import (
    Polynomial,
    TruncatedSeries,
    bell_number,
    bell_polynomial,
    dobinski,
    stirling_explicit,
    stirling_rec,
)
from .wick import (
    Contraction,
    SetPartition,
    contraction_to_partition,
    enumerate_contractions,
    enumerate_partitions,
    partition_to_contraction,
    wick_normal_order,
)
from .coherent import (
    ComplexAmplitude,
    FockMatrix,
    LambdaSeries,
    coherent_vector,
    expectation,
    fock_matrix,
    series_exp,
    verify_identity,
)

__version__ = "0.1.0"
