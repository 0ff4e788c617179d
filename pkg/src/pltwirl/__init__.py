"""Pauli twirling, Pauli-Lindblad noise parameters and channel-semigroup Markovianity."""

from .channel import Channel, PauliChannel, compose, is_cptp, twirl
from .lindblad import (
    GateContext,
    InconclusiveError,
    LindbladGenerator,
    classify_channel,
    csm_test_general,
    error_channel,
    generator_transfer,
    propagate_constant,
    propagate_timedep,
)
from .pauli import PauliWord, multiply, pauli_from_label, pauli_matrix, symplectic_product
from .plmodel import (
    CsmVerdict,
    IllDefinedError,
    PLParams,
    classify_pauli,
    f_from_lambda,
    fit_sparse_lambda,
    lambda_from_f,
    pl_channel,
)

__version__ = "0.1.0"
