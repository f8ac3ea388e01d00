"""Bundled two-party process violating a causal inequality.

W = (1 + (1 s_z s_z 1 + s_z 1 s_x s_z)/sqrt(2)) / 4 over (A_I, A_O, B_I, B_O)
is a valid bipartite process with no decomposition into one-way-signalling
parts. With the instruments below it wins the two-way guessing game with
probability (2 + sqrt(2))/4, above the causal bound 3/4.
"""
from __future__ import annotations

import numpy as np

from .instruments import Instrument
from .process import LabeledSpace, Party, ProcessMatrix, validate_process
from .tensor_core import HermitianOperator, choi_of_kraus, identity, tensor

_SZ = np.diag([1.0 + 0j, -1.0])
_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def ocb_parties() -> tuple[Party, Party]:
    return (
        Party("A", LabeledSpace("A_I", 2), LabeledSpace("A_O", 2)),
        Party("B", LabeledSpace("B_I", 2), LabeledSpace("B_O", 2)),
    )


def ocb_process() -> ProcessMatrix:
    """The inequality-violating process, validated."""
    a, b = ocb_parties()
    term1 = tensor(
        identity(a.input_space),
        HermitianOperator(a.output_space, _SZ),
        HermitianOperator(b.input_space, _SZ),
        identity(b.output_space),
    )
    term2 = tensor(
        HermitianOperator(a.input_space, _SZ),
        identity(a.output_space),
        HermitianOperator(b.input_space, _SX),
        HermitianOperator(b.output_space, _SZ),
    )
    w = (identity(term1.space) + (term1 + term2) / np.sqrt(2.0)) / 4.0
    p = validate_process(ProcessMatrix((a, b), w))
    if p.validity != "valid":
        raise AssertionError(f"fixture failed validation: {p.reason}")
    return p


def ocb_instruments() -> tuple[Instrument, Instrument]:
    """Optimal strategies for the two-way guessing game on ocb_process.

    A measures Z (outcome a) and reprepares its setting bit x: Kraus |x><a|.
    B's setting s = y + 2y': when y' = 1 it measures Z and sends white noise
    (Kraus |0><b|, |1><b| over sqrt(2)); when y' = 0 it measures X and
    reprepares b xor y, the state that steers A's past measurement.
    """
    a, b = ocb_parties()
    e = np.eye(2, dtype=complex)
    rows_a = []
    for x in range(2):
        rows_a.append(tuple(
            choi_of_kraus([np.outer(e[x], e[alpha])], a.input_space, a.output_space)
            for alpha in range(2)
        ))
    ins_a = Instrument(a, 2, 2, tuple(rows_a))

    plus_minus = [np.array([1.0, s], dtype=complex) / np.sqrt(2) for s in (1.0, -1.0)]
    rows_b = []
    for s in range(4):
        y, yp = s % 2, s // 2
        row = []
        for bit in range(2):
            if yp == 1:
                kraus = [np.outer(e[o], e[bit]) / np.sqrt(2) for o in range(2)]
            else:
                kraus = [np.outer(e[bit ^ y], plus_minus[bit].conj())]
            row.append(choi_of_kraus(kraus, b.input_space, b.output_space))
        rows_b.append(tuple(row))
    ins_b = Instrument(b, 4, 2, tuple(rows_b))
    return ins_a, ins_b
