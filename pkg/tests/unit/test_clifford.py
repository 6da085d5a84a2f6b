"""
Tests for the two-qubit Clifford group and its native compilation
"""

from collections import Counter

import numpy as np
import pytest

from modchip.benchmarking.clifford import (
    GROUP_ORDER,
    clifford_group,
    compile_to_native,
    equal_up_to_phase,
    sample_clifford_sequence,
    single_qubit_cliffords,
)
from modchip.dynamics.sidebands import GateType
from modchip.errors import DomainError

NATIVES = [GateType.CZ02, GateType.ISWAP]


def _sample_indices(n=40, seed=0):
    return np.random.default_rng(seed).integers(0, GROUP_ORDER, size=n)


def test_single_qubit_group():
    """Test the 24 single-qubit Cliffords start with the identity"""
    C1 = single_qubit_cliffords()
    assert len(C1) == 24
    np.testing.assert_allclose(C1[0], np.eye(2))
    for U in C1:
        np.testing.assert_allclose(U @ U.conj().T, np.eye(2), atol=1e-12)


def test_cz_coset_depths():
    """Test the CZ cosets need zero to three native gates"""
    group = clifford_group(GateType.CZ20)
    assert len(group) == 11520
    assert group.coset_count == 20
    assert Counter(group.coset_depths()) == {0: 1, 1: 9, 2: 9, 3: 1}


def test_iswap_compilation_depth():
    """Test every iSWAP-compiled coset stays within three native gates"""
    group = clifford_group(GateType.ISWAP)
    depths = group.coset_depths()
    assert len(depths) == 20
    assert max(depths) <= 3


@pytest.mark.parametrize("native", NATIVES)
def test_compiled_elements_match(native):
    """Test compiled circuits reproduce their element up to phase"""
    group = clifford_group(native)
    for index in _sample_indices():
        compiled = compile_to_native(int(index), native)
        assert compiled.native_count <= 3
        assert equal_up_to_phase(compiled.unitary(), group.unitary(int(index)))


def test_index_and_inverse():
    """Test lookup round trips and inverses compose to the identity"""
    group = clifford_group()
    for index in _sample_indices(seed=1):
        index = int(index)
        assert group.index(group.unitary(index)) == index
        product = group.compose([index, group.inverse(index)])
        assert equal_up_to_phase(product, np.eye(4))


def test_lookup_errors():
    """Test out-of-range indices and non-Clifford unitaries"""
    group = clifford_group()
    with pytest.raises(DomainError):
        group.unitary(GROUP_ORDER)
    t_gate = np.diag([1.0, np.exp(0.25j * np.pi)])
    with pytest.raises(DomainError):
        group.index(np.kron(t_gate, np.eye(2)))


@pytest.mark.parametrize("interleave", [None, GateType.CZ02, GateType.ISWAP])
def test_sampled_sequence_inverts(interleave):
    """Test random sequences, interleaved or not, compose to the identity"""
    native = interleave or GateType.CZ02
    sequence = sample_clifford_sequence(
        12, seed=4, interleave=interleave, native=native
    )
    assert sequence.length == 12
    assert sequence.verify()
    expected = 25 if interleave else 13
    assert len(sequence.operations()) == expected


def test_sampling_is_seeded():
    """Test equal seeds draw equal sequences"""
    first = sample_clifford_sequence(8, seed=9)
    assert sample_clifford_sequence(8, seed=9) == first
    assert sample_clifford_sequence(8, seed=10).elements != first.elements
    with pytest.raises(DomainError):
        sample_clifford_sequence(0)
