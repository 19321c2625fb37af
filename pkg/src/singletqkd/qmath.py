"""Exact dense linear algebra for 1 to 4 polarization qubits.

Index convention: amplitude index ``i`` of an ``n``-qubit state corresponds
to the bit string ``format(i, f"0{n}b")`` read left to right, with the FIRST
photon as the most significant bit. The 4-photon string "0101" therefore
means photon 1 measured 0, photon 2 measured 1, and so on. Photon positions
in every public API are 1-based to match that string notation.

Outcomes are plain '0'/'1' strings. All values are immutable after
construction; every operation is pure given an explicit numpy Generator, so
states can be shared freely across threads as long as each thread owns its
own Generator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

# Tolerances: algebraic identities hold to ATOL; chains of Haar products
# accumulate a little more rounding and are checked to ATOL_ACCUM.
ATOL = 1e-12
ATOL_ACCUM = 1e-10

MAX_QUBITS = 4


def _as_complex(a, shape=None) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


def _qubit_count(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim != 2**n or not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"dimension {dim} is not 2**n for n in 1..{MAX_QUBITS}")
    return n


@dataclass(frozen=True)
class StateVector:
    """Pure state of 1 to 4 qubits as a unit-norm complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _as_complex(np.ravel(self.amplitudes))
        _qubit_count(amps.size)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL:
            raise ValueError(f"state vector norm {norm} differs from 1 by more than {ATOL}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return _qubit_count(self.amplitudes.size)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state of 1 to 4 qubits: Hermitian, unit-trace, PSD matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_complex(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        _qubit_count(m.shape[0])
        if np.abs(m - m.conj().T).max() > ATOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > ATOL or abs(np.trace(m).imag) > ATOL:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @property
    def n_qubits(self) -> int:
        return _qubit_count(self.matrix.shape[0])

    def probabilities(self) -> np.ndarray:
        return np.real(np.diag(self.matrix))


State = Union[StateVector, DensityMatrix]


@dataclass(frozen=True)
class QubitUnitary:
    """Single-qubit unitary, the per-photon action of the channel or a basis."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_complex(self.matrix, shape=(2, 2))
        if np.abs(m.conj().T @ m - np.eye(2)).max() > ATOL:
            raise ValueError("matrix is not unitary")
        object.__setattr__(self, "matrix", m)

    def dagger(self) -> "QubitUnitary":
        return QubitUnitary(self.matrix.conj().T)


IDENTITY = QubitUnitary(np.eye(2))


def bit_string(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b")


def weight(outcome: str) -> int:
    """Number of '1' results in an outcome string."""
    return outcome.count("1")


def basis_state(bits: str) -> StateVector:
    """Computational product state |bits>, first character = first photon."""
    if not bits or any(b not in "01" for b in bits):
        raise ValueError(f"invalid bit string {bits!r}")
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(amps)


def tensor(lhs: StateVector, rhs: StateVector) -> StateVector:
    """Kronecker product with lhs photons first (most significant bits)."""
    total = lhs.n_qubits + rhs.n_qubits
    if total > MAX_QUBITS:
        raise ValueError(f"tensor product would have {total} qubits, supported maximum is {MAX_QUBITS}")
    return StateVector(np.kron(lhs.amplitudes, rhs.amplitudes))


def to_density(state: State) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    v = state.amplitudes
    return DensityMatrix(np.outer(v, v.conj()))


def _kron_chain(matrices: list[np.ndarray]) -> np.ndarray:
    big = matrices[0]
    for m in matrices[1:]:
        rows, cols = big.shape
        big = (big[:, None, :, None] * m[None, :, None, :]).reshape(rows * 2, cols * 2)
    return big


def _is_identity(u: QubitUnitary) -> bool:
    return u.matrix[0, 0] == 1.0 and u.matrix[1, 1] == 1.0 and u.matrix[0, 1] == 0.0 and u.matrix[1, 0] == 0.0


def collective_unitary(u: QubitUnitary, n_qubits: int) -> np.ndarray:
    """The n-fold Kronecker power of u, acting identically on every photon."""
    return _kron_chain([u.matrix] * n_qubits)


def apply_collective(u: QubitUnitary, state: State) -> State:
    """Rotate every photon of the state by the same unitary u."""
    if _is_identity(u):
        return state
    big = collective_unitary(u, state.n_qubits)
    if isinstance(state, StateVector):
        return StateVector(big @ state.amplitudes)
    return DensityMatrix(big @ state.matrix @ big.conj().T)


def apply_product(unitaries: Iterable[QubitUnitary], state: State) -> State:
    """Rotate photon k by unitaries[k]; used for non-collective noise."""
    us = list(unitaries)
    if len(us) != state.n_qubits:
        raise ValueError("need exactly one unitary per photon")
    big = _kron_chain([u.matrix for u in us])
    if isinstance(state, StateVector):
        return StateVector(big @ state.amplitudes)
    return DensityMatrix(big @ state.matrix @ big.conj().T)


def haar_su2(rng: np.random.Generator) -> QubitUnitary:
    """Haar-random SU(2) element via a uniform unit quaternion.

    A standard 4-dimensional Gaussian normalized to the 3-sphere is exactly
    uniform there, and (w, x, y, z) -> [[w+ix, y+iz], [-y+iz, w-ix]] carries
    the uniform measure on the sphere to the Haar measure on SU(2). No
    rejection step is needed.
    """
    v = rng.normal(size=4)
    w, x, y, z = v / np.linalg.norm(v)
    return QubitUnitary(np.array([[w + 1j * x, y + 1j * z], [-y + 1j * z, w - 1j * x]]))


def partial_trace(state: State, keep: Iterable[int]) -> DensityMatrix:
    """Trace out all photons not listed in keep (1-based positions).

    The surviving photons keep their relative order and are relabeled
    1..len(keep).
    """
    rho = to_density(state)
    n = rho.n_qubits
    kept = sorted(set(int(k) for k in keep))
    if not kept:
        raise ValueError("keep must be a nonempty set of photon positions")
    if kept[0] < 1 or kept[-1] > n:
        raise ValueError(f"keep positions must lie in 1..{n}, got {kept}")
    if len(kept) == n:
        return rho
    tensor_form = rho.matrix.reshape([2] * (2 * n))
    for pos in sorted(set(range(1, n + 1)) - set(kept), reverse=True):
        half = tensor_form.ndim // 2
        tensor_form = np.trace(tensor_form, axis1=pos - 1, axis2=pos - 1 + half)
    dim = 2 ** len(kept)
    return DensityMatrix(tensor_form.reshape(dim, dim))


def _born_probabilities(state: State, basis: QubitUnitary) -> np.ndarray:
    """Probabilities of each outcome string when every photon is measured in
    the basis {U|0>, U|1>}, i.e. after rotating the state by U-dagger."""
    if _is_identity(basis):
        return state.probabilities()
    big = _kron_chain([basis.matrix.conj().T] * state.n_qubits)
    if isinstance(state, StateVector):
        return np.abs(big @ state.amplitudes) ** 2
    return np.real(np.einsum("ij,jk,ik->i", big, state.matrix, big.conj()))


def outcome_distribution(state: State, basis: QubitUnitary) -> dict[str, float]:
    """Exact Born probabilities for measuring every photon in the same basis.

    The map covers all 2**n outcome strings, including zero-probability
    ones, so it can serve as a brute-force oracle for support checks.
    """
    probs = _born_probabilities(state, basis)
    n = state.n_qubits
    return {bit_string(i, n): float(p) for i, p in enumerate(probs)}


def measure_product_basis(state: State, basis: QubitUnitary, rng: np.random.Generator) -> str:
    """Sample one outcome string from outcome_distribution(state, basis)."""
    probs = np.maximum(_born_probabilities(state, basis), 0.0)
    cumulative = np.cumsum(probs)
    cumulative /= cumulative[-1]
    index = int(np.searchsorted(cumulative, rng.random(), side="right"))
    return bit_string(min(index, probs.size - 1), state.n_qubits)


def overlap(u: StateVector, v: StateVector) -> complex:
    """Inner product <u|v>."""
    if u.n_qubits != v.n_qubits:
        raise ValueError("overlap requires equal qubit counts")
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def fidelity(u: StateVector, v: StateVector) -> float:
    """|<u|v>|**2 for pure states."""
    return abs(overlap(u, v)) ** 2


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of a - b; zero iff the states are identical."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("trace distance requires equal qubit counts")
    eigenvalues = np.linalg.eigvalsh(a.matrix - b.matrix)
    return 0.5 * float(np.abs(eigenvalues).sum())
