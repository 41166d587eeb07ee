"""Register layout, basis indexing and state algebra for d-level, n-site systems.

Amplitudes are stored in mixed-radix order with site 0 as the most significant
digit, so ``amps.reshape((d,) * n)[a_0, ..., a_{n-1}]`` addresses the basis ket
``|a_0 ... a_{n-1}>``. When a probe is present it always sits at site 0.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

NORM_TOL = 1e-12
CHAIN_NORM_TOL = 1e-10
UNITARY_TOL = 1e-10
DEFAULT_MAX_QUBITS = 22
MAX_QUBITS_ENV = "PARITY_PROBE_MAX_QUBITS"

AXES = ("x", "y", "z")


class RegisterError(ValueError):
    """Raised for malformed register shapes, digits or states."""


def max_amplitudes() -> int:
    """Largest dense amplitude count allowed, ``2**PARITY_PROBE_MAX_QUBITS``."""
    raw = os.environ.get(MAX_QUBITS_ENV)
    bits = DEFAULT_MAX_QUBITS if raw is None else int(raw)
    return 2**bits


@dataclass(frozen=True)
class RegisterShape:
    d: int
    n_sites: int
    probe_present: bool = False

    def __post_init__(self):
        if self.d < 2:
            raise RegisterError(f"level count d must be >= 2, got {self.d}")
        if self.n_sites < 1:
            raise RegisterError(f"site count must be >= 1, got {self.n_sites}")
        if self.d**self.n_sites > max_amplitudes():
            raise RegisterError(
                f"register d={self.d}, n={self.n_sites} has {self.d ** self.n_sites} "
                f"amplitudes, above the dense cap of {max_amplitudes()}"
            )

    @property
    def dim(self) -> int:
        return self.d**self.n_sites

    @property
    def system_sites(self) -> tuple[int, ...]:
        start = 1 if self.probe_present else 0
        return tuple(range(start, self.n_sites))

    def check_site(self, site: int) -> None:
        if not 0 <= site < self.n_sites:
            raise RegisterError(f"site {site} out of range for {self.n_sites} sites")


def encode(shape: RegisterShape, digits: Sequence[int]) -> int:
    if len(digits) != shape.n_sites:
        raise RegisterError(f"expected {shape.n_sites} digits, got {len(digits)}")
    index = 0
    for a in digits:
        if not 0 <= a < shape.d:
            raise RegisterError(f"digit {a} outside [0, {shape.d})")
        index = index * shape.d + int(a)
    return index


def decode(shape: RegisterShape, index: int) -> tuple[int, ...]:
    if not 0 <= index < shape.dim:
        raise RegisterError(f"index {index} outside [0, {shape.dim})")
    digits = []
    for _ in range(shape.n_sites):
        index, a = divmod(index, shape.d)
        digits.append(a)
    return tuple(reversed(digits))


def site_digits(shape: RegisterShape, site: int) -> np.ndarray:
    """Digit of ``site`` for every basis index, as an int array of length d^n."""
    shape.check_site(site)
    stride = shape.d ** (shape.n_sites - 1 - site)
    idx = np.arange(shape.dim, dtype=np.int64)
    if shape.d == 2:
        return (idx >> (shape.n_sites - 1 - site)) & 1
    return (idx // stride) % shape.d


def roots_of_unity(d: int) -> np.ndarray:
    """``q**k`` for k in [0, d) with q = exp(2 pi i / d); exact where the value is real or imaginary."""
    k = np.arange(d)
    roots = np.exp(2j * np.pi * k / d)
    for i in range(d):
        if (4 * i) % d == 0:
            roots[i] = (1, 1j, -1, -1j)[(4 * i // d) % 4]
    return roots


def generalized_pauli(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Shift and clock matrices with X|a> = |a-1 mod d>, Z|a> = q^a |a>, so that XZ = qZX."""
    q = roots_of_unity(d)
    Z = np.diag(q).astype(complex)
    X = np.zeros((d, d), dtype=complex)
    for a in range(d):
        X[(a - 1) % d, a] = 1.0
    return X, Z


def fourier_matrix(d: int) -> np.ndarray:
    """Columns are the x-basis kets |n^x> = d^{-1/2} sum_a q^{an} |a>."""
    q = roots_of_unity(d)
    a = np.arange(d)
    return q[np.outer(a, a) % d] / math.sqrt(d)


@dataclass(frozen=True)
class AxisKet:
    axis: str
    label: int

    def __post_init__(self):
        if self.axis not in AXES:
            raise RegisterError(f"unknown axis {self.axis!r}")
        if self.label < 0:
            raise RegisterError(f"negative label {self.label}")

    def vector(self, d: int) -> np.ndarray:
        if self.label >= d:
            raise RegisterError(f"label {self.label} outside [0, {d})")
        if self.axis == "z":
            v = np.zeros(d, dtype=complex)
            v[self.label] = 1.0
            return v
        if self.axis == "x":
            return fourier_matrix(d)[:, self.label].copy()
        if d != 2:
            raise RegisterError("y-axis kets are defined for qubits only")
        sign = 1 if self.label == 0 else -1
        return np.array([1.0, sign * 1j]) / math.sqrt(2)


@dataclass(frozen=True, eq=False)
class QuditState:
    shape: RegisterShape
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.shape.dim:
            raise RegisterError(f"expected {self.shape.dim} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > CHAIN_NORM_TOL:
            raise RegisterError(f"state norm {norm!r} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def d(self) -> int:
        return self.shape.d

    @property
    def n_sites(self) -> int:
        return self.shape.n_sites

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.d,) * self.n_sites)

    def with_amplitudes(self, amps: np.ndarray) -> "QuditState":
        return QuditState(self.shape, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "QuditState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "QuditState") -> float:
        return abs(self.inner(other)) ** 2

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "n": self.n_sites,
            "probe": self.shape.probe_present,
            "amps": [[float(z.real), float(z.imag)] for z in self.amplitudes],
        }

    @classmethod
    def from_json(cls, obj: dict, renormalize_tol: float = 0.0) -> "QuditState":
        """Parse the ``{"d", "n", "probe", "amps"}`` format.

        Norm deviations up to ``renormalize_tol`` are silently renormalized;
        the caller decides whether to warn.
        """
        try:
            shape = RegisterShape(int(obj["d"]), int(obj["n"]), bool(obj.get("probe", False)))
            amps = np.array([complex(float(re), float(im)) for re, im in obj["amps"]])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, RegisterError):
                raise
            raise RegisterError(f"malformed state JSON: {exc}") from exc
        if amps.size != shape.dim:
            raise RegisterError(f"expected {shape.dim} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > max(renormalize_tol, CHAIN_NORM_TOL):
            raise RegisterError(f"state norm {norm!r} deviates from 1 by more than {renormalize_tol}")
        if norm == 0:
            raise RegisterError("zero state")
        if abs(norm - 1.0) > NORM_TOL:
            amps = amps / norm
        return cls(shape, amps)


def basis_state(shape: RegisterShape, digits: Sequence[int]) -> QuditState:
    amps = np.zeros(shape.dim, dtype=complex)
    amps[encode(shape, digits)] = 1.0
    return QuditState(shape, amps)


SiteKet = Union[AxisKet, Sequence[complex], np.ndarray]


def product_state(shape: RegisterShape, site_kets: Sequence[SiteKet]) -> QuditState:
    if len(site_kets) != shape.n_sites:
        raise RegisterError(f"expected {shape.n_sites} site kets, got {len(site_kets)}")
    amps = np.ones(1, dtype=complex)
    for ket in site_kets:
        v = ket.vector(shape.d) if isinstance(ket, AxisKet) else np.asarray(ket, dtype=complex)
        if v.shape != (shape.d,):
            raise RegisterError(f"site vector must have length {shape.d}")
        if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise RegisterError("site vector is not normalized")
        amps = np.kron(amps, v)
    return QuditState(shape, amps)


def random_state(shape: RegisterShape, seed) -> QuditState:
    """Normalized vector of independent complex Gaussians, deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal(shape.dim) + 1j * rng.standard_normal(shape.dim)
    return QuditState(shape, amps / np.linalg.norm(amps))


def is_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) <= tol)


def _apply_site(amps: np.ndarray, shape: RegisterShape, site: int, U: np.ndarray) -> np.ndarray:
    left = shape.d**site
    right = shape.d ** (shape.n_sites - 1 - site)
    block = amps.reshape(left, shape.d, right)
    return np.einsum("ab,lbr->lar", U, block).reshape(-1)


def apply_single_site(state: QuditState, site: int, U: np.ndarray) -> QuditState:
    state.shape.check_site(site)
    U = np.asarray(U, dtype=complex)
    if U.shape != (state.d, state.d):
        raise RegisterError(f"site operator must be {state.d}x{state.d}")
    if not is_unitary(U):
        raise RegisterError("site operator is not unitary")
    return state.with_amplitudes(_apply_site(state.amplitudes, state.shape, site, U))


def apply_sites(state: QuditState, sites: Sequence[int], U: np.ndarray) -> QuditState:
    """Apply the same single-site unitary to every site in ``sites``."""
    out = state
    for s in sites:
        out = apply_single_site(out, s, U)
    return out


def reduced_density(state: QuditState, sites: Sequence[int]) -> np.ndarray:
    sites = list(sites)
    if not sites:
        raise RegisterError("empty site subset")
    if len(set(sites)) != len(sites):
        raise RegisterError("repeated site in subset")
    for s in sites:
        state.shape.check_site(s)
    rest = [s for s in range(state.n_sites) if s not in sites]
    psi = np.transpose(state.tensor(), sites + rest).reshape(state.d ** len(sites), -1)
    return psi @ psi.conj().T


def adjoin_probe(probe: np.ndarray | AxisKet, system: QuditState) -> QuditState:
    """Joint state with the probe prepended as site 0."""
    if system.shape.probe_present:
        raise RegisterError("state already carries a probe")
    v = probe.vector(system.d) if isinstance(probe, AxisKet) else np.asarray(probe, dtype=complex)
    shape = RegisterShape(system.d, system.n_sites + 1, probe_present=True)
    return QuditState(shape, np.kron(v, system.amplitudes))


def measure_site0_branches(joint: QuditState) -> list[tuple[int, float, np.ndarray]]:
    """Computational-basis partial measurement of site 0.

    Returns ``(label, probability, unnormalized remainder)`` for every label.
    """
    block = joint.amplitudes.reshape(joint.d, -1)
    out = []
    for label in range(joint.d):
        branch = block[label]
        p = float(np.vdot(branch, branch).real)
        out.append((label, p, branch))
    return out


def sample_index(probabilities: Sequence[float], rng: np.random.Generator) -> int:
    """Inverse-CDF draw from a discrete distribution using one uniform variate."""
    cdf = np.cumsum(probabilities)
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(cdf) - 1))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
