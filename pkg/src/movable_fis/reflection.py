"""Reflection matrices for diagonal and beyond-diagonal surfaces.

Four designs are provided:

* ``dris_optimal``  - per-element phases aligned with the specular term.
* ``bdris_optimal`` - a unitary mapping ``h_T / |h_T|`` onto ``h_R^H / |h_R|``.
* ``dfis_matrix``   - the fixed ``-I``.
* ``bdfis_matrix``  - the fixed polarization converter ``[[0, -I], [-I, 0]]``.

The ``*_batch`` helpers evaluate received power for stacks of channel
realizations without materializing ``N x N`` matrices; they apply exactly the
same constructions and are checked against the matrix versions in the tests.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .channel import PowerResult, PowerSource, _as_matrix, _as_vector

log = logging.getLogger(__name__)

UNITARY_TOL = 1e-10
GS_SKIP_THRESHOLD = 1e-6


class Architecture(enum.Enum):
    DIAGONAL_UNIT_MODULUS = "diagonal_unit_modulus"
    UNITARY = "unitary"


class Design(enum.Enum):
    DRIS = "DRIS"
    BDRIS = "BDRIS"
    DFIS = "DFIS"
    BDFIS = "BDFIS"
    CUSTOM = "Custom"

    @property
    def is_fixed(self) -> bool:
        return self in (Design.DFIS, Design.BDFIS)

    @property
    def architecture(self) -> Architecture:
        if self in (Design.DRIS, Design.DFIS):
            return Architecture.DIAGONAL_UNIT_MODULUS
        return Architecture.UNITARY


@dataclass(frozen=True)
class ValidationReport:
    unitarity_residual: float
    offdiag_max: float
    unit_modulus_residual: float
    tolerance: float = UNITARY_TOL

    @property
    def unitary_ok(self) -> bool:
        return self.unitarity_residual <= self.tolerance

    @property
    def diagonal_ok(self) -> bool:
        return self.offdiag_max == 0.0 and self.unit_modulus_residual <= self.tolerance

    def passes(self, architecture: Architecture) -> bool:
        if architecture is Architecture.DIAGONAL_UNIT_MODULUS:
            return self.diagonal_ok
        return self.unitary_ok

    def to_dict(self) -> dict:
        return {
            "unitarity_residual": self.unitarity_residual,
            "offdiag_max": self.offdiag_max,
            "unit_modulus_residual": self.unit_modulus_residual,
            "unitary_ok": self.unitary_ok,
            "diagonal_ok": self.diagonal_ok,
        }


def validate(theta) -> ValidationReport:
    """Measure how far ``theta`` is from the unitary and diagonal-unit-modulus sets.

    Accepts a :class:`ReflectionMatrix` or any square array.
    """
    mat = _as_matrix(theta)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"Theta must be square, got shape {mat.shape}")
    n = mat.shape[0]
    gram = mat.conj().T @ mat
    offdiag = mat - np.diag(np.diag(mat))
    return ValidationReport(
        unitarity_residual=float(np.max(np.abs(gram - np.eye(n)))),
        offdiag_max=float(np.max(np.abs(offdiag))),
        unit_modulus_residual=float(np.max(np.abs(np.abs(np.diag(mat)) - 1.0))),
    )


@dataclass(frozen=True)
class ReflectionMatrix:
    """An ``N x N`` reflection matrix tagged with its architecture and design.

    Construction enforces the architecture's constraints. ``degenerate_indices``
    lists 0-based elements whose phase was set by a tie-break rule.
    """

    entries: np.ndarray
    architecture: Architecture
    origin: Design = Design.CUSTOM
    degenerate_indices: tuple[int, ...] = ()

    def __post_init__(self):
        mat = np.array(self.entries, dtype=complex)
        mat.flags.writeable = False
        object.__setattr__(self, "entries", mat)
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        object.__setattr__(self, "origin", Design(self.origin))
        report = validate(mat)
        if not report.passes(self.architecture):
            raise ValueError(
                f"Theta violates {self.architecture.value} constraints: {report.to_dict()}"
            )

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def to_dict(self) -> dict:
        flat = self.entries.ravel()
        return {
            "architecture": self.architecture.value,
            "origin": self.origin.value,
            "N": self.n,
            "entries": [[float(z.real), float(z.imag)] for z in flat],
        }


def theta_entries_from_dict(data: Mapping[str, Any]) -> tuple[np.ndarray, Architecture, Design]:
    """Decode a Theta dump without enforcing its constraints."""
    unknown = set(data) - {"architecture", "origin", "N", "entries"}
    if unknown:
        raise ValueError(f"unknown Theta field(s) {sorted(unknown)}")
    n = int(data["N"])
    pairs = np.asarray(data["entries"], dtype=float)
    if pairs.shape != (n * n, 2):
        raise ValueError(f"expected {n * n} [re, im] pairs, got array of shape {pairs.shape}")
    mat = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(n, n)
    return mat, Architecture(data["architecture"]), Design(data.get("origin", "Custom"))


def theta_from_dict(data: Mapping[str, Any]) -> ReflectionMatrix:
    mat, arch, origin = theta_entries_from_dict(data)
    return ReflectionMatrix(mat, arch, origin)


def _check_even(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 2 or n % 2:
        raise ValueError(f"N must be an even integer >= 2, got {n!r}")
    return int(n)


def _alignment_phase(cascade: complex) -> float:
    # arg(-h_R h_T); pi when the specular term vanishes
    if cascade == 0:
        return np.pi
    return float(np.angle(-cascade))


# Optimal RIS designs --------------------------------------------------------


def dris_optimal(h_R, h_T) -> ReflectionMatrix:
    """Phases ``theta_n = -arg([h_R]_n [h_T]_n) + arg(-h_R h_T)``.

    Elements with a zero cascade product contribute nothing; their phase is
    set to 0 and reported in ``degenerate_indices``.
    """
    h_r, h_t = _as_vector(h_R), _as_vector(h_T)
    if h_r.size != h_t.size:
        raise ValueError(f"dimension mismatch: {h_r.size} vs {h_t.size}")
    prod = h_r * h_t
    psi = _alignment_phase(h_r @ h_t)
    degenerate = np.flatnonzero(prod == 0)
    phases = psi - np.angle(prod)
    phases[degenerate] = 0.0
    if degenerate.size:
        log.debug("D-RIS: %d degenerate element(s) set to phase 0", degenerate.size)
    return ReflectionMatrix(
        np.diag(np.exp(1j * phases)),
        Architecture.DIAGONAL_UNIT_MODULUS,
        Design.DRIS,
        tuple(int(i) for i in degenerate),
    )


def dris_power_closed_form(h_R, h_T, transmit_power: float = 1.0) -> PowerResult:
    h_r, h_t = _as_vector(h_R), _as_vector(h_T)
    amp = np.sum(np.abs(h_r * h_t)) + abs(h_r @ h_t)
    return PowerResult(transmit_power * float(amp) ** 2, PowerSource.CLOSED_FORM, Design.DRIS)


def complete_orthonormal_basis(v, threshold: float = GS_SKIP_THRESHOLD) -> np.ndarray:
    """Unitary matrix whose first column is ``v / |v|``.

    Modified Gram-Schmidt with one re-orthogonalization pass against the
    canonical basis vectors; candidates whose residual norm falls below
    ``threshold`` are skipped.
    """
    v = np.asarray(v, dtype=complex).ravel()
    n = v.size
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot complete a basis from the zero vector")
    basis = np.zeros((n, n), dtype=complex)
    basis[:, 0] = v / norm
    k = 1
    for i in range(n):
        if k == n:
            break
        w = np.zeros(n, dtype=complex)
        w[i] = 1.0
        for _ in range(2):
            q = basis[:, :k]
            w -= q @ (q.conj().T @ w)
        r = np.linalg.norm(w)
        if r < threshold:
            continue
        basis[:, k] = w / r
        k += 1
    if k < n:
        raise RuntimeError(f"basis completion found only {k} of {n} vectors")
    return basis


def bdris_optimal(h_R, h_T) -> ReflectionMatrix:
    """Unitary ``Theta = e^{j psi} B A^H`` mapping ``h_T/|h_T|`` to ``e^{j psi} h_R^H/|h_R|``.

    ``A`` and ``B`` are orthonormal bases with those unit vectors as first
    columns and ``psi = arg(-h_R h_T)``, so ``h_R Theta h_T`` has modulus
    ``|h_R| |h_T|`` and adds in phase with the specular term.
    """
    h_r, h_t = _as_vector(h_R), _as_vector(h_T)
    if h_r.size != h_t.size:
        raise ValueError(f"dimension mismatch: {h_r.size} vs {h_t.size}")
    nr, nt = np.linalg.norm(h_r), np.linalg.norm(h_t)
    if nr == 0 or nt == 0:
        raise ValueError("BD-RIS design needs nonzero h_R and h_T")
    basis_t = complete_orthonormal_basis(h_t / nt)
    basis_r = complete_orthonormal_basis(h_r.conj() / nr)
    psi = _alignment_phase(h_r @ h_t)
    theta = np.exp(1j * psi) * basis_r @ basis_t.conj().T
    return ReflectionMatrix(theta, Architecture.UNITARY, Design.BDRIS)


def bdris_power_closed_form(h_R, h_T, transmit_power: float = 1.0) -> PowerResult:
    h_r, h_t = _as_vector(h_R), _as_vector(h_T)
    amp = np.linalg.norm(h_r) * np.linalg.norm(h_t) + abs(h_r @ h_t)
    return PowerResult(transmit_power * float(amp) ** 2, PowerSource.CLOSED_FORM, Design.BDRIS)


# Fixed FIS designs -----------------------------------------------------------


def dfis_matrix(n: int) -> ReflectionMatrix:
    n = _check_even(n)
    return ReflectionMatrix(-np.eye(n), Architecture.DIAGONAL_UNIT_MODULUS, Design.DFIS)


def bdfis_matrix(n: int) -> ReflectionMatrix:
    """Group-connected polarization converter: each co-located V/H pair is
    joined by a pi phase shifter, i.e. ``[[0, -I], [-I, 0]]``."""
    n = _check_even(n)
    half = n // 2
    eye = np.eye(half)
    zero = np.zeros((half, half))
    return ReflectionMatrix(np.block([[zero, -eye], [-eye, zero]]), Architecture.UNITARY, Design.BDFIS)


def fis_design(design: Design, same_polarization: bool, n: int) -> ReflectionMatrix:
    """Fixed matrix that reaches the frequency-optimized cap for ``design``.

    With equal Tx/Rx polarization ``-I`` already attains the unitary cap, so
    BD-FIS reuses it there; the converter is used only across polarizations.
    """
    design = Design(design)
    if design is Design.DFIS:
        return dfis_matrix(n)
    if design is Design.BDFIS:
        if same_polarization:
            return ReflectionMatrix(-np.eye(n), Architecture.UNITARY, Design.BDFIS)
        return bdfis_matrix(n)
    raise ValueError(f"{design.value} is not a fixed design")


# Batched evaluation ---------------------------------------------------------
# h_r, h_t: (trials, N) complex arrays. Returned powers are for P_T = 1.


def dris_power_batch(h_r: np.ndarray, h_t: np.ndarray) -> np.ndarray:
    prod = h_r * h_t
    cascade = prod.sum(axis=1)
    psi = np.where(cascade == 0, np.pi, np.angle(-cascade))
    phases = psi[:, None] - np.angle(prod)
    phases[prod == 0] = 0.0
    h = np.sum(prod * np.exp(1j * phases), axis=1) - cascade
    return np.abs(h) ** 2


def bdris_power_batch(h_r: np.ndarray, h_t: np.ndarray) -> np.ndarray:
    # Theta h_T = e^{j psi} |h_T| h_R^H / |h_R| for the bdris_optimal matrix
    cascade = np.sum(h_r * h_t, axis=1)
    psi = np.where(cascade == 0, np.pi, np.angle(-cascade))
    nr = np.linalg.norm(h_r, axis=1)
    nt = np.linalg.norm(h_t, axis=1)
    theta_ht = np.exp(1j * psi)[:, None] * (nt / nr)[:, None] * h_r.conj()
    h = np.sum(h_r * theta_ht, axis=1) - cascade
    return np.abs(h) ** 2


def fixed_power_batch(theta, h_r: np.ndarray, h_t: np.ndarray) -> np.ndarray:
    mat = _as_matrix(theta)
    h = np.einsum("ti,ti->t", h_r, h_t @ mat.T) - np.sum(h_r * h_t, axis=1)
    return np.abs(h) ** 2
