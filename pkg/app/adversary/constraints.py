"""Conditions under which an entangling probe leaves the decoys undisturbed.

Eve's ancilla starts in |0>, so U|a>|0> = sum_b |b> (lambda_ab |e_ab>) and the
unnormalized ancilla vectors are slices of column 2a of the 4x4 matrix.
"""

import json
import logging
from pathlib import Path
from typing import Tuple

import numpy as np
from scipy.stats import unitary_group

from ..core.config import settings
from ..core.errors import InvalidArgumentError, UsageError
from ..models.schemas import ConstraintReport
from ..quantum import TwoQubitUnitary

logger = logging.getLogger(__name__)


def _as_unitary(u) -> TwoQubitUnitary:
    return u if isinstance(u, TwoQubitUnitary) else TwoQubitUnitary(u)


def ancilla_components(u: TwoQubitUnitary, a: int, b: int) -> np.ndarray:
    """lambda_ab |e_ab>: ancilla part of U|a>|0> on the data branch |b>"""
    column = _as_unitary(u).matrix[:, 2 * a]
    return column[2 * b : 2 * b + 2]


def _cross_term_distance(u: TwoQubitUnitary) -> float:
    return float(np.linalg.norm(ancilla_components(u, 0, 0) - ancilla_components(u, 1, 1)))


def check_constraints(u: TwoQubitUnitary) -> ConstraintReport:
    u = _as_unitary(u)
    lambda_01 = float(np.linalg.norm(ancilla_components(u, 0, 1)))
    lambda_10 = float(np.linalg.norm(ancilla_components(u, 1, 0)))
    cross = _cross_term_distance(u)
    tol = settings.constraint_tolerance
    return ConstraintReport(
        lambda_01_mag=lambda_01,
        lambda_10_mag=lambda_10,
        cross_term_distance=cross,
        satisfied=lambda_01 <= tol and lambda_10 <= tol and cross <= tol,
    )


def ancilla_distinguishability(u: TwoQubitUnitary) -> float:
    """Trace-distance proxy between the ancilla states left by data 0 and data 1"""
    return min(1.0, _cross_term_distance(_as_unitary(u)) / np.sqrt(2))


def random_unitary(rng: np.random.Generator) -> TwoQubitUnitary:
    """Haar-random probe"""
    return TwoQubitUnitary(unitary_group.rvs(4, random_state=rng))


def _orthonormal_pair(rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    w = unitary_group.rvs(2, random_state=rng)[:, 0]
    w_perp = np.array([-np.conj(w[1]), np.conj(w[0])])
    return w, w_perp


def random_constraint_satisfying_unitary(rng: np.random.Generator) -> TwoQubitUnitary:
    """Random U with U|00> = e^{it}|0>|w> and U|10> = e^{it}|1>|w>"""
    w, w_perp = _orthonormal_pair(rng)
    zero, one = np.array([1, 0]), np.array([0, 1])
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
    mixer = unitary_group.rvs(2, random_state=rng)

    complement = np.column_stack([np.kron(zero, w_perp), np.kron(one, w_perp)]) @ mixer
    matrix = np.column_stack(
        [
            phase * np.kron(zero, w),
            complement[:, 0],
            phase * np.kron(one, w),
            complement[:, 1],
        ]
    )
    return TwoQubitUnitary(matrix)


def load_unitary(path: str) -> TwoQubitUnitary:
    """Read a 4x4 row-major JSON array of [re, im] entries"""
    try:
        rows = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise UsageError(f"Cannot read unitary file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"Unitary file {path} is not valid JSON: {e}") from e
    if not isinstance(rows, list):
        raise InvalidArgumentError(f"Unitary file {path} must hold a 4x4 array")
    u = TwoQubitUnitary.from_json_entries(rows)
    logger.debug(f"Loaded unitary from {path}")
    return u
