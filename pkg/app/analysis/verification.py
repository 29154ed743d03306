import itertools
import logging
import math
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from ..core.config import settings
from ..core.errors import InvalidArgumentError
from ..models.schemas import (
    CorrectnessCase,
    CorrectnessSummary,
    EfficiencyResult,
    KeyMaterial,
    ProtocolConfig,
    Secret,
    TradeoffRow,
    TruthTableReport,
    TruthTableRow,
    Verdict,
)
from ..protocol.coding import encrypt_group, prepare_carrier, tp_decode
from ..protocol.session import run_protocol
from ..quantum import Basis, complement, project_qubit

logger = logging.getLogger(__name__)

# (K_AB, K_AC, K_BC, M_A1, M_B1) -> (R_A, R_B, C_A, C_B, TP's view of G_a, of G_b)
TRUTH_TABLE: List[Tuple[int, int, int, int, int, int, int, int, int, str, str]] = [
    (0, 0, 0, 0, 0, 0, 0, 0, 0, "G", "G"),
    (0, 0, 0, 0, 1, 0, 0, 0, 1, "G", "G"),
    (0, 0, 0, 1, 0, 0, 0, 1, 0, "G", "G"),
    (0, 0, 0, 1, 1, 0, 0, 1, 1, "G", "G"),
    (0, 0, 1, 0, 0, 0, 1, 0, 1, "G", "G"),
    (0, 0, 1, 0, 1, 0, 1, 0, 0, "G", "G"),
    (0, 0, 1, 1, 0, 0, 1, 1, 1, "G", "G"),
    (0, 0, 1, 1, 1, 0, 1, 1, 0, "G", "G"),
    (0, 1, 0, 0, 0, 1, 0, 1, 0, "G", "G"),
    (0, 1, 0, 0, 1, 1, 0, 1, 1, "G", "G"),
    (0, 1, 0, 1, 0, 1, 0, 0, 0, "G", "G"),
    (0, 1, 0, 1, 1, 1, 0, 0, 1, "G", "G"),
    (0, 1, 1, 0, 0, 1, 1, 1, 1, "G", "G"),
    (0, 1, 1, 0, 1, 1, 1, 1, 0, "G", "G"),
    (0, 1, 1, 1, 0, 1, 1, 0, 1, "G", "G"),
    (0, 1, 1, 1, 1, 1, 1, 0, 0, "G", "G"),
    (1, 0, 0, 0, 0, 1, 1, 0, 0, "~G", "~G"),
    (1, 0, 0, 0, 1, 1, 1, 0, 1, "~G", "~G"),
    (1, 0, 0, 1, 0, 1, 1, 1, 0, "~G", "~G"),
    (1, 0, 0, 1, 1, 1, 1, 1, 1, "~G", "~G"),
    (1, 0, 1, 0, 0, 1, 0, 0, 1, "~G", "~G"),
    (1, 0, 1, 0, 1, 1, 0, 0, 0, "~G", "~G"),
    (1, 0, 1, 1, 0, 1, 0, 1, 1, "~G", "~G"),
    (1, 0, 1, 1, 1, 1, 0, 1, 0, "~G", "~G"),
    (1, 1, 0, 0, 0, 0, 1, 1, 0, "~G", "~G"),
    (1, 1, 0, 0, 1, 0, 1, 1, 1, "~G", "~G"),
    (1, 1, 0, 1, 0, 0, 1, 0, 0, "~G", "~G"),
    (1, 1, 0, 1, 1, 0, 1, 0, 1, "~G", "~G"),
    (1, 1, 1, 0, 0, 0, 0, 1, 1, "~G", "~G"),
    (1, 1, 1, 0, 1, 0, 0, 1, 0, "~G", "~G"),
    (1, 1, 1, 1, 0, 0, 0, 0, 1, "~G", "~G"),
    (1, 1, 1, 1, 1, 0, 0, 0, 0, "~G", "~G"),
]

_SAMPLE_G_A = "01101"
_SAMPLE_G_B = "10110"


def _decoded_view(group: str, flip: int, key_bit: int, flag: int) -> Tuple[int, str]:
    """Run one group through encryption, the GHZ branch `flag`, and TP's decode"""
    carrier = project_qubit(prepare_carrier(encrypt_group(group, flip)), 0, Basis.Z, flag)
    measured = format(int(np.argmax(carrier.probabilities())), f"0{carrier.qubit_count}b")
    record = tp_decode(measured, key_bit)
    if record.m2_prime == group:
        return record.c, "G"
    if record.m2_prime == complement(group):
        return record.c, "~G"
    return record.c, "?"


def verify_truth_table() -> TruthTableReport:
    rows = []
    for expected in TRUTH_TABLE:
        k_ab, k_ac, k_bc, m_a1, m_b1 = expected[:5]
        keys = KeyMaterial(k_ab=[k_ab], k_ac=[k_ac], k_bc=[k_bc])
        r_a, r_b = keys.r_alice(0), keys.r_bob(0)
        c_a, alice_output = _decoded_view(_SAMPLE_G_A, r_a, k_ac, m_a1)
        c_b, bob_output = _decoded_view(_SAMPLE_G_B, r_b, k_bc, m_b1)
        computed = (r_a, r_b, c_a, c_b, alice_output, bob_output)
        rows.append(
            TruthTableRow(
                k_ab=k_ab,
                k_ac=k_ac,
                k_bc=k_bc,
                m_a1=m_a1,
                m_b1=m_b1,
                r_a=r_a,
                r_b=r_b,
                c_a=c_a,
                c_b=c_b,
                alice_output=alice_output,
                bob_output=bob_output,
                passed=computed == tuple(expected[5:]),
            )
        )
    passed = sum(row.passed for row in rows)
    return TruthTableReport(rows=rows, passed_count=passed, all_passed=passed == len(rows))


def qubit_efficiency(n: int, secret_length: Optional[int] = None) -> EfficiencyResult:
    """Compared bits per consumed carrier qubit, n/(2n+2)

    With N given, also checks the value against the upper end N/(2N+2).
    """
    if n < 2:
        raise InvalidArgumentError(f"group size must be >= 2, got {n}")
    if secret_length is not None and secret_length < n:
        raise InvalidArgumentError(f"group size {n} exceeds N={secret_length}")
    efficiency = Fraction(n, 2 * n + 2)
    bounds_ok = Fraction(1, 3) <= efficiency < Fraction(1, 2)
    if secret_length is not None:
        upper = Fraction(secret_length, 2 * secret_length + 2)
        bounds_ok = bounds_ok and efficiency <= upper
    return EfficiencyResult(
        group_size=n,
        numerator=efficiency.numerator,
        denominator=efficiency.denominator,
        value=float(efficiency),
        bounds_ok=bounds_ok,
        secret_length=secret_length,
    )


def efficiency_tradeoff(secret_length: int) -> List[TradeoffRow]:
    """Larger groups raise efficiency and GHZ size, and raise the insider's guess odds"""
    if secret_length < 2:
        raise InvalidArgumentError(f"N must be >= 2, got {secret_length}")
    rows = []
    for n in range(2, secret_length + 1):
        result = qubit_efficiency(n, secret_length)
        group_count = math.ceil(secret_length / n)
        rows.append(
            TradeoffRow(
                group_size=n,
                ghz_qubits=n + 1,
                group_count=group_count,
                efficiency=str(result.efficiency),
                efficiency_value=result.value,
                guess_probability=0.5**group_count,
            )
        )
    return rows


def _pairs(secret_length: int, rng: np.random.Generator) -> List[Tuple[int, int]]:
    size = 2**secret_length
    if secret_length <= settings.exhaustive_full_up_to:
        return list(itertools.product(range(size), repeat=2))
    drawn = rng.integers(0, size, size=(settings.exhaustive_sample_pairs, 2))
    return [(int(x), int(y)) for x, y in drawn]


def exhaustive_correctness(
    max_secret_length: int, seed: int = 0, decoy_count: int = 2
) -> CorrectnessSummary:
    """Honest runs over every N, n and (X, Y) pair must announce X == Y exactly"""
    if max_secret_length > settings.exhaustive_max_n:
        raise InvalidArgumentError(
            f"N_max={max_secret_length} exceeds the cap of {settings.exhaustive_max_n}"
        )
    if max_secret_length < 2:
        raise InvalidArgumentError(f"N_max must be >= 2, got {max_secret_length}")

    rng = np.random.default_rng(seed)
    cases = []
    for secret_length in range(2, max_secret_length + 1):
        for n in range(2, secret_length + 1):
            config = ProtocolConfig(
                secret_length=secret_length, group_size=n, decoy_count=decoy_count
            )
            pairs = _pairs(secret_length, rng)
            equal = failures = 0
            for x, y in pairs:
                verdict = run_protocol(
                    config,
                    Secret.from_int(x, secret_length),
                    Secret.from_int(y, secret_length),
                    rng=rng,
                ).verdict
                equal += verdict is Verdict.EQUAL
                if verdict is not (Verdict.EQUAL if x == y else Verdict.UNEQUAL):
                    failures += 1
                    logger.warning(
                        f"N={secret_length} n={n}: wrong verdict for ({x}, {y})"
                    )
            cases.append(
                CorrectnessCase(
                    secret_length=secret_length,
                    group_size=n,
                    exhaustive=secret_length <= settings.exhaustive_full_up_to,
                    pairs_checked=len(pairs),
                    equal_verdicts=equal,
                    failures=failures,
                )
            )
    total_failures = sum(case.failures for case in cases)
    return CorrectnessSummary(
        max_secret_length=max_secret_length,
        cases=cases,
        total_pairs=sum(case.pairs_checked for case in cases),
        total_failures=total_failures,
        all_passed=total_failures == 0,
    )
