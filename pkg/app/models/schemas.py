import math
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

from pydantic import (
    AliasChoices,
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

from ..core.config import settings


def _check_bits(bits: str) -> str:
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"expected a non-empty 0/1 string, got {bits!r}")
    return bits


class Actor(str, Enum):
    ALICE = "alice"
    BOB = "bob"
    TP = "tp"
    EVE = "eve"


class Verdict(str, Enum):
    EQUAL = "equal"
    UNEQUAL = "unequal"
    ABORTED = "aborted"


class AttackKind(str, Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept_resend"
    MEASUREMENT_RESEND = "measurement_resend"
    ENTANGLE_MEASURE = "entangle_measure"


class ChannelTarget(str, Enum):
    ALICE_CHANNEL = "alice_channel"
    BOB_CHANNEL = "bob_channel"
    BOTH = "both"

    def covers(self, sender: Actor) -> bool:
        if self is ChannelTarget.BOTH:
            return True
        if self is ChannelTarget.ALICE_CHANNEL:
            return sender is Actor.ALICE
        return sender is Actor.BOB

    @property
    def channel_count(self) -> int:
        return 2 if self is ChannelTarget.BOTH else 1


class InterceptStrategy(str, Enum):
    MEASURE_PREPARE = "measure_prepare"
    STORE_FAKE = "store_fake"


class GuessRole(str, Enum):
    TP = "tp"
    ALICE = "alice"
    BOB = "bob"
    EVE = "eve"


class TranscriptEvent(BaseModel):
    """One entry of a session's event log"""

    model_config = ConfigDict(frozen=True)

    step: int
    actor: Actor
    action: str
    payload: Dict[str, Any] = Field(default_factory=dict)


class ProtocolConfig(BaseModel):
    """Classical session parameters: N, n, decoys per transmission, abort threshold"""

    model_config = ConfigDict(frozen=True)

    secret_length: int = Field(ge=1)
    group_size: int
    decoy_count: int = Field(default_factory=lambda: settings.default_decoy_count, ge=0)
    threshold: float = Field(
        default_factory=lambda: settings.default_threshold, ge=0.0, le=1.0
    )
    max_attempts: int = Field(
        default_factory=lambda: settings.default_max_attempts, ge=1
    )

    @model_validator(mode="after")
    def check_group_size(self):
        if not 2 <= self.group_size <= self.secret_length:
            raise ValueError(
                f"group size n={self.group_size} must satisfy 2 <= n <= N={self.secret_length}"
            )
        return self

    @property
    def group_count(self) -> int:
        return math.ceil(self.secret_length / self.group_size)

    @property
    def padding(self) -> int:
        return (-self.secret_length) % self.group_size


class Secret(BaseModel):
    """Bits x_1..x_N in index order; x_1 is the least significant bit"""

    model_config = ConfigDict(frozen=True)

    bits: str

    @field_validator("bits")
    @classmethod
    def validate_bits(cls, v: str) -> str:
        return _check_bits(v)

    @property
    def length(self) -> int:
        return len(self.bits)

    @property
    def value(self) -> int:
        return int(self.bits[::-1], 2)

    @classmethod
    def from_int(cls, value: int, length: int) -> "Secret":
        if length < 1 or not 0 <= value < 2**length:
            raise ValueError(f"value {value} does not fit in {length} bits")
        return cls(bits=format(value, f"0{length}b")[::-1])

    @classmethod
    def parse(cls, text: str, length: int) -> "Secret":
        """Bit string of exactly `length` 0/1 characters, otherwise a decimal value"""
        text = text.strip()
        if len(text) == length and not set(text) - {"0", "1"}:
            return cls(bits=text)
        if not text.isdigit():
            raise ValueError(f"secret {text!r} is neither {length} bits nor a decimal")
        return cls.from_int(int(text), length)


class GroupedSecret(BaseModel):
    """Secret split into n-bit groups, the last one zero-padded"""

    model_config = ConfigDict(frozen=True)

    groups: List[str]
    group_size: int
    original_length: int

    @model_validator(mode="after")
    def check_groups(self):
        for group in self.groups:
            _check_bits(group)
            if len(group) != self.group_size:
                raise ValueError(
                    f"group {group!r} does not have {self.group_size} bits"
                )
        if len(self.groups) != math.ceil(self.original_length / self.group_size):
            raise ValueError("group count does not match ceil(N/n)")
        return self

    @property
    def padded_bits(self) -> str:
        return "".join(self.groups)


class KeyMaterial(BaseModel):
    """The three pre-shared key sequences, one bit per group"""

    model_config = ConfigDict(frozen=True)

    k_ab: List[int]
    k_ac: List[int]
    k_bc: List[int]

    @model_validator(mode="after")
    def check_keys(self):
        if not len(self.k_ab) == len(self.k_ac) == len(self.k_bc):
            raise ValueError("key sequences must have equal lengths")
        for bit in self.k_ab + self.k_ac + self.k_bc:
            if bit not in (0, 1):
                raise ValueError(f"key bit {bit} is not 0/1")
        return self

    @property
    def group_count(self) -> int:
        return len(self.k_ab)

    def r_alice(self, index: int) -> int:
        return self.k_ab[index] ^ self.k_ac[index]

    def r_bob(self, index: int) -> int:
        return self.k_ab[index] ^ self.k_bc[index]


class EncryptedGroup(BaseModel):
    """One group after key-controlled bit flipping, as sent to TP"""

    model_config = ConfigDict(frozen=True)

    bits: str
    flipped: bool = False

    @field_validator("bits")
    @classmethod
    def validate_bits(cls, v: str) -> str:
        return _check_bits(v)


class TpDecodeRecord(BaseModel):
    """What TP measured and derived for one group"""

    model_config = ConfigDict(frozen=True)

    m1: int
    m2: str
    c: int
    m2_prime: str

    @model_validator(mode="after")
    def check_flip(self):
        expected = self.m2 if self.c == 0 else self.m2.translate(str.maketrans("01", "10"))
        if self.m2_prime != expected:
            raise ValueError("m2_prime is inconsistent with m2 and c")
        return self


class ChannelCheck(BaseModel):
    """Decoy check result for one sender's transmission"""

    model_config = ConfigDict(frozen=True)

    channel: Actor
    decoy_count: int
    mismatches: int
    error_rate: float
    passed: bool


class RunOutcome(BaseModel):
    """Verdict and public record of one protocol session"""

    model_config = ConfigDict(frozen=True)

    verdict: Verdict
    per_group_rc: List[str] = Field(default_factory=list)
    eavesdrop_error_rate: float = 0.0
    channel_checks: List[ChannelCheck] = Field(default_factory=list)
    attempts: int = 1
    transcript: List[TranscriptEvent] = Field(default_factory=list)


class ExperimentReport(BaseModel):
    """Monte Carlo estimate with its analytic target and 3-sigma verdict"""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    name: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    trials: int
    estimate: float
    analytic: Optional[float] = None
    std_error: float
    passed: bool = Field(
        serialization_alias="pass", validation_alias=AliasChoices("pass", "passed")
    )
    details: Dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_counts(
        cls,
        name: str,
        successes: int,
        trials: int,
        analytic: Optional[float] = None,
        parameters: Optional[Dict[str, Any]] = None,
        details: Optional[Dict[str, Any]] = None,
        sigma: Optional[float] = None,
    ) -> "ExperimentReport":
        sigma = settings.sigma_multiplier if sigma is None else sigma
        estimate = successes / trials
        std_error = math.sqrt(estimate * (1 - estimate) / trials)
        if analytic is None:
            passed = True
        else:
            # the band uses the wider of the empirical and analytic standard errors
            band = max(std_error, math.sqrt(analytic * (1 - analytic) / trials))
            passed = abs(estimate - analytic) <= sigma * band + 1e-12
        return cls(
            name=name,
            parameters=parameters or {},
            trials=trials,
            estimate=estimate,
            analytic=analytic,
            std_error=std_error,
            passed=passed,
            details=details or {},
        )


class EfficiencyResult(BaseModel):
    """Qubit efficiency for one group size"""

    model_config = ConfigDict(frozen=True)

    group_size: int
    numerator: int
    denominator: int
    value: float
    bounds_ok: bool
    secret_length: Optional[int] = None

    @property
    def efficiency(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)


class TradeoffRow(BaseModel):
    """Effect of one choice of n on efficiency and insider guess probability"""

    model_config = ConfigDict(frozen=True)

    group_size: int
    ghz_qubits: int
    group_count: int
    efficiency: str
    efficiency_value: float
    guess_probability: float


class ConstraintReport(BaseModel):
    """Which no-disturbance conditions a probe unitary meets"""

    model_config = ConfigDict(frozen=True)

    lambda_01_mag: float
    lambda_10_mag: float
    cross_term_distance: float
    satisfied: bool


class DecoyErrorProfile(BaseModel):
    """Exact probability that the check flags a decoy, per preparation state"""

    model_config = ConfigDict(frozen=True)

    per_kind: Dict[str, float]
    average: float


class EveInformation(BaseModel):
    """What Eve learns about the secret from one attacked transmission"""

    model_config = ConfigDict(frozen=True)

    guess_success_rate: float
    groups_recovered: int
    group_count: int
    secret_recovered: bool
    ancilla_distinguishability: Optional[float] = None


class TruthTableRow(BaseModel):
    """One key and GHZ-branch combination with both parties' outputs"""

    model_config = ConfigDict(frozen=True)

    k_ab: int
    k_ac: int
    k_bc: int
    m_a1: int
    m_b1: int
    r_a: int
    r_b: int
    c_a: int
    c_b: int
    alice_output: str
    bob_output: str
    passed: bool


class TruthTableReport(BaseModel):
    """All 32 decode cases and how many pass"""

    model_config = ConfigDict(frozen=True)

    rows: List[TruthTableRow]
    passed_count: int
    all_passed: bool


class CorrectnessCase(BaseModel):
    """Honest-run verdict tally for one (N, n)"""

    model_config = ConfigDict(frozen=True)

    secret_length: int
    group_size: int
    exhaustive: bool
    pairs_checked: int
    equal_verdicts: int
    failures: int


class CorrectnessSummary(BaseModel):
    """Correctness sweep over every N up to the maximum"""

    model_config = ConfigDict(frozen=True)

    max_secret_length: int
    cases: List[CorrectnessCase]
    total_pairs: int
    total_failures: int
    all_passed: bool
