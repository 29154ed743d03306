import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from app.adversary import AttackModel
from app.channel import check_eavesdropping
from app.core.errors import InvalidArgumentError
from app.models.schemas import (
    Actor,
    ProtocolConfig,
    Secret,
    TpDecodeRecord,
    Verdict,
)
from app.protocol import (
    ProtocolSession,
    compare_groups,
    encrypt_group,
    generate_keys,
    group_secret,
    prepare_carrier,
    run_protocol,
    tp_decode,
    xor_bits,
)
from app.quantum import complement, make_ghz


@st.composite
def equal_length_bits(draw):
    n = draw(st.integers(min_value=1, max_value=12))
    p = draw(st.text(alphabet="01", min_size=n, max_size=n))
    q = draw(st.text(alphabet="01", min_size=n, max_size=n))
    return p, q


class TestSecret:
    """Test secret parsing"""

    def test_value_is_little_endian_in_index_order(self):
        """Test value is little endian in index order"""
        assert Secret(bits="1011").value == 1 + 4 + 8

    def test_from_int_round_trip(self):
        """Test converting to and from an integer"""
        for value in range(16):
            assert Secret.from_int(value, 4).value == value

    def test_parse_bits_and_decimal(self):
        """Test parse bits and decimal"""
        assert Secret.parse("1011", 4).bits == "1011"
        assert Secret.parse("13", 4).bits == "1011"

    def test_parse_rejects_out_of_range(self):
        """Test parse rejects out of range"""
        with pytest.raises(ValueError):
            Secret.parse("16", 4)

    def test_rejects_non_binary(self):
        """Test rejects non binary"""
        with pytest.raises(ValidationError):
            Secret(bits="102")


class TestConfig:
    """Test protocol configuration"""

    def test_defaults_from_settings(self):
        """Test defaults from settings"""
        config = ProtocolConfig(secret_length=4, group_size=2)
        assert config.decoy_count == 16
        assert config.threshold == 0.0
        assert config.max_attempts == 1

    @pytest.mark.parametrize("n", [1, 5])
    def test_group_size_bounds(self, n):
        """Test group size bounds"""
        with pytest.raises(ValidationError):
            ProtocolConfig(secret_length=4, group_size=n)

    def test_group_count_and_padding(self):
        """Test group count and padding"""
        config = ProtocolConfig(secret_length=7, group_size=3)
        assert config.group_count == 3
        assert config.padding == 2


class TestKeys:
    """Test ideal pre-shared key generation"""

    def test_reproducible_under_seed(self):
        """Test reproducible under seed"""
        a = generate_keys(3, np.random.default_rng(11))
        b = generate_keys(3, np.random.default_rng(11))
        assert a == b
        assert len(a.k_ab) == len(a.k_ac) == len(a.k_bc) == 3

    def test_single_group(self):
        """Test single group"""
        keys = generate_keys(1, np.random.default_rng(0))
        assert keys.group_count == 1

    def test_rejects_zero_groups(self):
        """Test rejects zero groups"""
        with pytest.raises(InvalidArgumentError):
            generate_keys(0, np.random.default_rng(0))

    def test_bit_frequency(self):
        """Test key bits are roughly balanced"""
        keys = generate_keys(10_000, np.random.default_rng(12))
        bits = keys.k_ab
        sigma = np.sqrt(0.25 / len(bits))
        assert abs(np.mean(bits) - 0.5) <= 3 * sigma


class TestGrouping:
    """Test grouping and padding"""

    def test_exact_division(self):
        """Test exact division"""
        assert group_secret(Secret(bits="1011"), 2).groups == ["10", "11"]

    def test_padding_to_group_width(self):
        """Test padding to group width"""
        grouped = group_secret(Secret(bits="10110"), 2)
        assert grouped.groups == ["10", "11", "00"]
        assert grouped.original_length == 5

    def test_two_zeros_of_padding(self):
        """Test two zeros of padding"""
        grouped = group_secret(Secret(bits="1111111"), 3)
        assert grouped.groups == ["111", "111", "100"]

    def test_rejects_group_larger_than_secret(self):
        """Test rejects group larger than secret"""
        with pytest.raises(InvalidArgumentError):
            group_secret(Secret(bits="101"), 4)


class TestCoding:
    """Test encryption, carrier preparation and TP's decode"""

    @pytest.mark.parametrize(
        "group,r,expected", [("01101", 1, "10010"), ("01101", 0, "01101"), ("0101", 1, "1010")]
    )
    def test_encrypt_group(self, group, r, expected):
        """Test key-controlled group encryption"""
        assert encrypt_group(group, r).bits == expected

    def test_prepare_carrier(self):
        """Test preparing a GHZ carrier"""
        carrier = prepare_carrier(encrypt_group("01", 0))
        assert carrier.qubit_count == 3
        assert carrier.allclose(make_ghz("01"))

    def test_tp_decode_complement_branch(self):
        """Test tp decode complement branch"""
        record = tp_decode("101101", 0)
        assert (record.m1, record.c, record.m2_prime) == (1, 1, "10010")

    def test_tp_decode_plain_branch(self):
        """Test tp decode plain branch"""
        record = tp_decode("001101", 0)
        assert (record.c, record.m2_prime) == (0, "01101")

    def test_tp_decode_flip_with_key(self):
        """Test tp decode flip with key"""
        assert tp_decode("00000", 1).m2_prime == "1111"

    def test_inconsistent_record_rejected(self):
        """Test inconsistent record rejected"""
        with pytest.raises(ValidationError):
            TpDecodeRecord(m1=0, m2="01", c=1, m2_prime="01")

    def test_compare_groups(self):
        """Test comparing two groups bitwise"""
        assert compare_groups("101", "101") == ("000", True)
        assert compare_groups("101", "100") == ("001", False)

    def test_compare_length_mismatch(self):
        """Test compare length mismatch"""
        with pytest.raises(InvalidArgumentError):
            compare_groups("10", "101")

    @given(equal_length_bits())
    def test_xor_of_complements(self, pair):
        """Test xor of two complemented groups"""
        p, q = pair
        assert xor_bits(complement(p), complement(q)) == xor_bits(p, q)

    @pytest.mark.parametrize("k_ab,k_ac,m1", list(itertools.product([0, 1], repeat=3)))
    def test_decode_identity(self, k_ab, k_ac, m1):
        """Test TP always sees G xor K_AB, whatever the branch and channel key"""
        group = "0110"
        encrypted = encrypt_group(group, k_ab ^ k_ac).bits
        measured = f"{m1}{complement(encrypted) if m1 else encrypted}"
        expected = complement(group) if k_ab else group
        assert tp_decode(measured, k_ac).m2_prime == expected


class TestRunProtocol:
    """Test end-to-end sessions"""

    @pytest.fixture
    def config(self):
        return ProtocolConfig(secret_length=4, group_size=2, decoy_count=8)

    def test_equal_secrets(self, config):
        """Test equal secrets"""
        x = Secret(bits="1011")
        outcome = run_protocol(config, x, x, rng=np.random.default_rng(7))
        assert outcome.verdict is Verdict.EQUAL
        assert outcome.eavesdrop_error_rate == 0
        assert outcome.per_group_rc == ["00", "00"]

    def test_unequal_secrets(self, config):
        """Test unequal secrets"""
        outcome = run_protocol(
            config, Secret(bits="1011"), Secret(bits="1010"), rng=np.random.default_rng(7)
        )
        assert outcome.verdict is Verdict.UNEQUAL
        assert outcome.per_group_rc == ["00", "01"]

    def test_padding_path(self):
        """Test padding path"""
        config = ProtocolConfig(secret_length=5, group_size=2, decoy_count=4)
        rng = np.random.default_rng(3)
        x = Secret(bits="10110")
        same = run_protocol(config, x, x, rng=rng)
        different = run_protocol(config, x, Secret(bits="10111"), rng=rng)
        assert same.verdict is Verdict.EQUAL
        assert different.verdict is Verdict.UNEQUAL

    def test_length_mismatch(self, config):
        """Test length mismatch"""
        with pytest.raises(InvalidArgumentError):
            run_protocol(config, Secret(bits="101"), Secret(bits="1011"))

    def test_transcript_covers_every_step(self, config):
        """Test transcript covers every step"""
        x = Secret(bits="0110")
        outcome = run_protocol(config, x, x, rng=np.random.default_rng(1))
        steps = {event.step for event in outcome.transcript}
        assert steps == {1, 2, 4, 5, 6}
        assert outcome.transcript[-1].payload == {"verdict": "equal"}

    def test_same_seed_same_outcome(self, config):
        """Test same seed same outcome"""
        x, y = Secret(bits="0110"), Secret(bits="0111")
        a = run_protocol(config, x, y, rng=np.random.default_rng(5))
        b = run_protocol(config, x, y, rng=np.random.default_rng(5))
        assert a == b

    @pytest.mark.parametrize("x,y", [("1011", "1011"), ("1011", "0011"), ("0000", "1111")])
    def test_verdict_independent_of_branch(self, config, x, y):
        """Test verdict independent of branch"""
        verdicts = {
            ProtocolSession(
                config, Secret(bits=x), Secret(bits=y), rng=np.random.default_rng(9), forced_flag=flag
            ).run().verdict
            for flag in (0, 1)
        }
        assert verdicts == {Verdict.EQUAL if x == y else Verdict.UNEQUAL}

    def test_tp_view_is_masked_by_k_ab(self, config):
        """Test TP's view is masked by K_AB"""
        x = Secret(bits="1001")
        session = ProtocolSession(config, x, x, rng=np.random.default_rng(21))
        session.run()
        for i, record in enumerate(session.tp_records[Actor.ALICE]):
            group = session.grouped[Actor.ALICE].groups[i]
            expected = complement(group) if session.keys.k_ab[i] else group
            assert record.m2_prime == expected

    def test_intercept_resend_aborts(self):
        """Test intercept resend aborts"""
        config = ProtocolConfig(secret_length=2, group_size=2, decoy_count=64)
        outcome = run_protocol(
            config,
            Secret(bits="10"),
            Secret(bits="10"),
            AttackModel.intercept(),
            np.random.default_rng(2),
        )
        # 1 - (3/4)^64 is within 1e-8 of 1
        assert outcome.verdict is Verdict.ABORTED
        assert outcome.per_group_rc == []

    def test_restart_after_abort(self, mocker):
        """Test a flagged attempt is discarded and the session starts over"""
        real_check = check_eavesdropping
        calls = []

        def first_check_fails(*args):
            check = real_check(*args)
            calls.append(check)
            if len(calls) == 1:
                return check.model_copy(
                    update={"mismatches": 1, "error_rate": 1.0, "passed": False}
                )
            return check

        mocker.patch(
            "app.protocol.session.check_eavesdropping", side_effect=first_check_fails
        )
        config = ProtocolConfig(
            secret_length=2, group_size=2, decoy_count=4, max_attempts=3
        )
        outcome = run_protocol(
            config, Secret(bits="11"), Secret(bits="10"), rng=np.random.default_rng(4)
        )
        assert outcome.attempts == 2
        assert outcome.verdict is Verdict.UNEQUAL
        actions = [e.action for e in outcome.transcript]
        assert actions.count("abort") == 1
        assert actions.count("keys_shared") == 2

    def test_gives_up_after_max_attempts(self):
        """Test a full intercept on many decoys aborts every attempt"""
        config = ProtocolConfig(
            secret_length=2, group_size=2, decoy_count=64, max_attempts=3
        )
        session = ProtocolSession(
            config,
            Secret(bits="11"),
            Secret(bits="11"),
            attack=AttackModel.intercept(),
            rng=np.random.default_rng(4),
        )
        outcome = session.run()
        assert outcome.attempts == 3
        assert outcome.verdict is Verdict.ABORTED

    def test_threshold_tolerates_errors(self):
        """Test threshold tolerates errors"""
        config = ProtocolConfig(secret_length=2, group_size=2, decoy_count=16, threshold=1.0)
        outcome = run_protocol(
            config, Secret(bits="10"), Secret(bits="10"), AttackModel.intercept(), np.random.default_rng(6)
        )
        assert outcome.verdict is not Verdict.ABORTED

    def test_forced_flag_validation(self, config):
        """Test forced flag validation"""
        with pytest.raises(InvalidArgumentError):
            ProtocolSession(config, Secret(bits="0000"), Secret(bits="0000"), forced_flag=2)

    def test_carrier_is_ghz_of_encrypted_group(self):
        """Test carrier is ghz of encrypted group"""
        assert prepare_carrier(encrypt_group("1", 1)).allclose(make_ghz("0"))
