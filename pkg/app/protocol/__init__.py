from .coding import (
    compare_groups,
    encrypt_group,
    generate_keys,
    group_secret,
    prepare_carrier,
    tp_decode,
    xor_bits,
)
from .session import ProtocolSession, run_protocol
