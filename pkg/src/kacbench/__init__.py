"""Query-counted cryptanalysis of key-alternating ciphers on small blocks."""
from .core import (
    KacInstance,
    KeyDistribution,
    KeySchedule,
    Permutation,
    UnsupportedBlockSize,
    kac_apply,
    make_random_permutation,
    random_instance,
    sample_key_schedule,
)
from .oracles import AccessPolicy, OracleSession, PolicyViolation, QueryLedger, ledger_report

__version__ = "0.1.0"
