"""Reproducible random streams derived from one master seed.

A stream is identified by ``(master_seed, stage, *labels)``. Its 64-bit seed
is the first 8 bytes (little endian) of BLAKE2b over the UTF-8 string
``"d2dmalware/v1|<master>|<stage>|<label>|..."``, so streams never depend on
the order or the process in which they are requested.
"""

import hashlib

import numpy as np

SCHEME = "d2dmalware/v1"
STAGES = ("streets", "devices", "knights", "dynamics")


def derive_seed(master_seed, stage, *labels):
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}; expected one of {STAGES}")
    parts = [SCHEME, str(int(master_seed)), stage] + [_label(x) for x in labels]
    digest = hashlib.blake2b("|".join(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(master_seed, stage, *labels):
    return np.random.default_rng(derive_seed(master_seed, stage, *labels))


def _label(x):
    if isinstance(x, float):
        return repr(round(x, 12))
    return str(x)
