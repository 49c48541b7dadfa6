"""Character-level noise simulating speech-recognition errors.

Each input character is independently perturbed with a configured
probability; a perturbation is a deletion, an insertion after the character,
or a substitution with a different character, each chosen with probability
1/3.  All randomness comes from the config seed, so runs replay exactly.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

DEFAULT_ALPHABET = "abcdefghijklmnopqrstuvwxyz "

KEEP = "keep"
DELETE = "delete"
INSERT = "insert"
SUBSTITUTE = "substitute"

_OPS = (DELETE, INSERT, SUBSTITUTE)


@dataclass(frozen=True)
class NoiseConfig:
    probability: float = 0.3
    alphabet: str = DEFAULT_ALPHABET
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {self.probability}")
        if not self.alphabet:
            raise ValueError("alphabet must be non-empty")


def derive_seed(*parts) -> int:
    """Stable sub-seed from arbitrary parts (same on every platform)."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def perturb_detailed(text: str, config: NoiseConfig) -> tuple[str, list[str]]:
    """Perturbed text plus the operation applied at each input position."""
    rng = random.Random(config.seed)
    out: list[str] = []
    ops: list[str] = []
    for ch in text:
        if rng.random() >= config.probability:
            out.append(ch)
            ops.append(KEEP)
            continue
        op = _OPS[rng.randrange(3)]
        if op == DELETE:
            pass
        elif op == INSERT:
            out.append(ch)
            out.append(rng.choice(config.alphabet))
        else:  # substitution never reproduces the original character
            pool = [c for c in config.alphabet if c != ch]
            out.append(rng.choice(pool) if pool else ch)
        ops.append(op)
    return "".join(out), ops


def perturb(text: str, config: NoiseConfig) -> str:
    return perturb_detailed(text, config)[0]
