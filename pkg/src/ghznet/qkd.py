"""Key sifting from shared GHZ states.

Alice holds ``m`` qubits and Bob ``l`` qubits of ``(|0...0> + |1...1>)/sqrt(2)``.
Each party picks the computational (``"0/1"``) or Hadamard (``"+/-"``)
basis per share and measures all of its qubits. Matching bases give one key
bit: the repeated bit for ``0/1``, the parity of the party's string for
``+/-``. Only the ideal state is modelled; phase corrections from the
helpers' outcomes are assumed already applied.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

COMPUTATIONAL = "0/1"
HADAMARD = "+/-"
BASES = (COMPUTATIONAL, HADAMARD)


@dataclass(frozen=True)
class GhzShare:
    m: int  # Alice's qubits
    l: int  # Bob's qubits

    def __post_init__(self):
        if self.m < 1 or self.l < 1:
            raise ValueError("each party needs at least one qubit")


@dataclass(frozen=True)
class QkdRound:
    basis_a: str
    basis_b: str
    bits_a: str
    bits_b: str
    key: int | None = None

    @property
    def sifted(self) -> bool:
        return self.basis_a == self.basis_b


def _bits(arr) -> str:
    return "".join("1" if b else "0" for b in arr)


def _even_parity_bits(k: int, size: int, rng) -> np.ndarray:
    """``size`` uniform ``k``-bit rows with even total parity."""
    out = rng.integers(2, size=(size, k))
    out[:, -1] = out[:, :-1].sum(axis=1) % 2
    return out


def measure_share(share: GhzShare, basis_a: str, basis_b: str,
                  rng: np.random.Generator) -> QkdRound:
    """Sample both parties' outcomes from the ideal GHZ statistics."""
    if basis_a not in BASES or basis_b not in BASES:
        raise ValueError(f"basis must be one of {BASES}")
    m, l = share.m, share.l
    if basis_a == basis_b == COMPUTATIONAL:
        bit = int(rng.integers(2))
        out = np.full(m + l, bit)
    elif basis_a == basis_b == HADAMARD:
        out = _even_parity_bits(m + l, 1, rng)[0]
    elif basis_a == COMPUTATIONAL:
        out = np.concatenate([np.full(m, rng.integers(2)), rng.integers(2, size=l)])
    else:
        out = np.concatenate([rng.integers(2, size=m), np.full(l, rng.integers(2))])
    rnd = QkdRound(basis_a, basis_b, _bits(out[:m]), _bits(out[m:]))
    return QkdRound(rnd.basis_a, rnd.basis_b, rnd.bits_a, rnd.bits_b, sift_round(rnd))


def party_key(basis: str, bits: str) -> int:
    """One party's key bit from its own basis and outcome string."""
    values = [int(c) for c in bits]
    if basis == COMPUTATIONAL:
        if len(set(values)) != 1:
            raise ValueError(f"computational outcome {bits!r} is not constant")
        return values[0]
    return sum(values) % 2


def sift_round(rnd: QkdRound) -> int | None:
    """Key bit for matching bases, ``None`` for a discarded round."""
    if not rnd.sifted:
        return None
    ka = party_key(rnd.basis_a, rnd.bits_a)
    kb = party_key(rnd.basis_b, rnd.bits_b)
    if ka != kb:
        raise ValueError(f"inconsistent round {rnd}: keys {ka} != {kb}")
    return ka


@dataclass
class QkdResult:
    key_a: list
    key_b: list
    rounds: list

    @property
    def sift_rate(self) -> float:
        return len(self.key_a) / len(self.rounds) if self.rounds else 0.0

    @property
    def mismatches(self) -> int:
        return sum(a != b for a, b in zip(self.key_a, self.key_b))


def run_qkd(shares, seed: int) -> QkdResult:
    """Run the sifting protocol over ``shares`` in order.

    Share ``i`` draws its bases and outcomes from ``(seed, i)``.
    """
    key_a, key_b, rounds = [], [], []
    for i, share in enumerate(shares):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        basis_a, basis_b = (BASES[k] for k in rng.integers(2, size=2))
        rnd = measure_share(share, basis_a, basis_b, rng)
        rounds.append((share, rnd))
        if rnd.sifted:
            key_a.append(party_key(rnd.basis_a, rnd.bits_a))
            key_b.append(party_key(rnd.basis_b, rnd.bits_b))
    return QkdResult(key_a, key_b, rounds)


def key_to_hex(bits) -> str:
    """Pack bits MSB-first into hex; the last nibble is zero-padded."""
    bits = list(bits)
    if not bits:
        return ""
    pad = (-len(bits)) % 4
    value = int("".join(map(str, bits)) + "0" * pad, 2)
    return format(value, f"0{(len(bits) + pad) // 4}x")


def write_key(result: QkdResult, key_path, rounds_path, header: str | None = None) -> None:
    """Write the hex key file and the per-round CSV; ``header`` becomes a leading comment."""
    lead = f"# {header}\n" if header else ""
    Path(key_path).write_text(f"{lead}# bits={len(result.key_a)}\n{key_to_hex(result.key_a)}\n")
    with open(rounds_path, "w", newline="") as fh:
        fh.write(lead)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["m", "l", "basis_a", "basis_b", "sifted", "key_bit"])
        for share, rnd in result.rounds:
            writer.writerow([share.m, share.l, rnd.basis_a, rnd.basis_b, int(rnd.sifted),
                             "" if rnd.key is None else rnd.key])


def hadamard_distribution(m: int, l: int, samples: int, rng) -> np.ndarray:
    """Empirical distribution of the joint +/- outcome string over ``2**(m+l)`` values."""
    GhzShare(m, l)
    bits = _even_parity_bits(m + l, samples, rng)
    index = bits @ (1 << np.arange(m + l - 1, -1, -1))
    return np.bincount(index, minlength=2 ** (m + l)) / samples


def tv_distance(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
