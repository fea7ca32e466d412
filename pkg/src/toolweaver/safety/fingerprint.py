"""Circular (ECFP-style) fingerprints and bit-set similarity coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..providers import fnv1a64
from .smiles import Molecule

DEFAULT_RADIUS = 2
DEFAULT_NBITS = 2048


@dataclass(frozen=True)
class Fingerprint:
    bits: frozenset[int]
    nbits: int = DEFAULT_NBITS
    radius: int = DEFAULT_RADIUS


def _hash_text(text: str) -> int:
    return fnv1a64(text.encode("utf-8"))


def morgan_fingerprint(mol: Molecule, radius: int = DEFAULT_RADIUS, nbits: int = DEFAULT_NBITS) -> Fingerprint:
    """Iterative neighborhood-hash fingerprint.

    Round 0 identifiers hash the atom invariant (element, aromatic flag,
    charge, degree, explicit H count). Each later round combines an atom's
    previous identifier with the sorted (bond order, neighbor identifier)
    list of its neighbors; isolated atoms keep their identifier, so a lone
    atom contributes exactly one environment at every radius. Identifiers
    from every round land in the bit set modulo ``nbits``.
    """
    neighbor_lists = [mol.neighbors(i) for i in range(len(mol.atoms))]
    ids = [
        _hash_text(f"{a.element}|{int(a.aromatic)}|{a.charge}|{len(neighbor_lists[i])}|{a.hcount}")
        for i, a in enumerate(mol.atoms)
    ]
    bits = {h % nbits for h in ids}
    for _ in range(radius):
        nxt = list(ids)
        for i in range(len(mol.atoms)):
            if not neighbor_lists[i]:
                continue
            parts = sorted((order, ids[j]) for j, order in neighbor_lists[i])
            payload = str(ids[i]) + "".join(f"|{o},{h}" for o, h in parts)
            nxt[i] = _hash_text(payload)
        ids = nxt
        bits.update(h % nbits for h in ids)
    return Fingerprint(bits=frozenset(bits), nbits=nbits, radius=radius)


def bitset_coefficients(a: Fingerprint, b: Fingerprint) -> tuple[float, float, float]:
    """(Tanimoto, Dice, Cosine) overlap coefficients; all 0.0 if a set is empty."""
    if a.nbits != b.nbits:
        raise ValueError(f"nbits mismatch: {a.nbits} vs {b.nbits}")
    if not a.bits or not b.bits:
        return (0.0, 0.0, 0.0)
    inter = len(a.bits & b.bits)
    union = len(a.bits | b.bits)
    tanimoto = inter / union
    dice = 2.0 * inter / (len(a.bits) + len(b.bits))
    cosine = inter / math.sqrt(len(a.bits) * len(b.bits))
    return (tanimoto, dice, cosine)
