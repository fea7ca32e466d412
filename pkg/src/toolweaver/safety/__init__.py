"""Safety screening: molecular fingerprints and protein local alignment."""

from .align import smith_waterman
from .fingerprint import Fingerprint, bitset_coefficients, morgan_fingerprint
from .screen import SafeguardDB, SafetyContext, SafetyVerdict, screen_molecule, screen_protein
from .smiles import Atom, Bond, Molecule, parse_smiles

__all__ = [
    "Atom",
    "Bond",
    "Molecule",
    "parse_smiles",
    "Fingerprint",
    "morgan_fingerprint",
    "bitset_coefficients",
    "smith_waterman",
    "SafeguardDB",
    "SafetyContext",
    "SafetyVerdict",
    "screen_molecule",
    "screen_protein",
]
