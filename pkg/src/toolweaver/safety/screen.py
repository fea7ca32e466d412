"""Retrieve-based screening of molecules and proteins against a safeguard DB."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .align import smith_waterman, validate_protein
from .fingerprint import DEFAULT_NBITS, DEFAULT_RADIUS, Fingerprint, bitset_coefficients, morgan_fingerprint
from .smiles import parse_smiles

DEFAULT_THRESHOLD = 0.95

# formats routed to each screening path
MOLECULE_FORMATS = ("smiles",)
PROTEIN_FORMATS = ("fasta", "sequence")


@dataclass(frozen=True)
class SafetyVerdict:
    score: float
    flagged: bool
    matched: str | None
    threshold: float
    kind: str = "molecule"  # or "protein"

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "flagged": self.flagged,
            "matched": self.matched,
            "threshold": self.threshold,
            "kind": self.kind,
        }


@dataclass
class SafeguardDB:
    """Reference corpus of hazardous molecules and toxic proteins.

    Molecule fingerprints are computed once at load and reused by every
    screen call; the database is immutable afterwards.
    """

    molecules: list[tuple[str, str, Fingerprint]] = field(default_factory=list)
    proteins: list[tuple[str, str]] = field(default_factory=list)
    radius: int = DEFAULT_RADIUS
    nbits: int = DEFAULT_NBITS

    @classmethod
    def from_entries(cls, molecules: list[dict], proteins: list[dict],
                     radius: int = DEFAULT_RADIUS, nbits: int = DEFAULT_NBITS) -> "SafeguardDB":
        seen: set[str] = set()
        mols: list[tuple[str, str, Fingerprint]] = []
        prots: list[tuple[str, str]] = []
        for entry in molecules:
            mid, smiles = entry["id"], entry["smiles"]
            if mid in seen:
                raise ValueError(f"duplicate safeguard id '{mid}'")
            seen.add(mid)
            mols.append((mid, smiles, morgan_fingerprint(parse_smiles(smiles), radius, nbits)))
        for entry in proteins:
            pid, seq = entry["id"], entry["sequence"]
            if pid in seen:
                raise ValueError(f"duplicate safeguard id '{pid}'")
            seen.add(pid)
            prots.append((pid, validate_protein(seq)))
        return cls(molecules=mols, proteins=prots, radius=radius, nbits=nbits)

    @classmethod
    def from_file(cls, path: str, radius: int = DEFAULT_RADIUS, nbits: int = DEFAULT_NBITS) -> "SafeguardDB":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls.from_entries(doc.get("molecules", []), doc.get("proteins", []), radius, nbits)

    @classmethod
    def empty(cls) -> "SafeguardDB":
        return cls()


def screen_molecule(smiles: str, db: SafeguardDB, threshold: float = DEFAULT_THRESHOLD) -> SafetyVerdict:
    """Max over the DB of the mean Tanimoto/Dice/Cosine coefficient.

    Ties pick the lowest entry id; an empty database scores 0.0.
    """
    fp = morgan_fingerprint(parse_smiles(smiles), db.radius, db.nbits)
    best = 0.0
    matched: str | None = None
    for mid, _, ref in sorted(db.molecules, key=lambda m: m[0]):
        t, d, c = bitset_coefficients(fp, ref)
        score = (t + d + c) / 3.0
        if score > best:
            best = score
            matched = mid
    return SafetyVerdict(score=best, flagged=best > threshold, matched=matched,
                         threshold=threshold, kind="molecule")


def screen_protein(sequence: str, db: SafeguardDB, threshold: float = DEFAULT_THRESHOLD) -> SafetyVerdict:
    """Max matching percentage over DB proteins.

    Percentage = identical aligned positions from the best local alignment,
    divided by the shorter sequence's length, so a toxic motif inside a longer
    query still scores high.
    """
    seq = validate_protein(sequence)
    best = 0.0
    matched: str | None = None
    for pid, ref in sorted(db.proteins, key=lambda p: p[0]):
        aln = smith_waterman(seq, ref)
        score = aln.identical / min(len(seq), len(ref))
        if score > best:
            best = score
            matched = pid
    return SafetyVerdict(score=best, flagged=best > threshold, matched=matched,
                         threshold=threshold, kind="protein")


class SafetyContext:
    """Screening policy handed to the executor.

    Routes values by format id (``smiles`` to the molecule path, ``fasta`` and
    ``sequence`` to the protein path; everything else passes unscreened) and
    records how many screen calls happened, which tests use to verify that
    only high-risk tools trigger screening.
    """

    def __init__(self, db: SafeguardDB, threshold: float = DEFAULT_THRESHOLD,
                 molecule_formats: tuple[str, ...] = MOLECULE_FORMATS,
                 protein_formats: tuple[str, ...] = PROTEIN_FORMATS):
        self.db = db
        self.threshold = threshold
        self.molecule_formats = molecule_formats
        self.protein_formats = protein_formats
        self.calls: list[tuple[str, str]] = []

    def screen_value(self, format_id: str, value: str) -> SafetyVerdict | None:
        """Screen one format-tagged value; None when the format is exempt."""
        if format_id in self.molecule_formats:
            self.calls.append((format_id, value))
            try:
                return screen_molecule(value, self.db, self.threshold)
            except Exception as e:  # unparseable value: treat as unscreenable, not unsafe
                return SafetyVerdict(score=0.0, flagged=False, matched=None,
                                     threshold=self.threshold, kind=f"molecule:unparseable:{e}")
        if format_id in self.protein_formats:
            self.calls.append((format_id, value))
            try:
                return screen_protein(value, self.db, self.threshold)
            except Exception as e:
                return SafetyVerdict(score=0.0, flagged=False, matched=None,
                                     threshold=self.threshold, kind=f"protein:unparseable:{e}")
        return None

    def screen_map(self, values: dict[str, str]) -> list[SafetyVerdict]:
        verdicts = []
        for fmt in sorted(values):
            v = self.screen_value(fmt, values[fmt])
            if v is not None:
                verdicts.append(v)
        return verdicts
