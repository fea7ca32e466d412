"""Smith-Waterman local alignment with linear gap penalties."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SequenceError

MATCH = 2
MISMATCH = -1
GAP = -1

AMINO_ACIDS = set("ACDEFGHIKLMNPQRSTVWY")


@dataclass(frozen=True)
class Alignment:
    score: int
    segment_a: str
    segment_b: str
    identical: int

    @property
    def length(self) -> int:
        return len(self.segment_a)


def smith_waterman(a: str, b: str, match: int = MATCH, mismatch: int = MISMATCH, gap: int = GAP) -> Alignment:
    """Best local alignment of ``a`` and ``b``.

    Standard dynamic program with a zero floor. The traceback starts from the
    maximum cell; among equal maxima the smallest (row, column) wins, and at
    each step diagonal beats up beats left. Gap characters never count toward
    the identical-position tally.
    """
    if not a or not b:
        raise SequenceError("sequences must be non-empty")
    n, m = len(a), len(b)
    h = [[0] * (m + 1) for _ in range(n + 1)]
    best = 0
    best_cell = (0, 0)
    for i in range(1, n + 1):
        row = h[i]
        prev = h[i - 1]
        ai = a[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (match if ai == b[j - 1] else mismatch)
            up = prev[j] + gap
            left = row[j - 1] + gap
            score = diag
            if up > score:
                score = up
            if left > score:
                score = left
            if score < 0:
                score = 0
            row[j] = score
            if score > best:
                best = score
                best_cell = (i, j)

    if best == 0:
        return Alignment(score=0, segment_a="", segment_b="", identical=0)

    seg_a: list[str] = []
    seg_b: list[str] = []
    identical = 0
    i, j = best_cell
    while i > 0 and j > 0 and h[i][j] > 0:
        cur = h[i][j]
        diag = h[i - 1][j - 1] + (match if a[i - 1] == b[j - 1] else mismatch)
        if cur == diag:
            seg_a.append(a[i - 1])
            seg_b.append(b[j - 1])
            if a[i - 1] == b[j - 1]:
                identical += 1
            i -= 1
            j -= 1
        elif cur == h[i - 1][j] + gap:
            seg_a.append(a[i - 1])
            seg_b.append("-")
            i -= 1
        else:
            seg_a.append("-")
            seg_b.append(b[j - 1])
            j -= 1

    return Alignment(
        score=best,
        segment_a="".join(reversed(seg_a)),
        segment_b="".join(reversed(seg_b)),
        identical=identical,
    )


def validate_protein(sequence: str) -> str:
    """Uppercase and alphabet-check a protein sequence."""
    if not sequence:
        raise SequenceError("empty protein sequence")
    seq = sequence.strip().upper()
    bad = set(seq) - AMINO_ACIDS
    if bad:
        raise SequenceError(f"non-canonical residue(s): {', '.join(sorted(bad))}")
    return seq
