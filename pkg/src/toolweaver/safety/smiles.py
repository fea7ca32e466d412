"""Organic-subset SMILES parser producing a plain molecular graph.

Supported grammar: organic-subset atoms (B C N O P S F Cl Br I), aromatic
lowercase b c n o p s, bracket atoms with isotope/chirality/H-count/charge,
bond symbols ``- = # :``, branches, ring closures (digits and %nn) and
disconnected parts via ``.``. Atom indices follow token order. No aromaticity
perception or kekulization happens; lowercase input simply sets a flag.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import SmilesParseError

AROMATIC_BOND = 4  # bond order encoding: 1, 2, 3, 4=aromatic

_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = set("BCNOPSFI")
_AROMATIC_ORGANIC = set("bcnops")

# Element whitelist for bracket atoms (aromatic lowercase handled separately).
_ELEMENTS = {
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si",
    "P", "S", "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co",
    "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr",
    "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",
    "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy",
    "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au",
    "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",
}
_AROMATIC_BRACKET = {"b", "c", "n", "o", "p", "s", "se", "as"}

_BRACKET_RE = re.compile(
    r"^(?P<isotope>\d+)?"
    r"(?P<symbol>[A-Z][a-z]?|[a-z]{1,2})"
    r"(?P<chiral>@{1,2})?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>\+{1,}|-{1,}|[+-]\d+)?"
    r"(?::(?P<cls>\d+))?$"
)


@dataclass(frozen=True)
class Atom:
    element: str
    aromatic: bool = False
    charge: int = 0
    hcount: int = 0  # explicit (bracket) H count only


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: int  # 1, 2, 3 or AROMATIC_BOND


@dataclass
class Molecule:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)

    def neighbors(self, idx: int) -> list[tuple[int, int]]:
        """(neighbor index, bond order) pairs for one atom."""
        out = []
        for bond in self.bonds:
            if bond.a == idx:
                out.append((bond.b, bond.order))
            elif bond.b == idx:
                out.append((bond.a, bond.order))
        return out

    def degree(self, idx: int) -> int:
        return len(self.neighbors(idx))


def _parse_bracket(body: str, pos: int) -> Atom:
    m = _BRACKET_RE.match(body)
    if not m:
        raise SmilesParseError(f"malformed bracket atom '[{body}]' at position {pos}")
    symbol = m.group("symbol")
    aromatic = False
    if symbol.islower():
        if symbol not in _AROMATIC_BRACKET:
            raise SmilesParseError(f"unknown element token '{symbol}' at position {pos}")
        aromatic = True
        element = symbol.capitalize()
    else:
        if symbol not in _ELEMENTS:
            raise SmilesParseError(f"unknown element token '{symbol}' at position {pos}")
        element = symbol
    hcount = 0
    if m.group("hcount"):
        digits = m.group("hcount")[1:]
        hcount = int(digits) if digits else 1
    charge = 0
    raw_charge = m.group("charge")
    if raw_charge:
        if raw_charge[0] == "+" and raw_charge.lstrip("+") == "":
            charge = len(raw_charge)
        elif raw_charge[0] == "-" and raw_charge.lstrip("-") == "":
            charge = -len(raw_charge)
        else:
            charge = int(raw_charge)
    return Atom(element=element, aromatic=aromatic, charge=charge, hcount=hcount)


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string; raises :class:`SmilesParseError` on bad input."""
    if not text or not text.strip():
        raise SmilesParseError("empty SMILES input")
    s = text.strip()

    mol = Molecule()
    anchor: int | None = None
    pending_bond: int | None = None
    branch_stack: list[int | None] = []
    open_rings: dict[int, tuple[int, int | None]] = {}  # ring num -> (atom, bond order)
    bond_orders = {"-": 1, "=": 2, "#": 3, ":": AROMATIC_BOND}

    def add_atom(atom: Atom) -> None:
        nonlocal anchor, pending_bond
        idx = len(mol.atoms)
        mol.atoms.append(atom)
        if anchor is not None:
            order = pending_bond
            if order is None:
                order = AROMATIC_BOND if (mol.atoms[anchor].aromatic and atom.aromatic) else 1
            mol.bonds.append(Bond(anchor, idx, order))
        elif pending_bond is not None:
            raise SmilesParseError("bond symbol with no preceding atom")
        pending_bond = None
        anchor = idx

    def close_ring(num: int, pos: int) -> None:
        nonlocal pending_bond
        if anchor is None:
            raise SmilesParseError(f"ring bond digit before any atom at position {pos}")
        if num in open_rings:
            other, opened_order = open_rings.pop(num)
            if other == anchor:
                raise SmilesParseError(f"ring bond {num} closes on its own atom")
            order = pending_bond
            if order is not None and opened_order is not None and order != opened_order:
                raise SmilesParseError(f"conflicting bond orders on ring bond {num}")
            if order is None:
                order = opened_order
            if order is None:
                order = AROMATIC_BOND if (mol.atoms[other].aromatic and mol.atoms[anchor].aromatic) else 1
            lo, hi = min(other, anchor), max(other, anchor)
            if any((b.a, b.b) in ((lo, hi), (hi, lo)) for b in mol.bonds):
                raise SmilesParseError(f"duplicate bond between atoms {lo} and {hi}")
            mol.bonds.append(Bond(other, anchor, order))
            pending_bond = None
        else:
            open_rings[num] = (anchor, pending_bond)
            pending_bond = None

    i = 0
    n = len(s)
    while i < n:
        ch = s[i]
        if ch == "[":
            end = s.find("]", i + 1)
            if end < 0:
                raise SmilesParseError(f"unclosed bracket atom at position {i}")
            add_atom(_parse_bracket(s[i + 1:end], i))
            i = end + 1
        elif s[i:i + 2] in _ORGANIC_TWO:
            add_atom(Atom(element=s[i:i + 2]))
            i += 2
        elif ch in _ORGANIC_ONE:
            add_atom(Atom(element=ch))
            i += 1
        elif ch in _AROMATIC_ORGANIC:
            add_atom(Atom(element=ch.upper(), aromatic=True))
            i += 1
        elif ch in bond_orders:
            if pending_bond is not None:
                raise SmilesParseError(f"two bond symbols in a row at position {i}")
            pending_bond = bond_orders[ch]
            i += 1
        elif ch == "(":
            if anchor is None:
                raise SmilesParseError("branch opened before any atom")
            branch_stack.append(anchor)
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise SmilesParseError(f"unbalanced ')' at position {i}")
            anchor = branch_stack.pop()
            i += 1
        elif ch.isdigit():
            close_ring(int(ch), i)
            i += 1
        elif ch == "%":
            if i + 2 >= n or not s[i + 1:i + 3].isdigit():
                raise SmilesParseError(f"'%' needs two digits at position {i}")
            close_ring(int(s[i + 1:i + 3]), i)
            i += 3
        elif ch == ".":
            if pending_bond is not None:
                raise SmilesParseError(f"bond symbol before '.' at position {i}")
            anchor = None
            i += 1
        else:
            raise SmilesParseError(f"unexpected character '{ch}' at position {i}")

    if branch_stack:
        raise SmilesParseError("unbalanced '(': branch never closed")
    if open_rings:
        nums = ", ".join(str(k) for k in sorted(open_rings))
        raise SmilesParseError(f"unclosed ring bond(s): {nums}")
    if pending_bond is not None:
        raise SmilesParseError("trailing bond symbol")
    if not mol.atoms:
        raise SmilesParseError("no atoms in input")
    return mol
