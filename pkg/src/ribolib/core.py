"""Fundamental RNA value types and elementary metrics.

Sequences are uppercase ACGU strings, structures are dot-bracket strings.
Masked constraint strings additionally use '?' for unconstrained positions;
those stay plain ``str`` because they are not valid structures on their own.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IllegalSymbol, LengthMismatch, UnbalancedStructure

RNA_ALPHABET = "ACGU"
STRUCTURE_ALPHABET = ".()"
MASK = "?"

_COMPLEMENT = {"A": "U", "U": "A", "G": "C", "C": "G"}

# Watson-Crick plus wobble.
PAIRABLE = frozenset(
    [("A", "U"), ("U", "A"), ("G", "C"), ("C", "G"), ("G", "U"), ("U", "G")]
)


@dataclass(frozen=True)
class Sequence:
    """A validated RNA sequence over {A, C, G, U}."""

    residues: str

    def __post_init__(self):
        if not self.residues:
            raise IllegalSymbol("empty sequence")
        bad = set(self.residues) - set(RNA_ALPHABET)
        if bad:
            raise IllegalSymbol(f"not an RNA symbol: {sorted(bad)!r}")

    def __str__(self):
        return self.residues

    def __len__(self):
        return len(self.residues)


@dataclass(frozen=True)
class Structure:
    """A validated, pseudoknot-free secondary structure in dot-bracket form."""

    symbols: str
    _partner: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_partner", bracket_partners(self.symbols, strict=True)
        )

    def __str__(self):
        return self.symbols

    def __len__(self):
        return len(self.symbols)

    def pair_table(self) -> np.ndarray:
        """Partner index per position, -1 where unpaired (copy)."""
        return self._partner.copy()

    def pairs(self) -> list[tuple[int, int]]:
        """All base pairs (i, j) with i < j, sorted by i."""
        return [
            (i, int(j)) for i, j in enumerate(self._partner) if j > i
        ]

    @property
    def pair_count(self) -> int:
        return int(np.sum(self._partner >= 0)) // 2


def bracket_partners(symbols: str, strict: bool = True) -> np.ndarray:
    """Match brackets of a dot-bracket string into a partner array.

    With ``strict`` every bracket must close (UnbalancedStructure otherwise);
    non-strict mode leaves unmatched brackets unpaired, which is what the
    riboswitch checker needs for symbol-level screening of arbitrary input.
    """
    partner = np.full(len(symbols), -1, dtype=np.int32)
    stack: list[int] = []
    for i, sym in enumerate(symbols):
        if sym == "(":
            stack.append(i)
        elif sym == ")":
            if not stack:
                if strict:
                    raise UnbalancedStructure(f"unmatched ')' at position {i}")
                continue
            j = stack.pop()
            partner[i] = j
            partner[j] = i
        elif sym != ".":
            raise IllegalSymbol(f"not a structure symbol: {sym!r} at position {i}")
    if stack and strict:
        raise UnbalancedStructure(f"unmatched '(' at position {stack[-1]}")
    return partner


def parse_dot_bracket(text: str) -> Structure:
    """Parse and validate a dot-bracket string."""
    if not text:
        raise IllegalSymbol("empty structure")
    return Structure(text)


def render(structure: Structure) -> str:
    return structure.symbols


def gc_content(seq: Sequence | str) -> float:
    """Fraction of G and C residues."""
    s = str(seq)
    if not s:
        raise IllegalSymbol("empty sequence")
    return (s.count("G") + s.count("C")) / len(s)


def reverse_complement(seq: str) -> str:
    try:
        return "".join(_COMPLEMENT[c] for c in reversed(seq))
    except KeyError as exc:
        raise IllegalSymbol(f"not an RNA symbol: {exc.args[0]!r}") from exc


def constrained_hamming(
    folded: Structure | str, target_constraint: str
) -> tuple[int, int]:
    """Positionwise structure mismatches against a masked constraint.

    Returns (mismatches, constrained) where masked ('?') target positions
    contribute to neither count.
    """
    f = str(folded)
    if len(f) != len(target_constraint):
        raise LengthMismatch(
            f"folded length {len(f)} vs constraint length {len(target_constraint)}"
        )
    mismatches = 0
    constrained = 0
    for a, b in zip(f, target_constraint):
        if b == MASK:
            continue
        constrained += 1
        if a != b:
            mismatches += 1
    return mismatches, constrained


def structure_loss(folded: Structure | str, target_constraint: str) -> float:
    """Normalized constrained Hamming distance in [0, 1]."""
    mismatches, constrained = constrained_hamming(folded, target_constraint)
    return mismatches / max(constrained, 1)
