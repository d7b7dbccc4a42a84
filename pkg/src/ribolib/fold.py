"""Secondary-structure prediction oracles.

The internal engine maximizes the number of nested Watson-Crick/wobble pairs
(hairpin loops >= 3) with a deterministic traceback; an external adapter
wraps any command-line folder speaking the one-sequence-in, one-dot-bracket-
out protocol. Both are cached because refinement refolds near-duplicates
heavily.
"""

from __future__ import annotations

import shlex
import subprocess
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import Sequence, Structure
from .errors import ExternalFolderFailure, IllegalSymbol, RibolibError, TooLong

BRUTE_FORCE_LIMIT = 20


class FoldingEngine:
    """Deterministic sequence -> structure oracle with a bounded LRU cache."""

    def __init__(self, cache_size: int = 65536):
        self._cache: OrderedDict[str, str] = OrderedDict()
        self._cache_size = cache_size
        self._lock = threading.Lock()

    def _fold_impl(self, seq: str) -> str:
        raise NotImplementedError

    def fold_db(self, seq: str) -> str:
        """Fold an RNA string, returning the dot-bracket string."""
        with self._lock:
            hit = self._cache.get(seq)
            if hit is not None:
                self._cache.move_to_end(seq)
                return hit
        db = self._fold_impl(seq)
        with self._lock:
            self._cache[seq] = db
            if len(self._cache) > self._cache_size:
                self._cache.popitem(last=False)
        return db

    def fold(self, seq: Sequence | str) -> Structure:
        return Structure(self.fold_db(str(seq)))


class InternalEngine(FoldingEngine):
    """Nussinov-style base-pair maximization over {AU, UA, GC, CG, GU, UG}."""

    def __init__(self, min_hairpin_loop: int = 3, cache_size: int = 65536):
        if min_hairpin_loop < 3:
            raise ValueError("min_hairpin_loop must be >= 3")
        super().__init__(cache_size)
        self.min_hairpin_loop = min_hairpin_loop

    def _fold_impl(self, seq: str) -> str:
        if not seq:
            raise IllegalSymbol("empty sequence")
        codes = kernels.seq_to_codes(seq)
        partner = kernels.fold_codes(codes, self.min_hairpin_loop)
        return partners_to_db(partner)

    def __repr__(self):
        return f"InternalEngine(min_hairpin_loop={self.min_hairpin_loop})"


class ExternalEngine(FoldingEngine):
    """Adapter for an external folding command.

    The child receives one uppercase RNA sequence plus newline on stdin and
    must print a same-length dot-bracket as the first whitespace-delimited
    token of its first or second output line (an echoed sequence line is
    tolerated).
    """

    def __init__(self, command: list[str] | str, timeout: float = 60.0,
                 cache_size: int = 65536):
        super().__init__(cache_size)
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.command:
            raise ExternalFolderFailure("empty external command")
        self.timeout = timeout

    def _fold_impl(self, seq: str) -> str:
        try:
            proc = subprocess.run(
                self.command, input=seq + "\n", capture_output=True,
                text=True, timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ExternalFolderFailure(f"{self.command[0]}: {exc}") from exc
        if proc.returncode != 0:
            raise ExternalFolderFailure(
                f"{self.command[0]} exited {proc.returncode}: {proc.stderr.strip()[:200]}"
            )
        lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
        for line in lines[:2]:
            token = line.split()[0]
            if token == seq:
                continue
            if len(token) == len(seq) and set(token) <= {".", "(", ")"}:
                try:
                    Structure(token)
                except RibolibError as exc:
                    raise ExternalFolderFailure(
                        f"{self.command[0]}: invalid structure {token!r}"
                    ) from exc
                return token
        raise ExternalFolderFailure(
            f"{self.command[0]}: no dot-bracket of length {len(seq)} "
            f"in output {proc.stdout[:200]!r}"
        )

    def __repr__(self):
        return f"ExternalEngine({' '.join(self.command)!r})"


def make_engine(spec: str) -> FoldingEngine:
    """Build an engine from 'internal' or 'external:<command line>'."""
    if spec == "internal":
        return InternalEngine()
    if spec.startswith("external:"):
        return ExternalEngine(spec[len("external:"):])
    raise ValueError(f"unknown engine spec {spec!r}")


def partners_to_db(partner: np.ndarray) -> str:
    out = []
    for i, j in enumerate(partner):
        if j < 0:
            out.append(".")
        elif j > i:
            out.append("(")
        else:
            out.append(")")
    return "".join(out)


@dataclass(frozen=True)
class CotranscriptionalTrace:
    """Structures of successive 5' prefixes at a fixed elongation speed."""

    prefix_lengths: tuple[int, ...]
    prefix_structures: tuple[Structure, ...] = field(repr=False)

    def final(self) -> Structure:
        return self.prefix_structures[-1]


def cotranscriptional_fold(
    engine: FoldingEngine, seq: Sequence | str, speed: int
) -> CotranscriptionalTrace:
    """Fold prefixes of length speed, 2*speed, ... plus the full sequence."""
    if speed < 1:
        raise ValueError("speed must be >= 1")
    s = str(seq)
    lengths = list(range(speed, len(s) + 1, speed))
    if not lengths or lengths[-1] != len(s):
        lengths.append(len(s))
    structures = tuple(engine.fold(s[:k]) for k in lengths)
    return CotranscriptionalTrace(tuple(lengths), structures)


def brute_force_fold(
    seq: Sequence | str, min_loop: int = 3
) -> tuple[int, set[str]]:
    """Enumerate every nested pairing; return (max pairs, optimal structures).

    Test oracle for the DP engine, deliberately independent of it: plain
    recursive enumeration of all structures, capped at 20nt.
    """
    s = str(seq)
    if not s:
        raise IllegalSymbol("empty sequence")
    if len(s) > BRUTE_FORCE_LIMIT:
        raise TooLong(f"{len(s)}nt exceeds the {BRUTE_FORCE_LIMIT}nt enumeration cap")
    codes = kernels.seq_to_codes(s)
    pairable = kernels.PAIRABLE_MATRIX
    memo: dict[tuple[int, int], list[tuple[tuple[int, int], ...]]] = {}

    def enum(i: int, j: int) -> list[tuple[tuple[int, int], ...]]:
        if i >= j:
            return [()]
        key = (i, j)
        if key in memo:
            return memo[key]
        out = list(enum(i + 1, j))
        for k in range(i + min_loop + 1, j + 1):
            if pairable[codes[i], codes[k]]:
                for left in enum(i + 1, k - 1):
                    for right in enum(k + 1, j):
                        out.append(((i, k),) + left + right)
        memo[key] = out
        return out

    best = -1
    optimal: set[str] = set()
    for pairing in enum(0, len(s) - 1):
        if len(pairing) > best:
            best = len(pairing)
            optimal = set()
        if len(pairing) == best:
            chars = ["."] * len(s)
            for i, j in pairing:
                chars[i] = "("
                chars[j] = ")"
            optimal.add("".join(chars))
    return best, optimal
