"""Theophylline riboswitch design space, validity checker, and library stats.

Candidates are built from four regions: the 42nt TCT8-4 aptamer, a variable
spacer, a region complementary to the aptamer 3' end (always starting with
the UGAAGUGCUG anchor), and a terminal 8-U stretch. A candidate is valid when
the full-length fold shows the aptamer hairpin plus a terminator stem pairing
across the spacer, the last seven positions stay unpaired, and no prefix of a
co-transcriptional trace pairs the spacer with the aptamer.
"""

from __future__ import annotations

import json
import multiprocessing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import MASK, bracket_partners, gc_content, reverse_complement, structure_loss
from .designspace import EXTENSION, DesignSpace, parse_design_space
from .errors import AnchorNotFound, IllegalToken
from .fold import FoldingEngine, cotranscriptional_fold, make_engine

THEOPHYLLINE_APTAMER = "AAGUGAUACCAGCAUCGUCUUGAUGCCCUUGGCAGCACUUCA"
THEOPHYLLINE_SPACE_TEXT = """\
# Theophylline riboswitch design space: aptamer, variable spacer,
# complementary region, 8-U stretch. '*' marks extension sites.
sequence: AAGUGAUACCAGCAUCGUCUUGAUGCCCUUGGCAGCACUUCA*??????*UGAAGUGCUG*UUUUUUUU
structure: ........???(((((.....)))))...???((((((((((*??....*))))))))))*?.......
length: 66..91
"""


def riboswitch_space(gc_target: float | None = None,
                     gc_tolerance: float = 0.01) -> DesignSpace:
    space = parse_design_space(THEOPHYLLINE_SPACE_TEXT)
    if gc_target is None:
        return space
    from dataclasses import replace

    return replace(space, gc_target=gc_target, gc_tolerance=gc_tolerance)


@dataclass(frozen=True)
class RegionMap:
    """Contiguous candidate regions; together they cover the whole sequence."""

    aptamer: range
    spacer: range
    complementary: range
    u_stretch: range

    def __post_init__(self):
        segs = (self.aptamer, self.spacer, self.complementary, self.u_stretch)
        if self.aptamer.start != 0:
            raise IllegalToken("aptamer must start at position 0")
        for left, right in zip(segs, segs[1:]):
            if left.stop != right.start:
                raise IllegalToken("regions must be contiguous and ordered")
        if len(self.u_stretch) != 8:
            raise IllegalToken("u_stretch must span exactly 8 positions")

    @property
    def length(self) -> int:
        return self.u_stretch.stop


def _literal_runs(template: str) -> list[str]:
    runs, current = [], []
    for tok in template:
        if tok in (MASK, EXTENSION):
            if current:
                runs.append("".join(current))
                current = []
        else:
            current.append(tok)
    if current:
        runs.append("".join(current))
    return runs


def region_literals(space: DesignSpace) -> tuple[str, str, str]:
    """(aptamer, complementary anchor, u-stretch) literals of a riboswitch space."""
    runs = _literal_runs(space.sequence_template)
    if len(runs) < 3:
        raise IllegalToken("space does not have aptamer/anchor/u-stretch literals")
    aptamer, u_stretch, anchor = runs[0], runs[-1], runs[-2]
    if len(u_stretch) != 8:
        raise IllegalToken(f"trailing literal run must be 8nt, got {len(u_stretch)}")
    return aptamer, anchor, u_stretch


def infer_regions(candidate: str, space: DesignSpace) -> RegionMap:
    """Locate the four regions of a candidate from this design space.

    The complementary region starts at the leftmost anchor occurrence that
    leaves a spacer of at least 6nt and a complementary region of at least
    10nt before the final 8 positions.
    """
    candidate = str(candidate)
    aptamer, anchor, _ = region_literals(space)
    n = len(candidate)
    if not candidate.startswith(aptamer):
        raise AnchorNotFound("candidate does not start with the aptamer")
    apt_end = len(aptamer)
    comp_stop = n - 8
    lo = apt_end + 6
    hi = comp_stop - len(anchor)
    pos = lo
    while pos <= hi:
        hit = candidate.find(anchor, pos, hi + len(anchor))
        if hit < 0:
            break
        if comp_stop - hit >= 10:
            return RegionMap(
                aptamer=range(0, apt_end),
                spacer=range(apt_end, hit),
                complementary=range(hit, comp_stop),
                u_stretch=range(comp_stop, n),
            )
        pos = hit + 1
    raise AnchorNotFound(
        f"no complementary-region anchor {anchor!r} with admissible spacer"
    )


@dataclass(frozen=True)
class Verdict:
    hairpins_ok: bool
    u_stretch_ok: bool
    cotranscription_ok: bool
    gc_ok: bool | None = None

    @property
    def valid(self) -> bool:
        flags = [self.hairpins_ok, self.u_stretch_ok, self.cotranscription_ok]
        if self.gc_ok is not None:
            flags.append(self.gc_ok)
        return all(flags)

    def to_json_dict(self) -> dict:
        return {
            "hairpins_ok": self.hairpins_ok,
            "u_stretch_ok": self.u_stretch_ok,
            "cotranscription_ok": self.cotranscription_ok,
            "gc_ok": self.gc_ok,
            "valid": self.valid,
        }


def _hairpin_pairs(partner: np.ndarray) -> list[tuple[int, int]]:
    """Pairs enclosing no other paired position (innermost loops)."""
    out = []
    for i, j in enumerate(partner):
        if j <= i:
            continue
        if not np.any(partner[i + 1 : j] >= 0):
            out.append((i, int(j)))
    return out


def structure_flags(
    db: str, regions: RegionMap, min_stem: int = 1
) -> tuple[bool, bool]:
    """(hairpins_ok, u_stretch_ok) of a full-length structure.

    Bracket matching is lenient so that screening works on injected or
    third-party structures; unmatched brackets simply stay unpaired.
    """
    partner = bracket_partners(db, strict=False)
    hairpins = _hairpin_pairs(partner)
    apt = regions.aptamer
    aptamer_hairpin = any(i in apt and j in apt for i, j in hairpins)
    # terminator stem: pairs that skip over the whole spacer
    crossing = sum(
        1
        for i, j in enumerate(partner)
        if j > i and i < regions.spacer.start and j >= regions.spacer.stop
    )
    hairpins_ok = aptamer_hairpin and crossing >= min_stem
    u_stretch_ok = all(sym == "." for sym in db[-7:])
    return hairpins_ok, u_stretch_ok


def _spacer_aptamer_pairing(db: str, regions: RegionMap) -> bool:
    partner = bracket_partners(db, strict=False)
    for i, j in enumerate(partner):
        if j > i and i in regions.aptamer and j in regions.spacer:
            return True
    return False


def check_candidate(
    candidate: str,
    regions: RegionMap,
    engine: FoldingEngine,
    speed: int = 5,
    gc_spec: tuple[float, float] | None = None,
    min_stem: int = 1,
    structure: str | None = None,
) -> Verdict:
    """Apply the riboswitch screening criteria to one candidate.

    ``structure`` overrides the full-length fold for the hairpin and
    U-stretch criteria (the co-transcriptional criterion always refolds).
    """
    candidate = str(candidate)
    if regions.length != len(candidate):
        raise IllegalToken("region map does not match candidate length")
    full = structure if structure is not None else engine.fold_db(candidate)
    hairpins_ok, u_stretch_ok = structure_flags(full, regions, min_stem)
    trace = cotranscriptional_fold(engine, candidate, speed)
    cotranscription_ok = not any(
        _spacer_aptamer_pairing(st.symbols, regions) for st in trace.prefix_structures
    )
    gc_ok = None
    if gc_spec is not None:
        target, tolerance = gc_spec
        gc_ok = abs(gc_content(candidate) - target) <= tolerance
    return Verdict(hairpins_ok, u_stretch_ok, cotranscription_ok, gc_ok)


def baseline_generate(
    n: int, rng: np.random.Generator, space: DesignSpace | None = None
) -> list[str]:
    """Random-combination library: aptamer + random spacer (6-20nt) +
    reverse complement of a random-length (10-21nt) aptamer 3' suffix +
    8-U stretch."""
    if n < 1:
        raise ValueError("n must be >= 1")
    space = space or riboswitch_space()
    aptamer, _, u_stretch = region_literals(space)
    alphabet = np.array(list("ACGU"))
    out = []
    for _ in range(n):
        spacer_len = int(rng.integers(6, 21))
        comp_len = int(rng.integers(10, 22))
        spacer = "".join(alphabet[rng.integers(0, 4, spacer_len)])
        comp = reverse_complement(aptamer[-comp_len:])
        out.append(aptamer + spacer + comp + u_stretch)
    return out


def canonical_constraint(regions: RegionMap, space: DesignSpace) -> tuple[str, str]:
    """Constraint strings for a candidate shape of this space.

    Extension mass is assigned canonically: all spacer extension at the first
    spacer site, all complementary extension at the last site. Used to score
    arbitrary candidates (e.g. the random baseline) against the space.
    """
    aptamer, anchor, u_stretch = region_literals(space)
    sites = space.extension_sites
    spacer_core = space.core_length - len(aptamer) - len(anchor) - len(u_stretch)
    spacer_extra = len(regions.spacer) - spacer_core
    comp_extra = len(regions.complementary) - len(anchor)
    if spacer_extra < 0 or comp_extra < 0:
        raise IllegalToken("regions smaller than the space's core segments")
    sizes = [0] * len(sites)
    sizes[0] = spacer_extra
    sizes[-1] = comp_extra
    from .designspace import _expand

    seq_c = _expand(space.sequence_template, sizes)
    struct_c = _expand(space.structure_template, sizes)
    if len(seq_c) != regions.length:
        raise IllegalToken("canonical constraint length mismatch")
    return seq_c, struct_c


@dataclass(frozen=True)
class LibraryReport:
    total: int
    unique_sequences: int
    n_valid: int
    valid_fraction: float
    unique_valid_structures: int
    length_histogram: dict[int, int]
    gc_histogram: dict[str, int]

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "unique_sequences": self.unique_sequences,
            "n_valid": self.n_valid,
            "valid_fraction": self.valid_fraction,
            "unique_valid_structures": self.unique_valid_structures,
            "length_histogram": {str(k): v for k, v in sorted(self.length_histogram.items())},
            "gc_histogram": dict(sorted(self.gc_histogram.items())),
        }


_WORKER_STATE: dict = {}


def _eval_worker_init(space, engine_spec, speed, gc_spec, min_stem):
    _WORKER_STATE["space"] = space
    _WORKER_STATE["engine"] = make_engine(engine_spec)
    _WORKER_STATE["speed"] = speed
    _WORKER_STATE["gc_spec"] = gc_spec
    _WORKER_STATE["min_stem"] = min_stem


def _eval_worker(seq: str) -> dict:
    return _evaluate_one(
        seq,
        _WORKER_STATE["space"],
        _WORKER_STATE["engine"],
        _WORKER_STATE["speed"],
        _WORKER_STATE["gc_spec"],
        _WORKER_STATE["min_stem"],
    )


def _evaluate_one(seq, space, engine, speed, gc_spec, min_stem) -> dict:
    record: dict = {"sequence": seq, "length": len(seq), "gc": gc_content(seq)}
    try:
        regions = infer_regions(seq, space)
    except AnchorNotFound:
        record["structure"] = engine.fold_db(seq)
        record["verdict"] = Verdict(False, False, False,
                                    False if gc_spec else None).to_json_dict()
        record["losses"] = {"structure_loss": 1.0}
        return record
    verdict = check_candidate(seq, regions, engine, speed, gc_spec, min_stem)
    full = engine.fold_db(seq)
    _, struct_constraint = canonical_constraint(regions, space)
    record["structure"] = full
    record["verdict"] = verdict.to_json_dict()
    record["losses"] = {"structure_loss": structure_loss(full, struct_constraint)}
    return record


def evaluate_library(
    candidates: list[str],
    space: DesignSpace,
    engine: FoldingEngine | None = None,
    gc_spec: tuple[float, float] | None = None,
    speed: int = 5,
    min_stem: int = 1,
    workers: int = 1,
    engine_spec: str = "internal",
) -> tuple[LibraryReport, list[dict]]:
    """Deduplicate, check, and aggregate a candidate library.

    Returns the report plus one record per unique candidate (first-seen
    order). With ``workers > 1`` checking runs in a process pool built from
    ``engine_spec``; results are order-stable regardless of scheduling.
    """
    total = len(candidates)
    seen = set()
    unique = []
    for seq in candidates:
        if seq not in seen:
            seen.add(seq)
            unique.append(seq)

    if workers > 1:
        with multiprocessing.get_context("spawn").Pool(
            workers,
            initializer=_eval_worker_init,
            initargs=(space, engine_spec, speed, gc_spec, min_stem),
        ) as pool:
            records = pool.map(_eval_worker, unique, chunksize=64)
    else:
        eng = engine if engine is not None else make_engine(engine_spec)
        records = [
            _evaluate_one(seq, space, eng, speed, gc_spec, min_stem)
            for seq in unique
        ]

    n_valid = sum(1 for r in records if r["verdict"]["valid"])
    valid_structures = {r["structure"] for r in records if r["verdict"]["valid"]}
    length_hist: dict[int, int] = {}
    gc_hist: dict[str, int] = {}
    for r in records:
        length_hist[r["length"]] = length_hist.get(r["length"], 0) + 1
        bin_label = f"{int(r['gc'] / 0.02) * 0.02:.2f}"
        gc_hist[bin_label] = gc_hist.get(bin_label, 0) + 1

    report = LibraryReport(
        total=total,
        unique_sequences=len(unique),
        n_valid=n_valid,
        valid_fraction=n_valid / len(unique) if unique else 0.0,
        unique_valid_structures=len(valid_structures),
        length_histogram=length_hist,
        gc_histogram=gc_hist,
    )
    return report, records


def write_candidates_jsonl(records: list[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def read_candidate_sequences(path: str | Path) -> list[str]:
    """Candidate sequences from JSONL records or plain one-per-line text."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                out.append(json.loads(line)["sequence"])
            else:
                out.append(line)
    return out


def write_histogram_csv(histogram: dict, path: str | Path, key_name: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{key_name},count\n")
        for key in sorted(histogram):
            fh.write(f"{key},{histogram[key]}\n")
