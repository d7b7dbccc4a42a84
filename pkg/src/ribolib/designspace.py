"""Masked variable-length design spaces, task sampling, and dataset building.

A design space pairs a sequence template with a structure template. Templates
mix literals, '?' masks, and '*' extension sites where zero or more masked
symbols may be inserted; both templates must carry their extension sites at
the same aligned offsets. Sampling a task draws a total length uniformly from
the length range and then distributes the extra symbols uniformly over all
compositions among the extension sites.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import MASK, RNA_ALPHABET, STRUCTURE_ALPHABET
from .errors import (
    BadLengthRange,
    CorpusTooSmall,
    ExtensionSiteMismatch,
    IllegalSymbol,
    IllegalToken,
    LengthMismatch,
    MisalignedTemplates,
)

EXTENSION = "*"

SEQ_TEMPLATE_SYMBOLS = set(RNA_ALPHABET) | {MASK, EXTENSION}
STRUCT_TEMPLATE_SYMBOLS = set(STRUCTURE_ALPHABET) | {MASK, EXTENSION}

FAMILY_INVERSE = "inverse-folding"
FAMILY_ALTERNATING = "alternating"
FAMILY_RANDOM = "random-masking"


@dataclass(frozen=True)
class Task:
    """A fixed-length masked design problem.

    Both constraint strings mix literals with '?' masks. ``family`` records
    which masking family produced a generated task; it is metadata and is
    not serialized.
    """

    sequence_constraint: str
    structure_constraint: str
    explicit_pairs: tuple[tuple[int, int], ...] = ()
    gc_target: float | None = None
    family: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.sequence_constraint) != len(self.structure_constraint):
            raise LengthMismatch(
                f"sequence constraint length {len(self.sequence_constraint)} vs "
                f"structure constraint length {len(self.structure_constraint)}"
            )
        bad = set(self.sequence_constraint) - (set(RNA_ALPHABET) | {MASK})
        if bad:
            raise IllegalSymbol(f"bad sequence constraint symbols {sorted(bad)!r}")
        bad = set(self.structure_constraint) - (set(STRUCTURE_ALPHABET) | {MASK})
        if bad:
            raise IllegalSymbol(f"bad structure constraint symbols {sorted(bad)!r}")
        for i, j in self.explicit_pairs:
            if not (0 <= i < j < len(self.structure_constraint)):
                raise IllegalToken(f"explicit pair ({i}, {j}) out of range")
            if self.structure_constraint[i] not in "(?" or (
                self.structure_constraint[j] not in ")?"
            ):
                raise IllegalToken(
                    f"explicit pair ({i}, {j}) inconsistent with structure symbols"
                )

    def __len__(self):
        return len(self.sequence_constraint)

    @property
    def designable(self) -> tuple[int, ...]:
        """Positions the agent must fill (masked in the sequence constraint)."""
        return tuple(
            i for i, c in enumerate(self.sequence_constraint) if c == MASK
        )

    def to_json_dict(self) -> dict:
        return {
            "sequence": self.sequence_constraint,
            "structure": self.structure_constraint,
            "pairs": [list(p) for p in self.explicit_pairs],
            "gc": self.gc_target,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Task":
        return cls(
            sequence_constraint=d["sequence"],
            structure_constraint=d["structure"],
            explicit_pairs=tuple(tuple(p) for p in d.get("pairs") or ()),
            gc_target=d.get("gc"),
        )


@dataclass(frozen=True)
class DesignSpace:
    sequence_template: str
    structure_template: str
    min_length: int
    max_length: int
    gc_target: float | None = None
    gc_tolerance: float = 0.01
    explicit_pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        bad = set(self.sequence_template) - SEQ_TEMPLATE_SYMBOLS
        if bad:
            raise IllegalToken(f"bad sequence template tokens {sorted(bad)!r}")
        bad = set(self.structure_template) - STRUCT_TEMPLATE_SYMBOLS
        if bad:
            raise IllegalToken(f"bad structure template tokens {sorted(bad)!r}")
        seq_core = self.sequence_template.replace(EXTENSION, "")
        struct_core = self.structure_template.replace(EXTENSION, "")
        if len(seq_core) != len(struct_core):
            raise MisalignedTemplates(
                f"core lengths differ: sequence {len(seq_core)} vs "
                f"structure {len(struct_core)}"
            )
        if _site_offsets(self.sequence_template) != _site_offsets(
            self.structure_template
        ):
            raise ExtensionSiteMismatch(
                "extension sites differ in count or aligned position"
            )
        if self.min_length < len(seq_core):
            raise BadLengthRange(
                f"min length {self.min_length} below core length {len(seq_core)}"
            )
        if self.max_length < self.min_length:
            raise BadLengthRange(
                f"max length {self.max_length} below min length {self.min_length}"
            )
        if not self.extension_sites and self.max_length > len(seq_core):
            raise BadLengthRange(
                "length range exceeds core length but there are no extension sites"
            )

    @property
    def core_length(self) -> int:
        return len(self.sequence_template.replace(EXTENSION, ""))

    @property
    def extension_sites(self) -> tuple[int, ...]:
        """Core offsets (symbols before the site) of each extension site."""
        return _site_offsets(self.sequence_template)


def _site_offsets(template: str) -> tuple[int, ...]:
    offsets = []
    seen = 0
    for tok in template:
        if tok == EXTENSION:
            offsets.append(seen)
        else:
            seen += 1
    return tuple(offsets)


def parse_design_space(text: str) -> DesignSpace:
    """Parse the key/value design-space document.

    Keys: ``sequence``, ``structure``, ``length: MIN..MAX``; optional
    ``gc_target``, ``gc_tolerance``, ``pairs`` (``i-j`` entries).
    Lines starting with '#' are comments.
    """
    entries: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise IllegalToken(f"not a key/value line: {line!r}")
        key, _, value = line.partition(":")
        key = key.strip().lower()
        if key in entries:
            raise IllegalToken(f"duplicate key {key!r}")
        entries[key] = value.strip()

    known = {"sequence", "structure", "length", "gc_target", "gc_tolerance", "pairs"}
    unknown = set(entries) - known
    if unknown:
        raise IllegalToken(f"unknown keys {sorted(unknown)!r}")
    for required in ("sequence", "structure", "length"):
        if required not in entries:
            raise IllegalToken(f"missing required key {required!r}")

    length = entries["length"]
    if ".." not in length:
        raise BadLengthRange(f"length must be MIN..MAX, got {length!r}")
    lo_text, _, hi_text = length.partition("..")
    try:
        lo, hi = int(lo_text), int(hi_text)
    except ValueError as exc:
        raise BadLengthRange(f"non-integer length bound in {length!r}") from exc

    pairs: list[tuple[int, int]] = []
    for chunk in entries.get("pairs", "").replace(",", " ").split():
        a, sep, b = chunk.partition("-")
        if not sep:
            raise IllegalToken(f"pair entry must be i-j, got {chunk!r}")
        pairs.append((int(a), int(b)))

    return DesignSpace(
        sequence_template=entries["sequence"].upper(),
        structure_template=entries["structure"],
        min_length=lo,
        max_length=hi,
        gc_target=float(entries["gc_target"]) if "gc_target" in entries else None,
        gc_tolerance=float(entries.get("gc_tolerance", 0.01)),
        explicit_pairs=tuple(pairs),
    )


def load_design_space(path: str | Path) -> DesignSpace:
    return parse_design_space(Path(path).read_text(encoding="utf-8"))


def _uniform_composition(total: int, parts: int, rng: np.random.Generator):
    """Uniform draw over weak compositions of ``total`` into ``parts``."""
    if parts == 0:
        return ()
    if parts == 1:
        return (total,)
    # stars and bars: bar positions among total + parts - 1 slots
    bars = np.sort(rng.choice(total + parts - 1, size=parts - 1, replace=False))
    prev = -1
    sizes = []
    for b in bars:
        sizes.append(int(b - prev - 1))
        prev = b
    sizes.append(int(total + parts - 1 - prev - 1))
    return tuple(sizes)


def sample_task(space: DesignSpace, rng: np.random.Generator) -> Task:
    """Instantiate a fixed-length Task from the space.

    Total length is uniform over [min_length, max_length]; the extra symbols
    beyond the core expand the extension sites with '?' in both templates,
    split uniformly over all compositions.
    """
    total = int(rng.integers(space.min_length, space.max_length + 1))
    extra = total - space.core_length
    sites = space.extension_sites
    sizes = _uniform_composition(extra, len(sites), rng)

    seq = _expand(space.sequence_template, sizes)
    struct = _expand(space.structure_template, sizes)
    pairs = _remap_pairs(space.explicit_pairs, sites, sizes)
    return Task(
        sequence_constraint=seq,
        structure_constraint=struct,
        explicit_pairs=pairs,
        gc_target=space.gc_target,
    )


def _expand(template: str, sizes) -> str:
    out = []
    site = 0
    for tok in template:
        if tok == EXTENSION:
            out.append(MASK * sizes[site])
            site += 1
        else:
            out.append(tok)
    return "".join(out)


def _remap_pairs(pairs, site_offsets, sizes):
    """Shift core-template pair indices by the extension mass inserted before them."""
    remapped = []
    for i, j in pairs:
        di = sum(s for off, s in zip(site_offsets, sizes) if off <= i)
        dj = sum(s for off, s in zip(site_offsets, sizes) if off <= j)
        remapped.append((i + di, j + dj))
    return tuple(remapped)


@dataclass(frozen=True)
class MaskingPolicy:
    """Knobs of the training-task masking procedure.

    The structure receives up to ``max_structure_parts`` masked runs (count
    uniform including zero, which yields inverse-folding tasks), each at most
    ``max_part_fraction`` of the length. A ``sequence_random_mask_fraction``
    share of samples get sequence masks at random positions instead of the
    complementary rule.
    """

    max_structure_parts: int = 5
    max_part_fraction: float = 0.20
    sequence_random_mask_fraction: float = 0.218

    def __post_init__(self):
        if self.max_structure_parts < 1:
            raise ValueError("max_structure_parts must be >= 1")
        if not 0 < self.max_part_fraction <= 1:
            raise ValueError("max_part_fraction must be in (0, 1]")
        if not 0 <= self.sequence_random_mask_fraction <= 1:
            raise ValueError("sequence_random_mask_fraction must be in [0, 1]")


def _place_run(struct_mask: np.ndarray, run: int, rng: np.random.Generator) -> None:
    """Mask a run of ``run`` positions, uniformly among starts that keep it
    separated from already-masked stretches (so no output run ever exceeds
    the drawn run length). Truncates when nothing of that length fits."""
    n = struct_mask.shape[0]
    padded = np.zeros(n + 2, dtype=np.int32)
    padded[1:-1] = struct_mask
    csum = np.concatenate(([0], np.cumsum(padded)))
    while run >= 1:
        starts = np.arange(n - run + 1)
        # window [start-1, start+run] in original coordinates, shifted by pad
        occupied = csum[starts + run + 2] - csum[starts]
        valid = starts[occupied == 0]
        if valid.size:
            start = int(valid[int(rng.integers(0, valid.size))])
            struct_mask[start : start + run] = True
            return
        run -= 1


def mask_sample(
    seq: str,
    struct: str,
    policy: MaskingPolicy,
    rng: np.random.Generator,
) -> Task:
    """Derive a masked training task from a folded (sequence, structure) pair."""
    seq, struct = str(seq), str(struct)
    if len(seq) != len(struct):
        raise LengthMismatch(f"{len(seq)} vs {len(struct)}")
    n = len(seq)
    max_run = int(policy.max_part_fraction * n)

    struct_mask = np.zeros(n, dtype=bool)
    parts = int(rng.integers(0, policy.max_structure_parts + 1))
    if max_run >= 1:
        for _ in range(parts):
            _place_run(struct_mask, int(rng.integers(1, max_run + 1)), rng)

    random_family = rng.random() < policy.sequence_random_mask_fraction
    if random_family:
        count = int(rng.integers(1, n + 1))
        seq_mask = np.zeros(n, dtype=bool)
        seq_mask[rng.choice(n, size=count, replace=False)] = True
        family = FAMILY_RANDOM
    else:
        seq_mask = ~struct_mask
        family = FAMILY_INVERSE if not struct_mask.any() else FAMILY_ALTERNATING

    seq_out = "".join(MASK if m else c for c, m in zip(seq, seq_mask))
    struct_out = "".join(MASK if m else c for c, m in zip(struct, struct_mask))
    return Task(
        sequence_constraint=seq_out,
        structure_constraint=struct_out,
        family=family,
    )


@dataclass(frozen=True)
class DatasetSpec:
    """One dataset request: name drives the Rfam-style length filter."""

    name: str
    size: int

    def __post_init__(self):
        if self.name not in ("long", "short", "random", "validation"):
            raise IllegalToken(f"unknown dataset name {self.name!r}")
        if self.size < 1:
            raise IllegalToken("dataset size must be >= 1")

    def admits(self, length: int) -> bool:
        if self.name == "long":
            return length >= 200
        if self.name == "short":
            return length <= 200
        return True


def build_datasets(
    corpus: list[tuple[str, str]],
    specs: list[DatasetSpec],
    policy: MaskingPolicy,
    rng: np.random.Generator,
) -> dict[str, list[Task]]:
    """Build masked task datasets from a pre-folded corpus.

    The validation set is drawn first and its sequences are reserved, so
    validation is disjoint (by sequence identity) from every training set.
    """
    order = rng.permutation(len(corpus))
    reserved: set[str] = set()
    datasets: dict[str, list[Task]] = {}

    val_specs = [s for s in specs if s.name == "validation"]
    train_specs = [s for s in specs if s.name != "validation"]

    for spec in val_specs:
        picked = []
        for idx in order:
            seq, struct = corpus[idx]
            if spec.admits(len(seq)) and seq not in reserved:
                picked.append((seq, struct))
                reserved.add(seq)
            if len(picked) == spec.size:
                break
        if len(picked) < spec.size:
            raise CorpusTooSmall(
                f"{spec.name}: need {spec.size} entries, corpus has {len(picked)}"
            )
        datasets[spec.name] = [
            mask_sample(seq, struct, policy, rng) for seq, struct in picked
        ]

    for spec in train_specs:
        eligible = [
            corpus[idx]
            for idx in order
            if spec.admits(len(corpus[idx][0])) and corpus[idx][0] not in reserved
        ]
        if len(eligible) < spec.size:
            raise CorpusTooSmall(
                f"{spec.name}: need {spec.size} entries, "
                f"only {len(eligible)} eligible after filtering"
            )
        picked = [eligible[i] for i in rng.choice(len(eligible), spec.size, replace=False)]
        datasets[spec.name] = [
            mask_sample(seq, struct, policy, rng) for seq, struct in picked
        ]
    return datasets


# ---------------------------------------------------------------------------
# corpus and dataset IO

def read_fasta(path: str | Path) -> list[str]:
    """Sequences from a FASTA file, T converted to U, uppercased."""
    sequences = []
    current: list[str] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            if current:
                sequences.append("".join(current))
                current = []
            continue
        current.append(line.upper().replace("T", "U"))
    if current:
        sequences.append("".join(current))
    for seq in sequences:
        bad = set(seq) - set(RNA_ALPHABET)
        if bad:
            raise IllegalSymbol(f"non-RNA symbols in FASTA record: {sorted(bad)!r}")
    return sequences


def read_corpus_tsv(path: str | Path) -> list[tuple[str, str]]:
    """Pre-folded corpus: two tab-separated columns, sequence and dot-bracket."""
    out = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise IllegalToken(f"{path}:{lineno}: expected 2 columns, got {len(cols)}")
        seq, struct = cols[0].upper().replace("T", "U"), cols[1]
        if len(seq) != len(struct):
            raise LengthMismatch(f"{path}:{lineno}: sequence/structure lengths differ")
        out.append((seq, struct))
    return out


def write_tasks_jsonl(tasks: list[Task], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for task in tasks:
            fh.write(json.dumps(task.to_json_dict()) + "\n")


def read_tasks_jsonl(path: str | Path) -> list[Task]:
    tasks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                tasks.append(Task.from_json_dict(json.loads(line)))
    return tasks


def with_gc_target(task: Task, gc_target: float | None) -> Task:
    return replace(task, gc_target=gc_target)
