"""Hierarchical beam codebook construction.

Each UPA gets an ``S+1``-stage codebook with ``N^2 = 2^S`` narrow beams in the
bottom stage and ``2^s`` synthesized wide beams in stage ``s < S``.  Narrow
beams are plain steering vectors placed uniformly in the mapped coordinates
(sin of local azimuth, cos of elevation).  Wide beams are least-squares fits
of piecewise-constant gain targets over a 4N x 4N direction grid; each wide
beam covers exactly two beams of the next stage.

Three benchmark constructions are provided for comparison: narrow beams at
uniform real angles, narrow beams at uniform virtual angles, and the full
hierarchy built without the buffer ring around every coverage target
(``inverse_no_buffer``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    SQRT2,
    ArrayGeometry,
    Direction,
    check_upa,
    steering_matrix,
)

BENCHMARK_KINDS = ("uniform_real", "uniform_virtual", "inverse_no_buffer")
HIERARCHICAL_KINDS = ("proposed", "inverse_no_buffer")
ALL_KINDS = ("proposed",) + BENCHMARK_KINDS


class SynthesisError(RuntimeError):
    """Raised when a wide-beam solve degenerates (all-zero codeword)."""


@dataclass(frozen=True)
class CodebookConfig:
    """Parameters shared by every per-UPA codebook build.

    ``n_beams`` is the number of narrow beams per angular axis; it must be a
    power of two (>= 2) so the binary hierarchy closes.  ``pinv_tolerance`` is
    the relative singular-value cutoff of the wide-beam solve: directions of
    the grid dictionary below ``tol * sigma_max`` are discarded.  The default
    keeps only the well-conditioned beamspace, which is what produces
    trench-free wide beams; tightening it toward machine precision lets badly
    conditioned components back in and visibly degrades the patterns.
    """

    geom: ArrayGeometry
    n_beams: int
    buffer_width: int = 1
    buffer_gain: float = 0.5
    pinv_tolerance: float = 1e-2

    def __post_init__(self):
        n = self.n_beams
        if n < 1 or n & (n - 1):
            raise ValueError(f"n_beams must be a power of two, got {n}")
        if self.buffer_width < 0:
            raise ValueError("buffer_width must be >= 0")
        if not 0.0 < self.buffer_gain < 1.0:
            raise ValueError("buffer_gain must lie in (0, 1)")
        if self.pinv_tolerance <= 0.0:
            raise ValueError("pinv_tolerance must be positive")

    @property
    def stage_count(self) -> int:
        """Number of binary refinement stages S, with ``n_beams**2 == 2**S``."""
        return 2 * int(round(math.log2(self.n_beams)))

    @property
    def grid_size(self) -> int:
        """Grid blocks per axis (4N)."""
        return 4 * self.n_beams


@dataclass(frozen=True)
class Codeword:
    """One beamforming weight vector plus its place in the codebook."""

    weights: np.ndarray
    upa: int
    stage: int
    index: int  # 1-based within the stage
    kind: str  # "narrow" | "wide"
    center: Direction | None = None


def narrow_index_pair(index: int, n_beams: int) -> tuple[int, int]:
    """Map a 1-based narrow-beam index to 1-based (azimuth, elevation) axes.

    Runs azimuth-fastest: index ``i`` -> ``n = ((i-1) mod N) + 1``,
    ``p = ceil(i/N)``, a bijection onto {1..N}^2.
    """
    if not 1 <= index <= n_beams * n_beams:
        raise ValueError(f"narrow-beam index {index} out of range")
    return (index - 1) % n_beams + 1, (index - 1) // n_beams + 1


def narrow_beam_angles(n_beams: int, upa: int) -> tuple[np.ndarray, np.ndarray]:
    """Center angles of the narrow beams of UPA ``upa``.

    Returns the ``n_beams`` azimuths and ``n_beams`` elevations (radians).
    Centers are uniform in sin(local azimuth) and cos(elevation) over the
    open interval (-sqrt(2)/2, sqrt(2)/2), i.e. midpoints of N equal bins.
    """
    check_upa(upa)
    if n_beams < 1:
        raise ValueError("n_beams must be positive")
    idx = np.arange(1, n_beams + 1)
    mapped = SQRT2 * (2 * idx - 1 - n_beams) / (2 * n_beams)
    azimuths = np.arcsin(mapped) + (upa - 1) * math.pi / 2.0
    elevations = np.arccos(mapped)
    return azimuths, elevations


def build_narrow_stage(cfg: CodebookConfig, upa: int) -> list[Codeword]:
    """The ``N^2`` bottom-stage steering-vector codewords of UPA ``upa``."""
    n = cfg.n_beams
    azimuths, elevations = narrow_beam_angles(n, upa)
    stage = cfg.stage_count
    out = []
    for i in range(1, n * n + 1):
        na, pe = narrow_index_pair(i, n)
        center = Direction(azimuths[na - 1], elevations[pe - 1])
        u = math.sin(center.local_azimuth(upa)) * math.sin(center.elevation)
        v = math.cos(center.elevation)
        weights = steering_matrix(cfg.geom, u, v)[:, 0]
        out.append(Codeword(weights, upa, stage, i, "narrow", center))
    return out


def grid_mapped_centers(n_beams: int) -> np.ndarray:
    """Mapped center coordinates of the 4N grid blocks along one axis.

    The middle 2N blocks tile (-sqrt2/2, sqrt2/2) uniformly; the outer N-block
    pieces tile (-1, -sqrt2/2) and (sqrt2/2, 1) uniformly.  Applies to both
    sin(local azimuth) and cos(elevation).
    """
    n = n_beams
    j = np.arange(1, 4 * n + 1)
    out = np.empty(4 * n)
    lo = j <= n
    mid = (j > n) & (j <= 3 * n)
    hi = j > 3 * n
    out[lo] = (1 - SQRT2 / 2) * (2 * j[lo] - 1) / (2 * n) - 1
    out[mid] = SQRT2 * (2 * (j[mid] - n) - 1) / (4 * n) - SQRT2 / 2
    out[hi] = (1 - SQRT2 / 2) * (2 * (j[hi] - 3 * n) - 1) / (2 * n) + SQRT2 / 2
    return out


def grid_mapped_edges(n_beams: int) -> np.ndarray:
    """Block edges matching :func:`grid_mapped_centers` (length 4N+1, in [-1, 1])."""
    n = n_beams
    edges = np.empty(4 * n + 1)
    edges[: n + 1] = -1 + (1 - SQRT2 / 2) * np.arange(n + 1) / n
    edges[n : 3 * n + 1] = -SQRT2 / 2 + SQRT2 * np.arange(2 * n + 1) / (2 * n)
    edges[3 * n :] = SQRT2 / 2 + (1 - SQRT2 / 2) * np.arange(n + 1) / n
    return edges


@dataclass(frozen=True)
class DirectionGrid:
    """The 4N x 4N direction grid in front of one UPA.

    ``sin_azimuth`` stores sin(local azimuth) of the 4N azimuth columns
    (ascending) and ``cos_elevation`` the cos(elevation) of the 4N rows
    (ascending); ``azimuth``/``elevation`` are the corresponding angles.
    """

    upa: int
    n_beams: int
    sin_azimuth: np.ndarray
    cos_elevation: np.ndarray
    azimuth: np.ndarray
    elevation: np.ndarray

    @property
    def size(self) -> int:
        return 4 * self.n_beams

    def block_of(self, direction: Direction) -> tuple[int, int]:
        """1-based (azimuth, elevation) block indices containing ``direction``."""
        edges = grid_mapped_edges(self.n_beams)
        s = math.sin(direction.local_azimuth(self.upa))
        c = math.cos(direction.elevation)
        j = int(np.clip(np.searchsorted(edges, s, side="right"), 1, self.size))
        l = int(np.clip(np.searchsorted(edges, c, side="right"), 1, self.size))
        return j, l


def build_grid(n_beams: int, upa: int) -> DirectionGrid:
    """Direction grid for UPA ``upa`` (4N blocks per axis)."""
    check_upa(upa)
    if n_beams < 1:
        raise ValueError("n_beams must be positive")
    mapped = grid_mapped_centers(n_beams)
    azimuth = np.arcsin(mapped) + (upa - 1) * math.pi / 2.0
    elevation = np.arccos(mapped)
    return DirectionGrid(
        upa=upa,
        n_beams=n_beams,
        sin_azimuth=mapped,
        cos_elevation=mapped,
        azimuth=azimuth,
        elevation=elevation,
    )


@dataclass(frozen=True)
class CoverageSet:
    """Grid blocks covered by one codeword, as index ranges into the 4N grid."""

    stage: int
    index: int
    azimuth_blocks: range  # J, 1-based inclusive of both ends
    elevation_blocks: range  # L
    blocks_per_row: int  # nu
    blocks_per_column: int  # delta
    beams_per_row: int  # mu: beams of this stage sharing an elevation band

    def contains_block(self, j: int, l: int) -> bool:
        return j in self.azimuth_blocks and l in self.elevation_blocks

    def block_pairs(self) -> list[tuple[int, int]]:
        return [(j, l) for l in self.elevation_blocks for j in self.azimuth_blocks]


def coverage_counts(stage_count: int, stage: int) -> tuple[int, int, int]:
    """(nu, delta, mu) for ``stage`` of an ``stage_count``-stage hierarchy."""
    s, ss = stage, stage_count
    nu = 2 ** (math.ceil((ss - s) / 2) + 1)
    delta = 2 ** (math.ceil((ss - s - 1) / 2) + 1)
    mu = 2 ** math.ceil((s - 1) / 2)
    return nu, delta, mu


def coverage_set(stage_count: int, stage: int, index: int) -> CoverageSet:
    """Coverage rectangle of codeword ``index`` in ``stage``.

    Valid for 0 <= stage <= stage_count and 1 <= index <= 2**stage; the
    resulting blocks always lie in the central band {N+1..3N} of each axis.
    """
    if stage_count < 1 or stage_count % 2:
        raise ValueError("stage_count must be a positive even integer")
    if not 0 <= stage <= stage_count:
        raise ValueError(f"stage {stage} outside 0..{stage_count}")
    if not 1 <= index <= 2**stage:
        raise ValueError(f"index {index} outside 1..{2**stage}")
    n = 2 ** (stage_count // 2)
    nu, delta, mu = coverage_counts(stage_count, stage)
    col = (index - 1) % mu
    row = math.ceil(index / mu) - 1
    j_lo = n + nu * col + 1
    l_lo = n + delta * row + 1
    return CoverageSet(
        stage=stage,
        index=index,
        azimuth_blocks=range(j_lo, j_lo + nu),
        elevation_blocks=range(l_lo, l_lo + delta),
        blocks_per_row=nu,
        blocks_per_column=delta,
        beams_per_row=mu,
    )


def buffer_set(stage_count: int, stage: int, index: int, width: int) -> set[tuple[int, int]]:
    """Ring of grid blocks of the given ``width`` around a coverage rectangle.

    The widened rectangle is clamped to the grid; the coverage blocks
    themselves are excluded.  ``width == 0`` yields the empty set.
    """
    if width < 0:
        raise ValueError("width must be >= 0")
    cov = coverage_set(stage_count, stage, index)
    if width == 0:
        return set()
    size = 4 * 2 ** (stage_count // 2)
    j_lo = max(1, cov.azimuth_blocks.start - width)
    j_hi = min(size, cov.azimuth_blocks[-1] + width)
    l_lo = max(1, cov.elevation_blocks.start - width)
    l_hi = min(size, cov.elevation_blocks[-1] + width)
    ring = set()
    for l in range(l_lo, l_hi + 1):
        for j in range(j_lo, j_hi + 1):
            if not cov.contains_block(j, l):
                ring.add((j, l))
    return ring


def _grid_row_index(n_beams: int, j: int, l: int) -> int:
    """0-based position of block (j, l) in the elevation-major grid flattening."""
    return (l - 1) * 4 * n_beams + (j - 1)


def build_target_matrix(cfg: CodebookConfig, stage: int) -> np.ndarray:
    """Gain-target matrix for ``stage``: one 16N^2-row column per codeword.

    Rows follow the dictionary column order (elevation-major, azimuth-minor).
    Entries are 1 on covered blocks, ``buffer_gain`` on the surrounding ring,
    0 elsewhere; with ``buffer_width == 0`` this collapses to the plain 0/1
    coverage indicator.
    """
    n = cfg.n_beams
    ss = cfg.stage_count
    targets = np.zeros((16 * n * n, 2**stage))
    for i in range(1, 2**stage + 1):
        cov = coverage_set(ss, stage, i)
        for j, l in cov.block_pairs():
            targets[_grid_row_index(n, j, l), i - 1] = 1.0
        for j, l in buffer_set(ss, stage, i, cfg.buffer_width):
            targets[_grid_row_index(n, j, l), i - 1] = cfg.buffer_gain
    return targets


def build_steering_dictionary(cfg: CodebookConfig, upa: int) -> np.ndarray:
    """Steering vectors of all 16N^2 grid directions, one unit-norm column each.

    Columns run elevation-major / azimuth-minor, matching the row order of
    :func:`build_target_matrix`.
    """
    grid = build_grid(cfg.n_beams, upa)
    size = grid.size
    sin_el = np.sqrt(1.0 - grid.cos_elevation**2)
    u = (grid.sin_azimuth[None, :] * sin_el[:, None]).ravel()
    v = np.repeat(grid.cos_elevation, size)
    return steering_matrix(cfg.geom, u, v)


def solve_wide_beams(
    dictionary: np.ndarray,
    targets: np.ndarray,
    pinv_tolerance: float,
    upa: int,
    stage: int,
) -> list[Codeword]:
    """Least-squares wide beams for one stage, renormalized to unit power.

    Solves ``dictionary^H w = target`` per column in the regularized
    least-squares sense (relative singular-value cutoff ``pinv_tolerance``).
    Raises :class:`SynthesisError` when a solve collapses to the zero vector,
    which signals a degenerate target column.
    """
    solution, *_ = np.linalg.lstsq(dictionary.conj().T, targets, rcond=pinv_tolerance)
    norms = np.linalg.norm(solution, axis=0)
    floor = 1e-12 * max(1.0, float(np.abs(targets).max()))
    out = []
    for i, nrm in enumerate(norms, start=1):
        if nrm <= floor:
            raise SynthesisError(f"wide-beam solve degenerated for stage {stage}, index {i}")
        out.append(Codeword(solution[:, i - 1] / nrm, upa, stage, i, "wide"))
    return out


@dataclass
class HierarchicalCodebook:
    """All stages of one UPA's codebook plus the parent/child bookkeeping."""

    kind: str
    config: CodebookConfig
    upa: int
    grid: DirectionGrid
    stages: list[list[Codeword]]
    children: dict[tuple[int, int], tuple[int, int]]
    _weights_cache: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def stage_count(self) -> int:
        return self.config.stage_count

    @property
    def narrow_stage(self) -> list[Codeword]:
        return self.stages[-1]

    def stage_weights(self, stage: int) -> np.ndarray:
        """Weight vectors of one stage stacked as columns (cached)."""
        if stage not in self._weights_cache:
            self._weights_cache[stage] = np.column_stack(
                [cw.weights for cw in self.stages[stage]]
            )
        return self._weights_cache[stage]


@dataclass
class NarrowCodebook:
    """A flat, bottom-stage-only codebook (used by the angle-grid benchmarks)."""

    kind: str
    config: CodebookConfig
    upa: int
    codewords: list[Codeword]

    @property
    def narrow_stage(self) -> list[Codeword]:
        return self.codewords


def _children_by_containment(stage_count: int) -> dict[tuple[int, int], tuple[int, int]]:
    """Child indices per (stage, index), found by coverage containment."""
    children: dict[tuple[int, int], tuple[int, int]] = {}
    for s in range(stage_count):
        parents = [coverage_set(stage_count, s, i) for i in range(1, 2**s + 1)]
        kids = [coverage_set(stage_count, s + 1, i) for i in range(1, 2 ** (s + 1) + 1)]
        for parent in parents:
            found = [
                kid.index
                for kid in kids
                if set(kid.azimuth_blocks) <= set(parent.azimuth_blocks)
                and set(kid.elevation_blocks) <= set(parent.elevation_blocks)
            ]
            if len(found) != 2:
                raise SynthesisError(
                    f"stage {s} beam {parent.index} has {len(found)} children, expected 2"
                )
            children[(s, parent.index)] = (found[0], found[1])
    return children


def build_hierarchical_codebook(
    cfg: CodebookConfig, upa: int, kind: str = "proposed"
) -> HierarchicalCodebook:
    """Build all stages 0..S for UPA ``upa``.

    ``kind == "inverse_no_buffer"`` rebuilds the hierarchy with the buffer
    ring disabled, which reproduces the plain 0/1 coverage criterion.
    """
    check_upa(upa)
    if kind not in HIERARCHICAL_KINDS:
        raise ValueError(f"kind must be one of {HIERARCHICAL_KINDS}, got {kind!r}")
    if kind == "inverse_no_buffer":
        cfg = CodebookConfig(
            geom=cfg.geom,
            n_beams=cfg.n_beams,
            buffer_width=0,
            buffer_gain=cfg.buffer_gain,
            pinv_tolerance=cfg.pinv_tolerance,
        )
    dictionary = build_steering_dictionary(cfg, upa)
    stages: list[list[Codeword]] = []
    for s in range(cfg.stage_count):
        targets = build_target_matrix(cfg, s)
        stages.append(solve_wide_beams(dictionary, targets, cfg.pinv_tolerance, upa, s))
    stages.append(build_narrow_stage(cfg, upa))
    return HierarchicalCodebook(
        kind=kind,
        config=cfg,
        upa=upa,
        grid=build_grid(cfg.n_beams, upa),
        stages=stages,
        children=_children_by_containment(cfg.stage_count),
    )


def _uniform_real_stage(cfg: CodebookConfig, upa: int) -> list[Codeword]:
    n = cfg.n_beams
    center = (upa - 1) * math.pi / 2.0
    azimuths = center - math.pi / 4 + (np.arange(1, n + 1) - 0.5) * (math.pi / 2) / n
    elevations = math.pi / 4 + (np.arange(1, n + 1) - 0.5) * (math.pi / 2) / n
    out = []
    for i in range(1, n * n + 1):
        na, pe = narrow_index_pair(i, n)
        d = Direction(azimuths[na - 1], elevations[pe - 1])
        u = math.sin(d.local_azimuth(upa)) * math.sin(d.elevation)
        v = math.cos(d.elevation)
        out.append(
            Codeword(steering_matrix(cfg.geom, u, v)[:, 0], upa, cfg.stage_count, i, "narrow", d)
        )
    return out


def _uniform_virtual_stage(cfg: CodebookConfig, upa: int) -> list[Codeword]:
    n = cfg.n_beams
    idx = np.arange(1, n + 1)
    virtual = -SQRT2 / 2 + (idx - 0.5) * SQRT2 / n  # uniform midpoints of [-r2/2, r2/2]
    out = []
    for i in range(1, n * n + 1):
        na, pe = narrow_index_pair(i, n)
        u, v = virtual[na - 1], virtual[pe - 1]
        theta = math.acos(v)
        phi = math.asin(u / math.sin(theta)) + (upa - 1) * math.pi / 2.0
        out.append(
            Codeword(
                steering_matrix(cfg.geom, u, v)[:, 0],
                upa,
                cfg.stage_count,
                i,
                "narrow",
                Direction(phi, theta),
            )
        )
    return out


def build_benchmark_codebook(
    kind: str, cfg: CodebookConfig, upa: int
) -> HierarchicalCodebook | NarrowCodebook:
    """Benchmark codebooks: two flat angle grids and the no-buffer hierarchy."""
    check_upa(upa)
    if kind == "uniform_real":
        return NarrowCodebook(kind, cfg, upa, _uniform_real_stage(cfg, upa))
    if kind == "uniform_virtual":
        return NarrowCodebook(kind, cfg, upa, _uniform_virtual_stage(cfg, upa))
    if kind == "inverse_no_buffer":
        return build_hierarchical_codebook(cfg, upa, kind="inverse_no_buffer")
    raise ValueError(f"unknown benchmark kind {kind!r}")


def build_codebook(kind: str, cfg: CodebookConfig, upa: int):
    """Build any codebook kind ("proposed" or one of the benchmarks)."""
    if kind == "proposed":
        return build_hierarchical_codebook(cfg, upa)
    return build_benchmark_codebook(kind, cfg, upa)


def build_codebook_set(kind: str, cfg: CodebookConfig) -> dict:
    """One codebook per UPA index, shared by both ends of the link."""
    return {upa: build_codebook(kind, cfg, upa) for upa in (1, 2, 3, 4)}


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def export_codebook_csv(path, codebooks: dict, config_comment: str | None = None) -> None:
    """Write every codeword of the per-UPA codebooks as one CSV.

    Columns: upa, stage, index, element_index, re, im.  Values carry 17
    significant digits; rows are ordered (upa, stage, index, element).
    ``config_comment`` is emitted as a leading ``#`` line when given.
    """
    lines = []
    if config_comment:
        lines.append(f"# {config_comment}")
    lines.append("upa,stage,index,element_index,re,im")
    for upa in sorted(codebooks):
        book = codebooks[upa]
        stage_lists = book.stages if hasattr(book, "stages") else [book.narrow_stage]
        for stage in stage_lists:
            for cw in stage:
                for e, w in enumerate(cw.weights):
                    lines.append(
                        f"{cw.upa},{cw.stage},{cw.index},{e},{_fmt(w.real)},{_fmt(w.imag)}"
                    )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def codebook_sidecar(codebooks: dict, extra: dict | None = None) -> dict:
    """JSON-ready description of a codebook set: config plus angle tables."""
    first = codebooks[sorted(codebooks)[0]]
    cfg = first.config
    doc = {
        "kind": first.kind,
        "n_y": cfg.geom.n_y,
        "n_z": cfg.geom.n_z,
        "n_beams": cfg.n_beams,
        "stage_count": cfg.stage_count,
        "buffer_width": cfg.buffer_width,
        "buffer_gain": cfg.buffer_gain,
        "pinv_tolerance": cfg.pinv_tolerance,
        "upas": {},
    }
    if extra:
        doc.update(extra)
    for upa in sorted(codebooks):
        book = codebooks[upa]
        entry = {
            "stage_sizes": [len(s) for s in book.stages]
            if hasattr(book, "stages")
            else [len(book.narrow_stage)],
            "narrow_centers": [
                {
                    "index": cw.index,
                    "azimuth_rad": cw.center.azimuth,
                    "elevation_rad": cw.center.elevation,
                }
                for cw in book.narrow_stage
                if cw.center is not None
            ],
        }
        if hasattr(book, "grid"):
            entry["grid_azimuth_rad"] = [float(a) for a in book.grid.azimuth]
            entry["grid_elevation_rad"] = [float(e) for e in book.grid.elevation]
        doc["upas"][str(upa)] = entry
    return doc


def export_codebook_sidecar(path, codebooks: dict, extra: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(codebook_sidecar(codebooks, extra), fh, indent=2)
        fh.write("\n")
