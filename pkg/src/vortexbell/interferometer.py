"""
Simulated displaced-parity measurement.

The chain mirrors the bench setup: the SLM applies a phase-space displacement,
a beam splitter makes two copies, a four-mirror Sagnac loop inverts one copy
through the optical axis, the copies recombine, and a CCD records the bright
port.  The ROI-integrated bright-port power, normalized to a separate input
power reading, gives the parity estimate ``2 I_out / I_in - 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .bell import BellSettings
from .errors import DisplacementTooLargeError, GridMismatchError, NormalizationFailureError
from .modes import DEFAULT_GRID, BeamSpec, FieldGrid, GridSpec, sample_grid
from .wigner import PhaseSpacePoint

MAX_CLIPPED_POWER = 1e-6
DEFAULT_JITTER = 0.01
DEFAULT_CCD_REL = 1e-5


@dataclass(frozen=True)
class CCDFrame:
    grid: GridSpec
    intensity: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.intensity, dtype=float)
        n = self.grid.samples_per_axis
        if data.shape != (n, n):
            raise ValueError(f"frame shape {data.shape} does not match grid {n}x{n}")
        if np.any(data < 0):
            raise ValueError("CCD intensities must be non-negative")
        data.setflags(write=False)
        object.__setattr__(self, "intensity", data)

    def total(self) -> float:
        return float(self.intensity.sum() * self.grid.pixel_area)

    def to_pgm(self, path) -> None:
        write_pgm(path, self.intensity, 0.0, float(self.intensity.max()))

    def to_csv(self, path) -> None:
        np.savetxt(path, self.intensity, delimiter=",", fmt="%.10e")


@dataclass(frozen=True)
class RegionOfInterest:
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 5.5

    def validate(self, grid: GridSpec) -> None:
        cx, cy = self.center
        if self.radius <= 0 or max(abs(cx), abs(cy)) + self.radius > grid.half_extent + 1e-12:
            raise ValueError(f"ROI {self} does not fit inside the grid half extent {grid.half_extent}")

    @classmethod
    def default_for(cls, grid: GridSpec) -> "RegionOfInterest":
        """Circle on the inversion axis, half a unit inside the grid edge."""
        return cls((0.0, 0.0), grid.half_extent - 0.5)

    def mask(self, grid: GridSpec) -> np.ndarray:
        X, Y = grid.mesh()
        return (X - self.center[0]) ** 2 + (Y - self.center[1]) ** 2 <= self.radius ** 2


@dataclass(frozen=True)
class NoiseModel:
    """Per-shot multiplicative laser jitter plus additive per-pixel CCD noise.

    ``ccd_noise_abs=None`` means ``1e-5`` times the peak of each recorded frame.
    """

    intensity_jitter_rel: float = DEFAULT_JITTER
    ccd_noise_abs: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.intensity_jitter_rel < 0.5:
            raise ValueError("intensity_jitter_rel must lie in [0, 0.5)")
        if self.ccd_noise_abs is not None and self.ccd_noise_abs < 0:
            raise ValueError("ccd_noise_abs must be non-negative")

    def ccd_sigma(self, frame: np.ndarray) -> float:
        if self.ccd_noise_abs is None:
            return DEFAULT_CCD_REL * float(frame.max())
        return self.ccd_noise_abs

    def to_dict(self) -> dict:
        return {"intensity_jitter_rel": self.intensity_jitter_rel, "ccd_noise_abs": self.ccd_noise_abs, "seed": self.seed}


def displace(field_: FieldGrid, pt: PhaseSpacePoint) -> FieldGrid:
    """Apply ``D^dagger(pt)`` so that origin parity of the result is the parity at ``pt``.

    ``out(X, Y) = in(X + X0, Y + Y0) exp(-i (P_X0 X + P_Y0 Y)) exp(i (P_X0 X0 + P_Y0 Y0) / 2)``.
    Shifts are resampled bilinearly with zero fill outside the grid.
    """
    X0, PX0, Y0, PY0 = pt.as_tuple()
    if pt == PhaseSpacePoint():
        return field_
    grid = field_.grid
    h = grid.spacing
    values = field_.values
    if X0 or Y0:
        rows, cols = np.indices(values.shape, dtype=float)
        n = grid.samples_per_axis
        # source pixels whose shifted position falls off the grid
        dest_rows, dest_cols = rows - Y0 / h, cols - X0 / h
        lost = (dest_rows < 0) | (dest_rows > n - 1) | (dest_cols < 0) | (dest_cols > n - 1)
        intensity = np.abs(values) ** 2
        power = intensity.sum()
        clipped = intensity[lost].sum() / power if power > 0 else 0.0
        if clipped > MAX_CLIPPED_POWER:
            raise DisplacementTooLargeError(
                f"displacement ({X0:.3g}, {Y0:.3g}) clips {clipped:.2e} of the beam power off the grid"
            )
        values = _shift(values, rows + Y0 / h, cols + X0 / h)
    if PX0 or PY0:
        X, Y = grid.mesh()
        values = values * np.exp(-1j * (PX0 * X + PY0 * Y)) * np.exp(0.5j * (PX0 * X0 + PY0 * Y0))
    return FieldGrid(grid, values)


def _shift(values, src_rows, src_cols):
    coords = np.array([src_rows, src_cols])
    re = ndimage.map_coordinates(values.real, coords, order=1, mode="constant", cval=0.0)
    im = ndimage.map_coordinates(values.imag, coords, order=1, mode="constant", cval=0.0)
    return re + 1j * im


def invert(field_: FieldGrid) -> FieldGrid:
    """Point inversion ``(X, Y) -> (-X, -Y)``; an exact index reversal on odd grids."""
    return FieldGrid(field_.grid, field_.values[::-1, ::-1])


def interfere(a: FieldGrid, b: FieldGrid) -> tuple[CCDFrame, CCDFrame]:
    """Bright and dark ports ``|a +- b|**2 / 4`` of a balanced combiner."""
    if a.grid != b.grid:
        raise GridMismatchError(f"cannot interfere fields on {a.grid} and {b.grid}")
    bright = np.abs(a.values + b.values) ** 2 / 4.0
    dark = np.abs(a.values - b.values) ** 2 / 4.0
    return CCDFrame(a.grid, bright), CCDFrame(a.grid, dark)


def integrate_roi(frame: CCDFrame, roi: RegionOfInterest) -> float:
    roi.validate(frame.grid)
    return float(frame.intensity[roi.mask(frame.grid)].sum() * frame.grid.pixel_area)


@dataclass(frozen=True)
class ParityRecord:
    """Noise-free intermediate products of one parity measurement."""

    bright: CCDFrame
    dark: CCDFrame
    input_power: float
    roi_power: float

    @property
    def parity(self) -> float:
        return 2.0 * self.roi_power / self.input_power - 1.0


def record_parity(
    beam: BeamSpec,
    pt: PhaseSpacePoint,
    grid: GridSpec = DEFAULT_GRID,
    roi: RegionOfInterest | None = None,
) -> ParityRecord:
    """Run the noise-free chain: sample, displace, split, invert, recombine, integrate."""
    roi = roi or RegionOfInterest.default_for(grid)
    roi.validate(grid)
    shifted = displace(sample_grid(beam, grid), pt)
    # the Sagnac loop returns the beam and its inverted copy to the combiner
    bright, dark = interfere(shifted, invert(shifted))
    input_power = shifted.total_power()
    return ParityRecord(bright, dark, input_power, integrate_roi(bright, roi))


def _noisy_parity(record: ParityRecord, roi: RegionOfInterest, noise: NoiseModel, rng: np.random.Generator) -> float:
    jitter_out, jitter_in = rng.standard_normal(2)
    frame = record.bright.intensity * (1.0 + noise.intensity_jitter_rel * jitter_out)
    sigma_c = noise.ccd_sigma(record.bright.intensity)
    if sigma_c > 0:
        frame = np.clip(frame + sigma_c * rng.standard_normal(frame.shape), 0.0, None)
        i_out = float(frame[roi.mask(record.bright.grid)].sum() * record.bright.grid.pixel_area)
    else:
        i_out = record.roi_power * (1.0 + noise.intensity_jitter_rel * jitter_out)
    i_in = record.input_power * (1.0 + noise.intensity_jitter_rel * jitter_in)
    if i_in <= 0:
        raise NormalizationFailureError(f"input power reading {i_in:.3g} is not positive")
    return 2.0 * i_out / i_in - 1.0


def measure_parity(
    beam: BeamSpec,
    pt: PhaseSpacePoint,
    grid: GridSpec = DEFAULT_GRID,
    roi: RegionOfInterest | None = None,
    noise: NoiseModel | None = None,
) -> float:
    """Parity estimate ``2 I_out / I_in - 1`` from the simulated interferometer."""
    roi = roi or RegionOfInterest.default_for(grid)
    record = record_parity(beam, pt, grid, roi)
    if noise is None:
        if record.input_power <= 0:
            raise NormalizationFailureError("input power is not positive")
        return record.parity
    return _noisy_parity(record, roi, noise, np.random.default_rng(noise.seed))


def trial_rng(seed: int, trial: int, setting: int) -> np.random.Generator:
    """Independent stream per (seed, trial, setting)."""
    return np.random.default_rng(np.random.SeedSequence([seed, trial, setting]))


SIGNS = np.array([1.0, 1.0, 1.0, -1.0])


@dataclass(frozen=True)
class BellExperimentReport:
    settings: BellSettings
    parity_samples: np.ndarray = field(repr=False)
    bell_samples: np.ndarray = field(repr=False)
    seed: int = 0
    noise: NoiseModel | None = None
    frames: tuple[CCDFrame, ...] = field(default=(), repr=False, compare=False)

    @property
    def mean(self) -> float:
        return float(np.mean(self.bell_samples))

    @property
    def q25(self) -> float:
        return float(np.percentile(self.bell_samples, 25))

    @property
    def q75(self) -> float:
        return float(np.percentile(self.bell_samples, 75))

    @property
    def median(self) -> float:
        return float(np.median(self.bell_samples))

    @property
    def min(self) -> float:
        return float(np.min(self.bell_samples))

    @property
    def max(self) -> float:
        return float(np.max(self.bell_samples))

    @property
    def iqr(self) -> float:
        return self.q75 - self.q25

    def to_dict(self) -> dict:
        return {
            "settings": self.settings.to_dict(),
            "samples": [float(v) for v in self.bell_samples],
            "parity_samples": [[float(v) for v in row] for row in self.parity_samples],
            "mean": self.mean,
            "q25": self.q25,
            "q75": self.q75,
            "min": self.min,
            "max": self.max,
            "seed": self.seed,
            "noise": None if self.noise is None else self.noise.to_dict(),
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def run_bell_experiment(
    beam: BeamSpec,
    s: BellSettings,
    trials: int,
    grid: GridSpec = DEFAULT_GRID,
    roi: RegionOfInterest | None = None,
    noise: NoiseModel | None = None,
) -> BellExperimentReport:
    """Repeat the four parity measurements ``trials`` times and form Bell sums.

    The optics are deterministic, so each setting's noise-free frame is
    computed once; noise is redrawn per trial from its own RNG stream.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    roi = roi or RegionOfInterest.default_for(grid)
    records = [record_parity(beam, pt, grid, roi) for pt in s.points()]
    parities = np.empty((trials, 4))
    for t in range(trials):
        for k, rec in enumerate(records):
            if noise is None:
                parities[t, k] = rec.parity
            else:
                parities[t, k] = _noisy_parity(rec, roi, noise, trial_rng(noise.seed, t, k))
    bell = parities @ SIGNS
    seed = 0 if noise is None else noise.seed
    return BellExperimentReport(s, parities, bell, seed, noise, tuple(r.bright for r in records))


def write_pgm(path, data: np.ndarray, vmin: float, vmax: float, comment: str | None = None) -> None:
    """16-bit binary PGM (P5), row-major, linearly scaled from [vmin, vmax]."""
    data = np.asarray(data, dtype=float)
    span = vmax - vmin
    scaled = np.zeros_like(data) if span <= 0 else (data - vmin) / span
    pixels = np.round(np.clip(scaled, 0.0, 1.0) * 65535).astype(">u2")
    rows, cols = data.shape
    header = "P5\n"
    if comment:
        header += "".join(f"# {line}\n" for line in comment.splitlines())
    header += f"{cols} {rows}\n65535\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(pixels.tobytes())


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        end = pos
        while not raw[end:end + 1].isspace():
            end += 1
        tokens.append(raw[pos:end].decode("ascii"))
        pos = end
    pos += 1
    cols, rows, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(raw[pos:], dtype=dtype, count=rows * cols).reshape(rows, cols)
