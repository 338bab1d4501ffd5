"""Run configuration, snapshot and diagnostics file formats.

Config files are ``key = value`` lines with ``#`` comments; unknown keys
are a hard error.  Snapshots are a one-line UTF-8 JSON header followed by
(lmax+1)^2 little-endian float64 potential-vorticity coefficients in the
l-major layout of qgsphere.spharm (write/read round trips bit-exactly).
Diagnostics are CSV with a fixed column schema and 17-significant-digit
decimal values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .dynamics import (
    QGParams,
    QGState,
    RunSink,
    casimirs,
    energy,
    state_from_omega,
    state_from_stream,
    vorticity_range,
)
from .spharm import SphField, num_coeffs, sph_index

__all__ = [
    "SNAPSHOT_FORMAT_VERSION",
    "ConfigError",
    "SnapshotError",
    "RunConfig",
    "parse_config",
    "load_config",
    "write_snapshot",
    "read_snapshot",
    "read_snapshot_header",
    "initial_state",
    "DiagnosticsWriter",
    "FileSink",
    "CSV_BASE_COLUMNS",
]

SNAPSHOT_FORMAT_VERSION = 1

CSV_BASE_COLUMNS = [
    "time",
    "energy",
    "enstrophy",
    "casimir3",
    "casimir4",
    "omega_min",
    "omega_max",
]


class ConfigError(ValueError):
    pass


class SnapshotError(ValueError):
    pass


def _default_dt(lmax: int) -> float:
    """CFL-style default: a quarter of the nominal grid spacing pi/(2(lmax+1))
    at unit advecting speed."""
    return np.pi / (8.0 * (lmax + 1))


@dataclass
class RunConfig:
    """Validated run configuration with documented defaults."""

    lmax: int = 42
    alpha2: float = 1.0
    beta: float = 0.0
    central_a: float = 0.0
    dt: float | None = None
    t_end: float = 1.0
    init: str = "zonal"
    snapshot_every: int = 0
    diag_every: int = 100
    output_dir: str = "."
    seed: int = 0
    hyper_nu: float = 0.0
    hyper_order: int = 2
    particles: int = 0
    pairs: int = 0
    particle_seed: int | None = None

    def params(self) -> QGParams:
        return QGParams(
            alpha2=self.alpha2,
            beta=self.beta,
            central_a=self.central_a,
            dt=self.dt if self.dt is not None else _default_dt(self.lmax),
            t_end=self.t_end,
            lmax=self.lmax,
            hyper_nu=self.hyper_nu,
            hyper_order=self.hyper_order,
        )


_CONFIG_TYPES = {
    "lmax": int,
    "alpha2": float,
    "beta": float,
    "central_a": float,
    "dt": float,
    "t_end": float,
    "init": str,
    "snapshot_every": int,
    "diag_every": int,
    "output_dir": str,
    "seed": int,
    "hyper_nu": float,
    "hyper_order": int,
    "particles": int,
    "pairs": int,
    "particle_seed": int,
}


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; unknown keys and invariant violations are
    errors carrying the offending line number."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _CONFIG_TYPES[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: cannot parse {key} value {val!r}: {exc}") from exc

    cfg = RunConfig(**values)
    try:
        _validate_config(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _validate_config(cfg: RunConfig) -> None:
    if cfg.lmax < 1:
        raise ValueError("invariant violated: lmax must be >= 1")
    if cfg.alpha2 < 0:
        raise ValueError("invariant violated: alpha2 must be >= 0")
    if cfg.dt is not None and cfg.dt <= 0:
        raise ValueError("invariant violated: dt must be > 0")
    if cfg.t_end < 0:
        raise ValueError("invariant violated: t_end must be >= 0")
    if cfg.hyper_nu < 0:
        raise ValueError("invariant violated: hyper_nu must be >= 0")
    if cfg.snapshot_every < 0 or cfg.diag_every < 0:
        raise ValueError("invariant violated: cadences must be >= 0")
    if cfg.particles < 0 or cfg.pairs < 0:
        raise ValueError("invariant violated: particle counts must be >= 0")
    _parse_init_spec(cfg.init, cfg.lmax)  # validates the init grammar


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


# -- initial conditions ------------------------------------------------------


def _parse_init_spec(spec: str, lmax: int):
    tokens = spec.split()
    if not tokens:
        raise ValueError("invariant violated: empty init spec")
    kind = tokens[0]
    if kind == "zonal":
        if len(tokens) > 2:
            raise ValueError("init zonal takes at most one amplitude argument")
        amp = float(tokens[1]) if len(tokens) == 2 else 1.0
        return ("zonal", amp)
    if kind == "harmonic":
        if len(tokens) != 4:
            raise ValueError("init harmonic needs: harmonic L M AMPLITUDE")
        l, m, amp = int(tokens[1]), int(tokens[2]), float(tokens[3])
        if not (0 <= l <= lmax and -l <= m <= l):
            raise ValueError(f"init harmonic ({l},{m}) outside band limit {lmax}")
        return ("harmonic", l, m, amp)
    if kind == "random-band":
        if len(tokens) not in (4, 5):
            raise ValueError("init random-band needs: random-band LMIN LMAX SEED [ENERGY]")
        lmin, lband, seed = int(tokens[1]), int(tokens[2]), int(tokens[3])
        target = float(tokens[4]) if len(tokens) == 5 else 1.0
        if not (1 <= lmin <= lband <= lmax):
            raise ValueError("init random-band needs 1 <= LMIN <= LMAX <= lmax")
        if target <= 0:
            raise ValueError("init random-band energy must be > 0")
        return ("random-band", lmin, lband, seed, target)
    if kind == "snapshot":
        if len(tokens) != 2:
            raise ValueError("init snapshot needs a path")
        return ("snapshot", tokens[1])
    raise ValueError(f"unknown init kind {kind!r}")


def initial_state(cfg: RunConfig, base_dir: str | Path = ".") -> QGState:
    """Build the initial solver state from the config's init spec.

    Presets ("zonal", "harmonic", "random-band") specify the stream
    function; "snapshot PATH" loads potential vorticity (the header's
    physical parameters must match the config).  The random-band field is
    normalized to the requested energy (default 1).
    """
    params = cfg.params()
    spec = _parse_init_spec(cfg.init, cfg.lmax)
    lmax = cfg.lmax
    if spec[0] == "zonal":
        amp = spec[1]
        f = SphField.zeros(lmax)
        f.coeffs[sph_index(2, 0)] = 0.6 * amp
        f.coeffs[sph_index(4, 0)] = 0.4 * amp
        return state_from_stream(f, params)
    if spec[0] == "harmonic":
        _, l, m, amp = spec
        return state_from_stream(SphField.harmonic(lmax, l, m, amp), params)
    if spec[0] == "random-band":
        _, lmin, lband, seed, target = spec
        rng = np.random.default_rng(seed)
        f = SphField.zeros(lmax)
        for l in range(lmin, lband + 1):
            for m in range(-l, l + 1):
                f.coeffs[sph_index(l, m)] = rng.standard_normal()
        e = energy(state_from_stream(f, params), params)
        f = f * np.sqrt(target / e)
        return state_from_stream(f, params)
    path = Path(base_dir) / spec[1]
    state, header = read_snapshot(path)
    for key, val in (("lmax", cfg.lmax), ("alpha2", cfg.alpha2), ("beta", cfg.beta),
                     ("central_a", cfg.central_a)):
        if header[key] != val:
            raise ConfigError(
                f"snapshot {key}={header[key]} does not match config {key}={val}"
            )
    return state


# -- snapshots ----------------------------------------------------------------


def write_snapshot(state: QGState, params: QGParams, path: str | Path) -> None:
    """One-line JSON header + little-endian float64 coefficient payload."""
    header = {
        "format_version": SNAPSHOT_FORMAT_VERSION,
        "lmax": state.lmax,
        "alpha2": params.alpha2,
        "beta": params.beta,
        "central_a": params.central_a,
        "time": state.time,
        "field": "omega",
        "layout": "real-sh-l-major",
        "count": num_coeffs(state.lmax),
    }
    payload = np.asarray(state.omega.coeffs, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8"))
        fh.write(b"\n")
        fh.write(payload)


def read_snapshot_header(path: str | Path) -> dict:
    with open(path, "rb") as fh:
        line = fh.readline()
    try:
        header = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"{path}: malformed snapshot header: {exc}") from exc
    if header.get("format_version") != SNAPSHOT_FORMAT_VERSION:
        raise SnapshotError(
            f"{path}: unsupported format_version {header.get('format_version')!r} "
            f"(expected {SNAPSHOT_FORMAT_VERSION})"
        )
    return header


def read_snapshot(path: str | Path) -> tuple[QGState, dict]:
    header = read_snapshot_header(path)
    count = header["count"]
    lmax = header["lmax"]
    if count != num_coeffs(lmax):
        raise SnapshotError(f"{path}: count {count} does not match lmax {lmax}")
    with open(path, "rb") as fh:
        fh.readline()
        payload = fh.read()
    want = 8 * count
    if len(payload) != want:
        raise SnapshotError(f"{path}: truncated payload ({len(payload)} bytes, expected {want})")
    coeffs = np.frombuffer(payload, dtype="<f8").astype(float)
    omega = SphField(lmax, coeffs)
    params = QGParams(
        alpha2=header["alpha2"],
        beta=header["beta"],
        central_a=header["central_a"],
        lmax=lmax,
    )
    state = state_from_omega(omega, params, time=header["time"])
    return state, header


# -- diagnostics CSV -----------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.17g}"


class DiagnosticsWriter:
    """CSV writer with the fixed schema time,energy,enstrophy,casimir3,
    casimir4,omega_min,omega_max plus one pairNNN separation column per
    tracked pair."""

    def __init__(self, path: str | Path, params: QGParams, pair_count: int = 0):
        self.path = Path(path)
        self.params = params
        self.pair_count = pair_count
        cols = list(CSV_BASE_COLUMNS) + [f"pair{i:03d}" for i in range(pair_count)]
        self._fh = open(self.path, "w", encoding="utf-8")
        self._fh.write(",".join(cols) + "\n")

    def write_row(self, state: QGState, pair_separations: np.ndarray | None = None) -> None:
        e = energy(state, self.params)
        c = casimirs(state, (2, 3, 4))
        vmin, vmax = vorticity_range(state)
        row = [state.time, e, c[0], c[1], c[2], vmin, vmax]
        seps = [] if pair_separations is None else list(pair_separations)
        if len(seps) != self.pair_count:
            raise ValueError(f"expected {self.pair_count} pair separations, got {len(seps)}")
        row += seps
        self._fh.write(",".join(_fmt(v) for v in row) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class FileSink(RunSink):
    """Writes numbered snapshots and diagnostic rows under an output directory."""

    def __init__(
        self,
        output_dir: str | Path,
        params: QGParams,
        pair_index: list[tuple[int, int]] | None = None,
        prefix: str = "snapshot",
    ):
        self.dir = Path(output_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.params = params
        self.prefix = prefix
        self.pair_index = pair_index or []
        self.count = 0
        self.snap_paths: list[Path] = []
        self.diag = DiagnosticsWriter(
            self.dir / "diagnostics.csv", params, pair_count=len(self.pair_index)
        )

    def snapshot(self, state: QGState) -> None:
        path = self.dir / f"{self.prefix}_{self.count:06d}.qgs"
        write_snapshot(state, self.params, path)
        self.snap_paths.append(path)
        self.count += 1

    def diagnostics(self, state: QGState, positions: np.ndarray | None) -> None:
        seps = None
        if self.pair_index:
            if positions is None:
                raise ValueError("pair diagnostics requested but no particles in the run")
            seps = np.array(
                [
                    np.arccos(np.clip(np.dot(positions[i], positions[j]), -1.0, 1.0))
                    for i, j in self.pair_index
                ]
            )
        self.diag.write_row(state, seps)

    def close(self) -> None:
        self.diag.close()
