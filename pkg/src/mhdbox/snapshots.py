"""Binary state snapshots.

Fixed little-endian layout, independent of the writing platform::

    bytes 0-3    magic  b"MHD0"
    bytes 4-7    format version, uint32 (currently 1)
    bytes 8-11   grid resolution n, uint32
    bytes 12-15  component count, uint32
    bytes 16-23  time t, float64
    then         component fields, each n^3 float64 values with the first
                 spatial index varying fastest

Incompressible states store 6 components (u1, u2, u3, B1, B2, B3), all in
real space; compressible states store 7 (rho, u1, u2, u3, H1, H2, H3).
Loading reconstructs spectral fields by transform + projection, so a
save/load round trip agrees with the original state to rounding (the raw
bytes themselves round-trip exactly).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .compressible import CompressibleState
from .grid import RealVectorField, SpectralVectorField, fftv, ifftv, make_grid
from .incompressible import SimState, make_state
from .operators import project_arr

__all__ = [
    "MAGIC",
    "VERSION",
    "SnapshotFormatError",
    "write_snapshot",
    "read_snapshot",
    "save_incompressible",
    "load_incompressible",
    "save_compressible",
    "load_compressible",
]

MAGIC = b"MHD0"
VERSION = 1
_HEADER = struct.Struct("<4sIIId")


class SnapshotFormatError(ValueError):
    """The file exists but is not a well-formed snapshot."""


def write_snapshot(path, t: float, components) -> None:
    """Write scalar fields (each shaped (n, n, n)) under the fixed header."""
    components = [np.asarray(c) for c in components]
    if not components:
        raise ValueError("need at least one component")
    n = components[0].shape[0]
    for c in components:
        if c.shape != (n, n, n):
            raise ValueError(
                f"every component must have shape {(n, n, n)}, got {c.shape}"
            )
    with Path(path).open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, len(components), float(t)))
        for c in components:
            fh.write(np.ascontiguousarray(c.T, dtype="<f8").tobytes())


def read_snapshot(path):
    """Read back (t, [components]); malformed files raise
    SnapshotFormatError."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated snapshot header")
    magic, version, n, ncomp, t = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotFormatError(
            f"{path}: bad magic {magic!r}, not a snapshot file"
        )
    if version != VERSION:
        raise SnapshotFormatError(
            f"{path}: unsupported snapshot version {version}"
        )
    expected = _HEADER.size + ncomp * n**3 * 8
    if len(raw) != expected:
        raise SnapshotFormatError(
            f"{path}: size {len(raw)} does not match header "
            f"(expected {expected})"
        )
    comps = []
    offset = _HEADER.size
    count = n**3
    for _ in range(ncomp):
        flat = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        comps.append(flat.reshape((n, n, n), order="F").astype(np.float64))
        offset += count * 8
    return t, comps


def save_incompressible(path, state: SimState) -> None:
    """Store u and B as six real-space components."""
    u = ifftv(state.u_hat.data)
    B = ifftv(state.B_hat.data)
    write_snapshot(path, state.t, [*u, *B])


def load_incompressible(path) -> SimState:
    t, comps = read_snapshot(path)
    if len(comps) != 6:
        raise SnapshotFormatError(
            f"{path}: expected 6 components for an incompressible state, "
            f"got {len(comps)}"
        )
    grid = make_grid(comps[0].shape[0])
    u = RealVectorField(np.stack(comps[:3]), grid)
    B = RealVectorField(np.stack(comps[3:]), grid)
    return make_state(u, B, t=t)


def save_compressible(path, state: CompressibleState) -> None:
    """Store rho, u, and the full field H as seven real-space components."""
    H = ifftv(state.H_hat.data)
    write_snapshot(path, state.t, [state.rho, *state.u.data, *H])


def load_compressible(path) -> CompressibleState:
    t, comps = read_snapshot(path)
    if len(comps) != 7:
        raise SnapshotFormatError(
            f"{path}: expected 7 components for a compressible state, "
            f"got {len(comps)}"
        )
    grid = make_grid(comps[0].shape[0])
    H_hat = project_arr(fftv(np.stack(comps[4:])), grid)
    return CompressibleState(
        t=t,
        rho=comps[0],
        u=RealVectorField(np.stack(comps[1:4]), grid),
        H_hat=SpectralVectorField(H_hat, grid, div_free=True),
    )
