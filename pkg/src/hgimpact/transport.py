"""Linear multi-species transport surrogate on a structured single-layer grid.

Explicit finite-volume update per step: upwind advection, central diffusion,
first-order decay to deposition per species, and first-order Hg0 -> Hg2+
oxidation.  Oxidized mass is carried in a separate pool so that deposition can
be attributed back to the emitted species exactly; it deposits with the Hg2+
rate.  Every term is linear in the emission field, which is the one property
the downstream exposure/health chain relies on.

Internally the state is mass per cell in grams; a "pool" is one of
(hg0, hg2, hgp, hg2_from_hg0).  All reductions use a fixed summation order so
repeat runs are bit-identical.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import CflError, ConfigError, OutsideDomainError
from .inventory import Plant
from .species import HG0, HG2, HGP, SPECIES, SpeciatedMass

OUTSIDE = "OUTSIDE"

KM_PER_DEG_LAT = 110.574
KM_PER_DEG_LON_EQUATOR = 111.320

POOL_HG0, POOL_HG2, POOL_HGP, POOL_OX = range(4)
POOLS = ("hg0", "hg2", "hgp", "hg2_from_hg0")
# source-receptor blocks: emitted species -> deposited pool
SR_BLOCKS = ("hg0", "hg0_to_hg2", "hg2", "hgp")
_BLOCK_EMITTER = {"hg0": HG0, "hg0_to_hg2": HG0, "hg2": HG2, "hgp": HGP}


@dataclass(frozen=True)
class GridSpec:
    """Structured grid with a province mask.

    ``origin_lat``/``origin_lon`` locate the south-west corner of cell (0, 0);
    plant coordinates are mapped with an equirectangular projection anchored at
    the origin.  ``region_mask`` is row-major (index iy * nx + ix) and holds a
    province id or OUTSIDE per cell.
    """

    nx: int
    ny: int
    cell_size_km: float
    origin_lat: float
    origin_lon: float
    region_mask: tuple[str, ...]

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"grid must have nx, ny >= 1 (got {self.nx} x {self.ny})")
        if self.cell_size_km <= 0:
            raise ValueError("cell_size_km must be positive")
        if len(self.region_mask) != self.nx * self.ny:
            raise ValueError(
                f"region mask has {len(self.region_mask)} entries for a "
                f"{self.nx} x {self.ny} grid"
            )

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def km_per_deg_lon(self) -> float:
        return KM_PER_DEG_LON_EQUATOR * math.cos(math.radians(self.origin_lat))

    def flat(self, ix: int, iy: int) -> int:
        return iy * self.nx + ix

    def cell_of(self, lat: float, lon: float) -> tuple[int, int] | None:
        """Containing cell (ix, iy), or None when outside the domain."""
        x_km = (lon - self.origin_lon) * self.km_per_deg_lon
        y_km = (lat - self.origin_lat) * KM_PER_DEG_LAT
        ix = math.floor(x_km / self.cell_size_km)
        iy = math.floor(y_km / self.cell_size_km)
        if 0 <= ix < self.nx and 0 <= iy < self.ny:
            return ix, iy
        return None

    def cell_corner(self, ix: float, iy: float) -> tuple[float, float]:
        """(lat, lon) of the SW corner of cell (ix, iy); fractional indices allowed."""
        lat = self.origin_lat + iy * self.cell_size_km / KM_PER_DEG_LAT
        lon = self.origin_lon + ix * self.cell_size_km / self.km_per_deg_lon
        return lat, lon

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return self.cell_corner(ix + 0.5, iy + 0.5)

    def provinces(self) -> tuple[str, ...]:
        return tuple(sorted({r for r in self.region_mask if r != OUTSIDE}))


@dataclass
class TransportParams:
    """Steady annual-average wind plus bulk transport/removal rates.

    ``boundary_inflow_g`` is the ambient airborne mass per edge-adjacent
    virtual cell (grams); it feeds baseline deposition only and is forced to
    zero when building source-receptor matrices.
    """

    wind_u: np.ndarray  # (ny, nx), m/s eastward
    wind_v: np.ndarray  # (ny, nx), m/s northward
    diffusivity_m2_s: float
    vd_per_s: Mapping[str, float]  # deposition rate per emitted species
    k_ox_per_s: float  # Hg0 -> Hg2+ conversion rate
    dt_s: float
    horizon_s: float
    boundary_inflow_g: Mapping[str, float] = field(default_factory=dict)

    @property
    def steps(self) -> int:
        n = int(round(self.horizon_s / self.dt_s))
        return max(n, 1)

    def inflow(self, species: str) -> float:
        return float(self.boundary_inflow_g.get(species, 0.0))

    def with_zero_inflow(self) -> "TransportParams":
        return TransportParams(
            wind_u=self.wind_u,
            wind_v=self.wind_v,
            diffusivity_m2_s=self.diffusivity_m2_s,
            vd_per_s=dict(self.vd_per_s),
            k_ox_per_s=self.k_ox_per_s,
            dt_s=self.dt_s,
            horizon_s=self.horizon_s,
            boundary_inflow_g={},
        )


@dataclass
class DepositionField:
    """Per-pool deposition plus the mass-balance ledger for one simulation."""

    grid: GridSpec
    deposited: dict[str, np.ndarray]  # pool -> (ny, nx) grams over the horizon
    exported: dict[str, float]  # pool -> grams advected/diffused out
    airborne_residual: dict[str, float]  # pool -> grams still aloft at the end
    oxidized_transfer: float  # grams moved hg0 -> hg2_from_hg0
    inflow: dict[str, float]  # pool -> grams entered through the boundary
    emitted: dict[str, float]  # species -> grams injected

    def deposited_by_species(self) -> dict[str, np.ndarray]:
        """Deposition keyed by species of arrival: oxidized mass lands as Hg2+."""
        return {
            HG0: self.deposited["hg0"],
            HG2: self.deposited["hg2"] + self.deposited["hg2_from_hg0"],
            HGP: self.deposited["hgp"],
        }

    def balance_residuals(self) -> dict[str, float]:
        """Relative closure error per pool family; ~1e-12 for a healthy run."""
        out: dict[str, float] = {}
        for pool in POOLS:
            if pool == "hg2_from_hg0":
                lhs = self.oxidized_transfer
            else:
                lhs = self.emitted[pool] + self.inflow[pool]
            rhs = (
                float(self.deposited[pool].sum())
                + self.exported[pool]
                + self.airborne_residual[pool]
            )
            if pool == "hg0":
                rhs += self.oxidized_transfer
            scale = max(abs(lhs), abs(rhs), 1e-30)
            out[pool] = abs(lhs - rhs) / scale
        return out


def rasterize_emissions(
    inv: Mapping[str, SpeciatedMass],
    plants: Mapping[str, Plant],
    grid: GridSpec,
) -> dict[str, np.ndarray]:
    """Assign each plant's mass wholly to its containing cell.

    Raises OutsideDomainError naming the plant rather than clip silently.
    """
    fields = {s: np.zeros((grid.ny, grid.nx)) for s in SPECIES}
    for plant_id in sorted(inv):
        plant = plants.get(plant_id)
        if plant is None:
            raise ConfigError(f"inventory references unknown plant {plant_id}")
        cell = grid.cell_of(plant.lat, plant.lon)
        if cell is None:
            raise OutsideDomainError(plant_id, plant.lat, plant.lon)
        ix, iy = cell
        mass = inv[plant_id]
        fields[HG0][iy, ix] += mass.hg0
        fields[HG2][iy, ix] += mass.hg2
        fields[HGP][iy, ix] += mass.hgp
    return fields


def _face_coefficients(params: TransportParams, grid: GridSpec):
    """Precompute advection face Courant numbers and edge coefficients."""
    dx = grid.cell_size_km * 1000.0
    a = params.dt_s / dx
    u = np.asarray(params.wind_u, dtype=float)
    v = np.asarray(params.wind_v, dtype=float)
    if u.shape != (grid.ny, grid.nx) or v.shape != (grid.ny, grid.nx):
        raise ConfigError(
            f"wind fields must have shape ({grid.ny}, {grid.nx}); "
            f"got {u.shape} and {v.shape}"
        )
    cfx = 0.5 * (u[:, :-1] + u[:, 1:]) * a  # interior x faces, positive eastward
    cfy = 0.5 * (v[:-1, :] + v[1:, :]) * a  # interior y faces, positive northward
    # one-sided boundary faces use the edge cell's own wind
    cw = u[:, 0] * a   # west edge: positive = inflow
    ce = u[:, -1] * a  # east edge: positive = outflow
    cs = v[0, :] * a   # south edge: positive = inflow
    cn = v[-1, :] * a  # north edge: positive = outflow
    return cfx, cfy, cw, ce, cs, cn


def max_stable_dt(params: TransportParams, grid: GridSpec) -> float:
    """Largest dt keeping every cell's one-step outflow fraction at or below 1.

    Counts upwind outflow through all four faces, diffusive exchange, the
    fastest deposition rate, and oxidation.
    """
    dx = grid.cell_size_km * 1000.0
    u = np.asarray(params.wind_u, dtype=float)
    v = np.asarray(params.wind_v, dtype=float)
    ufx = 0.5 * (u[:, :-1] + u[:, 1:])
    vfy = 0.5 * (v[:-1, :] + v[1:, :])
    rate = np.zeros((grid.ny, grid.nx))
    rate[:, :-1] += np.maximum(ufx, 0.0) / dx
    rate[:, 1:] += np.maximum(-ufx, 0.0) / dx
    rate[:-1, :] += np.maximum(vfy, 0.0) / dx
    rate[1:, :] += np.maximum(-vfy, 0.0) / dx
    rate[:, 0] += np.maximum(-u[:, 0], 0.0) / dx
    rate[:, -1] += np.maximum(u[:, -1], 0.0) / dx
    rate[0, :] += np.maximum(-v[0, :], 0.0) / dx
    rate[-1, :] += np.maximum(v[-1, :], 0.0) / dx
    rate += 4.0 * params.diffusivity_m2_s / dx**2
    rate += max(params.vd_per_s[s] for s in SPECIES) + params.k_ox_per_s
    peak = float(rate.max())
    if peak <= 0.0:
        return math.inf
    return 1.0 / peak


def _integrate(state: np.ndarray, params: TransportParams, grid: GridSpec):
    """Advance stacked pools (4, B, ny, nx) over the full horizon.

    Returns (deposited (4,B,ny,nx), exported (4,B), residual state, ox_total (B,),
    inflow (4,B)).  All per-step tendencies are evaluated from the start-of-step
    state (one-stage forward Euler), which the stability bound assumes.
    """
    dx = grid.cell_size_km * 1000.0
    dt = params.dt_s
    cfx, cfy, cw, ce, cs, cn = _face_coefficients(params, grid)
    pos_x = cfx >= 0.0
    pos_y = cfy >= 0.0
    d_coef = params.diffusivity_m2_s * dt / dx**2
    vd_dt = np.array(
        [
            params.vd_per_s[HG0] * dt,
            params.vd_per_s[HG2] * dt,
            params.vd_per_s[HGP] * dt,
            params.vd_per_s[HG2] * dt,  # oxidized pool deposits at the Hg2+ rate
        ]
    )[:, None, None, None]
    kox_dt = params.k_ox_per_s * dt
    ambient = np.array(
        [params.inflow(HG0), params.inflow(HG2), params.inflow(HGP), 0.0]
    )[:, None]  # (4, 1) for broadcasting against (4, B)

    n_pools, n_batch = state.shape[0], state.shape[1]
    deposited = np.zeros_like(state)
    exported = np.zeros((n_pools, n_batch))
    inflow = np.zeros((n_pools, n_batch))
    ox_total = np.zeros(n_batch)

    # boundary coefficient splits (scalars per edge cell, >= 0)
    out_w = np.maximum(-cw, 0.0)
    in_w = np.maximum(cw, 0.0)
    out_e = np.maximum(ce, 0.0)
    in_e = np.maximum(-ce, 0.0)
    out_s = np.maximum(-cs, 0.0)
    in_s = np.maximum(cs, 0.0)
    out_n = np.maximum(cn, 0.0)
    in_n = np.maximum(-cn, 0.0)

    for _ in range(params.steps):
        m = state
        new = m.copy()

        # upwind advection across interior faces (flux positive east/north)
        fx = np.where(pos_x, cfx * m[..., :, :-1], cfx * m[..., :, 1:])
        fy = np.where(pos_y, cfy * m[..., :-1, :], cfy * m[..., 1:, :])
        new[..., :, :-1] -= fx
        new[..., :, 1:] += fx
        new[..., :-1, :] -= fy
        new[..., 1:, :] += fy

        # advective exchange across the four open boundaries
        adv_out_w = out_w * m[..., :, 0]
        adv_out_e = out_e * m[..., :, -1]
        adv_out_s = out_s * m[..., 0, :]
        adv_out_n = out_n * m[..., -1, :]
        new[..., :, 0] -= adv_out_w
        new[..., :, -1] -= adv_out_e
        new[..., 0, :] -= adv_out_s
        new[..., -1, :] -= adv_out_n
        exported += (
            adv_out_w.sum(axis=-1)
            + adv_out_e.sum(axis=-1)
            + adv_out_s.sum(axis=-1)
            + adv_out_n.sum(axis=-1)
        )
        if ambient.any():
            amb = ambient[..., None]  # (4, 1, 1)
            adv_in = (
                in_w * amb + np.zeros_like(m[..., :, 0]),
                in_e * amb + np.zeros_like(m[..., :, -1]),
                in_s * amb + np.zeros_like(m[..., 0, :]),
                in_n * amb + np.zeros_like(m[..., -1, :]),
            )
            new[..., :, 0] += adv_in[0]
            new[..., :, -1] += adv_in[1]
            new[..., 0, :] += adv_in[2]
            new[..., -1, :] += adv_in[3]
            inflow += sum(f.sum(axis=-1) for f in adv_in)

        if d_coef > 0.0:
            # central diffusion across interior faces
            gx = d_coef * (m[..., :, :-1] - m[..., :, 1:])
            gy = d_coef * (m[..., :-1, :] - m[..., 1:, :])
            new[..., :, :-1] -= gx
            new[..., :, 1:] += gx
            new[..., :-1, :] -= gy
            new[..., 1:, :] += gy
            # exchange with the ambient virtual cell across boundary faces
            dif_out = (
                d_coef * m[..., :, 0],
                d_coef * m[..., :, -1],
                d_coef * m[..., 0, :],
                d_coef * m[..., -1, :],
            )
            new[..., :, 0] -= dif_out[0]
            new[..., :, -1] -= dif_out[1]
            new[..., 0, :] -= dif_out[2]
            new[..., -1, :] -= dif_out[3]
            exported += sum(f.sum(axis=-1) for f in dif_out)
            if ambient.any():
                amb = ambient[..., None]
                for sl, width in (
                    ((..., slice(None), 0), grid.ny),
                    ((..., slice(None), -1), grid.ny),
                    ((..., 0, slice(None)), grid.nx),
                    ((..., -1, slice(None)), grid.nx),
                ):
                    new[sl] += d_coef * amb
                    inflow += d_coef * ambient * width

        # first-order removal and oxidation, from the start-of-step state
        dep_step = vd_dt * m
        new -= dep_step
        deposited += dep_step
        if kox_dt > 0.0:
            ox_step = kox_dt * m[POOL_HG0]
            new[POOL_HG0] -= ox_step
            new[POOL_OX] += ox_step
            ox_total += ox_step.sum(axis=(-2, -1))

        state = new

    return deposited, exported, state, ox_total, inflow


def simulate(
    emissions: Mapping[str, np.ndarray],
    params: TransportParams,
    grid: GridSpec,
) -> DepositionField:
    """Run the kernel on a gridded emission field and return the deposition ledger."""
    for s in SPECIES:
        arr = np.asarray(emissions[s], dtype=float)
        if arr.shape != (grid.ny, grid.nx):
            raise ConfigError(
                f"emission field {s} has shape {arr.shape}, expected ({grid.ny}, {grid.nx})"
            )
        if not np.isfinite(arr).all():
            raise ConfigError(f"emission field {s} contains non-finite values")
    dt_max = max_stable_dt(params, grid)
    if params.dt_s > dt_max:
        raise CflError(params.dt_s, dt_max)

    state = np.zeros((4, 1, grid.ny, grid.nx))
    state[POOL_HG0, 0] = np.asarray(emissions[HG0], dtype=float)
    state[POOL_HG2, 0] = np.asarray(emissions[HG2], dtype=float)
    state[POOL_HGP, 0] = np.asarray(emissions[HGP], dtype=float)
    emitted = {
        "hg0": float(state[POOL_HG0, 0].sum()),
        "hg2": float(state[POOL_HG2, 0].sum()),
        "hgp": float(state[POOL_HGP, 0].sum()),
        "hg2_from_hg0": 0.0,
    }

    deposited, exported, residual, ox_total, inflow = _integrate(state, params, grid)
    return DepositionField(
        grid=grid,
        deposited={pool: deposited[i, 0] for i, pool in enumerate(POOLS)},
        exported={pool: float(exported[i, 0]) for i, pool in enumerate(POOLS)},
        airborne_residual={
            pool: float(residual[i, 0].sum()) for i, pool in enumerate(POOLS)
        },
        oxidized_transfer=float(ox_total[0]),
        inflow={pool: float(inflow[i, 0]) for i, pool in enumerate(POOLS)},
        emitted=emitted,
    )


@dataclass
class SourceReceptorMatrix:
    """Unit-pulse responses: grams deposited per receptor cell per gram emitted.

    ``dep_blocks[b][r, j]`` is deposition at receptor cell r from one gram of
    block b's emitter at source j.  The ``hg0_to_hg2`` block carries Hg0 mass
    that oxidized in transit and deposited as Hg2+, keeping species-resolved
    attribution exact.  Exported/residual/oxidized vectors complete the ledger
    so applying the matrix reproduces a direct simulation.
    """

    nx: int
    ny: int
    sources: tuple[int, ...]  # flat cell indices, sorted
    dep_blocks: dict[str, np.ndarray]  # block -> (n_cells, n_sources)
    exported: dict[str, np.ndarray]  # block -> (n_sources,)
    residual: dict[str, np.ndarray]  # block -> (n_sources,)
    oxidized: np.ndarray  # (n_sources,) transfer per unit hg0

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    def column_sums(self) -> dict[str, np.ndarray]:
        """Deposited fraction per source per block; every value is in [0, 1]."""
        return {b: self.dep_blocks[b].sum(axis=0) for b in SR_BLOCKS}

    def apply(self, emissions: Mapping[str, np.ndarray], grid: GridSpec) -> DepositionField:
        """Propagate an emission field supported on the source cells."""
        if (grid.nx, grid.ny) != (self.nx, self.ny):
            raise ConfigError("grid shape does not match the source-receptor matrix")
        src = list(self.sources)
        vecs: dict[str, np.ndarray] = {}
        for s in SPECIES:
            flat = np.asarray(emissions[s], dtype=float).reshape(-1)
            mask = np.ones(flat.size, dtype=bool)
            mask[src] = False
            stray = np.nonzero(flat * mask)[0]
            if stray.size:
                raise ConfigError(
                    f"emission field {s} has mass outside the matrix sources "
                    f"(cells {stray[:5].tolist()}...)"
                )
            vecs[s] = flat[src]
        shape = (self.ny, self.nx)
        dep = {
            "hg0": (self.dep_blocks["hg0"] @ vecs[HG0]).reshape(shape),
            "hg2": (self.dep_blocks["hg2"] @ vecs[HG2]).reshape(shape),
            "hgp": (self.dep_blocks["hgp"] @ vecs[HGP]).reshape(shape),
            "hg2_from_hg0": (self.dep_blocks["hg0_to_hg2"] @ vecs[HG0]).reshape(shape),
        }
        exported = {
            "hg0": float(self.exported["hg0"] @ vecs[HG0]),
            "hg2": float(self.exported["hg2"] @ vecs[HG2]),
            "hgp": float(self.exported["hgp"] @ vecs[HGP]),
            "hg2_from_hg0": float(self.exported["hg0_to_hg2"] @ vecs[HG0]),
        }
        residual = {
            "hg0": float(self.residual["hg0"] @ vecs[HG0]),
            "hg2": float(self.residual["hg2"] @ vecs[HG2]),
            "hgp": float(self.residual["hgp"] @ vecs[HGP]),
            "hg2_from_hg0": float(self.residual["hg0_to_hg2"] @ vecs[HG0]),
        }
        return DepositionField(
            grid=grid,
            deposited=dep,
            exported=exported,
            airborne_residual=residual,
            oxidized_transfer=float(self.oxidized @ vecs[HG0]),
            inflow={pool: 0.0 for pool in POOLS},
            emitted={
                "hg0": float(vecs[HG0].sum()),
                "hg2": float(vecs[HG2].sum()),
                "hgp": float(vecs[HGP].sum()),
                "hg2_from_hg0": 0.0,
            },
        )


def build_srm(
    params: TransportParams,
    grid: GridSpec,
    sources: Iterable[int],
) -> SourceReceptorMatrix:
    """Simulate one unit pulse per source cell (all species at once, batched).

    The pools are independent channels except for the tracked Hg0 -> Hg2+
    transfer, so a single batched integration gives every block.  Boundary
    inflow is forced to zero: the matrix is the pure emission response.
    """
    src = tuple(sorted(set(int(s) for s in sources)))
    for s in src:
        if not 0 <= s < grid.n_cells:
            raise ConfigError(f"source cell {s} outside the grid (0..{grid.n_cells - 1})")
    n_src = len(src)
    shape_flat = grid.n_cells
    if n_src == 0:
        zero = np.zeros((shape_flat, 0))
        return SourceReceptorMatrix(
            nx=grid.nx,
            ny=grid.ny,
            sources=src,
            dep_blocks={b: zero.copy() for b in SR_BLOCKS},
            exported={b: np.zeros(0) for b in SR_BLOCKS},
            residual={b: np.zeros(0) for b in SR_BLOCKS},
            oxidized=np.zeros(0),
        )

    run_params = params.with_zero_inflow()
    dt_max = max_stable_dt(run_params, grid)
    if run_params.dt_s > dt_max:
        raise CflError(run_params.dt_s, dt_max)

    state = np.zeros((4, n_src, grid.ny, grid.nx))
    for b, flat_idx in enumerate(src):
        iy, ix = divmod(flat_idx, grid.nx)
        state[POOL_HG0, b, iy, ix] = 1.0
        state[POOL_HG2, b, iy, ix] = 1.0
        state[POOL_HGP, b, iy, ix] = 1.0

    deposited, exported, residual, ox_total, _ = _integrate(state, run_params, grid)

    def block(pool_idx: int) -> np.ndarray:
        return deposited[pool_idx].reshape(n_src, shape_flat).T.copy()

    return SourceReceptorMatrix(
        nx=grid.nx,
        ny=grid.ny,
        sources=src,
        dep_blocks={
            "hg0": block(POOL_HG0),
            "hg0_to_hg2": block(POOL_OX),
            "hg2": block(POOL_HG2),
            "hgp": block(POOL_HGP),
        },
        exported={
            "hg0": exported[POOL_HG0].copy(),
            "hg0_to_hg2": exported[POOL_OX].copy(),
            "hg2": exported[POOL_HG2].copy(),
            "hgp": exported[POOL_HGP].copy(),
        },
        residual={
            "hg0": residual[POOL_HG0].reshape(n_src, shape_flat).sum(axis=1),
            "hg0_to_hg2": residual[POOL_OX].reshape(n_src, shape_flat).sum(axis=1),
            "hg2": residual[POOL_HG2].reshape(n_src, shape_flat).sum(axis=1),
            "hgp": residual[POOL_HGP].reshape(n_src, shape_flat).sum(axis=1),
        },
        oxidized=ox_total.copy(),
    )


def aggregate_to_provinces(dep: DepositionField, grid: GridSpec) -> dict[str, SpeciatedMass]:
    """Sum cell deposition by province; OUTSIDE cells land in an explicit bucket.

    Hg2+ totals merge directly-emitted and oxidized-in-transit mass (species of
    arrival).  Every province in the mask appears, zero or not.
    """
    by_species = dep.deposited_by_species()
    flat = {s: by_species[s].reshape(-1) for s in SPECIES}
    labels = np.array(grid.region_mask)
    regions = list(grid.provinces())
    if OUTSIDE in grid.region_mask:
        regions.append(OUTSIDE)
    out: dict[str, SpeciatedMass] = {}
    for region in regions:
        sel = labels == region
        out[region] = SpeciatedMass(
            float(flat[HG0][sel].sum()),
            float(flat[HG2][sel].sum()),
            float(flat[HGP][sel].sum()),
        )
    return out


# --- sparse triplet persistence ------------------------------------------------

_SRM_SCHEMA = "hgimpact/srm/v1"
EXPORTED_TOKEN = "EXPORTED"
RESIDUAL_TOKEN = "RESIDUAL"
OXIDIZED_TOKEN = "OXIDIZED"


def save_srm(srm: SourceReceptorMatrix, path) -> None:
    """Write the matrix as documented sparse triplets with a trailing checksum.

    Data lines are ``block,receptor,source,value`` where receptor is a flat
    cell index or one of EXPORTED/RESIDUAL/OXIDIZED; zeros are skipped.
    """
    lines: list[str] = []
    for block in SR_BLOCKS:
        mat = srm.dep_blocks[block]
        rows, cols = np.nonzero(mat)
        order = np.lexsort((rows, cols))  # source-major, receptor ascending
        for k in order:
            r, j = int(rows[k]), int(cols[k])
            lines.append(f"{block},{r},{srm.sources[j]},{float(mat[r, j])!r}")
        for j, s in enumerate(srm.sources):
            if srm.exported[block][j] != 0.0:
                lines.append(f"{block},{EXPORTED_TOKEN},{s},{float(srm.exported[block][j])!r}")
            if srm.residual[block][j] != 0.0:
                lines.append(f"{block},{RESIDUAL_TOKEN},{s},{float(srm.residual[block][j])!r}")
    for j, s in enumerate(srm.sources):
        if srm.oxidized[j] != 0.0:
            lines.append(f"hg0,{OXIDIZED_TOKEN},{s},{float(srm.oxidized[j])!r}")
    body = "\n".join(lines)
    digest = hashlib.sha256(body.encode()).hexdigest()
    header = [
        f"# schema={_SRM_SCHEMA}",
        f"# nx {srm.nx} ny {srm.ny}",
        "# sources " + " ".join(str(s) for s in srm.sources),
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(header) + "\n")
        if body:
            fh.write(body + "\n")
        fh.write(f"# sha256 {digest}\n")


def load_srm(path) -> SourceReceptorMatrix:
    """Read a triplet file back, verifying the checksum."""
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw or raw[0].strip() != f"# schema={_SRM_SCHEMA}":
        raise ConfigError(f"{path}: not a source-receptor matrix file")
    dims = raw[1].split()
    nx, ny = int(dims[2]), int(dims[4])
    sources = tuple(int(t) for t in raw[2].split()[2:])
    data_lines = [ln for ln in raw[3:] if ln and not ln.startswith("#")]
    checks = [ln for ln in raw[3:] if ln.startswith("# sha256")]
    if not checks:
        raise ConfigError(f"{path}: missing checksum line")
    digest = hashlib.sha256("\n".join(data_lines).encode()).hexdigest()
    if digest != checks[-1].split()[-1]:
        raise ConfigError(f"{path}: checksum mismatch; file corrupted")

    n_cells = nx * ny
    col = {s: j for j, s in enumerate(sources)}
    dep = {b: np.zeros((n_cells, len(sources))) for b in SR_BLOCKS}
    exported = {b: np.zeros(len(sources)) for b in SR_BLOCKS}
    residual = {b: np.zeros(len(sources)) for b in SR_BLOCKS}
    oxidized = np.zeros(len(sources))
    for ln in data_lines:
        block, receptor, source, value = ln.split(",")
        j = col[int(source)]
        v = float(value)
        if receptor == EXPORTED_TOKEN:
            exported[block][j] = v
        elif receptor == RESIDUAL_TOKEN:
            residual[block][j] = v
        elif receptor == OXIDIZED_TOKEN:
            oxidized[j] = v
        else:
            dep[block][int(receptor), j] = v
    return SourceReceptorMatrix(
        nx=nx, ny=ny, sources=sources,
        dep_blocks=dep, exported=exported, residual=residual, oxidized=oxidized,
    )
