"""Position-based cloth integrator: semi-implicit prediction with spring
forces, followed by constraint projection (stretch limit, layer spheres,
ground) and a velocity update derived from the projected positions.

Full self-collision is deliberately avoided: stacked layers are kept apart by
sphere constraints between near-contact non-adjacent particles, and a
velocity-averaging stiction term models fabrics whose layers cling together.
That is sufficient for multilayer grasp counting and for folds to persist on
the ground.

The hot loop is compiled with numba (no fastmath, so results are bit-stable
across runs on the same platform).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .params import ClothParams
from .state import ClothState

GROUND_EPS = 1e-4
CONTACT_RADIUS_FACTOR = 0.75  # horizontal capture radius, in units of spacing
REFERENCE_DT = 0.0025  # friction/stiction decay rates are defined at this dt
STRAIN_LIMIT = 1.04  # structural springs are projected back to this stretch
PROJECTION_ITERS = 3
VELOCITY_CAP = 2.5  # m/s; bounds kinetic spikes when the gripper yanks cloth


@njit(cache=True)
def _run_block(
    pos,
    vel,
    pinned,
    spring_i,
    spring_j,
    rest,
    stiff,
    cand_a,
    cand_b,
    pair_a,
    pair_b,
    n_structural,
    mass,
    gravity,
    damping,
    dt,
    friction,
    gap,
    stiction,
    contact_r2,
    n_substeps,
):
    """Advance ``n_substeps`` substeps in place; returns free kinetic energy."""
    n = pos.shape[0]
    ns = spring_i.size
    forces = np.zeros((n, 3))
    prev = np.empty((n, 3))
    on_ground = np.zeros(n, dtype=np.bool_)
    inv_m = 1.0 / mass
    n_pairs = 0

    for _ in range(n_substeps):
        # Contact candidates (non-adjacent particles currently close).
        n_pairs = 0
        for c in range(cand_a.size):
            a = cand_a[c]
            b = cand_b[c]
            dx = pos[a, 0] - pos[b, 0]
            dy = pos[a, 1] - pos[b, 1]
            if dx * dx + dy * dy < contact_r2:
                dz = pos[a, 2] - pos[b, 2]
                if -2.0 * gap < dz < 2.0 * gap:
                    pair_a[n_pairs] = a
                    pair_b[n_pairs] = b
                    n_pairs += 1

        # Spring forces (structural + shear + bend).
        for i in range(n):
            forces[i, 0] = 0.0
            forces[i, 1] = 0.0
            forces[i, 2] = 0.0
        for s in range(ns):
            i = spring_i[s]
            j = spring_j[s]
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            dz = pos[j, 2] - pos[i, 2]
            length = (dx * dx + dy * dy + dz * dz) ** 0.5
            if length < 1e-12:
                length = 1e-12
            fm = stiff[s] * (length - rest[s]) / length
            fx = fm * dx
            fy = fm * dy
            fz = fm * dz
            forces[i, 0] += fx
            forces[i, 1] += fy
            forces[i, 2] += fz
            forces[j, 0] -= fx
            forces[j, 1] -= fy
            forces[j, 2] -= fz

        # Predict: integrate velocities and tentative positions.
        for i in range(n):
            prev[i, 0] = pos[i, 0]
            prev[i, 1] = pos[i, 1]
            prev[i, 2] = pos[i, 2]
            if pinned[i]:
                vel[i, 0] = 0.0
                vel[i, 1] = 0.0
                vel[i, 2] = 0.0
                continue
            vel[i, 0] += dt * (forces[i, 0] * inv_m - damping * vel[i, 0])
            vel[i, 1] += dt * (forces[i, 1] * inv_m - damping * vel[i, 1])
            vel[i, 2] += dt * (forces[i, 2] * inv_m - damping * vel[i, 2] - gravity)
            v2 = vel[i, 0] ** 2 + vel[i, 1] ** 2 + vel[i, 2] ** 2
            if v2 > VELOCITY_CAP * VELOCITY_CAP:
                sc = VELOCITY_CAP / v2**0.5
                vel[i, 0] *= sc
                vel[i, 1] *= sc
                vel[i, 2] *= sc
            pos[i, 0] += dt * vel[i, 0]
            pos[i, 1] += dt * vel[i, 1]
            pos[i, 2] += dt * vel[i, 2]
            on_ground[i] = False

        # Project constraints; corrections feed back into velocities below,
        # so constraint work cannot churn indefinitely.
        for _it in range(PROJECTION_ITERS):
            # One-sided stretch limit on structural springs.
            for s in range(n_structural):
                i = spring_i[s]
                j = spring_j[s]
                pin_i = pinned[i]
                pin_j = pinned[j]
                if pin_i and pin_j:
                    continue
                dx = pos[j, 0] - pos[i, 0]
                dy = pos[j, 1] - pos[i, 1]
                dz = pos[j, 2] - pos[i, 2]
                length = (dx * dx + dy * dy + dz * dz) ** 0.5
                max_len = STRAIN_LIMIT * rest[s]
                if length > max_len and length > 1e-12:
                    corr = (length - max_len) / length
                    if pin_i:
                        pos[j, 0] -= corr * dx
                        pos[j, 1] -= corr * dy
                        pos[j, 2] -= corr * dz
                    elif pin_j:
                        pos[i, 0] += corr * dx
                        pos[i, 1] += corr * dy
                        pos[i, 2] += corr * dz
                    else:
                        half = 0.5 * corr
                        pos[i, 0] += half * dx
                        pos[i, 1] += half * dy
                        pos[i, 2] += half * dz
                        pos[j, 0] -= half * dx
                        pos[j, 1] -= half * dy
                        pos[j, 2] -= half * dz

            # Sphere separation between stacked layers.
            for e in range(n_pairs):
                a = pair_a[e]
                b = pair_b[e]
                pin_a = pinned[a]
                pin_b = pinned[b]
                if pin_a and pin_b:
                    continue
                dx = pos[a, 0] - pos[b, 0]
                dy = pos[a, 1] - pos[b, 1]
                dz = pos[a, 2] - pos[b, 2]
                length = (dx * dx + dy * dy + dz * dz) ** 0.5
                if length >= gap:
                    continue
                if length < 1e-9:
                    nx, ny, nz = 0.0, 0.0, 1.0
                else:
                    nx, ny, nz = dx / length, dy / length, dz / length
                push = gap - length
                if pin_a:
                    pos[b, 0] -= push * nx
                    pos[b, 1] -= push * ny
                    pos[b, 2] -= push * nz
                elif pin_b:
                    pos[a, 0] += push * nx
                    pos[a, 1] += push * ny
                    pos[a, 2] += push * nz
                else:
                    half = 0.5 * push
                    pos[a, 0] += half * nx
                    pos[a, 1] += half * ny
                    pos[a, 2] += half * nz
                    pos[b, 0] -= half * nx
                    pos[b, 1] -= half * ny
                    pos[b, 2] -= half * nz

            # Ground plane.
            for i in range(n):
                if not pinned[i] and pos[i, 2] < 0.0:
                    pos[i, 2] = 0.0
                    on_ground[i] = True

        # Velocities from projected positions.
        for i in range(n):
            if not pinned[i]:
                vel[i, 0] = (pos[i, 0] - prev[i, 0]) / dt
                vel[i, 1] = (pos[i, 1] - prev[i, 1]) / dt
                vel[i, 2] = (pos[i, 2] - prev[i, 2]) / dt

        # Contact velocity filters: resting contact (no relative normal
        # velocity) and self-stiction (touching layers resist sliding).
        for e in range(n_pairs):
            a = pair_a[e]
            b = pair_b[e]
            dx = pos[a, 0] - pos[b, 0]
            dy = pos[a, 1] - pos[b, 1]
            dz = pos[a, 2] - pos[b, 2]
            length = (dx * dx + dy * dy + dz * dz) ** 0.5
            if length >= 1.2 * gap:
                continue
            free_a = not pinned[a]
            free_b = not pinned[b]
            if not (free_a or free_b):
                continue
            if length < 1e-9:
                nx, ny, nz = 0.0, 0.0, 1.0
            else:
                nx, ny, nz = dx / length, dy / length, dz / length
            rvn = (
                (vel[a, 0] - vel[b, 0]) * nx
                + (vel[a, 1] - vel[b, 1]) * ny
                + (vel[a, 2] - vel[b, 2]) * nz
            )
            if free_a and free_b:
                ha = 0.5 * rvn
                vel[a, 0] -= ha * nx
                vel[a, 1] -= ha * ny
                vel[a, 2] -= ha * nz
                vel[b, 0] += ha * nx
                vel[b, 1] += ha * ny
                vel[b, 2] += ha * nz
            elif free_a:
                vel[a, 0] -= rvn * nx
                vel[a, 1] -= rvn * ny
                vel[a, 2] -= rvn * nz
            else:
                vel[b, 0] += rvn * nx
                vel[b, 1] += rvn * ny
                vel[b, 2] += rvn * nz
            if stiction > 0.0:
                g = stiction if stiction < 1.0 else 1.0
                mx = 0.5 * (vel[a, 0] + vel[b, 0])
                my = 0.5 * (vel[a, 1] + vel[b, 1])
                if free_a:
                    vel[a, 0] += g * (mx - vel[a, 0])
                    vel[a, 1] += g * (my - vel[a, 1])
                if free_b:
                    vel[b, 0] += g * (mx - vel[b, 0])
                    vel[b, 1] += g * (my - vel[b, 1])

        # Ground contact: kill vertical velocity, horizontal friction decay.
        for i in range(n):
            if pinned[i]:
                continue
            if on_ground[i] or pos[i, 2] < GROUND_EPS:
                if vel[i, 2] < 0.0:
                    vel[i, 2] = 0.0
                vel[i, 0] *= 1.0 - friction
                vel[i, 1] *= 1.0 - friction

    ke = 0.0
    for i in range(n):
        if not pinned[i]:
            ke += vel[i, 0] ** 2 + vel[i, 1] ** 2 + vel[i, 2] ** 2
    return 0.5 * mass * ke


class ClothSim:
    """Owns the spring topology and advances a ClothState in place."""

    def __init__(self, params: ClothParams):
        self.params = params.validate()
        self._build_springs()
        self._build_contact_candidates()
        self.substep_count = 0
        # Per-substep velocity-decay factors are defined at REFERENCE_DT and
        # rescaled so behaviour is invariant to the integration step size.
        scale = params.dt / REFERENCE_DT
        self._effective_friction = 1.0 - (1.0 - params.ground_friction) ** scale
        self._effective_stiction = min(
            1.0 - (1.0 - min(params.self_stiction, 0.999)) ** scale, 1.0
        )

    def _build_springs(self) -> None:
        rows, cols, h = self.params.rows, self.params.cols, self.params.spacing
        idx = np.arange(rows * cols).reshape(rows, cols)
        pairs, rests, ks = [], [], []

        def add(a, b, rest, k):
            pairs.append(np.stack([a.ravel(), b.ravel()], axis=1))
            rests.append(np.full(a.size, rest))
            ks.append(np.full(a.size, k))

        p = self.params
        add(idx[:, :-1], idx[:, 1:], h, p.stiffness_structural)
        add(idx[:-1, :], idx[1:, :], h, p.stiffness_structural)
        add(idx[:-1, :-1], idx[1:, 1:], h * np.sqrt(2.0), p.stiffness_shear)
        add(idx[:-1, 1:], idx[1:, :-1], h * np.sqrt(2.0), p.stiffness_shear)
        add(idx[:, :-2], idx[:, 2:], 2 * h, p.stiffness_bend)
        add(idx[:-2, :], idx[2:, :], 2 * h, p.stiffness_bend)

        allp = np.concatenate(pairs)
        self.spring_i = np.ascontiguousarray(allp[:, 0])
        self.spring_j = np.ascontiguousarray(allp[:, 1])
        self.spring_rest = np.concatenate(rests)
        self.spring_k = np.concatenate(ks)
        self.n_structural = 2 * rows * cols - rows - cols

        # Structural springs incident to each particle, for strain-based
        # attachment breaking during gripper moves.
        n = rows * cols
        inc = [[] for _ in range(n)]
        for s in range(self.n_structural):
            inc[self.spring_i[s]].append(s)
            inc[self.spring_j[s]].append(s)
        self._incident = [np.array(v, dtype=np.int64) for v in inc]

    def _build_contact_candidates(self) -> None:
        # All particle pairs except grid neighbours (Chebyshev distance <= 1,
        # already held together by structural/shear springs).
        rows, cols = self.params.rows, self.params.cols
        gr = np.repeat(np.arange(rows), cols)
        gc = np.tile(np.arange(cols), rows)
        cheb = np.maximum(
            np.abs(gr[:, None] - gr[None, :]), np.abs(gc[:, None] - gc[None, :])
        )
        a, b = np.nonzero(np.triu(cheb > 1))
        self._cand_a = np.ascontiguousarray(a, dtype=np.int64)
        self._cand_b = np.ascontiguousarray(b, dtype=np.int64)
        self._pair_a = np.empty(self._cand_a.size, dtype=np.int64)
        self._pair_b = np.empty(self._cand_b.size, dtype=np.int64)

    # ------------------------------------------------------------- forces

    def spring_forces(self, positions: np.ndarray) -> np.ndarray:
        """Reference (numpy) spring force computation; used for energy checks
        and as an oracle against the compiled kernel."""
        d = positions[self.spring_j] - positions[self.spring_i]
        length = np.sqrt(np.sum(d * d, axis=1))
        length = np.maximum(length, 1e-12)
        fmag = self.spring_k * (length - self.spring_rest)
        f = (fmag / length)[:, None] * d
        n = positions.shape[0]
        out = np.empty((n, 3))
        for comp in range(3):
            out[:, comp] = np.bincount(
                self.spring_i, weights=f[:, comp], minlength=n
            ) - np.bincount(self.spring_j, weights=f[:, comp], minlength=n)
        return out

    def spring_energy(self, positions: np.ndarray) -> float:
        d = positions[self.spring_j] - positions[self.spring_i]
        length = np.sqrt(np.sum(d * d, axis=1))
        return float(0.5 * np.sum(self.spring_k * (length - self.spring_rest) ** 2))

    def total_energy(self, state: ClothState) -> float:
        p = self.params
        ke = state.kinetic_energy(p.particle_mass)
        pe_g = float(p.particle_mass * p.gravity * np.sum(state.positions[:, 2]))
        return ke + pe_g + self.spring_energy(state.positions)

    def structural_strain(self, positions: np.ndarray) -> np.ndarray:
        sl = slice(0, self.n_structural)
        d = positions[self.spring_j[sl]] - positions[self.spring_i[sl]]
        length = np.sqrt(np.sum(d * d, axis=1))
        return length / self.spring_rest[sl]

    def max_strain_at(self, positions: np.ndarray, particle: int) -> float:
        inc = self._incident[particle]
        if inc.size == 0:
            return 1.0
        d = positions[self.spring_j[inc]] - positions[self.spring_i[inc]]
        length = np.sqrt(np.sum(d * d, axis=1))
        return float(np.max(length / self.spring_rest[inc]))

    # ---------------------------------------------------------- integration

    def _pinned_mask(self, state: ClothState, pinned=None) -> np.ndarray:
        if pinned is not None:
            return pinned
        mask = np.zeros(state.n_particles, dtype=bool)
        if state.attached:
            mask[list(state.attached)] = True
        return mask

    def run_block(self, state: ClothState, n_substeps: int, pinned=None) -> float:
        """Advance n substeps; returns the free particles' kinetic energy."""
        p = self.params
        mask = self._pinned_mask(state, pinned)
        ke = _run_block(
            state.positions,
            state.velocities,
            mask,
            self.spring_i,
            self.spring_j,
            self.spring_rest,
            self.spring_k,
            self._cand_a,
            self._cand_b,
            self._pair_a,
            self._pair_b,
            self.n_structural,
            p.particle_mass,
            p.gravity,
            p.damping,
            p.dt,
            self._effective_friction,
            p.layer_gap,
            self._effective_stiction,
            (CONTACT_RADIUS_FACTOR * p.spacing) ** 2,
            n_substeps,
        )
        self.substep_count += n_substeps
        return float(ke)

    def substep(self, state: ClothState, pinned=None) -> None:
        self.run_block(state, 1, pinned)

    def settle(self, state: ClothState, max_substeps: int | None = None) -> bool:
        """Integrate until kinetic energy drops under the settle threshold.

        Returns True if quiescence was reached within the substep cap; never
        raises on non-convergence.  Attached particles stay pinned.
        """
        p = self.params
        cap = p.max_settle_substeps if max_substeps is None else max_substeps
        mask = self._pinned_mask(state)
        done = 0
        while done < cap:
            ke = self.run_block(state, p.substeps, mask)
            done += p.substeps
            if ke <= p.settle_ke_threshold:
                return True
        return False

    def relax(self, state: ClothState, substeps: int) -> None:
        """Run a fixed number of substeps (used between gripper micro-moves)."""
        self.run_block(state, substeps)


def settle(state: ClothState, params: ClothParams) -> tuple[ClothState, bool]:
    """Functional settle: returns (settled state, reached-quiescence flag)."""
    sim = ClothSim(params)
    out = state.copy()
    ok = sim.settle(out)
    return out, ok
