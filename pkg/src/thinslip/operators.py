"""Staggered-grid operators in the thickness-scaled metric.

All differential operators carry the dilatation scaling: vertical derivative
entries are multiplied by ``1/eps`` (so the gradient energy weights carry
``1/eps**2``).  The viscous block is assembled variationally as ``B^T W B``
from the stacked difference quotients, which makes summation by parts exact:
testing the discrete momentum equations with the solution reproduces the
energy balance to solver precision.

Tangential velocity on the bottom wall is a free unknown; the difference set
couples it to the first interior level over the half spacing ``dz/2``, so the
wall row of ``B^T W B`` is the one-sided Robin flux.  Dirichlet walls enter
as omitted (zero) endpoints of their half intervals.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import UsageError
from .fields import Field, component_names
from .geometry import Grid3


def _take(arr, index, axis):
    sl = [slice(None)] * arr.ndim
    sl[axis] = index
    return arr[tuple(sl)]


class StaggeredOps:
    """Sparse operators and quadratures bound to one (grid, eps) pair."""

    def __init__(self, grid: Grid3, eps: float):
        if eps <= 0.0:
            raise UsageError(f"thickness eps={eps} must be positive")
        if not grid.height.is_constant:
            raise UsageError("full-order operators require a constant gap")
        self.grid = grid
        self.eps = float(eps)
        dom = grid.domain
        self.dim = dom.dim
        self.dx = dom.dx
        self.dz = grid.dz
        self.cellvol = dom.cell_volume * grid.dz
        self.periodic = dom.periodic

        self._build_indices()
        self._build_differences()
        self._build_div_grad()
        self._build_bottom_collocation()
        self._build_volumes()

    # -- DOF indexing -------------------------------------------------------

    def _build_indices(self):
        grid, dom = self.grid, self.grid.domain
        self.idx: dict[str, np.ndarray] = {}
        offset = 0
        for name in component_names(self.dim):
            if name.startswith("u"):
                comp = self.dim if name == "u3" else int(name[1]) - 1
                shape = grid.velocity_shape(comp)
                free = np.ones(shape, dtype=bool)
                if name == "u3":
                    free[..., 0] = False
                    free[..., -1] = False
                elif not self.periodic:
                    free[tuple(0 if a == comp else slice(None) for a in range(len(shape)))] = False
                    free[tuple(-1 if a == comp else slice(None) for a in range(len(shape)))] = False
            else:
                comp = int(name[1]) - 1
                shape = grid.wall_shape(comp)
                free = np.ones(shape, dtype=bool)
                if not self.periodic:
                    free[tuple(0 if a == comp else slice(None) for a in range(len(shape)))] = False
                    free[tuple(-1 if a == comp else slice(None) for a in range(len(shape)))] = False
            ids = np.full(shape, -1, dtype=np.int64)
            count = int(free.sum())
            ids[free] = offset + np.arange(count)
            offset += count
            self.idx[name] = ids
        self.nvel = offset
        self.ncells = int(np.prod(self.grid.pressure_shape()))
        self.cell_ids = np.arange(self.ncells).reshape(self.grid.pressure_shape())

    # -- viscous difference stack ------------------------------------------

    def _build_differences(self):
        rows, cols, vals, weights = [], [], [], []
        counter = 0

        def add_set(lo, hi, length, weight):
            nonlocal counter
            lo = lo.ravel()
            hi = hi.ravel()
            keep = (lo >= 0) | (hi >= 0)
            lo, hi = lo[keep], hi[keep]
            n = lo.size
            if n == 0:
                return
            r = counter + np.arange(n)
            for ids, sign in ((hi, 1.0), (lo, -1.0)):
                m = ids >= 0
                rows.append(r[m])
                cols.append(ids[m])
                vals.append(np.full(m.sum(), sign / length))
            weights.append(np.full(n, weight))
            counter += n

        inv_eps2 = 1.0 / self.eps**2
        for m in range(self.dim):
            I = self.idx[f"u{m + 1}"]
            B = self.idx[f"b{m + 1}"]
            for j in range(self.dim):
                base = self.cellvol / self.dx[j]
                if j == m:
                    if self.periodic:
                        add_set(I, np.roll(I, -1, axis=m), self.dx[j], base * self.dx[j])
                    else:
                        add_set(_take(I, slice(None, -1), m), _take(I, slice(1, None), m),
                                self.dx[j], base * self.dx[j])
                else:
                    minus = np.full_like(_take(I, [0], j), -1)
                    add_set(minus, _take(I, [0], j), 0.5 * self.dx[j], base * 0.5 * self.dx[j])
                    add_set(_take(I, slice(None, -1), j), _take(I, slice(1, None), j),
                            self.dx[j], base * self.dx[j])
                    add_set(_take(I, [-1], j), minus, 0.5 * self.dx[j], base * 0.5 * self.dx[j])
            base = inv_eps2 * self.cellvol / self.dz
            add_set(B, I[..., 0], 0.5 * self.dz, base * 0.5 * self.dz)
            add_set(I[..., :-1], I[..., 1:], self.dz, base * self.dz)
            add_set(I[..., -1], np.full_like(B, -1), 0.5 * self.dz, base * 0.5 * self.dz)

        J = self.idx["u3"]
        for j in range(self.dim):
            base = self.cellvol / self.dx[j]
            if self.periodic:
                add_set(J, np.roll(J, -1, axis=j), self.dx[j], base * self.dx[j])
            else:
                minus = np.full_like(_take(J, [0], j), -1)
                add_set(minus, _take(J, [0], j), 0.5 * self.dx[j], base * 0.5 * self.dx[j])
                add_set(_take(J, slice(None, -1), j), _take(J, slice(1, None), j),
                        self.dx[j], base * self.dx[j])
                add_set(_take(J, [-1], j), minus, 0.5 * self.dx[j], base * 0.5 * self.dx[j])
        base = inv_eps2 * self.cellvol / self.dz
        add_set(J[..., :-1], J[..., 1:], self.dz, base * self.dz)

        self.B = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(counter, self.nvel)).tocsr()
        self.w = np.concatenate(weights)
        self.BtWB = (self.B.T @ sp.diags(self.w) @ self.B).tocsr()

    # -- divergence / pressure gradient -------------------------------------

    def _build_div_grad(self):
        """Cell-stencil divergence and face-stencil pressure gradient,
        assembled by independent traversals (their adjointness is a property,
        not a construction shortcut)."""
        P = self.cell_ids
        inv_epsdz = 1.0 / (self.eps * self.dz)

        d_rows, d_cols, d_vals = [], [], []
        for m in range(self.dim):
            I = self.idx[f"u{m + 1}"]
            if self.periodic:
                lo, hi = I, np.roll(I, -1, axis=m)
            else:
                lo, hi = _take(I, slice(None, -1), m), _take(I, slice(1, None), m)
            for ids, sign in ((hi, 1.0), (lo, -1.0)):
                flat = ids.ravel()
                keep = flat >= 0
                d_rows.append(P.ravel()[keep])
                d_cols.append(flat[keep])
                d_vals.append(np.full(keep.sum(), sign / self.dx[m]))
        J = self.idx["u3"]
        for ids, sign in ((J[..., 1:], 1.0), (J[..., :-1], -1.0)):
            flat = ids.ravel()
            keep = flat >= 0
            d_rows.append(P.ravel()[keep])
            d_cols.append(flat[keep])
            d_vals.append(np.full(keep.sum(), sign * inv_epsdz))
        self.div = sp.coo_matrix(
            (np.concatenate(d_vals), (np.concatenate(d_rows), np.concatenate(d_cols))),
            shape=(self.ncells, self.nvel)).tocsr()

        g_rows, g_cols, g_vals = [], [], []
        for m in range(self.dim):
            I = self.idx[f"u{m + 1}"]
            if self.periodic:
                nodes, hi, lo = I, P, np.roll(P, 1, axis=m)
            else:
                nodes = _take(I, slice(1, -1), m)
                hi = _take(P, slice(1, None), m)
                lo = _take(P, slice(None, -1), m)
            for cells, sign in ((hi, 1.0), (lo, -1.0)):
                flat = nodes.ravel()
                keep = flat >= 0
                g_rows.append(flat[keep])
                g_cols.append(cells.ravel()[keep])
                g_vals.append(np.full(keep.sum(), sign / self.dx[m]))
        nodes = J[..., 1:-1]
        for cells, sign in ((P[..., 1:], 1.0), (P[..., :-1], -1.0)):
            flat = nodes.ravel()
            keep = flat >= 0
            g_rows.append(flat[keep])
            g_cols.append(cells.ravel()[keep])
            g_vals.append(np.full(keep.sum(), sign * inv_epsdz))
        self.grad = sp.coo_matrix(
            (np.concatenate(g_vals), (np.concatenate(g_rows), np.concatenate(g_cols))),
            shape=(self.nvel, self.ncells)).tocsr()

    # -- bottom-wall collocation ---------------------------------------------

    def _build_bottom_collocation(self):
        """Average the staggered slip layers to shared wall sites.

        dim 1: sites are the wall nodes themselves.  dim 2: the two face
        layers are averaged to cell-bottom centers so both horizontal
        components are evaluated at one point before the anisotropy tensor
        is applied.
        """
        dom = self.grid.domain
        rows, cols, vals = [], [], []
        if self.dim == 1:
            b = self.idx["b1"]
            free = b.ravel() >= 0
            ids = b.ravel()[free]
            self.n_wall_sites = ids.size
            rows.append(np.arange(ids.size))
            cols.append(ids)
            vals.append(np.ones(ids.size))
            self.wall_site_weights = np.full(ids.size, dom.dx[0])
            self._wall_free = free
        else:
            nx, ny = dom.n
            self.n_wall_sites = nx * ny
            site = np.arange(nx * ny).reshape(nx, ny)
            b1 = self.idx["b1"]
            for ids in (b1[:-1, :], b1[1:, :]):
                flat = ids.ravel()
                keep = flat >= 0
                rows.append((site.ravel() * 2)[keep])
                cols.append(flat[keep])
                vals.append(np.full(keep.sum(), 0.5))
            b2 = self.idx["b2"]
            for ids in (b2[:, :-1], b2[:, 1:]):
                flat = ids.ravel()
                keep = flat >= 0
                rows.append((site.ravel() * 2 + 1)[keep])
                cols.append(flat[keep])
                vals.append(np.full(keep.sum(), 0.5))
            self.wall_site_weights = np.full(self.n_wall_sites, dom.cell_volume)
        self.wall_avg = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_wall_sites * self.dim, self.nvel)).tocsr()

    def _build_volumes(self):
        self.vol = np.zeros(self.nvel)
        for m in range(self.dim + 1):
            name = "u3" if m == self.dim else f"u{m + 1}"
            ids = self.idx[name]
            self.vol[ids[ids >= 0]] = self.cellvol

    # -- gather / scatter ----------------------------------------------------

    def gather(self, data: dict) -> np.ndarray:
        u = np.zeros(self.nvel)
        for name, ids in self.idx.items():
            if name in data:
                free = ids >= 0
                u[ids[free]] = np.asarray(data[name])[free]
        return u

    def scatter(self, u: np.ndarray) -> dict:
        out = {}
        for name, ids in self.idx.items():
            arr = np.zeros(ids.shape)
            free = ids >= 0
            arr[free] = u[ids[free]]
            out[name] = arr
        return out

    # -- wall-law plumbing ----------------------------------------------------

    def wall_values(self, u: np.ndarray) -> np.ndarray:
        """Collocated slip vector per wall site, shape (n_sites, dim)."""
        return (self.wall_avg @ u).reshape(self.n_wall_sites, self.dim)

    def wall_traction_matrix(self, chi: np.ndarray, K2: np.ndarray, coeff: float) -> sp.csr_matrix:
        """Frozen-coefficient traction block: coeff * Avg^T diag(chi w K2) Avg."""
        nb = self.n_wall_sites
        d = self.dim
        rows = np.repeat(np.arange(nb * d), d)
        cols = np.tile(np.arange(d), nb * d) + np.repeat(np.arange(nb) * d, d * d)
        block = np.einsum("s,ab->sab", chi * self.wall_site_weights, K2).ravel()
        dblk = sp.coo_matrix((coeff * block, (rows, cols)), shape=(nb * d, nb * d)).tocsr()
        return (self.wall_avg.T @ dblk @ self.wall_avg).tocsr()

    def wall_traction_force(self, u: np.ndarray, K: np.ndarray, s: float,
                            delta: float, coeff: float) -> np.ndarray:
        """Exact (non-frozen) power-law traction as a force on the DOF vector."""
        bbar = self.wall_values(u)
        Kb = bbar @ K.T
        chi = (np.sum(Kb**2, axis=-1) + delta**2) ** ((s - 2.0) / 2.0)
        t = (Kb @ K.T) * chi[:, None] * self.wall_site_weights[:, None]
        return coeff * (self.wall_avg.T @ t.ravel())

    def wall_shear(self, data: dict, order: int = 1) -> np.ndarray:
        """Collocated one-sided vertical derivative of the horizontal velocity
        at the bottom wall, shape (n_sites, dim).

        order 1 is the half-spacing flux used by the solver's wall rows;
        order 2 is the quadratically exact 3-point formula.
        """
        comps = []
        for m in range(self.dim):
            u = data[f"u{m + 1}"]
            b = data[f"b{m + 1}"]
            if order == 1:
                comps.append((u[..., 0] - b) / (0.5 * self.dz))
            elif order == 2:
                comps.append((-8.0 * b / 3.0 + 3.0 * u[..., 0] - u[..., 1] / 3.0) / self.dz)
            else:
                raise UsageError(f"wall shear order {order} not in (1, 2)")
        return self._collocate(comps)

    def top_shear(self, data: dict) -> np.ndarray:
        comps = [(0.0 - data[f"u{m + 1}"][..., -1]) / (0.5 * self.dz) for m in range(self.dim)]
        return self._collocate(comps)

    def _collocate(self, comps: list) -> np.ndarray:
        if self.dim == 1:
            return comps[0].ravel()[self._wall_free].reshape(-1, 1)
        c1 = 0.5 * (comps[0][:-1, :] + comps[0][1:, :])
        c2 = 0.5 * (comps[1][:, :-1] + comps[1][:, 1:])
        return np.stack([c1.ravel(), c2.ravel()], axis=-1)

    # -- quadratures ----------------------------------------------------------

    def deps_seminorm(self, u: np.ndarray) -> float:
        """Discrete L2 norm of the thickness-scaled velocity gradient."""
        return float(np.sqrt(np.sum(self.w * (self.B @ u) ** 2)))

    def forcing_load(self, forcing) -> np.ndarray:
        """Volume load from an in-plane force density (vertical load is zero)."""
        F = np.zeros(self.nvel)
        for m in range(self.dim):
            sites = self.grid.component_sites(m)[..., : self.dim]
            fvals = np.asarray(forcing(sites))[..., m]
            ids = self.idx[f"u{m + 1}"]
            free = ids >= 0
            F[ids[free]] = self.cellvol * fvals[free]
        return F

    # -- upwind convection -----------------------------------------------------

    def _nodes_to_centers(self, arr: np.ndarray, axis: int) -> np.ndarray:
        if self.periodic and axis < self.dim:
            return 0.5 * (arr + np.roll(arr, -1, axis=axis))
        return 0.5 * (_take(arr, slice(None, -1), axis) + _take(arr, slice(1, None), axis))

    def _centers_to_nodes(self, arr: np.ndarray, axis: int) -> np.ndarray:
        if self.periodic and axis < self.dim:
            return 0.5 * (np.roll(arr, 1, axis=axis) + arr)
        inner = 0.5 * (_take(arr, slice(None, -1), axis) + _take(arr, slice(1, None), axis))
        lo = _take(arr, [0], axis)
        hi = _take(arr, [-1], axis)
        return np.concatenate([lo, inner, hi], axis=axis)

    def convection_matrix(self, wdata: dict) -> sp.csr_matrix:
        """First-order upwind discretization of (w . grad_eps) acting on each
        velocity component, rows scaled by the cell volume.  The advecting
        field ``wdata`` is a dict of full component arrays (a frozen iterate)."""
        rows, cols, vals = [], [], []

        def shifted_ids(ids, axis, step):
            if self.periodic and axis < self.dim:
                return np.roll(ids, -step, axis=axis)
            pad = np.full_like(_take(ids, [0], axis), -1)
            if step == 1:
                return np.concatenate([_take(ids, slice(1, None), axis), pad], axis=axis)
            return np.concatenate([pad, _take(ids, slice(None, -1), axis)], axis=axis)

        def add_terms(self_ids, nb_ids, dist, a, scale):
            keep = (self_ids.ravel() >= 0) & (a.ravel() != 0.0)
            sid = self_ids.ravel()[keep]
            nid = nb_ids.ravel()[keep]
            coef = scale * self.cellvol * a.ravel()[keep] / dist.ravel()[keep]
            rows.append(sid)
            cols.append(sid)
            vals.append(coef)
            mfree = nid >= 0
            rows.append(sid[mfree])
            cols.append(nid[mfree])
            vals.append(-coef[mfree])

        for m in range(self.dim + 1):
            name = "u3" if m == self.dim else f"u{m + 1}"
            ids = self.idx[name]
            shape = ids.shape
            for j in range(self.dim + 1):
                jname = "u3" if j == self.dim else f"u{j + 1}"
                scale = 1.0 / self.eps if j == self.dim else 1.0
                if j == m:
                    a = np.asarray(wdata[name])
                else:
                    # interpolate component j onto m's sites: collapse j's own
                    # nodal axis to centers, then expand m's axis to nodes
                    a = self._nodes_to_centers(np.asarray(wdata[jname]), j)
                    a = self._centers_to_nodes(a, m)
                step = self.dx[j] if j < self.dim else self.dz
                d_minus = np.full(shape, step)
                d_plus = np.full(shape, step)
                nb_minus = shifted_ids(ids, j, -1)
                nb_plus = shifted_ids(ids, j, 1)
                if j != m and not (self.periodic and j < self.dim):
                    # central axis: the wall sits half a spacing past the end
                    sl0 = tuple(0 if ax == j else slice(None) for ax in range(len(shape)))
                    sl1 = tuple(-1 if ax == j else slice(None) for ax in range(len(shape)))
                    d_minus[sl0] = 0.5 * step
                    d_plus[sl1] = 0.5 * step
                    if j == self.dim and m < self.dim:
                        # neighbour below the first level is the slip unknown
                        nb_minus[..., 0] = self.idx[f"b{m + 1}"]
                apos = np.where(a > 0.0, a, 0.0)
                aneg = np.where(a < 0.0, a, 0.0)
                add_terms(ids, nb_minus, d_minus, apos, scale)
                add_terms(ids, nb_plus, -d_plus, aneg, scale)

        if not rows:
            return sp.csr_matrix((self.nvel, self.nvel))
        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.nvel, self.nvel)).tocsr()


# ---------------------------------------------------------------------------
# diagnostic field-level operators


def apply_deps(field: Field, eps: float) -> dict:
    """Thickness-scaled gradient sampled at each component's own sites.

    Horizontal entries use centered differences (one-sided at array edges);
    every vertical column entry carries the 1/eps factor.  Returns a dict
    keyed by ``(component, axis)``.
    """
    if eps <= 0.0:
        raise UsageError(f"thickness eps={eps} must be positive")
    grid = field.grid
    dim = grid.dim
    out = {}
    for m in range(dim + 1):
        name = "u3" if m == dim else f"u{m + 1}"
        if name not in field.data:
            continue
        arr = field.data[name]
        dom = grid.domain
        coords = [dom.nodes(a) if a == m else dom.centers(a) for a in range(dim)]
        coords.append(grid.z_nodes() if m == dim else grid.z_mids())
        for j in range(dim + 1):
            g = np.gradient(arr, coords[j], axis=j)
            if j == dim:
                g = g / eps
            out[(name, j)] = g
    return out


def apply_diveps(field: Field, eps: float) -> np.ndarray:
    """Staggered per-cell divergence with the vertical term scaled by 1/eps."""
    if eps <= 0.0:
        raise UsageError(f"thickness eps={eps} must be positive")
    grid = field.grid
    dim = grid.dim
    dom = grid.domain
    div = np.zeros(grid.pressure_shape())
    for m in range(dim):
        u = field.data[f"u{m + 1}"]
        if dom.periodic:
            diff = np.roll(u, -1, axis=m) - u
        else:
            diff = np.diff(u, axis=m)
        div += diff / dom.dx[m]
    u3 = field.data["u3"]
    div += np.diff(u3, axis=-1) / (eps * grid.dz)
    return div
