"""Lagrange P1/P2 elements, triangle quadrature and assembly of the
implicit elastodynamic step matrix

    A = rho * M + dt**2 * (2 mu K_shear + lambda K_div)

Vector dofs are interleaved: node ``j`` owns dofs ``2j`` (u_x) and ``2j+1``
(u_y). Dirichlet nodes on the driven end are eliminated symmetrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateElementError, InvalidArgumentError
from .mesh import Mesh, NodeSet


@dataclass(frozen=True)
class MaterialParams:
    rho: float
    lam: float
    mu: float
    E: float
    nu: float

    def __post_init__(self):
        for name in ("rho", "lam", "mu", "E"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidArgumentError(f"material {name} must be positive, got {v!r}")
        if not (math.isfinite(self.nu) and -1.0 < self.nu < 0.5):
            raise InvalidArgumentError(f"Poisson ratio must lie in (-1, 0.5), got {self.nu!r}")
        lam_E = self.E * self.nu / ((1 + self.nu) * (1 - 2 * self.nu))
        mu_E = self.E / (2 * (1 + self.nu))
        if abs(self.lam - lam_E) / self.lam >= 1e-3:
            raise InvalidArgumentError(
                f"lambda={self.lam:g} inconsistent with E, nu (expected {lam_E:g})"
            )
        if abs(self.mu - mu_E) / self.mu >= 1e-3:
            raise InvalidArgumentError(f"mu={self.mu:g} inconsistent with E, nu (expected {mu_E:g})")

    @classmethod
    def from_young(cls, rho: float, E: float, nu: float) -> "MaterialParams":
        if not -1.0 < nu < 0.5:
            raise InvalidArgumentError(f"Poisson ratio must lie in (-1, 0.5), got {nu!r}")
        lam = E * nu / ((1 + nu) * (1 - 2 * nu))
        mu = E / (2 * (1 + nu))
        return cls(rho=rho, lam=lam, mu=mu, E=E, nu=nu)

    @classmethod
    def aluminium(cls) -> "MaterialParams":
        return cls(rho=2700.0, lam=5.279e10, mu=2.624e10, E=7.0e10, nu=0.334)


# ---------------------------------------------------------------- quadrature

def _orbit3(a: float) -> list[tuple[float, float, float]]:
    b = 1.0 - 2.0 * a
    return [(a, a, b), (a, b, a), (b, a, a)]


def triangle_quadrature(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric points and weights (summing to 1) exact to ``degree``.

    Degrees 1, 2 and 4 use symmetric rules; anything else falls back to a
    collapsed Gauss-Legendre product rule.
    """
    if degree < 0:
        raise InvalidArgumentError("quadrature degree must be non-negative")
    if degree <= 1:
        return np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0])
    if degree == 2:
        return np.array(_orbit3(1 / 6)), np.full(3, 1 / 3)
    if degree in (3, 4):
        pts = _orbit3(0.445948490915965) + _orbit3(0.091576213509771)
        w = [0.223381589678011] * 3 + [0.109951743655322] * 3
        return np.array(pts), np.array(w)
    n = (degree + 3) // 2
    g, gw = np.polynomial.legendre.leggauss(n)
    g = 0.5 * (g + 1.0)
    gw = 0.5 * gw
    U, V = np.meshgrid(g, g, indexing="ij")
    WU, WV = np.meshgrid(gw, gw, indexing="ij")
    xi = U.ravel()
    eta = (V * (1.0 - U)).ravel()
    w = (WU * WV * (1.0 - U)).ravel() * 2.0
    return np.column_stack([1.0 - xi - eta, xi, eta]), w


# ------------------------------------------------------------ shape functions

_DLAMBDA = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])  # d(lambda_i)/d(xi, eta)
_P2_EDGES = ((0, 1), (1, 2), (2, 0))


def n_local(k: int) -> int:
    return (k + 1) * (k + 2) // 2


def shape_values(k: int, bary) -> tuple[np.ndarray, np.ndarray]:
    """Local basis values and reference gradients at barycentric points.

    Accepts a single triple or an ``(n, 3)`` array; returns values of shape
    ``(n, m)`` and gradients ``(n, m, 2)`` with respect to the reference
    coordinates (xi, eta) = (lambda_1, lambda_2). Single inputs return
    unbatched arrays.
    """
    if k not in (1, 2):
        raise InvalidArgumentError(f"unsupported degree {k!r}")
    b = np.asarray(bary, dtype=float)
    single = b.ndim == 1
    b = np.atleast_2d(b)
    if b.shape[1] != 3 or not np.all(np.isfinite(b)):
        raise InvalidArgumentError("barycentric input must have three finite components")
    if np.any(np.abs(b.sum(axis=1) - 1.0) > 1e-12) or np.any(b < -1e-12) or np.any(b > 1 + 1e-12):
        raise InvalidArgumentError("barycentric components must lie in [0,1] and sum to 1")

    n = len(b)
    if k == 1:
        vals = b.copy()
        grads = np.broadcast_to(_DLAMBDA, (n, 3, 2)).copy()
    else:
        vals = np.empty((n, 6))
        grads = np.empty((n, 6, 2))
        for i in range(3):
            vals[:, i] = b[:, i] * (2.0 * b[:, i] - 1.0)
            grads[:, i] = (4.0 * b[:, i] - 1.0)[:, None] * _DLAMBDA[i]
        for m, (i, j) in enumerate(_P2_EDGES, start=3):
            vals[:, m] = 4.0 * b[:, i] * b[:, j]
            grads[:, m] = 4.0 * (b[:, j][:, None] * _DLAMBDA[i] + b[:, i][:, None] * _DLAMBDA[j])
    if single:
        return vals[0], grads[0]
    return vals, grads


def local_lattice(k: int) -> np.ndarray:
    """Barycentric coordinates of the local nodes, in local basis order."""
    verts = np.eye(3)
    if k == 1:
        return verts
    mids = np.array([(verts[i] + verts[j]) / 2 for i, j in _P2_EDGES])
    return np.vstack([verts, mids])


# ------------------------------------------------------------ element kernels

@dataclass(frozen=True)
class ElementKernel:
    mass: np.ndarray  # (m, m), scalar
    shear: np.ndarray  # (2m, 2m), interleaved, integral of S(psi_r):S(psi_s)
    divdiv: np.ndarray  # (2m, 2m), interleaved


def _geometry(coords: np.ndarray):
    e1 = coords[:, 1] - coords[:, 0]
    e2 = coords[:, 2] - coords[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    scale = np.maximum(
        np.maximum((e1**2).sum(1), (e2**2).sum(1)), ((coords[:, 2] - coords[:, 1]) ** 2).sum(1)
    )
    if np.any(np.abs(det) <= 1e-14 * scale):
        raise DegenerateElementError("triangle with zero area")
    # inverse transpose of the map (xi, eta) -> x
    jinv_t = np.empty((len(coords), 2, 2))
    jinv_t[:, 0, 0] = e2[:, 1] / det
    jinv_t[:, 0, 1] = -e1[:, 1] / det
    jinv_t[:, 1, 0] = -e2[:, 0] / det
    jinv_t[:, 1, 1] = e1[:, 0] / det
    return 0.5 * np.abs(det), jinv_t


def physical_gradients(coords: np.ndarray, k: int, bary: np.ndarray) -> np.ndarray:
    """Basis gradients in physical coordinates, shape ``(E, q, m, 2)``."""
    _, jinv_t = _geometry(coords)
    _, dref = shape_values(k, bary)
    # jinv_t rows give d(xi,eta)/dx and d(xi,eta)/dy
    return np.einsum("qmr,exr->eqmx", dref, jinv_t)


def element_matrices(coords: np.ndarray, k: int, quad_degree: int | None = None):
    """Batched mass, shear and divdiv matrices for ``coords`` of shape (E, 3, 2)."""
    coords = np.asarray(coords, dtype=float)
    if quad_degree is None:
        quad_degree = 2 * k
    area, jinv_t = _geometry(coords)
    qp, qw = triangle_quadrature(quad_degree)
    N, dref = shape_values(k, qp)
    G = np.einsum("qmr,exr->eqmx", dref, jinv_t)
    m = N.shape[1]

    wq = area[:, None] * qw[None, :]  # (E, q)
    mass = np.einsum("eq,qa,qb->eab", wq, N, N)

    gx, gy = G[..., 0], G[..., 1]
    E = len(coords)
    nq = len(qw)
    # strain rows (exx, eyy, gamma_xy) against interleaved dofs
    B = np.zeros((E, nq, 3, 2 * m))
    B[:, :, 0, 0::2] = gx
    B[:, :, 1, 1::2] = gy
    B[:, :, 2, 0::2] = gy
    B[:, :, 2, 1::2] = gx
    # S:S = exx^2 + eyy^2 + gamma^2 / 2
    shear = np.einsum("eq,eqia,i,eqib->eab", wq, B, np.array([1.0, 1.0, 0.5]), B)
    div = B[:, :, 0, :] + B[:, :, 1, :]
    divdiv = np.einsum("eq,eqa,eqb->eab", wq, div, div)
    return mass, shear, divdiv


def element_kernel(triangle, k: int) -> ElementKernel:
    coords = np.asarray(triangle, dtype=float).reshape(1, 3, 2)
    mass, shear, divdiv = element_matrices(coords, k)
    return ElementKernel(mass=mass[0], shear=shear[0], divdiv=divdiv[0])


# ------------------------------------------------------------------ assembly

def _check_pair(mesh: Mesh, nodes: NodeSet) -> None:
    if nodes.mesh is not mesh or len(nodes.element_nodes) != mesh.n_triangles:
        raise InvalidArgumentError("node set was not built from this mesh")


def element_dofs(nodes: NodeSet) -> np.ndarray:
    en = nodes.element_nodes
    out = np.empty((len(en), 2 * en.shape[1]), dtype=np.int64)
    out[:, 0::2] = 2 * en
    out[:, 1::2] = 2 * en + 1
    return out


def _scatter(local: np.ndarray, dofs: np.ndarray, n: int) -> sp.csr_matrix:
    rows = np.repeat(dofs, dofs.shape[1], axis=1).ravel()
    cols = np.tile(dofs, (1, dofs.shape[1])).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


@dataclass(frozen=True)
class Operators:
    """Unscaled global matrices on the full vector dof space."""

    mass: sp.csr_matrix
    shear: sp.csr_matrix
    divdiv: sp.csr_matrix

    def stiffness(self, mat: MaterialParams) -> sp.csr_matrix:
        return (2.0 * mat.mu * self.shear + mat.lam * self.divdiv).tocsr()


def assemble_operators(mesh: Mesh, nodes: NodeSet) -> Operators:
    _check_pair(mesh, nodes)
    coords = mesh.vertices[mesh.triangles]
    mass_s, shear, divdiv = element_matrices(coords, nodes.degree)
    m = mass_s.shape[1]
    mass_v = np.zeros((len(coords), 2 * m, 2 * m))
    mass_v[:, 0::2, 0::2] = mass_s
    mass_v[:, 1::2, 1::2] = mass_s
    dofs = element_dofs(nodes)
    n = nodes.n_dofs
    return Operators(
        mass=_scatter(mass_v, dofs, n),
        shear=_scatter(shear, dofs, n),
        divdiv=_scatter(divdiv, dofs, n),
    )


def assemble_stiffness(mesh: Mesh, nodes: NodeSet, mat: MaterialParams) -> sp.csr_matrix:
    """``2 mu K_shear + lambda K_div`` with no boundary handling."""
    return assemble_operators(mesh, nodes).stiffness(mat)


def strain_energy(mesh: Mesh, nodes: NodeSet, mat: MaterialParams, d) -> float:
    """``a(u_h, u_h)`` integrated from element strains.

    Equal to ``d @ K @ d`` in exact arithmetic, but the strains are formed
    before squaring, so near-null vectors keep their tiny energy instead of
    the ``eps * |K|`` cancellation floor of the matrix product.
    """
    _check_pair(mesh, nodes)
    d = np.asarray(d, dtype=float)
    if d.shape != (nodes.n_dofs,):
        raise InvalidArgumentError(f"coefficient vector must have length {nodes.n_dofs}")
    coords = mesh.vertices[mesh.triangles]
    area, _ = _geometry(coords)
    qp, qw = triangle_quadrature(2 * nodes.degree)
    G = physical_gradients(coords, nodes.degree, qp)  # (E, q, m, 2)
    en = nodes.element_nodes
    ux, uy = d[0::2][en], d[1::2][en]  # (E, m)
    J = np.stack([np.einsum("eqmx,em->eqx", G, ux), np.einsum("eqmx,em->eqx", G, uy)], axis=2)
    exx, eyy = J[..., 0, 0], J[..., 1, 1]
    exy = 0.5 * (J[..., 0, 1] + J[..., 1, 0])
    dens = 2 * mat.mu * (exx**2 + eyy**2 + 2 * exy**2) + mat.lam * (exx + eyy) ** 2
    return float(np.sum(area[:, None] * qw[None, :] * dens))


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    """Step matrix with Dirichlet rows/columns replaced by identity.

    ``A_full`` keeps the unmodified matrix; its Dirichlet columns carry the
    known boundary values to the right-hand side.
    """

    A: sp.csr_matrix
    A_full: sp.csr_matrix
    M: sp.csr_matrix
    dirichlet: np.ndarray
    dirichlet_dofs: np.ndarray
    free_dofs: np.ndarray
    dt: float
    material: MaterialParams

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def write_coo(self, path) -> None:
        coo = self.A.tocoo()
        with open(path, "w") as fh:
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{r} {c} {v!r}\n")


def assemble(mesh: Mesh, nodes: NodeSet, mat: MaterialParams, dt: float,
             operators: Operators | None = None) -> AssembledSystem:
    if not (math.isfinite(dt) and dt > 0):
        raise InvalidArgumentError(f"time step must be positive, got {dt!r}")
    ops = operators if operators is not None else assemble_operators(mesh, nodes)
    _check_pair(mesh, nodes)
    A_full = (mat.rho * ops.mass + dt**2 * ops.stiffness(mat)).tocsr()
    n = A_full.shape[0]
    ddofs = nodes.dirichlet_dofs
    keep = np.ones(n)
    keep[ddofs] = 0.0
    K = sp.diags(keep)
    A = (K @ A_full @ K + sp.diags(1.0 - keep)).tocsr()
    A.eliminate_zeros()
    A.sort_indices()
    return AssembledSystem(
        A=A,
        A_full=A_full,
        M=ops.mass,
        dirichlet=nodes.dirichlet_nodes,
        dirichlet_dofs=ddofs,
        free_dofs=np.flatnonzero(keep),
        dt=float(dt),
        material=mat,
    )


def assemble_load(sys: AssembledSystem, d_prev, d_prev2, rho: float,
                  dirichlet_values=None) -> np.ndarray:
    """Right-hand side ``rho M (2 d_prev - d_prev2)`` with Dirichlet lifting.

    ``dirichlet_values`` are the prescribed values on ``sys.dirichlet_dofs``
    (zero when omitted); they are moved to the free rows and written into
    the Dirichlet rows so the solve reproduces them exactly.
    """
    d1 = np.asarray(d_prev, dtype=float)
    d2 = np.asarray(d_prev2, dtype=float)
    n = sys.order
    if d1.shape != (n,) or d2.shape != (n,):
        raise InvalidArgumentError(f"snapshots must have length {n}")
    b = rho * (sys.M @ (2.0 * d1 - d2))
    g = np.zeros(len(sys.dirichlet_dofs)) if dirichlet_values is None else np.asarray(
        dirichlet_values, dtype=float)
    if g.shape != sys.dirichlet_dofs.shape:
        raise InvalidArgumentError("dirichlet_values length mismatch")
    if np.any(g):
        b -= sys.A_full[:, sys.dirichlet_dofs] @ g
    b[sys.dirichlet_dofs] = g
    return b


# ------------------------------------------------ weak/strong form consistency

@dataclass(frozen=True)
class VectorField:
    """Closed-form 2-D vector field with first and second derivatives.

    ``value(x, y)`` -> (2, n); ``grad(x, y)`` -> (2, 2, n) with
    ``grad[i, j] = d u_i / d x_j``; ``hess(x, y)`` -> (2, 2, 2, n).
    """

    value: Callable
    grad: Callable
    hess: Callable | None = None

    @classmethod
    def from_sympy(cls, ux, uy) -> "VectorField":
        import sympy

        x, y = sympy.symbols("x y")
        comps = [sympy.sympify(ux), sympy.sympify(uy)]
        X = (x, y)
        val = comps
        grad = [[sympy.diff(c, v) for v in X] for c in comps]
        hess = [[[sympy.diff(c, v, w) for w in X] for v in X] for c in comps]

        def lam(exprs):
            shape = np.shape(np.array(exprs, dtype=object))
            funcs = [sympy.lambdify((x, y), e, "numpy")
                     for e in np.array(exprs, dtype=object).ravel()]

            def call(px, py):
                px = np.asarray(px, dtype=float)
                out = [np.broadcast_to(np.asarray(f(px, py), dtype=float), px.shape) for f in funcs]
                return np.stack(out).reshape(shape + px.shape)

            return call

        return cls(value=lam(val), grad=lam(grad), hess=lam(hess))


def _stress_divergence(u: VectorField, mat: MaterialParams, x, y) -> np.ndarray:
    H = u.hess(x, y)  # H[i, j, k] = d^2 u_i / dx_j dx_k
    lap = H[:, 0, 0] + H[:, 1, 1]
    grad_div = H[0, :, 0] + H[1, :, 1]  # d/dx_j (div u)
    return mat.mu * lap + (mat.lam + mat.mu) * grad_div


def strong_form_residual(mesh: Mesh, nodes: NodeSet, mat: MaterialParams,
                         u: VectorField, v: VectorField,
                         quad_degree: int | None = None) -> tuple[float, float]:
    """Both sides of the integration-by-parts identity for the elastic term.

    lhs = -integral (div sigma(u)) . v
    rhs = 2 mu integral S(u):S(v) + lambda integral (div u)(div v)
    """
    _check_pair(mesh, nodes)
    if quad_degree is None:
        quad_degree = 2 * nodes.degree + 2
    qp, qw = triangle_quadrature(quad_degree)
    coords = mesh.vertices[mesh.triangles]
    area = np.abs(mesh.areas())
    pts = np.einsum("qa,eax->eqx", qp, coords)
    x, y = pts[..., 0].ravel(), pts[..., 1].ravel()
    w = (area[:, None] * qw[None, :]).ravel()

    divsig = _stress_divergence(u, mat, x, y)
    lhs = -np.sum(w * np.einsum("in,in->n", divsig, v.value(x, y)))

    Ju, Jv = u.grad(x, y), v.grad(x, y)
    Su = 0.5 * (Ju + Ju.transpose(1, 0, 2))
    Sv = 0.5 * (Jv + Jv.transpose(1, 0, 2))
    ss = np.einsum("ijn,ijn->n", Su, Sv)
    dd = (Ju[0, 0] + Ju[1, 1]) * (Jv[0, 0] + Jv[1, 1])
    rhs = np.sum(w * (2.0 * mat.mu * ss + mat.lam * dd))
    return float(lhs), float(rhs)
