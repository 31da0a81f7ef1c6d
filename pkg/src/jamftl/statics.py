"""Quasi-static equilibrium of the joint chain.

Joints are quadratic springs in the 2-vector bend parameterization
(theta*cos(gamma), theta*sin(gamma)); jammed sections are the same springs
with their stiffness scaled by the jam ratio. Checkpoint rings act through a
one-sided penalty on the penetration of the body centerline where it crosses
each ring plane (quadratic near contact, linear past the knee). The solver is
bound-constrained L-BFGS-B in polar joint coordinates; the result is
deterministic.

Units: mm, rad, mN; energies in mN*mm, joint stiffness in mN*mm/rad^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import SolverFailure
from .geometry import (RobotConfig, rotation_vector, rotvec_matrix,
                       so3_left_jacobian)


@dataclass(frozen=True)
class StiffnessModel:
    """Stiffness parameters of the body and the contact penalty."""

    k_soft: float = 1e5          # unjammed joint stiffness, mN*mm/rad^2
    jam_ratio: float = 34.0      # jammed/unjammed stiffness ratio
    k_contact: float = 100.0     # ring penalty stiffness, mN/mm
    friction_multiplier: float = 1.5  # free-zone tracking-error gain past gentle bends

    def __post_init__(self):
        if self.k_soft <= 0 or self.k_contact <= 0 or self.friction_multiplier <= 0:
            raise ValueError("stiffness parameters must be positive")
        if self.jam_ratio < 1.0:
            raise ValueError("jam_ratio must be >= 1")

    @property
    def k_jam(self) -> float:
        return self.k_soft * self.jam_ratio


@dataclass(frozen=True)
class ContactRing:
    """A rigid ring the body passes through; penalizes radial penetration of
    the centerline crossing point beyond the ring clearance."""

    center: np.ndarray
    axis: np.ndarray          # unit ring normal
    inner_radius: float
    sensor_axis: np.ndarray   # unit vector in the ring plane
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, float))
        a = np.asarray(self.axis, float)
        object.__setattr__(self, "axis", a / np.linalg.norm(a))
        s = np.asarray(self.sensor_axis, float)
        object.__setattr__(self, "sensor_axis", s / np.linalg.norm(s))
        if abs(float(self.axis @ self.sensor_axis)) > 1e-9:
            raise ValueError("sensor axis must lie in the ring plane")


@dataclass
class EquilibriumProblem:
    """Energy model for one solve.

    ``rest`` holds per-joint rest bend 2-vectors (committed angles for locked
    joints, tendon commands for free ones); ``stiffness`` the per-joint spring
    constants (k_jam for locked, k_soft for free).
    """

    rest: np.ndarray                     # (n, 2)
    stiffness: np.ndarray                # (n,)
    contacts: tuple = ()
    bound: float = math.radians(15.0)    # |bend| limit per joint
    cfg: RobotConfig = field(default_factory=RobotConfig)
    k_contact: float = 100.0
    penalty_knee: float = 2.0            # mm; penalty turns linear past this
    uniform_load: np.ndarray | None = None  # optional mN force on every node

    def __post_init__(self):
        self.rest = np.atleast_2d(np.asarray(self.rest, float))
        self.stiffness = np.asarray(self.stiffness, float)
        if self.rest.shape[0] != self.stiffness.shape[0]:
            raise ValueError("rest and stiffness joint counts differ")
        self.contacts = tuple(self.contacts)

    @property
    def n_joints(self) -> int:
        return self.rest.shape[0]


def _chain_kinematics(q: np.ndarray, cfg: RobotConfig, with_jacobian: bool):
    """Node positions of the chain for flattened joint vector q, and
    optionally the position Jacobian J[i] = d p_i / d q, shape (n+1, 3, 2n)."""
    n = q.shape[0] // 2
    qj = q.reshape(n, 2)
    pos = np.zeros((n + 1, 3))
    R = np.eye(3)
    rots = []
    for j in range(n):
        R = R @ rotvec_matrix(rotation_vector(qj[j]))
        rots.append(R)
        pos[j + 1] = pos[j] + R[:, 2] * cfg.seg_length
    if not with_jacobian:
        return pos, None
    # World angular-velocity map per joint: columns are the world rotation
    # axes produced by unit rates of the two joint coordinates.
    A = np.array([[0.0, -1.0], [1.0, 0.0], [0.0, 0.0]])
    J = np.zeros((n + 1, 3, 2 * n))
    for j in range(n):
        R_prox = np.eye(3) if j == 0 else rots[j - 1]
        W = R_prox @ so3_left_jacobian(rotation_vector(qj[j])) @ A  # (3, 2)
        lever = pos[j + 1:] - pos[j]                                # (m, 3)
        # d p_i = W dq x (p_i - p_j)
        for k in range(2):
            J[j + 1:, :, 2 * j + k] = np.cross(W[:, k], lever)
    return pos, J


def _ring_crossings(s: np.ndarray):
    """Indices i where the link (i, i+1) crosses the plane with signed node
    distances s, with the interpolation parameter t of the crossing point."""
    out = []
    for i in range(len(s) - 1):
        if (s[i] < 0.0 <= s[i + 1]) or (s[i + 1] < 0.0 <= s[i]):
            out.append((i, s[i] / (s[i] - s[i + 1])))
    return out


def _weighted_crossings(s: np.ndarray, ramp: float):
    """Ring-plane crossings with a C1 ramp weight that tracks the chain's
    excursion on either side of the plane.

    Each crossing separates two excursions of the piecewise-linear signed
    distance s; the weight is the product of a smooth ramp of each
    excursion's extent max |s|, so the penalty fades in and out smoothly as
    a crossing is born or vanishes, but stays at full strength while a node
    merely slides through the plane (the crossing then hops links with
    w = 1).

    Yields (link, t, weight, [(node, dw_ds), ...]) where dw_ds is the
    derivative of the weight w.r.t. s[node].
    """
    crossings = _ring_crossings(s)
    if not crossings:
        return []
    # Node regions between consecutive crossings (inclusive index ranges).
    bounds = [0] + [i + 1 for i, _ in crossings] + [len(s)]
    extents = []
    for r in range(len(bounds) - 1):
        nodes = np.arange(bounds[r], bounds[r + 1])
        m = nodes[int(np.argmax(np.abs(s[nodes])))]
        extents.append((abs(float(s[m])), int(m)))
    out = []
    for k, (i, t) in enumerate(crossings):
        (ext_a, m_a), (ext_b, m_b) = extents[k], extents[k + 1]
        w_a, dwdu_a = _smoothstep(ext_a / ramp)
        w_b, dwdu_b = _smoothstep(ext_b / ramp)
        grads = [(m_a, w_b * (dwdu_a / ramp) * math.copysign(1.0, s[m_a])),
                 (m_b, w_a * (dwdu_b / ramp) * math.copysign(1.0, s[m_b]))]
        out.append((i, t, w_a * w_b, grads))
    return out


def _smoothstep(u: float) -> tuple:
    """C1 ramp on [0, 1] and its derivative."""
    if u <= 0.0:
        return 0.0, 0.0
    if u >= 1.0:
        return 1.0, 0.0
    return u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u)


def _contact_terms(q: np.ndarray, problem: EquilibriumProblem,
                   with_jacobian: bool):
    """Per-contact penetration records.

    Each crossing contributes an effective depth ``deff = w * d`` where d is
    the raw radial penetration at the crossing point and w ramps smoothly from
    0 to 1 with the axial span of the crossing link about the ring plane; the
    ramp keeps the energy C1 when a crossing appears or vanishes as a node
    slides through the plane.

    Returns (pos, J, terms); each term is a dict with the ring index, the link
    index, raw depth d, ramp weight w, effective depth, the in-plane radial
    unit vector u at the crossing, and (when requested) d deff/d q.
    """
    body_radius = problem.cfg.seg_diameter / 2.0
    ramp = 0.5 * problem.cfg.seg_length
    pos, J = _chain_kinematics(q, problem.cfg, with_jacobian)
    terms = []
    for ci, ring in enumerate(problem.contacts):
        s = (pos - ring.center) @ ring.axis
        for i, t, weight, w_grads in _weighted_crossings(s, ramp):
            xc = (1.0 - t) * pos[i] + t * pos[i + 1]
            w = xc - ring.center
            w_perp = w - (w @ ring.axis) * ring.axis
            rho = float(np.linalg.norm(w_perp))
            d = rho + body_radius - ring.inner_radius
            if d <= 0.0 or rho < 1e-12:
                continue
            u = w_perp / rho
            term = {"ring": ci, "link": i, "depth": d, "weight": weight,
                    "deff": weight * d, "u": u, "t": t}
            if with_jacobian:
                si, sj = float(s[i]), float(s[i + 1])
                dsi = ring.axis @ J[i]
                dsj = ring.axis @ J[i + 1]
                dt = (-sj * dsi + si * dsj) / (si - sj) ** 2
                dxc = ((1.0 - t) * J[i] + t * J[i + 1]
                       + np.outer(pos[i + 1] - pos[i], dt))
                ddepth = u @ dxc
                ddeff = weight * ddepth
                for m, dw_ds in w_grads:
                    ddeff = ddeff + d * dw_ds * (ring.axis @ J[m])
                term["ddeff"] = ddeff
            terms.append(term)
    return pos, J, terms


def total_energy(q, problem: EquilibriumProblem) -> float:
    """Spring + contact-penalty (+ optional load) energy, mN*mm."""
    q = np.asarray(q, float).ravel()
    dq = q.reshape(-1, 2) - problem.rest
    e = 0.5 * float(problem.stiffness @ np.sum(dq * dq, axis=1))
    if problem.contacts:
        _, _, terms = _contact_terms(q, problem, with_jacobian=False)
        d0 = problem.penalty_knee
        for t in terms:
            d = t["deff"]
            # Huber penalty: quadratic up to the knee, linear beyond, so deep
            # (funneling) penetrations keep a bounded restoring force.
            e += problem.k_contact * (0.5 * d * d if d <= d0
                                      else d0 * (d - 0.5 * d0))
    if problem.uniform_load is not None:
        pos, _ = _chain_kinematics(q, problem.cfg, with_jacobian=False)
        e -= float(np.sum(pos[1:] @ np.asarray(problem.uniform_load, float)))
    return e


def energy_gradient(q, problem: EquilibriumProblem) -> np.ndarray:
    """Analytic gradient of total_energy w.r.t. the flattened joint vector."""
    q = np.asarray(q, float).ravel()
    dq = q.reshape(-1, 2) - problem.rest
    g = (problem.stiffness[:, None] * dq).ravel()
    needs_chain = problem.contacts or problem.uniform_load is not None
    if needs_chain:
        pos, J, terms = _contact_terms(q, problem, with_jacobian=True)
        for t in terms:
            g += (problem.k_contact * min(t["deff"], problem.penalty_knee)
                  * t["ddeff"])
        if problem.uniform_load is not None:
            load = np.asarray(problem.uniform_load, float)
            g -= np.sum(load @ J[1:], axis=0)
    return g


def _project(q: np.ndarray, bound: float) -> np.ndarray:
    """Project each joint 2-vector onto the disk |bend| <= bound."""
    qj = q.reshape(-1, 2).copy()
    norms = np.linalg.norm(qj, axis=1)
    over = norms > bound
    if np.any(over):
        qj[over] *= (bound / norms[over])[:, None]
    return qj.ravel()


def _problem_scale(problem: EquilibriumProblem) -> float:
    return 1.0 + float(np.min(problem.stiffness)) * problem.bound + problem.k_contact


def _to_polar(q: np.ndarray, bound: float) -> np.ndarray:
    """Flattened (theta, gamma) per joint from the 2-vector parameterization,
    with theta clipped into the feasible box."""
    qj = q.reshape(-1, 2)
    theta = np.minimum(np.linalg.norm(qj, axis=1), bound)
    gamma = np.arctan2(qj[:, 1], qj[:, 0])
    gamma[theta < 1e-15] = 0.0
    return np.column_stack([theta, gamma]).ravel()


def _from_polar(x: np.ndarray) -> np.ndarray:
    theta, gamma = x[0::2], x[1::2]
    return np.column_stack([theta * np.cos(gamma),
                            theta * np.sin(gamma)]).ravel()


def solve_equilibrium(problem: EquilibriumProblem, initial,
                      max_iter: int = 10_000,
                      energy_trace: list | None = None) -> np.ndarray:
    """Bound-feasible local minimizer of total_energy.

    Works in polar joint coordinates (bend angle, bend plane), where the
    per-joint disk bound becomes a box bound on the bend angle, and descends
    with L-BFGS-B. Raises SolverFailure when the returned point's unit-step
    projected-gradient norm exceeds 1e-4 of the problem scale.

    When energy_trace is a list, the energy at the starting point and after
    every accepted iterate is appended to it, in order.
    """
    if not problem.contacts and problem.uniform_load is None:
        # Decoupled quadratic springs: the disk-constrained minimum is the
        # per-joint radial projection of the rest configuration, exactly.
        q = _project(problem.rest.ravel().copy(), problem.bound)
        if energy_trace is not None:
            start = _project(np.asarray(initial, float).ravel(), problem.bound)
            energy_trace.append(total_energy(start, problem))
            energy_trace.append(total_energy(q, problem))
        return q
    scale = _problem_scale(problem)
    fail_tol = 1e-4 * scale

    def fun(x):
        q = _from_polar(x)
        g = energy_gradient(q, problem)
        theta, gamma = x[0::2], x[1::2]
        cg, sg = np.cos(gamma), np.sin(gamma)
        gx, gy = g[0::2], g[1::2]
        jac = np.empty_like(x)
        jac[0::2] = gx * cg + gy * sg
        jac[1::2] = theta * (-gx * sg + gy * cg)
        return total_energy(q, problem), jac

    q = _project(np.asarray(initial, float).ravel(), problem.bound)
    bounds = [(0.0, problem.bound), (None, None)] * (q.size // 2)
    tol = 1e-6 * scale
    pg = math.inf
    message = ""
    if energy_trace is not None:
        energy_trace.append(total_energy(q, problem))
    callback = None
    if energy_trace is not None:
        callback = lambda x: energy_trace.append(
            total_energy(_from_polar(x), problem))
    for _ in range(10):
        res = minimize(fun, _to_polar(q, problem.bound), jac=True,
                       method="L-BFGS-B", bounds=bounds, callback=callback,
                       options={"maxiter": max_iter, "maxfun": 10 * max_iter,
                                "ftol": 1e-14, "gtol": 1e-10 * scale})
        q = _project(_from_polar(res.x), problem.bound)
        g = energy_gradient(q, problem)
        pg = float(np.linalg.norm(q - _project(q - g, problem.bound)))
        message = res.message
        if pg <= tol:
            return q
        # The polar chart is blind at theta = 0 (the bend-plane gradient
        # vanishes), so a straight joint can mask a q-space descent
        # direction. Nudge along the projected gradient, which re-orients
        # the bend plane, and restart.
        e = total_energy(q, problem)
        alpha, stepped = 1.0, False
        for _ in range(60):
            q_new = _project(q - alpha * g, problem.bound)
            e_new = total_energy(q_new, problem)
            if e_new < e:
                q, stepped = q_new, True
                if energy_trace is not None:
                    energy_trace.append(e_new)
                break
            alpha *= 0.5
        if not stepped:
            break
    if pg > fail_tol:
        raise SolverFailure(
            f"no equilibrium found ({message}), projected gradient {pg:.3e}")
    return q


@dataclass(frozen=True)
class ContactForce:
    """One checkpoint contact at one instant."""

    ring_index: int
    label: str
    segment: int        # 1-based segment crossing the ring
    penetration: float  # mm
    force: float        # mN, penalty magnitude projected on the sensor axis


def contact_report(q, problem: EquilibriumProblem) -> list:
    """Detailed per-crossing contact forces at a configuration."""
    q = np.asarray(q, float).ravel()
    _, _, terms = _contact_terms(q, problem, with_jacobian=False)
    out = []
    for t in terms:
        ring = problem.contacts[t["ring"]]
        proj = abs(float(t["u"] @ ring.sensor_axis))
        # Normal force is dE/dd = k * min(w*d, knee) * w; the load cell
        # reads the magnitude of its projection on the sensor axis.
        force = (problem.k_contact * t["weight"]
                 * min(t["deff"], problem.penalty_knee) * proj)
        out.append(ContactForce(ring_index=t["ring"], label=ring.label,
                                segment=t["link"] + 1,
                                penetration=t["depth"], force=force))
    return out


def crossing_forces(q, problem: EquilibriumProblem) -> list:
    """Every ring-plane crossing, including the clear ones (zero penetration,
    zero reading); used for force traces."""
    q = np.asarray(q, float).ravel()
    body_radius = problem.cfg.seg_diameter / 2.0
    ramp = 0.5 * problem.cfg.seg_length
    pos, _ = _chain_kinematics(q, problem.cfg, with_jacobian=False)
    out = []
    for ci, ring in enumerate(problem.contacts):
        s = (pos - ring.center) @ ring.axis
        for i, t, weight, _ in _weighted_crossings(s, ramp):
            xc = (1.0 - t) * pos[i] + t * pos[i + 1]
            w = xc - ring.center
            w_perp = w - (w @ ring.axis) * ring.axis
            rho = float(np.linalg.norm(w_perp))
            d = max(0.0, rho + body_radius - ring.inner_radius)
            force = 0.0
            if d > 0.0 and rho > 1e-12:
                proj = abs(float((w_perp / rho) @ ring.sensor_axis))
                force = (problem.k_contact * weight
                         * min(weight * d, problem.penalty_knee) * proj)
            out.append(ContactForce(ring_index=ci, label=ring.label,
                                    segment=i + 1, penetration=d, force=force))
    return out


def checkpoint_forces(q, problem: EquilibriumProblem) -> np.ndarray:
    """Per-checkpoint force reading, mN: penalty force of each crossing
    projected onto the ring's single sensor axis (compression side), summed
    per ring. Zero where the body does not penetrate."""
    forces = np.zeros(len(problem.contacts))
    for c in contact_report(q, problem):
        forces[c.ring_index] += c.force
    return forces
