"""Causal separability: order cones, convex feasibility, witness extraction.

A process is causally separable (for a pair of orders) when it splits as
W = W_1 + W_2 with each summand PSD and inside its order's linear subspace
(the depolarize conditions that forbid signalling to earlier parties).
Feasibility is decided by Dykstra's alternating projections on the pair
(W_1, W_2); a stalled run is upgraded to a nonseparability certificate only
when a separating witness survives a sampled battery of ordered processes.

All projections run in coefficient space: operators are expanded over a
per-factor orthonormal Hermitian basis (identity direction first), where
every depolarize-type projector acts as a 0/1 mask and the affine projection
has a closed form.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .process import Party, ProcessMatrix, random_ordered_process, validate_process
from .tensor_core import HermitianOperator, Operator, depolarize, hermitian_basis

SEP_TOL = 1e-7
MAX_ITERS = 20000
STALL_WINDOW = 500
STALL_REL = 1e-12
STALL_CHECK_EVERY = 50


# ---------------------------------------------------------------------------
# order cones

@dataclass(frozen=True)
class OrderCone:
    """Processes compatible with one total order of the parties.

    Membership means: valid, and for every party the spaces of the parties
    strictly after it cannot carry information back, i.e. depolarizing those
    later spaces equals depolarizing them together with the party's own
    output. The condition for the final party reduces to an identity output
    factor; for a trivial (one-dimensional) output it is vacuous.
    """

    order: tuple[str, ...]

    def __init__(self, order):
        object.__setattr__(self, "order", tuple(order))

    def conditions(self, parties: tuple[Party, ...]):
        """(later-spaces, later-spaces + own output) label pairs, one per
        party with a nontrivial output; one-dimensional labels dropped."""
        by_name = {p.name: p for p in parties}
        if sorted(self.order) != sorted(by_name):
            raise ValueError(f"order {self.order} does not cover the parties "
                             f"{tuple(sorted(by_name))}")
        dims = {}
        for p in parties:
            for s in p.inputs + p.outputs:
                dims[s.label] = s.dim
        conds = []
        for k, name in enumerate(self.order):
            after = set()
            for later in self.order[k + 1:]:
                q = by_name[later]
                after |= set(q.input_labels) | set(q.output_labels)
            after = frozenset(l for l in after if dims[l] > 1)
            out = frozenset(l for l in by_name[name].output_labels if dims[l] > 1)
            if not out:
                continue
            conds.append((after, after | out))
        return conds


def order_cone_residual(p: ProcessMatrix, cone: OrderCone) -> float:
    """Largest Frobenius violation of the cone's linear conditions."""
    worst = 0.0
    for s, so in cone.conditions(p.parties):
        left = depolarize(p.w, sorted(s)) if s else p.w
        right = depolarize(p.w, sorted(so))
        worst = max(worst, (left - right).norm())
    return worst


# ---------------------------------------------------------------------------
# coefficient-space engine

class _CoeffBasis:
    """Real coefficients of Hermitian operators over per-factor Hermitian
    bases; depolarize-type projectors become elementwise 0/1 masks here."""

    def __init__(self, space):
        self.space = space
        self.labels = list(space.labels)
        self.dims = list(space.dims)
        self.bases = [hermitian_basis(d) for d in self.dims]
        self.dim = space.dim

    def to_coeffs(self, m: np.ndarray) -> np.ndarray:
        n = len(self.dims)
        t = m.reshape(self.dims + self.dims)
        for i in range(n):
            # contract factor i's (row, col) pair: c_k = Tr[B_k m_i]
            t = np.tensordot(self.bases[i].conj(), t, axes=([1, 2], [i, n]))
            t = np.moveaxis(t, 0, i)
        return t.real

    def from_coeffs(self, c: np.ndarray) -> np.ndarray:
        n = len(self.dims)
        t = c.astype(complex)
        for i in reversed(range(n)):
            t = np.tensordot(t, self.bases[i], axes=([i], [0]))
        # appended (row, col) pairs run i = n-1 .. 0; restore row-major order
        perm_rows = [2 * (n - 1 - i) for i in range(n)]
        perm_cols = [2 * (n - 1 - i) + 1 for i in range(n)]
        return t.transpose(perm_rows + perm_cols).reshape(self.dim, self.dim)

    def mask_for_conditions(self, conds) -> np.ndarray:
        """Product of (Id - (D_S - D_{S+o})): zero a coefficient iff its S
        indices are all identity while its o indices are not all identity."""
        shape = [d * d for d in self.dims]
        mask = np.ones(shape)
        grids = np.meshgrid(*[np.arange(s) for s in shape], indexing="ij")
        for s, so in conds:
            s_id = np.ones(shape, dtype=bool)
            for lab in s:
                s_id &= grids[self.labels.index(lab)] == 0
            o_id = np.ones(shape, dtype=bool)
            for lab in so - s:
                o_id &= grids[self.labels.index(lab)] == 0
            mask[s_id & ~o_id] = 0.0
        return mask

    def project_psd_coeffs(self, c: np.ndarray) -> np.ndarray:
        m = self.from_coeffs(c)
        e, v = np.linalg.eigh(m)
        np.clip(e, 0, None, out=e)
        return self.to_coeffs((v * e) @ v.conj().T)


# ---------------------------------------------------------------------------
# feasibility

@dataclass(frozen=True, eq=False)
class FeasibilityTrace:
    """Raw outcome of one Dykstra run (components unpolished)."""

    orders: tuple[OrderCone, OrderCone]
    converged: bool
    stalled: bool
    iterations: int
    residual: float
    residual_history: np.ndarray
    components: tuple[Operator, Operator]
    perp: float


@dataclass(frozen=True, eq=False)
class SeparabilityCertificate:
    """Verdict of check_separability.

    When separable, ``components`` are the PSD summands of W (so the
    normalized order-cone members are components[i] scaled by 1/q_i) and
    q = Tr components[0] / Tr W. When nonseparable, the verdict is "residual
    stalled above threshold"; it is certified only if ``witness`` is present,
    meaning a Hermitian S with Tr[S W] < 0 that stayed nonnegative on a
    seeded battery of ordered processes and their mixtures. The battery is
    sampled, not exhaustive; diagnostics carry its parameters and margins.

    The decomposition, when it exists, identifies W with a probabilistic
    mixture of ordered processes; whether the mixture is proper (classical
    ignorance) or improper (reduction of a larger process) is not decidable
    from W, and this certificate does not attempt to distinguish the two.
    """

    separable: bool
    q: float | None
    components: tuple[Operator, Operator] | None
    residual: float
    iterations: int
    witness: HermitianOperator | None
    witness_verified: bool
    diagnostics: dict
    trace: FeasibilityTrace


def _require_valid(p: ProcessMatrix) -> ProcessMatrix:
    if p.validity == "unchecked":
        p = validate_process(p)
    if p.validity != "valid":
        raise ValueError(f"process is not valid: {p.reason}")
    return p


def _default_orders(parties: tuple[Party, ...]) -> list[tuple[str, ...]]:
    names = sorted(p.name for p in parties)
    if len(parties) == 2:
        return [(names[0], names[1]), (names[1], names[0])]
    trivial = [p.name for p in parties if p.trivial_output]
    if len(parties) == 3 and len(trivial) == 1:
        a, b = sorted(n for n in names if n != trivial[0])
        return [(a, b, trivial[0]), (b, a, trivial[0])]
    raise ValueError("no default order pair for this party structure; pass "
                     "two total orders explicitly")


def _dykstra(basis: _CoeffBasis, w: np.ndarray, masks, tol, max_iters,
             stall_window, stall_rel):
    """Alternating projections on (x1, x2) between the affine set
    {x_i in L_i, x1 + x2 = W_par} and the PSD product cone. The reported
    residual sqrt(gap^2 + perp^2) also charges the part of W outside the
    union of the two subspaces, which no feasible pair can reproduce."""
    m1, m2 = masks
    mu = 1 - (1 - m1) * (1 - m2)
    wc = basis.to_coeffs(w)
    wpar = wc * mu
    perp = float(np.linalg.norm(wc - wpar))

    def proj_affine(y1, y2):
        t1 = y1 * m1
        t2 = y2 * m2
        rhs = t1 + t2 - wpar
        v12 = rhs * m1 * m2
        return t1 - rhs * m1 + 0.5 * v12, t2 - rhs * m2 + 0.5 * v12

    b1 = wpar / 2
    b2 = wpar / 2
    p1 = np.zeros_like(b1)
    p2 = np.zeros_like(b1)
    q1 = np.zeros_like(b1)
    q2 = np.zeros_like(b1)
    hist = []
    res = np.inf
    stalled = False
    it = 0
    for it in range(1, max_iters + 1):
        a1, a2 = proj_affine(b1 + p1, b2 + p2)
        p1 = b1 + p1 - a1
        p2 = b2 + p2 - a2
        nb1 = basis.project_psd_coeffs(a1 + q1)
        nb2 = basis.project_psd_coeffs(a2 + q2)
        q1 = a1 + q1 - nb1
        q2 = a2 + q2 - nb2
        gap2 = np.linalg.norm(a1 - nb1) ** 2 + np.linalg.norm(a2 - nb2) ** 2
        res = float(np.sqrt(gap2 + perp**2))
        hist.append(res)
        b1, b2 = nb1, nb2
        if res < tol:
            break
        if it >= stall_window and it % STALL_CHECK_EVERY == 0:
            old = hist[it - stall_window]
            if (old - res) / max(old, 1e-300) < stall_rel:
                stalled = True
                break
    return b1, b2, res, it, np.asarray(hist), perp, stalled


def check_separability(
    p: ProcessMatrix,
    orders=None,
    *,
    tol: float = SEP_TOL,
    max_iters: int = MAX_ITERS,
    stall_window: int = STALL_WINDOW,
    stall_rel: float = STALL_REL,
    attempt_witness: bool = True,
    witness_seed: int = 7,
    battery_per_order: int = 500,
    battery_mixtures: int = 500,
) -> SeparabilityCertificate:
    """Decide whether W mixes processes from two order cones.

    Runs Dykstra's algorithm on the summand pair. Residual below tol means
    separable: the certificate carries the PSD summands (polished back onto
    their linear subspaces) and the weight q of the first order. Otherwise
    the run is reported nonseparable, and a witness is extracted and battery
    tested unless attempt_witness is false.
    """
    p = _require_valid(p)
    if orders is None:
        orders = _default_orders(p.parties)
    cones = tuple(o if isinstance(o, OrderCone) else OrderCone(o) for o in orders)
    if len(cones) != 2 or cones[0].order == cones[1].order:
        raise ValueError("separability is decided against exactly two distinct orders")

    basis = _CoeffBasis(p.w.space)
    masks = tuple(basis.mask_for_conditions(c.conditions(p.parties)) for c in cones)
    b1, b2, res, it, hist, perp, stalled = _dykstra(
        basis, p.w.mat, masks, tol, max_iters, stall_window, stall_rel
    )
    trace = FeasibilityTrace(
        orders=cones,
        converged=res < tol,
        stalled=stalled,
        iterations=it,
        residual=res,
        residual_history=hist,
        components=tuple(
            Operator(p.w.space, basis.from_coeffs(b)) for b in (b1, b2)
        ),
        perp=perp,
    )
    diagnostics = {
        "perp": perp,
        "stalled": stalled,
        "verification": "sampled battery, not exhaustive",
    }

    if trace.converged:
        # mask once more so each summand sits exactly in its subspace
        comps = tuple(
            HermitianOperator(p.w.space, basis.from_coeffs(b * m))
            for b, m in zip((b1, b2), masks)
        )
        q = float(np.clip(comps[0].trace().real / p.w.trace().real, 0.0, 1.0))
        diagnostics["reconstruction"] = float(
            (comps[0] + comps[1] - p.w).norm()
        )
        diagnostics["cone_residuals"] = [
            order_cone_residual(ProcessMatrix(p.parties, c), cone)
            for c, cone in zip(comps, cones)
        ]
        return SeparabilityCertificate(
            separable=True, q=q, components=comps, residual=res, iterations=it,
            witness=None, witness_verified=False, diagnostics=diagnostics,
            trace=trace,
        )

    witness = None
    if attempt_witness:
        witness, wdiag = extract_witness(
            p, trace, seed=witness_seed, samples_per_order=battery_per_order,
            n_mixtures=battery_mixtures, eps=tol,
        )
        diagnostics.update(wdiag)
    return SeparabilityCertificate(
        separable=False, q=None, components=None, residual=res, iterations=it,
        witness=witness, witness_verified=witness is not None,
        diagnostics=diagnostics, trace=trace,
    )


# ---------------------------------------------------------------------------
# witness extraction

def _project_cone_psd(basis, mask, z, iters=300, tol=1e-9):
    """Nearest point of PSD ∩ L (inner Dykstra between mask and eigenclip)."""
    x = basis.to_coeffs(z)
    p = np.zeros_like(x)
    gap = np.inf
    for _ in range(iters):
        y = (x + p) * mask
        p = x + p - y
        x = basis.project_psd_coeffs(y)
        gap = np.linalg.norm(x - y)
        if gap < tol:
            break
    return basis.from_coeffs(x)


def _nearest_separable(basis, masks, w, x1, x2, outer=60, tol=1e-8):
    """Two-block alternating minimization of |W - x1 - x2| over K1 x K2."""
    hist = []
    for k in range(outer):
        x1 = _project_cone_psd(basis, masks[0], w - x2)
        x2 = _project_cone_psd(basis, masks[1], w - x1)
        hist.append(float(np.linalg.norm(w - x1 - x2)))
        if k > 3 and abs(hist[-2] - hist[-1]) < tol:
            break
    return x1, x2, hist


def extract_witness(
    p: ProcessMatrix,
    trace: FeasibilityTrace,
    *,
    seed: int,
    samples_per_order: int = 500,
    n_mixtures: int = 500,
    eps: float = SEP_TOL,
):
    """Separating direction from a failed feasibility run, battery tested.

    Refines the Dykstra components by alternating minimization to the
    nearest sum V of cone members, takes D = W - V, and shifts along the
    identity so separable processes score nonnegative:
    S ∝ -D + ((<D,V> + 0.01 |D|^2) / Tr W) 1. Accepted only if
    Tr[S W] < -10 eps and the battery minimum over sampled ordered processes
    (per order, plus mixtures) stays >= -eps. Returns (witness or None,
    diagnostics); the battery is sampled evidence, not a proof.
    """
    if trace.converged:
        raise ValueError("witness extraction requires a failed feasibility run")
    basis = _CoeffBasis(p.w.space)
    masks = tuple(basis.mask_for_conditions(c.conditions(p.parties))
                  for c in trace.orders)
    w = p.w.mat
    x1, x2, hist = _nearest_separable(
        basis, masks, w, trace.components[0].mat, trace.components[1].mat
    )
    v = x1 + x2
    d = w - v
    c1 = np.einsum("ij,ij->", d.conj(), v).real
    shift = (c1 + 0.01 * np.linalg.norm(d) ** 2) / p.w.trace().real
    s = -d + shift * np.eye(w.shape[0])
    s = (s + s.conj().T) / 2
    s /= np.linalg.norm(s)
    overlap = float(np.einsum("ij,ij->", s.conj(), w).real)

    rng = np.random.default_rng(seed)
    by_name = {q.name: q for q in p.parties}
    battery_min = np.inf
    samples = []
    for cone in trace.orders:
        ordered_parties = [by_name[n] for n in cone.order]
        batch = []
        for _ in range(samples_per_order):
            wo = random_ordered_process(ordered_parties, rng).w.mat
            batch.append(wo)
            battery_min = min(battery_min,
                              float(np.einsum("ij,ij->", s.conj(), wo).real))
        samples.append(batch)
    for _ in range(n_mixtures):
        wa = samples[0][rng.integers(0, samples_per_order)]
        wb = samples[1][rng.integers(0, samples_per_order)]
        t = rng.uniform()
        wm = t * wa + (1 - t) * wb
        battery_min = min(battery_min,
                          float(np.einsum("ij,ij->", s.conj(), wm).real))

    diagnostics = {
        "witness_overlap": overlap,
        "battery_min": battery_min,
        "separable_distance": hist[-1],
        "refinement_steps": len(hist),
        "samples_per_order": samples_per_order,
        "n_mixtures": n_mixtures,
        "witness_seed": seed,
    }
    accepted = overlap < -10 * eps and battery_min >= -eps
    if not accepted:
        diagnostics["rejected"] = (
            f"overlap {overlap:.3e} vs < {-10 * eps:.1e}, "
            f"battery min {battery_min:.3e} vs >= {-eps:.1e}"
        )
        return None, diagnostics
    return HermitianOperator(p.w.space, s), diagnostics
