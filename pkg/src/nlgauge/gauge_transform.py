"""Transformation of equation coefficients under gauge elements.

Three routes are provided:

* :func:`transform_ab` -- exact change of variables in the coupled (S, T) PDE,
  valid for the full group; this is the reference implementation;
* :func:`transform_numu_subgroup` -- the closed-form subgroup laws in nu/mu form;
* :func:`homogeneous_matrix_law` -- the tabulated 4x4 / 6x6 matrix laws, applied
  literally so they can be compared against the engine.

Engine derivation.  Write X = (S, T), X' = A X + h with B = A^-1.  Substituting
X = B (X' - h) into the PDE and adding d/dt of the transformation gives

    C2'   = A C2 B
    Q_i'  = B^T (sum_m A_im Q_m) B,        Q_a = [[a3, a4/2], [a4/2, a5]]
    Clin' = (A Clin + Adot) B
    W'    = A W B - 2 Q_i' grad h           (row i, column j: -2 sum_l Q_i'[j, l] grad h_l)
    w0'   = A w0 - C2' lap h - Clin' h - (A W B) grad h + grad h^T Q_i' grad h + hdot

where W = [[u1, u2], [v1, v2]] and w0 = (u0, v0).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import expr as ex
from .equation_model import (AB_SCALARS, ABCoefficients, NuMuCoefficients, ab_from_numu,
                             numu_from_ab)
from .errors import FamilyError, ValidationError
from .expr import ZERO, Expression, as_expr, dot, vadd, vscale
from .gauge_group import GaugeElement, is_subgroup

TOL = 1e-10


# -- small expression linear algebra ------------------------------------------

def _mm(P, Q):
    return tuple(tuple(P[i][0] * Q[0][j] + P[i][1] * Q[1][j] for j in range(2)) for i in range(2))


def _madd(P, Q):
    return tuple(tuple(P[i][j] + Q[i][j] for j in range(2)) for i in range(2))


def _mscale(c, P):
    return tuple(tuple(c * P[i][j] for j in range(2)) for i in range(2))


def _transpose(P):
    return ((P[0][0], P[1][0]), (P[0][1], P[1][1]))


def _inverse_exprs(g: GaugeElement):
    (a, b), (c, d) = g.matrix_exprs
    if g.lam.is_number(0.0) and g.kappa.is_number(1.0):
        return ((1 / a, -b / a), (ex.ZERO, ex.ONE))
    det = g.delta
    return ((d / det, -b / det), (-c / det, a / det))


def _vsum(vectors, dim):
    out = ex.vzero(dim)
    for v in vectors:
        out = vadd(out, v)
    return out


# -- engine -------------------------------------------------------------------

def transform_ab(ab: ABCoefficients, g: GaugeElement, times=None) -> ABCoefficients:
    """Coefficients of the equation obeyed by (S', T') = g (S, T)."""
    g.check_invertible(times)
    dim = ab.dim
    extra = (g.theta.free_vars | g.phi.free_vars) - set(ex.coords(dim)) - {"t"}
    if extra:
        raise ValidationError(f"gauge affine part uses {sorted(extra)} beyond dimension {dim}")
    A = g.matrix_exprs
    B = _inverse_exprs(g)
    Adot = tuple(tuple(e.diff("t") for e in row) for row in A)
    h = g.affine_exprs
    grad_h = tuple(ex.gradient(e, dim) for e in h)
    lap_h = tuple(ex.laplacian(e, dim) for e in h)
    hdot = tuple(e.diff("t") for e in h)

    C2 = ((ab.a1, ab.a2), (ab.b1, ab.b2))
    C2p = _mm(_mm(A, C2), B)
    Q = (((ab.a3, ab.a4 / 2), (ab.a4 / 2, ab.a5)),
         ((ab.b3, ab.b4 / 2), (ab.b4 / 2, ab.b5)))
    Bt = _transpose(B)
    Qp = tuple(_mm(_mm(Bt, _madd(_mscale(A[i][0], Q[0]), _mscale(A[i][1], Q[1]))), B)
               for i in range(2))
    Clin = ((ab.a6, ab.a7), (ab.b6, ab.b7))
    Clp = _mm(_madd(_mm(A, Clin), Adot), B)

    W = ((ab.u1, ab.u2), (ab.v1, ab.v2))
    AWB = tuple(tuple(_vsum([vscale(A[i][m] * B[n][j], W[m][n])
                             for m in range(2) for n in range(2)], dim)
                      for j in range(2)) for i in range(2))
    Wp = tuple(tuple(_vsum([AWB[i][j]] + [vscale(-2 * Qp[i][j][l], grad_h[l]) for l in range(2)],
                           dim)
                     for j in range(2)) for i in range(2))
    w0 = (ab.u0, ab.v0)
    w0p = []
    for i in range(2):
        acc = ZERO
        for m in range(2):
            acc = acc + A[i][m] * w0[m] - C2p[i][m] * lap_h[m] - Clp[i][m] * h[m]
            acc = acc - dot(AWB[i][m], grad_h[m])
            for l in range(2):
                acc = acc + Qp[i][l][m] * dot(grad_h[l], grad_h[m])
        w0p.append(acc + hdot[i])

    out = ABCoefficients(
        a1=C2p[0][0], a2=C2p[0][1], b1=C2p[1][0], b2=C2p[1][1],
        a3=Qp[0][0][0], a4=2 * Qp[0][0][1], a5=Qp[0][1][1],
        b3=Qp[1][0][0], b4=2 * Qp[1][0][1], b5=Qp[1][1][1],
        a6=Clp[0][0], a7=Clp[0][1], b6=Clp[1][0], b7=Clp[1][1],
        u0=w0p[0], v0=w0p[1], u1=Wp[0][0], u2=Wp[0][1], v1=Wp[1][0], v2=Wp[1][1],
        dim=dim,
    )
    return out


# -- closed-form subgroup laws ------------------------------------------------

def transform_numu_subgroup(nm: NuMuCoefficients, g: GaugeElement, times=None) -> NuMuCoefficients:
    """Subgroup laws for the real-coefficient family, term by term."""
    if not is_subgroup(g):
        raise ValidationError("transform_numu_subgroup needs a subgroup element "
                              "(lambda = 0, kappa = 1, phi = 0)")
    bad = nm.family_violations()
    if bad:
        raise FamilyError(f"closed-form subgroup laws need {bad} to vanish")
    g.check_invertible(times)
    dim = nm.dim
    L, G, th = g.Lambda, g.gamma, g.theta
    Ld, Gd = L.diff("t"), G.diff("t")
    nu1, nu2 = nm.nu1, nm.nu2
    mu1, mu3, mu4 = nm.mu1, nm.mu3, nm.mu4
    grad_th = ex.gradient(th, dim)
    A, A1, A2, U = nm.Acal, nm.A1, nm.A2, nm.U
    return NuMuCoefficients(
        nu1=nu1 / L,
        nu2=-G / (2 * L) * nu1 + nu2,
        mu1=-G / L * nu1 + mu1,
        mu2=G * G / (2 * L) * nu1 - G * nu2 - G / 2 * mu1 + L * nm.mu2,
        mu3=mu3 / L,
        mu4=-G / L * mu3 + mu4,
        mu5=G * G / (4 * L) * mu3 - G / 2 * mu4 + L * nm.mu5,
        alpha1=L * nm.alpha1 - G / 2 * nm.alpha2 + (Ld / L * G - Gd) / 2,
        alpha2=nm.alpha2 - Ld / L,
        Acal=vadd(A, vscale(-nu1 / L, grad_th)),
        A1=vadd(vadd(vadd(vscale(L, A1), vscale(-G, A)), vscale(-G / 2, A2)),
                vscale(G / L * nu1 - mu1 + G / L * mu3 - mu4, grad_th)),
        A2=vadd(A2, vscale(-2 * mu3 / L, grad_th)),
        U=(L * U - th.diff("t") + (Ld / L - nm.alpha2) * th + mu3 / L * dot(grad_th, grad_th)
           + (mu4 - mu3 * G / L) * ex.laplacian(th, dim) + G / 2 * ex.divergence(A2)
           - dot(A2, grad_th)),
        dim=dim,
    )


# -- printed matrix laws ------------------------------------------------------

def printed_matrix_4(L, G, l, k):
    """The tabulated 4x4 matrix (without the 1/Delta prefactor) for (a1, a2, b1, b2)."""
    return [[k * L, -l * L, k * G, -l * G],
            [-G * L, L * L, -G * G, G * L],
            [k * l, l * l, k * k, -k * l],
            [-l * G, l * L, -k * G, k * L]]


def printed_matrix_M(L, G, l, k):
    """The tabulated 6x6 matrix M (without the Delta^-2 prefactor) for (a3..a5, b3..b5)."""
    s = k * L + l * G
    return [[k * k * L, -k * l * L, l * l * L, k * k * G, -k * l * G, l * l * G],
            [-2 * k * G * L, L * s, -2 * l * L * L, -2 * k * G * G, G * s, -2 * l * G * L],
            [G * G * L, -G * L * L, L ** 3, G ** 3, -G * G * L, G * L * L],
            [k * k * l, -k * l * l, l ** 3, k ** 3, -k * k * l, k * l * l],
            [-2 * k * l * G, l * s, -2 * l * l * L, -2 * k * k * G, k * s, -2 * k * l * L],
            [l * G * G, -l * G * L, -l * L * L, k * G * G, -k * G * L, k * L * L]]


def printed_affine_column(L, G, l, k, Ld, Gd, ld, kd):
    """The tabulated affine column (without 1/Delta) for (a6, a7, b6, b7)."""
    return [k * Ld - l * Gd, L * Gd - G * Ld, k * ld - l * kd, L * kd - G * ld]


ROWS_4 = ("a1", "a2", "b1", "b2")
ROWS_M = ("a3", "a4", "a5", "b3", "b4", "b5")
ROWS_LIN = ("a6", "a7", "b6", "b7")


def homogeneous_matrix_law(ab: ABCoefficients, g: GaugeElement) -> ABCoefficients:
    """Apply the tabulated matrix laws literally to the 14 scalar coefficients.

    Field slots are taken from :func:`transform_ab`, since no closed form is
    tabulated for them.
    """
    if not g.is_homogeneous:
        raise ValidationError("the matrix laws apply to homogeneous elements (theta = phi = 0)")
    g.check_invertible()
    L, G, l, k = g.Lambda, g.gamma, g.lam, g.kappa
    det = g.delta
    P4 = printed_matrix_4(L, G, l, k)
    PM = printed_matrix_M(L, G, l, k)
    col = printed_affine_column(L, G, l, k, L.diff("t"), G.diff("t"), l.diff("t"), k.diff("t"))
    out = {}

    def apply(rows, P, scale, extra=None):
        src = [getattr(ab, n) for n in rows]
        for r, name in enumerate(rows):
            acc = ZERO
            for c, v in enumerate(src):
                acc = acc + P[r][c] * v
            if extra is not None:
                acc = acc + extra[r]
            out[name] = acc / scale

    apply(ROWS_4, P4, det)
    apply(ROWS_M, PM, det * det)
    apply(ROWS_LIN, P4, det, col)
    fields = transform_ab(ab, g)
    for n in ("u0", "v0", "u1", "u2", "v1", "v2"):
        out[n] = getattr(fields, n)
    return ABCoefficients(dim=ab.dim, **out)


# -- numeric matrix extraction -------------------------------------------------

def _const_element(M, Md=None):
    """Element with entries linear in t so that values at t=0 are M and slopes are Md."""
    Md = np.zeros((2, 2)) if Md is None else Md
    e = [[ex.add(ex.Num(M[i][j]), ex.mul(ex.Num(Md[i][j]), ex.Var("t"))) for j in range(2)]
         for i in range(2)]
    return GaugeElement(Lambda=e[0][0], gamma=e[0][1], lam=e[1][0], kappa=e[1][1])


def engine_matrices(M) -> dict:
    """Engine linear maps on the 4-, 6- and 4-slot blocks at a constant matrix M.

    Returned arrays include the 1/Delta (resp. 1/Delta^2) factors.
    """
    g = _const_element(M)
    out = {}
    for key, rows in (("C2", ROWS_4), ("Q", ROWS_M), ("Clin", ROWS_LIN)):
        mat = np.zeros((len(rows), len(rows)))
        for c, name in enumerate(rows):
            res = transform_ab(ABCoefficients.build(**{name: 1.0}), g, times=[0.0])
            mat[:, c] = [getattr(res, r)(t=0.0) for r in rows]
        out[key] = mat
    return out


def printed_matrices(M) -> dict:
    (L, G), (l, k) = M
    det = k * L - l * G
    P4 = np.array(printed_matrix_4(L, G, l, k)) / det
    return {"C2": P4, "Q": np.array(printed_matrix_M(L, G, l, k)) / det ** 2, "Clin": P4}


def engine_affine_column(M, Md):
    g = _const_element(M, Md)
    res = transform_ab(ABCoefficients.build(), g, times=[0.0])
    return np.array([getattr(res, r)(t=0.0) for r in ROWS_LIN])


# -- validation report --------------------------------------------------------

@dataclass
class TransformReport:
    samples: int
    seed: int
    slot_max_discrepancy: dict
    disagreeing_slots: list
    disagreeing_entries: list
    row_agreement: dict
    affine_column_max_discrepancy: float
    subgroup_slot_max_discrepancy: dict
    subgroup_disagreeing_slots: list
    invariants_preserved: bool
    invariants_max_drift: float
    field_elements: dict = field(default_factory=dict)

    @property
    def subgroup_agrees(self) -> bool:
        return not self.subgroup_disagreeing_slots

    def to_json(self) -> dict:
        d = asdict(self)
        d["subgroup_agrees"] = self.subgroup_agrees
        d["invariants_line"] = "pass" if self.invariants_preserved else "fail"
        return d


def _random_matrix(rng, min_det=0.2):
    while True:
        M = rng.uniform(-2.0, 2.0, size=(2, 2))
        if abs(np.linalg.det(M)) > min_det:
            return M


def _entry_names(key):
    rows = {"C2": ROWS_4, "Q": ROWS_M, "Clin": ROWS_LIN}[key]
    return [[f"{r}'<-{c}" for c in rows] for r in rows]


def random_family_numu(rng, dim=1) -> NuMuCoefficients:
    """Random constant/polynomial nu-mu coefficients in the real-coefficient family."""
    def sig():
        return ex.add(ex.Num(round(rng.uniform(-1, 1), 6)),
                      ex.mul(ex.Num(round(rng.uniform(-0.3, 0.3), 6)), ex.Var("t")))

    def fld():
        c = rng.uniform(-1, 1, size=4).round(6)
        return ex.parse(f"{c[0]}*sin({c[1]}*x + t) + {c[2]}*x^2*t + {c[3]}")

    nu1 = ex.Num(round(rng.uniform(0.3, 1.0) * rng.choice([-1, 1]), 6))
    return NuMuCoefficients(
        nu1=nu1, nu2=sig(), mu1=sig(), mu2=sig(), mu3=sig(), mu4=sig(), mu5=sig(),
        alpha1=sig(), alpha2=sig(), U=fld(), Acal=(fld(),), A1=(fld(),), A2=(fld(),), dim=dim)


def random_subgroup_element(rng) -> GaugeElement:
    c = rng.uniform(-1, 1, size=6).round(6)
    Lam = ex.parse(f"{1.0 + 0.5 * abs(c[0]):.6f}*exp({0.3 * c[1]:.6f}*t)")
    gam = ex.parse(f"{c[2]} + {0.2 * c[3]:.6f}*t")
    theta = ex.parse(f"{c[4]}*sin(x - {c[5]}*t) + {0.5 * c[5]:.6f}*x^2*t")
    return GaugeElement.subgroup(Lambda=Lam, gamma=gam, theta=theta)


def compare_numu(n1: NuMuCoefficients, n2: NuMuCoefficients, points) -> dict:
    s1, s2 = n1.sample(points), n2.sample(points)
    return {k: float(np.max(np.abs(s1[k] - s2[k]))) for k in s1}


def sample_points(rng, n=50, dim=1):
    xs = rng.uniform(-2, 2, size=(3, n))
    if dim < 3:
        xs[dim:] = 0.0
    ts = rng.uniform(0, 1, size=n)
    return (xs[0], xs[1], xs[2], ts)


def subgroup_consistency(nm, g, points) -> dict:
    """Slot discrepancies between the closed-form laws and the engine."""
    closed = transform_numu_subgroup(nm, g)
    engine = numu_from_ab(transform_ab(ab_from_numu(nm), g))
    return compare_numu(closed, engine, points)


def printed_field_elements(M, grad_theta, grad_phi) -> dict:
    """Engine vs printed values of the u1' coefficients of a3 and of v2."""
    (L, G), (l, k) = M
    det = k * L - l * G
    g = GaugeElement(Lambda=L, gamma=G, lam=l, kappa=k,
                     theta=ex.mul(ex.Num(grad_theta), ex.Var("x")),
                     phi=ex.mul(ex.Num(grad_phi), ex.Var("x")))
    u1_a3 = transform_ab(ABCoefficients.build(a3=1.0), g).u1[0](t=0.0)
    u1_v2 = transform_ab(ABCoefficients.build(v2=1.0), g).u1[0](t=0.0)
    p_a3 = (-2 * k * k * L * grad_theta + 2 * k * G * L * grad_phi) / det ** 2
    p_v2 = -l * G / det
    return {"u1_by_a3": abs(u1_a3 - p_a3), "u1_by_v2": abs(u1_v2 - p_v2)}


def validate_against_paper(samples: int = 20, seed: int = 0) -> TransformReport:
    """Adjudicate the tabulated matrix laws against the substitution engine."""
    rng = np.random.default_rng(seed)
    slot_max = {n: 0.0 for n in AB_SCALARS}
    entries = set()
    row_max = {}
    affine_max = 0.0
    inv_drift = 0.0
    field_max = {"u1_by_a3": 0.0, "u1_by_v2": 0.0}
    sub_max = {}
    for _ in range(samples):
        M = _random_matrix(rng)
        eng, pr = engine_matrices(M), printed_matrices(M)
        coeffs = rng.uniform(-1, 1, size=14)
        for key, rows in (("C2", ROWS_4), ("Q", ROWS_M), ("Clin", ROWS_LIN)):
            names = _entry_names(key)
            diff = np.abs(eng[key] - pr[key])
            vec = np.array([coeffs[AB_SCALARS.index(r)] for r in rows])
            out_diff = np.abs((eng[key] - pr[key]) @ vec)
            for r, name in enumerate(rows):
                slot_max[name] = max(slot_max[name], float(out_diff[r]))
                row_max[name + "'"] = max(row_max.get(name + "'", 0.0), float(diff[r].max()))
                for c in range(len(rows)):
                    if diff[r, c] > TOL * max(1.0, abs(eng[key][r, c])):
                        entries.add(names[r][c])
        Md = rng.uniform(-1, 1, size=(2, 2))
        (L, G), (l, k) = M
        col = np.array(printed_affine_column(L, G, l, k, *Md.ravel())) / (k * L - l * G)
        affine_max = max(affine_max, float(np.max(np.abs(engine_affine_column(M, Md) - col))))
        # I1 / I2 preservation by the engine on a random coefficient set
        ab = ABCoefficients.build(**{n: float(c) for n, c in zip(AB_SCALARS, coeffs)})
        abp = transform_ab(ab, _const_element(M), times=[0.0])
        I = (ab.a1(t=0) + ab.b2(t=0), ab.a1(t=0) * ab.b2(t=0) - ab.a2(t=0) * ab.b1(t=0))
        Ip = (abp.a1(t=0) + abp.b2(t=0), abp.a1(t=0) * abp.b2(t=0) - abp.a2(t=0) * abp.b1(t=0))
        inv_drift = max(inv_drift, abs(I[0] - Ip[0]), abs(I[1] - Ip[1]))
        fe = printed_field_elements(M, *rng.uniform(-1, 1, size=2))
        for n, v in fe.items():
            field_max[n] = max(field_max[n], v)
        # subgroup sector
        nm = random_family_numu(rng)
        gs = random_subgroup_element(rng)
        for n, v in subgroup_consistency(nm, gs, sample_points(rng)).items():
            sub_max[n] = max(sub_max.get(n, 0.0), v)
    rows_agree = {r: v <= TOL for r, v in sorted(row_max.items())}
    return TransformReport(
        samples=samples, seed=seed,
        slot_max_discrepancy=slot_max,
        disagreeing_slots=sorted(n for n, v in slot_max.items() if v > TOL),
        disagreeing_entries=sorted(entries),
        row_agreement=rows_agree,
        affine_column_max_discrepancy=affine_max,
        subgroup_slot_max_discrepancy=dict(sorted(sub_max.items())),
        subgroup_disagreeing_slots=sorted(n for n, v in sub_max.items() if v > TOL),
        invariants_preserved=bool(inv_drift <= 1e-12),
        invariants_max_drift=inv_drift,
        field_elements={n: {"max_discrepancy": v, "pass": bool(v <= TOL)}
                        for n, v in field_max.items()},
    )
