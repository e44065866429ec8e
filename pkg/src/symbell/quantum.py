"""Bell operators in the symmetric subspace, Dicke states and the LMG model.

Dicke-basis convention: index ``k`` counts qubits in ``|1>`` and the Bell-side
observable ``sigma_z`` acts as ``+1`` on ``|0>``, so ``S_z |D^k> = (n/2 - k) |D^k>``.
The LMG functions use the excitation convention instead (``sigma_z`` is ``+1``
on ``|1>``); see :func:`lmg_hamiltonian_sym`.

Every collective operator built here is real: measurement directions lie in
the xz-plane.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.optimize import minimize_scalar

from .core import BellInequality, ConsistencyError, PreconditionError, SymbellError

FULL_SPACE_MAX_N = 10
GRID_POINTS = 1024

_I2 = np.eye(2)
_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


class ConvergenceError(SymbellError):
    """The eigensolver did not converge within its iteration budget."""


@dataclass(frozen=True)
class MeasurementSettings:
    """``M0 = sigma_z`` and ``M1 = cos(theta) sigma_z + sin(theta) sigma_x``."""

    theta: float

    def __post_init__(self) -> None:
        t = float(self.theta)
        if not (0.0 <= t <= math.pi) or math.isnan(t):
            raise PreconditionError(f"theta must lie in [0, pi], got {self.theta!r}")
        object.__setattr__(self, "theta", t)

    @property
    def m0(self) -> tuple[float, float, float]:
        return (0.0, 0.0, 1.0)

    @property
    def m1(self) -> tuple[float, float, float]:
        return (math.sin(self.theta), 0.0, math.cos(self.theta))

    def qubit_observables(self) -> tuple[np.ndarray, np.ndarray]:
        return _SZ.copy(), math.cos(self.theta) * _SZ + math.sin(self.theta) * _SX


@dataclass(frozen=True, eq=False)
class SymmetricOperator:
    """Real symmetric pentadiagonal matrix in the Dicke basis, lower band storage.

    ``bands[0]`` is the diagonal, ``bands[1][k]`` the entry ``(k+1, k)``,
    ``bands[2][k]`` the entry ``(k+2, k)`` (padded with zeros at the end).
    """

    n: int
    bands: np.ndarray
    band: int = 2

    def __post_init__(self) -> None:
        b = np.asarray(self.bands, dtype=float)
        if b.shape != (self.band + 1, self.n + 1):
            raise PreconditionError(f"bands must have shape {(self.band + 1, self.n + 1)}, got {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "bands", b)

    @property
    def diagonal(self) -> np.ndarray:
        return self.bands[0]

    def dense(self) -> np.ndarray:
        d = self.n + 1
        out = np.zeros((d, d))
        for off in range(self.band + 1):
            idx = np.arange(d - off)
            out[idx + off, idx] = self.bands[off][: d - off]
            out[idx, idx + off] = self.bands[off][: d - off]
        return out

    def expectation(self, state: np.ndarray) -> float:
        psi = np.asarray(state, dtype=float)
        out = self.bands[0] @ (psi * psi)
        for off in range(1, self.band + 1):
            out += 2.0 * self.bands[off][: self.n + 1 - off] @ (psi[off:] * psi[:-off])
        return float(out)


@dataclass(frozen=True)
class DickeState:
    n: int
    k: int

    def __post_init__(self) -> None:
        if self.n < 1 or not 0 <= self.k <= self.n:
            raise PreconditionError(f"need 0 <= k <= n with n >= 1, got n={self.n}, k={self.k}")

    @property
    def amplitudes(self) -> np.ndarray:
        v = np.zeros(self.n + 1)
        v[self.k] = 1.0
        return v

    def full(self) -> np.ndarray:
        return dicke_state_full(self.n, self.k)


def dicke_state_full(n: int, k: int) -> np.ndarray:
    """``|D_n^k>`` as a ``2**n`` vector (qubit 0 is the most significant bit)."""
    if n > 20:
        raise PreconditionError(f"full-space Dicke vector limited to n <= 20, got n={n}")
    idx = np.arange(2**n)
    weight = np.zeros(2**n, dtype=int)
    for q in range(n):
        weight += (idx >> q) & 1
    v = (weight == k).astype(float)
    return v / math.sqrt(math.comb(n, k))


# --- collective spin pieces ------------------------------------------------


def _ladder(n: int) -> np.ndarray:
    """``c[k] = <D^k| S_x |D^(k+1)> = sqrt((k+1)(n-k)) / 2`` for ``k = 0..n-1``."""
    k = np.arange(n)
    return np.sqrt((k + 1.0) * (n - k)) / 2.0


def collective_spin(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``(S_x, S_z)`` on the symmetric subspace."""
    c = _ladder(n)
    sx = np.diag(c, 1) + np.diag(c, -1)
    sz = np.diag(n / 2.0 - np.arange(n + 1))
    return sx, sz


class _OperatorParts:
    """θ-independent pieces of a symmetric-subspace Bell operator.

    Diagonal entries are ``const + cos*t1 + cos^2*t2 + sin^2*t3`` with the
    four coefficient arrays reduced in exact arithmetic first, because the
    terms individually grow like ``n**4`` while their sum can be O(1).
    """

    def __init__(self, ineq: BellInequality):
        n = ineq.n
        al, be, ga, de, ep = (Fraction(x) for x in ineq.coefficients)
        bc = Fraction(ineq.beta_c)
        const, t1, t2, t3 = [], [], [], []
        for k in range(n + 1):
            m = Fraction(n, 2) - k
            sx2 = Fraction(k * (n - k + 1) + (k + 1) * (n - k), 4)
            const.append(float(bc + 2 * al * m + 2 * ga * m * m - (ga + ep) * n / 2))
            t1.append(float(2 * be * m + 4 * de * m * m - de * n))
            t2.append(float(2 * ep * m * m))
            t3.append(float(2 * ep * sx2))
        self.n = n
        self.diag = np.array([const, t1, t2, t3])
        c = _ladder(n)
        msum = n - 2.0 * np.arange(n) - 1.0  # m_k + m_(k+1)
        self.off1_sin = (2 * float(be) + 2 * float(de) * msum) * c
        self.off1_sincos = 2 * float(ep) * msum * c
        self.off2_sin2 = 2 * float(ep) * c[:-1] * c[1:] if n >= 2 else np.zeros(0)

    def at(self, theta: float) -> SymmetricOperator:
        s, c = math.sin(theta), math.cos(theta)
        n = self.n
        bands = np.zeros((3, n + 1))
        bands[0] = self.diag[0] + c * self.diag[1] + c * c * self.diag[2] + s * s * self.diag[3]
        bands[1, :n] = s * self.off1_sin + s * c * self.off1_sincos
        bands[2, : n - 1] = s * s * self.off2_sin2
        return SymmetricOperator(n, bands)


def _require_bell_n(ineq: BellInequality) -> None:
    if ineq.n < 2:
        raise PreconditionError(f"Bell operators need n >= 2, got n={ineq.n}")


def bell_operator_sym(ineq: BellInequality, settings: MeasurementSettings) -> SymmetricOperator:
    """Bell operator (bound included) restricted to the symmetric subspace.

    Uses ``sum_i (u.sigma)_i = 2 u.S`` and
    ``sum_{i!=j} (u.sigma)_i (w.sigma)_j = 2{u.S, w.S} - n (u.w)``.
    """
    _require_bell_n(ineq)
    return _OperatorParts(ineq).at(settings.theta)


def _site_operator(n: int, ops: dict[int, np.ndarray]) -> sp.csr_matrix:
    factors = [sp.csr_matrix(ops.get(i, _I2)) for i in range(n)]
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)


def bell_operator_full(ineq: BellInequality, settings: MeasurementSettings) -> np.ndarray:
    """Bell operator on the full ``2**n`` space, summed site by site and pair by pair."""
    _require_bell_n(ineq)
    n = ineq.n
    if n > FULL_SPACE_MAX_N:
        raise PreconditionError(f"full-space Bell operator limited to n <= {FULL_SPACE_MAX_N}, got n={n}")
    m0, m1 = settings.qubit_observables()
    al, be, ga, de, ep = (float(x) for x in ineq.coefficients)
    dim = 2**n
    total = sp.csr_matrix((dim, dim))
    for i in range(n):
        total = total + al * _site_operator(n, {i: m0}) + be * _site_operator(n, {i: m1})
        for j in range(n):
            if i == j:
                continue
            total = total + (ga / 2) * _site_operator(n, {i: m0, j: m0})
            total = total + de * _site_operator(n, {i: m0, j: m1})
            total = total + (ep / 2) * _site_operator(n, {i: m1, j: m1})
    return total.toarray() + float(ineq.beta_c) * np.eye(dim)


def min_eigenvalue(op: SymmetricOperator) -> float:
    """Smallest eigenvalue via LAPACK's banded symmetric solver."""
    try:
        w = scipy.linalg.eig_banded(
            op.bands, lower=True, eigvals_only=True, select="i", select_range=(0, 0)
        )
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(
            f"banded eigensolver (LAPACK dsbevx, default iteration budget) failed for n={op.n}: {exc}"
        ) from exc
    return float(w[0])


def min_eigenpair(op: SymmetricOperator) -> tuple[float, np.ndarray]:
    w, v = scipy.linalg.eig_banded(op.bands, lower=True, select="i", select_range=(0, 0))
    vec = v[:, 0]
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return float(w[0]), vec


# --- violation search -----------------------------------------------------


@dataclass(frozen=True)
class ViolationReport:
    """Outcome of a θ search.

    ``objective`` is ``"ground"`` when ``lambda_min`` is the smallest Bell
    operator eigenvalue, or ``"dicke:k"`` when it is the expectation in
    ``|D_n^k>``.
    """

    n: int
    theta_star: float
    lambda_min: float
    beta_c: float
    effective_violation: float
    objective: str

    @property
    def violated(self) -> bool:
        return self.lambda_min < 0

    @property
    def status(self) -> str:
        return "violation" if self.violated else "no violation at these settings"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "theta_star": self.theta_star,
            "lambda_min": self.lambda_min,
            "beta_c": self.beta_c,
            "effective_violation": self.effective_violation,
            "objective": self.objective,
            "status": self.status,
        }


def _objective(parts: _OperatorParts, state: int | None):
    if state is None:
        return lambda t: min_eigenvalue(parts.at(t))
    if not 0 <= state <= parts.n:
        raise PreconditionError(f"Dicke excitation must be in [0, {parts.n}], got {state}")
    return lambda t: float(parts.at(t).diagonal[state])


def theta_scan(ineq: BellInequality, thetas, *, state: int | None = None, workers: int = 1) -> np.ndarray:
    """Objective values (smallest eigenvalue, or Dicke expectation) on a θ grid."""
    _require_bell_n(ineq)
    f = _objective(_OperatorParts(ineq), state)
    thetas = [float(t) for t in thetas]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(f, thetas)))
    return np.array([f(t) for t in thetas])


def optimize_theta(
    ineq: BellInequality,
    *,
    state: int | None = None,
    grid: int = GRID_POINTS,
    workers: int = 1,
    xatol: float = 1e-10,
) -> ViolationReport:
    """Minimize over θ in [0, pi]: uniform grid, then bounded refinement.

    ``state=None`` minimizes the smallest eigenvalue; an integer ``k``
    minimizes the expectation in ``|D_n^k>`` instead. Among grid points equal
    to the minimum (to rounding) the smallest θ wins.
    """
    _require_bell_n(ineq)
    parts = _OperatorParts(ineq)
    f = _objective(parts, state)
    thetas = np.linspace(0.0, math.pi, grid)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = np.array(list(pool.map(f, thetas)))
    else:
        values = np.array([f(t) for t in thetas])
    scale = max(1.0, float(np.max(np.abs(values))))
    i = int(np.flatnonzero(values <= values.min() + 1e-12 * scale)[0])
    best_t, best_v = float(thetas[i]), float(values[i])
    lo, hi = float(thetas[max(i - 1, 0)]), float(thetas[min(i + 1, grid - 1)])
    res = None
    if 0 < i < grid - 1:
        try:
            res = minimize_scalar(f, bracket=(lo, best_t, hi), method="golden", options={"xtol": xatol})
        except ValueError:  # flat bracket: f(mid) ties a neighbour
            res = None
    if res is None and hi > lo:
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": xatol, "maxiter": 500})
    if res is not None and lo <= res.x <= hi and res.fun < best_v:
        best_t, best_v = float(res.x), float(res.fun)
    bc = float(ineq.beta_c)
    eff = best_v / bc if bc else math.nan
    objective = "ground" if state is None else f"dicke:{state}"
    return ViolationReport(ineq.n, best_t, best_v, bc, eff, objective)


# --- Dicke-state results ---------------------------------------------------


def dicke_value_closed_form(n: int, theta: float) -> float:
    """``<D^K|B|D^K>`` with ``K = ceil(n/2)``: ``4 floor(n/2) s [(K+1) s - 1]``, ``s = sin^2(theta/2)``."""
    s = math.sin(theta / 2) ** 2
    return 4 * (n // 2) * s * (((n + 1) // 2 + 1) * s - 1)


@dataclass(frozen=True)
class DickeViolation:
    n: int
    theta_min: float
    value: float
    effective: float
    beta_c: int


def dicke_violation_analytic(n: int, *, check_points: int = 9, tol: float = 1e-9) -> DickeViolation:
    """Optimal angle and violation of the Dicke family by ``|D_n^ceil(n/2)>``.

    The closed-form expectation is cross-checked against the operator
    construction at ``check_points`` angles.
    """
    from .inequalities import dicke_build

    if n < 2:
        raise PreconditionError(f"the Dicke family needs n >= 2, got n={n}")
    kk = (n + 1) // 2
    theta = math.acos(kk / (kk + 1))
    value = -(n // 2) / (kk + 1)
    ineq = dicke_build(n)
    parts = _OperatorParts(ineq)
    for t in np.linspace(0.0, math.pi, check_points):
        built = parts.at(float(t)).diagonal[kk]
        closed = dicke_value_closed_form(n, float(t))
        if abs(built - closed) > tol * max(1.0, abs(closed)):
            raise ConsistencyError(f"n={n}, theta={t}: operator gives {built}, closed form {closed}")
    bc = int(ineq.beta_c)
    return DickeViolation(n, theta, value, value / bc, bc)


def dicke_reduced_two_qubit(n: int, k: int | None = None) -> np.ndarray:
    """Two-qubit marginal of ``|D_n^k>`` (default ``k = ceil(n/2)``), basis 00, 01, 10, 11."""
    if n < 2:
        raise PreconditionError(f"two-qubit marginal needs n >= 2, got n={n}")
    if k is None:
        k = (n + 1) // 2
    if not 0 <= k <= n:
        raise PreconditionError(f"need 0 <= k <= n, got k={k}")
    p = (n - k) * (n - k - 1)
    q = k * (n - k)
    r = k * (k - 1)
    rho = np.array([[p, 0, 0, 0], [0, q, q, 0], [0, q, q, 0], [0, 0, 0, r]], dtype=float)
    return rho / (n * (n - 1))


def reduced_two_qubit_from_full(psi: np.ndarray, n: int) -> np.ndarray:
    """Partial trace of a pure ``n``-qubit state onto qubits 0 and 1."""
    m = np.asarray(psi).reshape(4, 2 ** (n - 2))
    return m @ m.conj().T


def reduced_bell_operator(ineq: BellInequality, settings: MeasurementSettings) -> np.ndarray:
    """Two-qubit operator whose trace against any two-qubit marginal of a
    permutation-symmetric state equals that state's Bell-operator expectation."""
    _require_bell_n(ineq)
    n = ineq.n
    al, be, ga, de, ep = (float(x) for x in ineq.coefficients)
    m0, m1 = settings.qubit_observables()
    pairs = n * (n - 1) / 2
    out = float(ineq.beta_c) * np.eye(4)
    out += (n / 2) * al * (np.kron(m0, _I2) + np.kron(_I2, m0))
    out += (n / 2) * be * (np.kron(m1, _I2) + np.kron(_I2, m1))
    out += pairs * (ga * np.kron(m0, m0) + ep * np.kron(m1, m1) + de * (np.kron(m0, m1) + np.kron(m1, m0)))
    return out


# --- collective measurements ----------------------------------------------


@dataclass(frozen=True)
class PairCorrelators:
    czz: float
    czx: float
    attainable: bool


def collective_moments(state: np.ndarray) -> tuple[float, float]:
    """``(<S_z^2>, <{S_z, S_x}>)`` for a real state in the Dicke basis."""
    psi = np.asarray(state, dtype=float)
    n = len(psi) - 1
    sx, sz = collective_spin(n)
    return float(psi @ sz @ sz @ psi), float(psi @ (sz @ sx + sx @ sz) @ psi)


def collective_to_pairwise(sz2_mean: float, anticomm_zx_mean: float, n: int) -> PairCorrelators:
    """Two-body correlators of a symmetric state from collective moments.

    ``czz = (4 <S_z^2> - n) / (n(n-1))`` and ``czx = 2 <{S_z, S_x}> / (n(n-1))``;
    the factor 2 follows from ``{S_z, S_x} = (1/2) sum_{i!=j} sigma_z^i sigma_x^j``.
    Values outside [-1, 1] are returned unclamped with ``attainable=False``.
    """
    if n < 2:
        raise PreconditionError(f"two-body correlators need n >= 2, got n={n}")
    pairs = n * (n - 1)
    czz = (4 * sz2_mean - n) / pairs
    czx = 2 * anticomm_zx_mean / pairs
    ok = abs(czz) <= 1 + 1e-12 and abs(czx) <= 1 + 1e-12
    return PairCorrelators(czz, czx, ok)


# --- Lipkin-Meshkov-Glick ----------------------------------------------------


@dataclass(frozen=True)
class LMGParams:
    lam: float
    h: float
    n: int

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise PreconditionError(f"coupling lambda must be positive, got {self.lam}")
        if not self.h >= 0:
            raise PreconditionError(f"field h must be non-negative, got {self.h}")
        if self.n < 1:
            raise PreconditionError(f"n must be positive, got {self.n}")

    @property
    def weak_field(self) -> bool:
        return self.h <= self.lam / self.n


def lmg_hamiltonian_sym(params: LMGParams) -> np.ndarray:
    """``H = -(lam/n) sum_{i<j} (XX + YY) - h sum_i Z`` on the symmetric subspace.

    Here ``Z`` is ``+1`` on ``|1>``, so the field favours excitations and the
    Dicke index ``k`` counts spins aligned with it. Built from ``S_x^2 + S_y^2``
    through the ladder operators.
    """
    n = params.n
    c = _ladder(n)
    sp_ = np.diag(2 * c, -1)  # raises the excitation number k
    sx2_sy2 = (sp_ @ sp_.T + sp_.T @ sp_) / 2
    sz = np.diag(np.arange(n + 1) - n / 2.0)
    pair_sum = 2 * sx2_sy2 - n * np.eye(n + 1)  # sum_{i<j} (XX + YY)
    return -(params.lam / n) * pair_sum - 2 * params.h * sz


def lmg_hamiltonian_full(params: LMGParams) -> np.ndarray:
    n = params.n
    if n > FULL_SPACE_MAX_N:
        raise PreconditionError(f"full-space LMG limited to n <= {FULL_SPACE_MAX_N}, got n={n}")
    z_exc = -_SZ
    dim = 2**n
    h = sp.csr_matrix((dim, dim), dtype=complex)
    for i in range(n):
        h = h - params.h * _site_operator(n, {i: z_exc})
        for j in range(i + 1, n):
            xx = _site_operator(n, {i: _SX, j: _SX})
            yy = _site_operator(n, {i: _SY, j: _SY})
            h = h - (params.lam / n) * (xx + yy)
    return h.toarray().real


@dataclass(frozen=True, eq=False)
class LMGGroundState:
    params: LMGParams
    energy: float
    degeneracy: int
    ground_space: np.ndarray  # columns span the ground space, Dicke basis

    @property
    def state(self) -> np.ndarray:
        return self.ground_space[:, 0]

    @property
    def dominant_k(self) -> int:
        return int(np.argmax(np.abs(self.state)))

    def fidelity(self, k: int) -> float:
        """Overlap of ``|D^k>`` with the ground space (projector expectation)."""
        return float(np.sum(self.ground_space[k, :] ** 2))

    def to_dict(self) -> dict:
        k = self.dominant_k
        return {
            "n": self.params.n,
            "lambda": self.params.lam,
            "h": self.params.h,
            "energy": self.energy,
            "degeneracy": self.degeneracy,
            "dominant_k": k,
            "fidelity": self.fidelity(k),
            "weak_field": self.params.weak_field,
            "ground_space_k": [int(np.argmax(np.abs(col))) for col in self.ground_space.T],
        }


def _ground(h: np.ndarray, tol: float) -> tuple[float, int, np.ndarray]:
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.max(np.abs(w))))
    deg = int(np.sum(w <= w[0] + tol * scale))
    space = v[:, :deg]
    for col in range(deg):
        if space[np.argmax(np.abs(space[:, col])), col] < 0:
            space[:, col] *= -1
    return float(w[0]), deg, space


def lmg_ground_state(params: LMGParams, *, tol: float = 1e-10) -> LMGGroundState:
    """Ground space of the LMG Hamiltonian restricted to the symmetric subspace.

    For ferromagnetic coupling the symmetric sector holds the global ground
    state; :func:`lmg_ground_state_full` checks this for small ``n``.
    """
    energy, deg, space = _ground(lmg_hamiltonian_sym(params), tol)
    return LMGGroundState(params, energy, deg, space)


def lmg_ground_state_full(params: LMGParams, *, tol: float = 1e-10) -> tuple[float, int, np.ndarray]:
    """Energy, degeneracy and ground space from the full ``2**n`` Hamiltonian."""
    return _ground(lmg_hamiltonian_full(params), tol)
