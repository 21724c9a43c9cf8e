"""Exact-diagonalization reference values for energies and the quantum metric.

The Hamiltonian is represented in a harmonic-oscillator basis of frequency
``omega`` (default ``sqrt(k)``): normalized ladder states in 1D, normalized
``l = 0`` Laguerre functions for the d-dimensional radial problem.  It is a
symmetric banded matrix built from powers of the position operator (the
tridiagonal ``q`` or ``r^2`` matrix) in a padded basis, then truncated, so
the leading block of a large basis equals the matrix of the smaller basis.

Three levels of accuracy are offered:

* :func:`eigensolve` -- float64 LAPACK banded solver (``scipy``), with an
  optional ``mpfr`` refinement of one eigenpair (Rayleigh-quotient iteration
  with a banded LU);
* :func:`qmt_numeric` / :func:`qmt_finite_difference` -- float64
  sum-over-states and finite-difference metrics;
* :func:`energy_reference` / :func:`qmt_reference` -- high-precision values
  from a refined eigenpair and reduced-resolvent solves
  ``g_ij = <chi_i|chi_j>``, ``chi_j = (H - E_N)^-1 Q_N O_j |N>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import gmpy2
import numpy as np
import scipy.linalg
from gmpy2 import mpfr

from .errors import DegeneracyError, NumericError, StepSizeError
from .series import workprec

GAP_TOL = 1e-10


@dataclass(frozen=True)
class SpectralProblem:
    """A Hamiltonian ``p^2/2 + k x^2/2 + lambda x^(2K)`` (1D) or its radial analogue.

    Parameters
    ----------
    model
        ``"quartic"``, ``"sextic"`` or ``"ddim"``.
    k, lam
        Harmonic strength (``> 0``) and coupling (``>= 0``).
    basis_size
        Number of basis functions (``>= 10``).
    d
        Dimension for ``"ddim"``.
    omega
        Basis frequency; ``None`` means ``sqrt(k)``.
    """

    model: str
    k: float
    lam: float
    basis_size: int = 200
    d: int = 3
    omega: float | None = None

    def __post_init__(self):
        if self.model not in ("quartic", "sextic", "ddim"):
            raise ValueError(f"unknown model {self.model!r}")
        if not self.k > 0:
            raise ValueError("k must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.basis_size < 10:
            raise ValueError("basis_size must be at least 10")
        if self.model == "ddim" and self.d < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def K(self) -> int:
        return 3 if self.model == "sextic" else 2

    @property
    def radial(self) -> bool:
        return self.model == "ddim"

    @property
    def band(self) -> int:
        """Half bandwidth of the Hamiltonian in the basis index."""
        return 2 if self.radial else 2 * self.K

    def frequency(self, prec: int = 53):
        with workprec(prec):
            return mpfr(self.omega) if self.omega is not None else gmpy2.sqrt(mpfr(self.k))


class BandedMatrix:
    """Symmetric banded matrix: ``diags[s][i] = A[i + s, i]`` for ``s = 0..bw``."""

    def __init__(self, diags: list):
        self.diags = [list(d) for d in diags]
        self.size = len(self.diags[0])
        self.bw = len(self.diags) - 1

    def element(self, i: int, j: int):
        if i < j:
            i, j = j, i
        s = i - j
        if s > self.bw:
            return 0
        return self.diags[s][j]

    def leading(self, n: int) -> "BandedMatrix":
        return BandedMatrix([d[: max(n - s, 0)] for s, d in enumerate(self.diags)])

    def to_lower_band(self) -> np.ndarray:
        """LAPACK lower banded storage (float64)."""
        out = np.zeros((self.bw + 1, self.size))
        for s, d in enumerate(self.diags):
            out[s, : len(d)] = [float(x) for x in d]
        return out

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.size, self.size))
        for s, d in enumerate(self.diags):
            for i, x in enumerate(d):
                a[i + s, i] = a[i, i + s] = float(x)
        return a

    def matvec(self, v: list) -> list:
        n = self.size
        out = [v[i] * self.diags[0][i] for i in range(n)]
        for s in range(1, self.bw + 1):
            d = self.diags[s]
            for i in range(n - s):
                out[i + s] += d[i] * v[i]
                out[i] += d[i] * v[i + s]
        return out

    def axpy(self, a, other: "BandedMatrix") -> "BandedMatrix":
        """``self + a * other`` (bandwidth of the wider one)."""
        bw = max(self.bw, other.bw)
        diags = []
        for s in range(bw + 1):
            x = self.diags[s] if s <= self.bw else [0] * (self.size - s)
            y = other.diags[s] if s <= other.bw else [0] * (self.size - s)
            diags.append([xi + a * yi for xi, yi in zip(x, y)])
        return BandedMatrix(diags)


# ---------------------------------------------------------------------------
# operator construction


def _band_product(a: list, b: list, n: int, bwa: int, bwb: int) -> list:
    """Product of two symmetric banded matrices given as full-band dicts."""
    out = {}
    for s in range(-(bwa + bwb), bwa + bwb + 1):
        out[s] = [0] * n
    for sa, da in a.items():
        for sb, db in b.items():
            s = sa + sb
            # (A B)[i + s, i] = sum A[i + s, i + sb] B[i + sb, i]
            for i in range(n):
                j = i + sb
                if 0 <= j < n and 0 <= i + s < n:
                    out[s][i] += da[j] * db[i]
    return out


def _position_bands(p: SpectralProblem, n: int, prec: int) -> dict:
    """Full-band dict (offset -> column-indexed list) of ``q`` (1D) or ``r^2`` (radial)."""
    om = p.frequency(prec)
    with workprec(prec):
        zero = mpfr(0)
        if p.radial:
            alpha = mpfr(p.d) / 2 - 1
            diag = [(2 * j + alpha + 1) / om for j in range(n)]
            off = [-gmpy2.sqrt((j + 1) * (j + 1 + alpha)) / om for j in range(n)]
            off[-1] = zero
        else:
            diag = [zero] * n
            off = [gmpy2.sqrt(mpfr(j + 1) / (2 * om)) for j in range(n)]
            off[-1] = zero
        # bands[s][i] = X[i + s, i]
        lower = off
        upper = [zero] + off[:-1]  # X[i - 1, i] = off[i - 1]
        return {0: diag, 1: lower, -1: upper}


def _power(bands: dict, power: int, n: int, prec: int) -> dict:
    with workprec(prec):
        out = bands
        bw = 1
        for _ in range(power - 1):
            out = _band_product(out, bands, n, bw, 1)
            bw += 1
        return out


def _to_banded(full: dict, size: int, bw: int) -> BandedMatrix:
    return BandedMatrix([full[s][: size - s] if s in full else [0] * (size - s) for s in range(bw + 1)])


def operators(p: SpectralProblem, prec: int = 53) -> dict:
    """``{"H", "O1", "O2"}`` as :class:`BandedMatrix` (``mpfr`` entries).

    ``O1 = dH/dk = x^2/2`` and ``O2 = dH/dlambda = x^(2K)`` (``r^4`` radial).
    """
    n = p.basis_size
    K = p.K
    pad = n + 2 * K + 2
    xb = _position_bands(p, pad, prec)
    om = p.frequency(prec)
    with workprec(prec):
        if p.radial:
            r2 = xb
            r4 = _power(r2, 2, pad, prec)
            o1 = {s: [x / 2 for x in d] for s, d in r2.items()}
            o2 = r4
            h0 = [om * (2 * j + mpfr(p.d) / 2) for j in range(pad)]
            shift = (mpfr(p.k) - om**2) / 2
            h = {s: [mpfr(p.lam) * x for x in d] for s, d in r4.items()}
            for s, d in r2.items():
                h[s] = [a + shift * b for a, b in zip(h[s], d)]
            h[0] = [a + b for a, b in zip(h[0], h0)]
            bw = 2
        else:
            q2 = _power(xb, 2, pad, prec)
            q2k = _power(xb, 2 * K, pad, prec)
            o1 = {s: [x / 2 for x in d] for s, d in q2.items()}
            o2 = q2k
            h0 = [om * (j + mpfr(1) / 2) for j in range(pad)]
            shift = (mpfr(p.k) - om**2) / 2
            h = {s: [mpfr(p.lam) * x for x in d] for s, d in q2k.items()}
            for s, d in q2.items():
                h[s] = [a + shift * b for a, b in zip(h[s], d)]
            h[0] = [a + b for a, b in zip(h[0], h0)]
            bw = 2 * K
    return {
        "H": _to_banded(h, n, bw),
        "O1": _to_banded(o1, n, 2 if not p.radial else 1),
        "O2": _to_banded(o2, n, bw),
    }


def build_hamiltonian(p: SpectralProblem, prec: int = 53) -> BandedMatrix:
    """Symmetric banded Hamiltonian (``mpfr`` entries at ``prec`` bits)."""
    return operators(p, prec)["H"]


# ---------------------------------------------------------------------------
# eigensolvers


@dataclass(frozen=True)
class SpectralResult:
    values: np.ndarray              # ascending
    vectors: np.ndarray             # columns, unit norm
    basis_size: int
    convergence: dict = field(default_factory=dict)


def eigensolve(H: BandedMatrix, count: int | None = None, check_half: bool = True) -> SpectralResult:
    """Lowest eigenpairs in float64 (LAPACK ``dsbevd``/``dsbevx`` via scipy).

    ``convergence["delta_half"]`` holds the change of the returned
    eigenvalues against the leading ``size/2`` block.
    """
    n = H.size
    count = n if count is None else min(count, n)
    band = H.to_lower_band()
    try:
        if count == n:
            w, v = scipy.linalg.eig_banded(band, lower=True)
        else:
            w, v = scipy.linalg.eig_banded(band, lower=True, select="i", select_range=(0, count - 1))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"banded eigensolver failed: {exc}", {"size": n}) from exc
    order = np.argsort(w)
    w, v = w[order][:count], v[:, order][:, :count]
    conv = {}
    if check_half and n >= 20:
        h = H.leading(n // 2)
        k = min(count, n // 2)
        wh = scipy.linalg.eig_banded(h.to_lower_band(), lower=True, eigvals_only=True,
                                     select="i", select_range=(0, k - 1))
        conv["delta_half"] = [float(abs(a - b)) for a, b in zip(w[:k], np.sort(wh))]
    return SpectralResult(w, v, n, conv)


def _banded_solve(H: BandedMatrix, shift, rhs: list) -> list:
    """Solve ``(H - shift) x = rhs`` by banded LU with partial pivoting (``mpfr``)."""
    n, b = H.size, H.bw
    width = 3 * b + 1
    # rows stored as dicts col -> value, restricted to |i - j| <= 2b after pivoting
    rows = []
    for i in range(n):
        row = {}
        for j in range(max(0, i - b), min(n, i + b + 1)):
            v = H.element(i, j)
            if i == j:
                v = v - shift
            if v:
                row[j] = v
        rows.append(row)
    x = list(rhs)
    perm_rhs = x
    for k in range(n):
        last = min(n, k + b + 1)
        piv = max(range(k, last), key=lambda r: abs(rows[r].get(k, 0)))
        if rows[piv].get(k, 0) == 0:
            rows[k][k] = mpfr(2) ** (-gmpy2.get_context().precision)
            piv = k
        if piv != k:
            rows[k], rows[piv] = rows[piv], rows[k]
            perm_rhs[k], perm_rhs[piv] = perm_rhs[piv], perm_rhs[k]
        rk = rows[k]
        pivot = rk[k]
        for r in range(k + 1, last):
            rr = rows[r]
            a = rr.get(k)
            if not a:
                continue
            f = a / pivot
            del rr[k]
            for j, v in rk.items():
                if j > k:
                    rr[j] = rr.get(j, 0) - f * v
            perm_rhs[r] -= f * perm_rhs[k]
    out = [mpfr(0)] * n
    for k in reversed(range(n)):
        s = perm_rhs[k]
        for j, v in rows[k].items():
            if j > k:
                s -= v * out[j]
        out[k] = s / rows[k][k]
    return out


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b)), mpfr(0))


def refine_eigenpair(H: BandedMatrix, value, vector, prec: int, max_iter: int = 30):
    """Rayleigh-quotient iteration in ``mpfr`` starting from a float64 eigenpair.

    Returns ``(value, vector)`` with the vector normalized and its largest
    component positive.
    """
    with workprec(prec):
        v = [mpfr(float(x)) for x in vector]
        nrm = gmpy2.sqrt(_dot(v, v))
        v = [x / nrm for x in v]
        lam = mpfr(float(value))
        tol = mpfr(2) ** (-prec + 16)
        hv = H.matvec(v)
        lam = _dot(v, hv)
        for _ in range(max_iter):
            y = _banded_solve(H, lam, v)
            nrm = gmpy2.sqrt(_dot(y, y))
            y = [x / nrm for x in y]
            # fix the sign so consecutive iterates can be compared
            if _dot(y, v) < 0:
                y = [-x for x in y]
            hv = H.matvec(y)
            new = _dot(y, hv)
            res = gmpy2.sqrt(_dot(*(2 * [[a - new * b for a, b in zip(hv, y)]])))
            v, step = y, abs(new - lam)
            lam = new
            if res <= tol * (1 + abs(lam)):
                break
        else:
            raise NumericError("Rayleigh-quotient iteration did not converge", {"residual": str(res)})
        big = max(range(len(v)), key=lambda i: abs(v[i]))
        if v[big] < 0:
            v = [-x for x in v]
    return lam, v


# ---------------------------------------------------------------------------
# quantum metric


def _check_gap(values, N):
    gaps = []
    if N > 0:
        gaps.append(values[N] - values[N - 1])
    if N + 1 < len(values):
        gaps.append(values[N + 1] - values[N])
    if gaps and min(gaps) <= GAP_TOL:
        raise DegeneracyError(f"level {N} is degenerate within {GAP_TOL}: gap {min(gaps):.3e}")


def qmt_numeric(p: SpectralProblem, N: int = 0, s_truncate: int | None = None) -> np.ndarray:
    """Sum-over-states metric ``g_ij = sum_M <N|O_i|M><M|O_j|N> / (E_M - E_N)^2``.

    Index 0 is ``k`` (``O_1 = x^2/2``), index 1 is ``lambda``.  Only the
    ``s_truncate`` lowest states (default ``basis_size - 10``) are summed.
    """
    ops = operators(p, 53)
    res = eigensolve(ops["H"], check_half=False)
    s_truncate = p.basis_size - 10 if s_truncate is None else s_truncate
    vals, vecs = res.values, res.vectors
    _check_gap(vals, N)
    o1 = ops["O1"].to_dense()
    o2 = ops["O2"].to_dense()
    psi = vecs[:, N]
    a1 = vecs[:, :s_truncate].T @ (o1 @ psi)
    a2 = vecs[:, :s_truncate].T @ (o2 @ psi)
    den = (vals[:s_truncate] - vals[N]) ** 2
    mask = np.arange(s_truncate) != N
    a1, a2, den = a1[mask], a2[mask], den[mask]
    g11 = float(np.sum(a1 * a1 / den))
    g12 = float(np.sum(a1 * a2 / den))
    g22 = float(np.sum(a2 * a2 / den))
    return np.array([[g11, g12], [g12, g22]])


def _ground_vector(p: SpectralProblem, N: int, omega) -> np.ndarray:
    q = p if p.omega == float(omega) else replace(p, omega=float(omega))
    res = eigensolve(build_hamiltonian(q, 53), count=N + 2, check_half=False)
    _check_gap(res.values, N)
    return res.vectors[:, N]


def _closest_vector(p: SpectralProblem, psi0: np.ndarray) -> np.ndarray:
    """Eigenvector of ``p`` with the largest overlap with ``psi0``.

    With a negative coupling the truncated matrix acquires spurious states at
    the basis edge below the physical level, so the level is identified by
    overlap rather than by its position in the spectrum.
    """
    res = eigensolve(build_hamiltonian(p, 53), check_half=False)
    ov = np.abs(res.vectors.T @ psi0)
    return res.vectors[:, int(np.argmax(ov))]


def qmt_finite_difference(p: SpectralProblem, N: int = 0, h: float = 1e-4) -> np.ndarray:
    """Metric from central differences of eigenvectors in a fixed basis.

    The basis frequency is frozen at the central point's value so that the
    vectors at ``k +- h`` and ``lambda +- h`` live in the same space; signs
    are aligned to the central vector.
    """
    omega = float(p.frequency())
    psi0 = _ground_vector(p, N, omega)

    def aligned(**shift):
        if shift.get("lam", 0) < 0:
            v = _closest_vector(_unchecked(p, shift["lam"], omega), psi0)
        else:
            v = _ground_vector(replace(p, **shift, omega=omega), N, omega)
        ov = float(v @ psi0)
        if abs(ov) < 0.9:
            raise StepSizeError(f"overlap {ov:.3f} after a step of {h}; reduce h")
        return v if ov > 0 else -v

    dk = (aligned(k=p.k + h) - aligned(k=p.k - h)) / (2 * h)
    dl = (aligned(lam=p.lam + h) - aligned(lam=p.lam - h)) / (2 * h)
    d = [dk, dl]
    g = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            g[i, j] = d[i] @ d[j] - (d[i] @ psi0) * (psi0 @ d[j])
    g[0, 1] = g[1, 0] = 0.5 * (g[0, 1] + g[1, 0])
    return g


def _unchecked(p: SpectralProblem, lam: float, omega: float) -> SpectralProblem:
    """Copy of ``p`` with a (possibly negative) coupling for difference stencils."""
    q = object.__new__(SpectralProblem)
    for f in ("model", "k", "basis_size", "d"):
        object.__setattr__(q, f, getattr(p, f))
    object.__setattr__(q, "lam", lam)
    object.__setattr__(q, "omega", float(omega))
    return q


# ---------------------------------------------------------------------------
# high-precision references


def good_frequency(p: SpectralProblem) -> float:
    """Basis frequency adapted to the anharmonic width (self-consistent harmonic fit).

    Chooses ``omega`` with ``omega^2 = k + c lambda <x^2>^(K-1)``, ``<x^2> = 1/(2 omega)``,
    which makes the ground state roughly Gaussian in the basis.
    """
    K = p.K
    k, lam = float(p.k), float(p.lam)
    om = math.sqrt(k)
    c = {2: 6.0, 3: 15.0 * 3 / 2}[K] if not p.radial else 6.0
    for _ in range(100):
        x2 = 1 / (2 * om) if not p.radial else p.d / (2 * om)
        new = math.sqrt(k + c * lam * x2 ** (K - 1))
        if abs(new - om) < 1e-12:
            break
        om = 0.5 * (om + new)
    return om


@dataclass(frozen=True)
class Reference:
    energy: object
    metric: tuple          # (g11, g12, g22) as mpfr
    basis_size: int
    omega: float
    delta: dict            # change against the previous basis size


def _reference_once(p: SpectralProblem, N: int, prec: int):
    ops = operators(p, prec)
    H = ops["H"]
    res = eigensolve(H, count=N + 2, check_half=False)
    _check_gap(res.values, N)
    e, v = refine_eigenpair(H, res.values[N], res.vectors[:, N], prec)
    with workprec(prec):
        shift = e + mpfr(2) ** (-prec // 2) * (1 + abs(e))
        chis = []
        for name in ("O1", "O2"):
            b = ops[name].matvec(v)
            c = _dot(v, b)
            b = [x - c * y for x, y in zip(b, v)]
            y = _banded_solve(H, shift, b)
            c = _dot(v, y)
            chis.append([x - c * w for x, w in zip(y, v)])
        g11 = _dot(chis[0], chis[0])
        g12 = _dot(chis[0], chis[1])
        g22 = _dot(chis[1], chis[1])
    return e, (g11, g12, g22)


def reference(p: SpectralProblem, N: int = 0, prec: int = 256, target: float = 1e-28,
              start: int | None = None, max_size: int = 2400, metric: bool = True) -> Reference:
    """Self-converged high-precision energy and metric of level ``N``.

    The basis frequency is :func:`good_frequency` unless ``p.omega`` is set;
    the basis grows by half until energy and metric change by less than
    ``target`` (relative) between consecutive sizes.
    """
    omega = p.omega if p.omega is not None else good_frequency(p)
    size = start or max(p.basis_size, 40 + 4 * N)
    prev = None
    while True:
        q = replace(p, basis_size=size, omega=omega)
        e, g = _reference_once(q, N, prec) if metric else (_energy_once(q, N, prec), (None,) * 3)
        if prev is not None:
            with workprec(prec):
                de = abs(e - prev[0]) / abs(e)
                dg = max((abs(a - b) / abs(a) for a, b in zip(g, prev[1]) if a is not None), default=mpfr(0))
            if de < target and dg < target:
                return Reference(e, g, size, omega, {"energy": float(de), "metric": float(dg)})
        if size >= max_size:
            raise NumericError("reference did not converge within the basis limit",
                               {"size": size, "delta": [float(de), float(dg)] if prev else None})
        prev = (e, g)
        size = min(max_size, size * 3 // 2)


def _energy_once(p: SpectralProblem, N: int, prec: int):
    H = build_hamiltonian(p, prec)
    res = eigensolve(H, count=N + 2, check_half=False)
    _check_gap(res.values, N)
    e, _ = refine_eigenpair(H, res.values[N], res.vectors[:, N], prec)
    return e


def energy_reference(p: SpectralProblem, N: int = 0, **kw):
    return reference(p, N, metric=False, **kw).energy


def qmt_reference(p: SpectralProblem, N: int = 0, **kw) -> tuple:
    return reference(p, N, **kw).metric
