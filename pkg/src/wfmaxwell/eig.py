"""Generalized symmetric eigensolver and spectrum diagnostics.

The pencil K u = lambda M u (K PSD, M PD) is solved densely for its full
spectrum; the large cluster of numerically-zero curl-kernel modes makes
naive iterative methods fragile at these sizes. Zero modes are counted
against a threshold relative to the largest eigenvalue, and can be
cross-checked exactly against the rank deficiency of K from an independent
pivoted QR factorization.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    InsufficientSpectrumError,
    NotPositiveDefiniteError,
    ProblemTooLargeError,
)

DENSE_DIM_CAP = 12000
DEFAULT_ZERO_TOL = 1e-8


@dataclass
class Spectrum:
    """Full ascending pencil spectrum with its zero-mode count."""

    values: np.ndarray
    zero_count: int
    zero_threshold: float
    vectors: np.ndarray | None = None
    vectors_start: int = 0

    @property
    def nonzero(self):
        return self.values[self.zero_count:]

    def window_count(self, lo, hi):
        """Number of nonzero eigenvalues in the closed interval [lo, hi]."""
        nz = self.nonzero
        return int(((nz >= lo) & (nz <= hi)).sum())


def _densify(A):
    return A.toarray() if hasattr(A, "toarray") else np.asarray(A, dtype=float)


def solve_generalized(
    K,
    M,
    zero_tol=DEFAULT_ZERO_TOL,
    num_vectors=0,
    skip_zero_vectors=True,
    dense_cap=DENSE_DIM_CAP,
):
    """Full spectrum of the pencil; optionally the first eigenvectors.

    With ``skip_zero_vectors`` the requested eigenvectors start at the first
    nonzero eigenvalue, which is what the experiment pipeline certifies.
    Eigenvectors are M-orthonormal.
    """
    dim = K.dim if hasattr(K, "dim") else K.shape[0]
    mdim = M.dim if hasattr(M, "dim") else M.shape[0]
    if dim != mdim:
        raise ValueError("K and M dimensions disagree")
    if dim == 0:
        return Spectrum(values=np.empty(0), zero_count=0, zero_threshold=float(zero_tol))
    if dim > dense_cap:
        raise ProblemTooLargeError(
            f"dimension {dim} exceeds the dense-solve cap {dense_cap}",
            dim=dim,
            cap=dense_cap,
        )

    try:
        values = sla.eigh(_densify(K), _densify(M), eigvals_only=True, driver="gvd")
    except np.linalg.LinAlgError as err:
        raise NotPositiveDefiniteError(f"mass matrix factorization failed: {err}") from err

    values = np.sort(values)
    lam_max = float(values[-1])
    threshold = zero_tol * lam_max if lam_max > 0 else float(zero_tol)
    zero_count = int((values < threshold).sum())

    vectors = None
    start = 0
    if num_vectors > 0:
        start = zero_count if skip_zero_vectors else 0
        stop = min(start + num_vectors, dim)
        if stop > start:
            _, vectors = sla.eigh(
                _densify(K),
                _densify(M),
                subset_by_index=[start, stop - 1],
                driver="gvx",
            )
        else:
            vectors = np.empty((dim, 0))
    return Spectrum(
        values=values,
        zero_count=zero_count,
        zero_threshold=threshold,
        vectors=vectors,
        vectors_start=start,
    )


def rank_from_pivoted_qr(A, rel_tol=DEFAULT_ZERO_TOL):
    """Numerical rank via column-pivoted QR; independent of the eigensolver."""
    dense = _densify(A)
    if dense.size == 0:
        return 0
    r = sla.qr(dense, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    if diag[0] == 0.0:
        return 0
    return int((diag > rel_tol * diag[0]).sum())


@dataclass
class ExactSpectrumEntry:
    """One exact Maxwell eigenvalue of the box with its multiplicity."""

    value: float
    multiplicity: int
    triples: list = field(default_factory=list)


def exact_box_spectrum(m, lengths=(np.pi, np.pi, np.pi)):
    """First exact eigenvalues of the box, grouped with multiplicities.

    Eigenvalues are sum_i (k_i pi / L_i)^2 over nonnegative integer triples
    with at most one zero component. An all-positive triple contributes
    multiplicity 2 (two admissible amplitude polarizations after the
    divergence constraint), a triple with exactly one zero contributes 1.
    Entries are returned until at least m eigenvalues (counted with
    multiplicity) are covered.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    lengths = tuple(float(v) for v in lengths)
    rates = [(np.pi / L) ** 2 for L in lengths]

    cutoff = 4.0 * max(rates)
    while True:
        kmax = [int(np.floor(np.sqrt(cutoff / r))) + 1 for r in rates]
        groups = {}
        for k1 in range(kmax[0] + 1):
            for k2 in range(kmax[1] + 1):
                for k3 in range(kmax[2] + 1):
                    triple = (k1, k2, k3)
                    zeros = triple.count(0)
                    if zeros >= 2:
                        continue
                    lam = k1 * k1 * rates[0] + k2 * k2 * rates[1] + k3 * k3 * rates[2]
                    if lam > cutoff:
                        continue
                    key = round(lam, 10)
                    mult = 2 if zeros == 0 else 1
                    entry = groups.setdefault(key, ExactSpectrumEntry(lam, 0))
                    entry.multiplicity += mult
                    entry.triples.append(triple)
        entries = [groups[key] for key in sorted(groups)]
        covered = sum(e.multiplicity for e in entries)
        if covered >= m:
            out = []
            total = 0
            for e in entries:
                out.append(e)
                total += e.multiplicity
                if total >= m:
                    return out
        cutoff *= 2.0


def expand_spectrum(entries, m):
    values = []
    for e in entries:
        values.extend([e.value] * e.multiplicity)
        if len(values) >= m:
            break
    if len(values) < m:
        raise ValueError("entries cover fewer than m eigenvalues")
    return np.array(values[:m])


def exact_eigenvalues(m, lengths=(np.pi, np.pi, np.pi)):
    return expand_spectrum(exact_box_spectrum(m, lengths), m)


@dataclass
class SpectrumComparison:
    exact: np.ndarray
    computed: np.ndarray
    errors: np.ndarray
    window: tuple
    window_count: int
    expected_window_count: int

    @property
    def spurious(self):
        return self.window_count != self.expected_window_count


def compare_spectra(spectrum, exact_values, window=(1.5, 2.5)):
    """Pair computed nonzero eigenvalues positionally with the exact multiset.

    The spurious flag compares the count of computed nonzero eigenvalues in
    the window with the count of exact ones there (3 in [1.5, 2.5] for the
    pi-cube).
    """
    exact_values = np.asarray(exact_values, dtype=float)
    nonzero = spectrum.nonzero
    if len(nonzero) < len(exact_values):
        raise InsufficientSpectrumError(
            f"{len(nonzero)} nonzero eigenvalues computed, {len(exact_values)} requested"
        )
    computed = nonzero[: len(exact_values)]
    errors = np.abs(computed - exact_values)
    lo, hi = window
    window_count = spectrum.window_count(lo, hi)
    expected = int(((exact_values >= lo) & (exact_values <= hi)).sum())
    return SpectrumComparison(
        exact=exact_values,
        computed=computed,
        errors=errors,
        window=(float(lo), float(hi)),
        window_count=window_count,
        expected_window_count=expected,
    )


def rayleigh_residual(K, M, lam, u):
    """Relative eigenpair residual ||Ku - lam Mu|| / (||Ku|| + lam ||Mu||)."""
    u = np.asarray(u, dtype=float)
    if not np.any(u):
        raise ValueError("eigenvector must be nonzero")
    if lam < 0:
        raise ValueError("eigenvalue must be nonnegative")
    ku = K @ u
    mu = M @ u
    denom = np.linalg.norm(ku) + lam * np.linalg.norm(mu)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(ku - lam * mu) / denom)


def convergence_rates(h_values, errors):
    """Observed orders r_i = ln(e_{i-1}/e_i) / ln(h_{i-1}/h_i)."""
    h_values = np.asarray(h_values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if h_values.shape != errors.shape or h_values.ndim != 1:
        raise ValueError("h and error lists must have equal length")
    if np.any(h_values <= 0) or np.any(errors <= 0):
        raise ValueError("h and error values must be positive")
    if np.any(np.diff(h_values) >= 0):
        raise ValueError("h values must be strictly decreasing")
    return np.log(errors[:-1] / errors[1:]) / np.log(h_values[:-1] / h_values[1:])
