"""Multimode Gaussian states in the complex amplitude ordering.

Covariances are ``2M x 2M`` complex matrices over ``(a_1..a_M, a_1^+..a_M^+)``
with the vacuum at ``I/2``. Displacements are ``2M`` complex vectors
``(<a_1>..<a_M>, <a_1>^*..<a_M>^*)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL = 1e-10
POSITIVITY_TOL = 1e-12


def swap_matrix(modes: int) -> np.ndarray:
    """Block matrix exchanging the ``a`` and ``a^+`` halves."""
    eye = np.eye(modes)
    zero = np.zeros((modes, modes))
    return np.block([[zero, eye], [eye, zero]])


@dataclass(frozen=True)
class GaussianState:
    sigma: np.ndarray
    disp: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        sigma = np.array(self.sigma, dtype=complex)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
            raise ValueError(f"covariance must be 2M x 2M, got {sigma.shape}")
        m = sigma.shape[0] // 2
        disp = np.zeros(2 * m, dtype=complex) if self.disp is None else np.array(self.disp, dtype=complex)
        if disp.shape != (2 * m,):
            raise ValueError(f"displacement must have length {2 * m}")
        scale = max(1.0, float(np.max(np.abs(sigma))))
        if np.max(np.abs(sigma - sigma.conj().T)) > TOL * scale:
            raise ValueError("covariance is not Hermitian")
        x = swap_matrix(m)
        if np.max(np.abs(x @ sigma @ x - sigma.conj())) > TOL * scale:
            raise ValueError("covariance lacks the conjugate-pair structure")
        if np.max(np.abs(disp[m:] - disp[:m].conj()), initial=0.0) > TOL * max(1.0, float(np.max(np.abs(disp), initial=0.0))):
            raise ValueError("displacement halves are not complex conjugates")
        eig = np.linalg.eigvalsh(sigma + np.eye(2 * m) / 2)
        if eig.min() <= POSITIVITY_TOL:
            raise ValueError("sigma + I/2 is not positive definite")
        sigma.setflags(write=False)
        disp.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "disp", disp)

    @property
    def modes(self) -> int:
        return self.sigma.shape[0] // 2

    @property
    def sigma_q(self) -> np.ndarray:
        return self.sigma + np.eye(2 * self.modes) / 2

    @property
    def is_displaced(self) -> bool:
        return bool(np.any(self.disp != 0))

    def mean_photons(self) -> np.ndarray:
        """Mean photon number per mode."""
        m = self.modes
        diag = np.diag(self.sigma)[:m].real - 0.5
        return diag + np.abs(self.disp[:m]) ** 2

    def permute(self, perm) -> GaussianState:
        """Relabel modes so that new mode ``k`` is old mode ``perm[k]``."""
        perm = np.asarray(perm)
        idx = np.concatenate([perm, perm + self.modes])
        return GaussianState(self.sigma[np.ix_(idx, idx)], self.disp[idx])


def vacuum_state(modes: int) -> GaussianState:
    return GaussianState(np.eye(2 * modes) / 2)


def squeezed_vacuum_state(r) -> GaussianState:
    """Product of single-mode squeezed vacua with squeezing parameters ``r``.

    The squeezing phase is chosen so that the A-matrix is ``diag(tanh r)``
    in both halves.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if not np.all(np.isfinite(r)) or np.any(r < 0):
        raise ValueError("squeezing parameters must be finite and nonnegative")
    ch = np.diag(np.cosh(2 * r)) / 2
    sh = np.diag(np.sinh(2 * r)) / 2
    return GaussianState(np.block([[ch, sh], [sh, ch]]))


def coherent_state(alpha) -> GaussianState:
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    m = len(alpha)
    return GaussianState(np.eye(2 * m) / 2, np.concatenate([alpha, alpha.conj()]))


def _check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("interferometer must be a square matrix")
    if np.max(np.abs(u @ u.conj().T - np.eye(len(u)))) > TOL:
        raise ValueError("interferometer matrix is not unitary")
    return u


def apply_interferometer(state: GaussianState, u) -> GaussianState:
    u = _check_unitary(u)
    if len(u) != state.modes:
        raise ValueError(f"interferometer acts on {len(u)} modes, state has {state.modes}")
    zero = np.zeros_like(u)
    w = np.block([[u, zero], [zero, u.conj()]])
    return GaussianState(w @ state.sigma @ w.conj().T, w @ state.disp)


def apply_loss(state: GaussianState, epsilon) -> GaussianState:
    """Pure-loss channel on every mode; ``epsilon`` is a scalar or one value per mode."""
    eps = np.broadcast_to(np.asarray(epsilon, dtype=float), (state.modes,))
    if np.any(eps < 0) or np.any(eps >= 1):
        raise ValueError(f"loss must lie in [0, 1), got {epsilon!r}")
    t = np.sqrt(1 - np.concatenate([eps, eps]))
    sigma = t[:, None] * state.sigma * t[None, :] + np.diag(1 - t**2) / 2
    return GaussianState(sigma, t * state.disp)


def apply_uniform_loss(state: GaussianState, epsilon: float) -> GaussianState:
    if not 0 <= epsilon < 1:
        raise ValueError(f"loss must lie in [0, 1), got {epsilon!r}")
    sigma = (1 - epsilon) * state.sigma + epsilon / 2 * np.eye(2 * state.modes)
    return GaussianState(sigma, np.sqrt(1 - epsilon) * state.disp)


def a_matrix(state: GaussianState) -> np.ndarray:
    """``X (I - sigma_Q^-1)``; symmetric for every valid state."""
    sq = state.sigma_q
    if np.linalg.cond(sq) > 1e12:
        raise np.linalg.LinAlgError("sigma_Q is singular")
    n = 2 * state.modes
    return swap_matrix(state.modes) @ (np.eye(n) - np.linalg.inv(sq))


def a_matrix_series(state: GaussianState, order: int) -> list[np.ndarray]:
    """Taylor coefficients ``A_0, A_1, ..`` of the A-matrix under added uniform loss."""
    n = 2 * state.modes
    x = swap_matrix(state.modes)
    minus = 2 * state.sigma - np.eye(n)
    plus_inv = np.linalg.inv(2 * state.sigma + np.eye(n))
    coeffs = [a_matrix(state)]
    ratio = minus @ plus_inv
    power = np.eye(n)
    for _ in range(1, order + 1):
        power = power @ ratio
        coeffs.append(-2 * x @ power @ plus_inv)
    return coeffs


def pure_state_from_b(b) -> GaussianState:
    """Pure zero-mean state whose A-matrix is ``b (+) b^*``; needs ``||b|| < 1``."""
    b = np.asarray(b, dtype=complex)
    m = len(b)
    zero = np.zeros_like(b)
    a = np.block([[b, zero], [zero, b.conj()]])
    sq = np.linalg.inv(np.eye(2 * m) - swap_matrix(m) @ a)
    sq = (sq + sq.conj().T) / 2
    return GaussianState(sq - np.eye(2 * m) / 2)


def squeezing_spectrum(state: GaussianState) -> np.ndarray:
    """Squeezing parameters ``r_k`` of a pure zero-mean state, in descending order."""
    a = a_matrix(state)
    m = state.modes
    eig_sigma = np.linalg.eigvalsh(state.sigma)
    # a pure state has sigma eigenvalues in reciprocal pairs e^{+-2r}/2
    if np.max(np.abs(np.sort(eig_sigma) * np.sort(eig_sigma)[::-1] - 0.25)) > 1e-8:
        raise ValueError("squeezing spectrum extraction needs a pure state")
    s = np.linalg.svd(a[:m, :m], compute_uv=False)
    return np.arctanh(np.clip(s, 0, 1 - 1e-16))


def distinct_nonzero(r, tol: float = 1e-9) -> np.ndarray:
    """The distinct nonzero values of ``r`` (merged within ``tol``)."""
    out: list[float] = []
    for x in sorted(np.asarray(r, dtype=float), reverse=True):
        if x > tol and all(abs(x - y) > tol for y in out):
            out.append(float(x))
    return np.array(out)


def encode_graph(adjacency, c: float) -> GaussianState:
    """Pure state with A-matrix ``c (adj (+) adj)``."""
    adj = np.asarray(adjacency, dtype=float)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError("adjacency must be square")
    if not np.allclose(adj, adj.T) or np.any(np.diag(adj) != 0):
        raise ValueError("adjacency must be symmetric with zero diagonal")
    radius = np.max(np.abs(np.linalg.eigvalsh(adj)), initial=0.0)
    if c * radius >= 1:
        raise ValueError(f"c * spectral radius = {c * radius:.4f} >= 1, squeezing is unphysical")
    return pure_state_from_b(c * adj)


def graph_squeezing(adjacency, c: float) -> np.ndarray:
    """Input squeezing parameters ``r_k`` with ``tanh r_k = c |lambda_k|``."""
    lam = np.linalg.eigvalsh(np.asarray(adjacency, dtype=float))
    return np.arctanh(c * np.abs(lam))


def squeezing_db(r) -> np.ndarray:
    return 20 * np.asarray(r) / np.log(10)


def required_transmission(epsilon: float, epsilon_target: float) -> float:
    """Transmission of an added attenuator that lifts loss ``epsilon`` to ``epsilon_target``."""
    if not 0 <= epsilon < 1 or not epsilon_target < 1:
        raise ValueError("losses must lie in [0, 1)")
    if epsilon_target < epsilon:
        raise ValueError("target loss is below the current loss")
    return (1 - epsilon_target) / (1 - epsilon)


def quadrature_to_amplitude(cov, means=None, hbar: float = 2.0) -> GaussianState:
    """Convert an ``xxpp``-ordered real covariance (vacuum ``hbar/2 I``) to amplitude form."""
    cov = np.asarray(cov, dtype=float)
    m = cov.shape[0] // 2
    eye = np.eye(m)
    w = np.block([[eye, 1j * eye], [eye, -1j * eye]]) / np.sqrt(2 * hbar)
    sigma = w @ cov @ w.conj().T
    disp = None if means is None else w @ np.asarray(means, dtype=float)
    return GaussianState(sigma, disp)


def tmsv_state(r: float) -> GaussianState:
    """Two-mode squeezed vacuum with A-matrix off-diagonal entries ``tanh r``."""
    chi = np.tanh(r)
    if not 0 <= chi < 1:
        raise ValueError(f"squeezing r={r!r} must be finite and nonnegative with tanh r < 1")
    return pure_state_from_b([[0, chi], [chi, 0]])
