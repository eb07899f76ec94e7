"""Periodic 1-d Klein-Gordon field in a real Fourier packing, with exact solution.

The field phi(x, t) on [0, 2pi) obeys  d^2_t phi = (d^2_x - mu^2) phi.  With
chi = d_t phi and Fourier modes |k| < n the state is the real vector

    (phi_0, Re phi_1, Im phi_1, ..., Re phi_{n-1}, Im phi_{n-1},
     chi_0, Re chi_1, Im chi_1, ..., Re chi_{n-1}, Im chi_{n-1})

of dimension 4n - 2 (mode 0 of a real field is real).  Per mode the equation
decouples into the oscillator  d_t (phi_k, chi_k) = ((0, 1), (-w_k^2, 0))
with w_k = sqrt(k^2 + mu^2), which is solved exactly by the rotation-like
2x2 block of :func:`exact_step`; this is the oracle every approximate update
is measured against.

Data are Y pixel averages (Y odd, > 1) of phi and of chi, stored as Fourier
coefficients k = 0..(Y+1)/2 of the pixel sequence, again packed real:
Y + 2 numbers per field part, 2(Y + 2) in total.  Note that for odd Y the
coefficients (Y-1)/2 and (Y+1)/2 are complex conjugates of each other, so
this packing carries each part twice in those four slots.  The pixel-average
response, the thermal prior, the evolution generator and the per-mode data
Gram diagonal all have closed forms implemented below; the data update
matrix is assembled from those closed forms without inverting any dense
matrix.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import matfun
from .errors import (
    DegenerateMassError,
    InvalidInput,
    StepTooLarge,
    UnsupportedPixelCount,
)
from .gaussian import GaussianDensity, LinearMeasurement

logger = logging.getLogger(__name__)

PART_PHI = "phi"
PART_CHI = "chi"


def _sinc(x):
    """sin(x)/x with the limit value 1 at x = 0."""
    return np.sinc(np.asarray(x) / np.pi)


@dataclass(frozen=True)
class KGModel:
    """Model parameters: mode cutoff, pixel count, mass, inverse temperature, noise.

    ``n_modes`` counts the nonnegative field modes (so |k| < n_modes),
    ``pixels`` is the odd number Y of measurement bins, ``mu`` the field
    mass, ``beta`` the inverse temperature of the thermal prior and
    ``sigma_n2`` the white noise variance on the packed data coefficients.
    """

    n_modes: int
    pixels: int
    mu: float
    beta: float
    sigma_n2: float

    def __post_init__(self):
        if not isinstance(self.n_modes, (int, np.integer)) or self.n_modes < 2:
            raise InvalidInput(f"n_modes must be an integer >= 2, got {self.n_modes!r}")
        if not isinstance(self.pixels, (int, np.integer)):
            raise InvalidInput(f"pixels must be an integer, got {self.pixels!r}")
        if self.pixels <= 1 or self.pixels % 2 == 0:
            raise UnsupportedPixelCount(
                f"pixel count must be odd and greater than one, got {self.pixels}"
            )
        if not np.isfinite(self.mu):
            raise InvalidInput(f"mu must be finite, got {self.mu!r}")
        if self.mu == 0.0:
            raise DegenerateMassError(
                "mu = 0 makes the zero-mode prior variance infinite"
            )
        if not (np.isfinite(self.beta) and self.beta > 0.0):
            raise InvalidInput(f"beta must be positive, got {self.beta!r}")
        if not (np.isfinite(self.sigma_n2) and self.sigma_n2 > 0.0):
            raise InvalidInput(f"sigma_n2 must be positive, got {self.sigma_n2!r}")

    @property
    def signal_dim(self):
        """4n - 2 packed reals: phi part then chi part."""
        return 4 * self.n_modes - 2

    @property
    def part_dim(self):
        """2n - 1 packed reals per field part."""
        return 2 * self.n_modes - 1

    @property
    def data_dim(self):
        """2(Y + 2) packed reals: phi-average part then chi-average part."""
        return 2 * (self.pixels + 2)

    @property
    def data_part_dim(self):
        return self.pixels + 2

    @property
    def k_max(self):
        """Largest stored data coefficient index, (Y + 1)/2."""
        return (self.pixels + 1) // 2

    @property
    def delta(self):
        """Pixel width 2 pi / Y."""
        return 2.0 * np.pi / self.pixels

    def omega(self, k):
        """Dispersion w_k = sqrt(k^2 + mu^2)."""
        return np.sqrt(np.asarray(k, dtype=float) ** 2 + self.mu**2)

    @property
    def omegas(self):
        return self.omega(np.arange(self.n_modes))

    @property
    def dt_limit(self):
        """Validity threshold: the update matrix needs dt < 1/w_{n-1}."""
        return 1.0 / float(self.omega(self.n_modes - 1))


def pack_field(model, phi_modes, chi_modes):
    """Pack complex mode coefficients (k = 0..n-1 per part) into the real layout."""
    phi = np.asarray(phi_modes, dtype=complex)
    chi = np.asarray(chi_modes, dtype=complex)
    n = model.n_modes
    if phi.shape != (n,) or chi.shape != (n,):
        raise InvalidInput(
            f"expected {n} modes per part, got shapes {phi.shape} and {chi.shape}"
        )
    scale = max(np.max(np.abs(phi)), np.max(np.abs(chi)), 1.0)
    if abs(phi[0].imag) > 1e-12 * scale or abs(chi[0].imag) > 1e-12 * scale:
        raise InvalidInput("mode 0 of a real field must be real")
    out = np.empty(model.signal_dim)
    for offset, modes in ((0, phi), (model.part_dim, chi)):
        out[offset] = modes[0].real
        out[offset + 1 : offset + model.part_dim : 2] = modes[1:].real
        out[offset + 2 : offset + model.part_dim : 2] = modes[1:].imag
    return out


def unpack_field(model, packed):
    """Inverse of :func:`pack_field`; returns (phi_modes, chi_modes)."""
    x = np.asarray(packed, dtype=float)
    if x.shape != (model.signal_dim,):
        raise InvalidInput(
            f"packed field has shape {x.shape}, expected ({model.signal_dim},)"
        )
    parts = []
    for offset in (0, model.part_dim):
        modes = np.empty(model.n_modes, dtype=complex)
        modes[0] = x[offset]
        modes[1:] = (
            x[offset + 1 : offset + model.part_dim : 2]
            + 1j * x[offset + 2 : offset + model.part_dim : 2]
        )
        parts.append(modes)
    return parts[0], parts[1]


def _part_prior_diag(model, part):
    """Diagonal of the thermal prior for one field part in the real packing."""
    n, beta = model.n_modes, model.beta
    diag = np.empty(model.part_dim)
    if part == PART_PHI:
        diag[0] = 2.0 * np.pi / (beta * model.mu**2)
        per_mode = (np.pi / beta) / model.omega(np.arange(1, n)) ** 2
    elif part == PART_CHI:
        diag[0] = 2.0 * np.pi / beta
        per_mode = np.full(n - 1, np.pi / beta)
    else:
        raise InvalidInput(f"unknown part {part!r}")
    diag[1::2] = per_mode
    diag[2::2] = per_mode
    return diag


def build_prior_cov(model):
    """Thermal prior covariance, diagonal in the real packing.

    Zero mode variances are 2 pi/(beta mu^2) for phi and 2 pi/beta for chi;
    every k > 0 real component has variance (pi/beta)/w_k^2 respectively
    pi/beta.  The phi and chi blocks are uncorrelated.
    """
    return np.diag(
        np.concatenate(
            [_part_prior_diag(model, PART_PHI), _part_prior_diag(model, PART_CHI)]
        )
    )


def build_response(model):
    """Pixel-average response of one field part in the packed Fourier bases.

    Shape (Y + 2, 2n - 1).  Row block k receives mode l when l is congruent
    to +-k modulo Y; the 2x2 blocks are the half-pixel phase rotation scaled
    by sinc(l Delta / 2).  Entry (0, 0) is exactly 1; the rest of the first
    row and column vanish (modes l = Y, 2Y, ... would land in row 0, but
    there sinc(l Delta / 2) = sinc(pi l / Y) = 0).
    """
    n, y = model.n_modes, model.pixels
    half = 0.5 * model.delta
    r = np.zeros((model.data_part_dim, model.part_dim))
    r[0, 0] = 1.0
    for l in range(1, n):
        scale = float(_sinc(l * half))
        c = np.cos(l * half)
        s = np.sin(l * half)
        cols = (2 * l - 1, 2 * l)
        k_direct = l % y
        if 1 <= k_direct <= model.k_max:
            rows = (2 * k_direct - 1, 2 * k_direct)
            r[np.ix_(rows, cols)] += scale * np.array([[c, s], [-s, c]])
        k_mirror = (-l) % y
        if 1 <= k_mirror <= model.k_max:
            rows = (2 * k_mirror - 1, 2 * k_mirror)
            r[np.ix_(rows, cols)] += scale * np.array([[c, s], [s, -c]])
    return r


def lift_response(response):
    """Block diagonal lift acting on (phi part, chi part) jointly."""
    r = np.asarray(response, dtype=float)
    rows, cols = r.shape
    out = np.zeros((2 * rows, 2 * cols))
    out[:rows, :cols] = r
    out[rows:, cols:] = r
    return out


def build_generator(model):
    """Evolution generator L in the packed basis: d_t phi = chi, d_t chi = -w^2 phi."""
    p = model.part_dim
    l_mat = np.zeros((model.signal_dim, model.signal_dim))
    l_mat[:p, p:] = np.eye(p)
    lower = np.empty(p)
    lower[0] = -model.mu**2
    w2 = model.omega(np.arange(1, model.n_modes)) ** 2
    lower[1::2] = -w2
    lower[2::2] = -w2
    l_mat[p:, :p] = np.diag(lower)
    return l_mat


def exact_step(model, dt):
    """Exact evolution matrix A(dt) of the packed field.

    Per mode the (phi, chi) pair advances by
    ((cos w dt, sin(w dt)/w), (-w sin w dt, cos w dt)); the map has unit
    determinant, satisfies the group law A(s) A(t) = A(s + t) and conserves
    :func:`field_energy`.
    """
    dt = float(dt)
    if not np.isfinite(dt):
        raise InvalidInput(f"dt must be finite, got {dt!r}")
    p = model.part_dim
    a = np.zeros((model.signal_dim, model.signal_dim))
    for k in range(model.n_modes):
        w = float(model.omega(k))
        cos, sin = np.cos(w * dt), np.sin(w * dt)
        block = np.array([[cos, sin / w], [-w * sin, cos]])
        idx = [0] if k == 0 else [2 * k - 1, 2 * k]
        for i in idx:
            pair = (i, p + i)
            a[np.ix_(pair, pair)] = block
    return a


def field_energy(model, packed):
    """Energy of a packed state; conserved exactly by :func:`exact_step`.

    H = (|chi_0|^2 + mu^2 |phi_0|^2)/(4 pi)
        + sum_{k>0} (|chi_k|^2 + w_k^2 |phi_k|^2)/(2 pi).
    """
    phi, chi = unpack_field(model, packed)
    w2 = model.omegas**2
    zero = (abs(chi[0]) ** 2 + model.mu**2 * abs(phi[0]) ** 2) / (4.0 * np.pi)
    rest = np.sum(np.abs(chi[1:]) ** 2 + w2[1:] * np.abs(phi[1:]) ** 2) / (
        2.0 * np.pi
    )
    return float(zero + rest)


def _pack_data_part(model, coeffs):
    out = np.empty(model.data_part_dim)
    out[0] = coeffs[0].real
    out[1::2] = coeffs[1:].real
    out[2::2] = coeffs[1:].imag
    return out


def _unpack_data_part(model, packed_part):
    coeffs = np.empty(model.k_max + 1, dtype=complex)
    coeffs[0] = packed_part[0]
    coeffs[1:] = packed_part[1::2] + 1j * packed_part[2::2]
    return coeffs


def dft_data(model, pixel_data):
    """Pixel-space data (phi averages then chi averages) to the packed Fourier layout.

    The forward transform is d_k = Delta sum_j exp(i k j Delta) d_j for
    k = 0..(Y+1)/2; the inverse used by :func:`idft_data` carries the 1/(2 pi)
    weight.  Constant data of value 1 therefore maps to a single k = 0
    coefficient of 2 pi.
    """
    y = model.pixels
    d = np.asarray(pixel_data, dtype=float)
    if d.shape != (2 * y,):
        raise InvalidInput(f"pixel data has shape {d.shape}, expected ({2 * y},)")
    out = np.empty(model.data_dim)
    for i, part in enumerate((d[:y], d[y:])):
        # Delta * sum_j exp(+i k j Delta) d_j == 2 pi ifft(d)_k.
        coeffs = 2.0 * np.pi * np.fft.ifft(part)
        sl = slice(i * model.data_part_dim, (i + 1) * model.data_part_dim)
        out[sl] = _pack_data_part(model, coeffs[: model.k_max + 1])
    return out


def idft_data(model, packed):
    """Packed Fourier data back to pixel space.

    Coefficients beyond (Y+1)/2 are reconstructed by conjugate symmetry of
    real pixel sequences.  For packings that violate that symmetry (the
    stored coefficient (Y+1)/2 is redundant with (Y-1)/2) the real part of
    the inverse transform is returned.
    """
    y = model.pixels
    x = np.asarray(packed, dtype=float)
    if x.shape != (model.data_dim,):
        raise InvalidInput(f"packed data has shape {x.shape}, expected ({model.data_dim},)")
    out = np.empty(2 * y)
    for i in range(2):
        part = x[i * model.data_part_dim : (i + 1) * model.data_part_dim]
        stored = _unpack_data_part(model, part)
        coeffs = np.empty(y, dtype=complex)
        coeffs[: model.k_max + 1] = stored
        for k in range(model.k_max + 1, y):
            coeffs[k] = np.conj(stored[y - k])
        out[i * y : (i + 1) * y] = np.real(np.fft.fft(coeffs)) / (2.0 * np.pi)
    return out


def rphi_rt_diag(model, part):
    """Closed-form diagonal of the data-space prior Gram R Phi_part R^T.

    Entry 0 is 2 pi/(beta mu^2) for phi respectively 2 pi/beta for chi; each
    coefficient k = 1..(Y+1)/2 contributes the pair value

        b_k = (pi/beta) sum_{m=1}^{n-1} w(m) sinc^2(m Delta/2)
              [1(m = k mod Y) + 1(m = Y - k mod Y)]

    with w(m) = 1/w_m^2 for phi and 1 for chi.  Returned as the full
    diagonal vector of length Y + 2.  All entries are positive whenever
    every data coefficient is reached by some mode, i.e. n - 1 >= (Y-1)/2.
    """
    n, y, beta = model.n_modes, model.pixels, model.beta
    m = np.arange(1, n)
    if part == PART_PHI:
        weight = 1.0 / model.omega(m) ** 2
        zero_entry = 2.0 * np.pi / (beta * model.mu**2)
    elif part == PART_CHI:
        weight = np.ones(n - 1)
        zero_entry = 2.0 * np.pi / beta
    else:
        raise InvalidInput(f"unknown part {part!r}")
    sinc2 = _sinc(m * 0.5 * model.delta) ** 2
    diag = np.empty(model.data_part_dim)
    diag[0] = zero_entry
    residues = m % y
    for k in range(1, model.k_max + 1):
        hits = (residues == k) | (residues == (y - k) % y)
        b_k = (np.pi / beta) * np.sum(weight[hits] * sinc2[hits])
        diag[2 * k - 1] = b_k
        diag[2 * k] = b_k
    return diag


def data_gram_condition(model, part):
    """Spectral condition number of the dense noisy Gram R Phi_part R^T + sigma^2.

    The packed data layout stores the conjugate pair ((Y-1)/2, (Y+1)/2)
    twice, which couples those rows in the dense Gram and leaves the noise
    floor as the smallest eigenvalue; this number makes that conditioning
    visible.
    """
    r = build_response(model)
    phi = np.diag(_part_prior_diag(model, part))
    gram = matfun.symmetrize(r @ phi @ r.T) + model.sigma_n2 * np.eye(
        model.data_part_dim
    )
    w, _ = matfun.spectral_decompose(gram)
    return float(w[-1] / w[0])


def update_generator(model):
    """Generator M' of the data update, assembled from closed-form inverses.

    M' = (1 + sigma^2 G) R2 L Phi R2^T H with G the reciprocal of the
    closed-form Gram diagonal, H the reciprocal of (Gram diagonal + sigma^2)
    and R2 the two-part response lift.  Only diagonal reciprocals appear;
    the dense factors enter through matrix products.
    """
    r2 = lift_response(build_response(model))
    sandwich = r2 @ build_generator(model) @ build_prior_cov(model) @ r2.T
    diag = np.concatenate(
        [rphi_rt_diag(model, PART_PHI), rphi_rt_diag(model, PART_CHI)]
    )
    if np.any(diag <= 0.0):
        raise InvalidInput(
            "closed-form Gram diagonal has zero entries; the update matrix "
            f"needs n_modes - 1 >= (pixels - 1)/2, got n_modes={model.n_modes}, "
            f"pixels={model.pixels}"
        )
    scaled = sandwich / (diag + model.sigma_n2)  # right-multiply by H
    return scaled + (model.sigma_n2 / diag)[:, None] * scaled  # left (1 + s^2 G)


def build_update_matrix(model, dt):
    """One-step data update M = 1 + dt M'.

    Valid for dt^2 < 1/w_{n-1}^2 (the Neumann expansion behind the closed
    form); larger steps raise :class:`StepTooLarge`.
    """
    dt = float(dt)
    if not (np.isfinite(dt) and dt >= 0.0):
        raise InvalidInput(f"dt must be finite and nonnegative, got {dt!r}")
    if dt >= model.dt_limit:
        raise StepTooLarge(
            f"dt = {dt!r} outside validity region dt < {model.dt_limit!r}"
        )
    for part in (PART_PHI, PART_CHI):
        logger.info(
            "data-space Gram condition number (%s part): %.6g",
            part,
            data_gram_condition(model, part),
        )
    return np.eye(model.data_dim) + dt * update_generator(model)


def direct_simulate(model, initial_data, t_final):
    """Continuous-limit data trajectory endpoint exp(T M') d(0)."""
    d0 = np.asarray(initial_data, dtype=float)
    if d0.shape != (model.data_dim,):
        raise InvalidInput(
            f"initial data has shape {d0.shape}, expected ({model.data_dim},)"
        )
    t_final = float(t_final)
    if not (np.isfinite(t_final) and t_final >= 0.0):
        raise InvalidInput(f"t_final must be finite and nonnegative, got {t_final!r}")
    return matfun.expm_general(t_final * update_generator(model)) @ d0


def prior_density(model):
    """Zero-mean thermal prior as a GaussianDensity."""
    return GaussianDensity(
        mean=np.zeros(model.signal_dim), cov=build_prior_cov(model)
    )


def measurement(model):
    """Both-part pixel-average measurement with white noise sigma_n2."""
    r2 = lift_response(build_response(model))
    return LinearMeasurement(
        response=r2, noise_cov=model.sigma_n2 * np.eye(model.data_dim)
    )
