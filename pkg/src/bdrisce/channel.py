"""Channel realizations, the cascaded channel, and noisy power measurements.

Deployment geometry follows the reference scenario: a single-antenna BS,
a BD-RIS built as a uniform planar array (UPA) in the y-z plane, and a
single-antenna user placed uniformly inside a rectangle.  Path losses in
dB are 33 + 37 log10(d) for the direct BS-user link and 30 + 20 log10(d)
for both RIS links.  The BS-user channel is Rayleigh; the RIS links are
deterministic line-of-sight steering vectors by default, with i.i.d.
Rayleigh available as an alternative.

UPA elements are indexed with the vertical (z) axis varying fastest, so
the contiguous element groups of a group-connected surface span vertical
strips.  With users at ground level this keeps the within-group cascade
blocks close to symmetric, which is what bounds how much of the channel
autocorrelation survives the symmetric-reflection constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bdris import BdRisConfig, ScatteringMatrix, TrpVector

FADING_MODELS = ("los", "rayleigh")
PATH_LOSS_LINKS = ("bs_user", "bs_ris", "ris_user")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0:
        raise ValueError("watts must be positive")
    return 30.0 + 10.0 * math.log10(watts)


@dataclass(frozen=True)
class SceneGeometry:
    """Node positions in meters plus the UPA layout of the surface.

    ``user_area_min``/``user_area_max`` are opposite corners of an
    axis-aligned rectangle (exactly two axes with positive extent).
    ``upa_dims`` is (N_y, N_z); ``element_spacing`` is in wavelengths.
    """

    bs_position: tuple[float, float, float]
    ris_position: tuple[float, float, float]
    user_area_min: tuple[float, float, float]
    user_area_max: tuple[float, float, float]
    upa_dims: tuple[int, int]
    element_spacing: float = 0.5

    def __post_init__(self):
        lo = np.asarray(self.user_area_min, dtype=float)
        hi = np.asarray(self.user_area_max, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError("user area corners must be 3-vectors")
        ext = hi - lo
        if np.any(ext < 0):
            raise ValueError("user_area_max must dominate user_area_min")
        if int(np.count_nonzero(ext > 0)) != 2:
            raise ValueError("user area corners must span a nondegenerate rectangle")
        ny, nz = self.upa_dims
        if ny < 1 or nz < 1:
            raise ValueError("upa_dims must be positive")
        if self.element_spacing <= 0:
            raise ValueError("element_spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.upa_dims[0] * self.upa_dims[1]


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading draw: direct scalar, two RIS links, transmit power."""

    h_bu: complex
    h_br: np.ndarray
    h_ru: np.ndarray
    tx_power: float

    def __post_init__(self):
        br = np.asarray(self.h_br, dtype=complex)
        ru = np.asarray(self.h_ru, dtype=complex)
        if br.ndim != 1 or ru.shape != br.shape:
            raise ValueError("h_br and h_ru must be vectors of equal length")
        if not (np.isfinite(br).all() and np.isfinite(ru).all()
                and np.isfinite([self.h_bu.real, self.h_bu.imag]).all()):
            raise ValueError("channel entries must be finite")
        if self.tx_power <= 0:
            raise ValueError("tx_power must be positive")
        object.__setattr__(self, "h_br", br)
        object.__setattr__(self, "h_ru", ru)


@dataclass(frozen=True)
class CascadedChannel:
    """sqrt(P) * [h_bu, vec(M_1*), ..., vec(M_K*)] with M = h_ru h_br^H."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 1 or e.size < 1:
            raise ValueError("entries must be a nonempty vector")
        object.__setattr__(self, "entries", e)

    def __len__(self) -> int:
        return self.entries.size


@dataclass(frozen=True)
class AutocorrelationMatrix:
    """Hermitian matrix G; the ground truth is the rank-1 outer product of h."""

    entries: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.entries, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("entries must be a square matrix")
        scale = max(float(np.linalg.norm(g)), 1.0)
        if float(np.linalg.norm(g - g.conj().T)) > 1e-12 * scale:
            raise ValueError("autocorrelation matrix must be Hermitian")
        object.__setattr__(self, "entries", g)


@dataclass(frozen=True)
class PowerMeasurement:
    """One received-power sample (watts) for a given TRP index."""

    trp_index: int
    power: float
    noise_power: float

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("power must be nonnegative")
        if self.noise_power < 0:
            raise ValueError("noise_power must be nonnegative")


def path_loss_db(link: str, distance: float) -> float:
    """Distance-based path loss in dB for one of the three links."""
    if link not in PATH_LOSS_LINKS:
        raise ValueError(f"unknown link {link!r}")
    if distance <= 0:
        raise ValueError("distance must be positive")
    if link == "bs_user":
        return 33.0 + 37.0 * math.log10(distance)
    return 30.0 + 20.0 * math.log10(distance)


def upa_steering(upa_dims: tuple[int, int], spacing: float, direction: np.ndarray) -> np.ndarray:
    """Unit-modulus UPA response for a unit propagation direction.

    The array sits in the y-z plane; element (iy, iz) is at
    spacing * (iy, iz) wavelengths, flattened with iz varying fastest.
    """
    ny, nz = upa_dims
    iy = np.arange(ny)
    iz = np.arange(nz)
    phase = 2.0 * np.pi * spacing * (iy[:, None] * direction[1] + iz[None, :] * direction[2])
    return np.exp(1j * phase).reshape(ny * nz)


def draw_channels(scene: SceneGeometry, config: BdRisConfig, model: str,
                  rng: np.random.Generator, user_position=None,
                  tx_power_watts: float = 1.0) -> ChannelRealization:
    """Draw one channel realization for a user placed in the scene.

    The user position is sampled uniformly over the configured rectangle
    unless given explicitly.  Per-entry powers equal the linear path gain
    of the corresponding link; under the ``los`` model the RIS links are
    steering vectors toward the BS and the user, under ``rayleigh`` they
    are i.i.d. circularly-symmetric Gaussian.
    """
    if model not in FADING_MODELS:
        raise ValueError(f"unknown fading model {model!r}")
    if scene.n_elements != config.n_elements:
        raise ValueError(
            f"scene has {scene.n_elements} UPA elements, config expects {config.n_elements}")
    bs = np.asarray(scene.bs_position, dtype=float)
    ris = np.asarray(scene.ris_position, dtype=float)
    if user_position is None:
        lo = np.asarray(scene.user_area_min, dtype=float)
        hi = np.asarray(scene.user_area_max, dtype=float)
        user = rng.uniform(lo, hi)
    else:
        user = np.asarray(user_position, dtype=float)

    d_bu = float(np.linalg.norm(bs - user))
    d_br = float(np.linalg.norm(bs - ris))
    d_ru = float(np.linalg.norm(user - ris))
    gain_bu = 10.0 ** (-path_loss_db("bs_user", d_bu) / 10.0)
    gain_br = 10.0 ** (-path_loss_db("bs_ris", d_br) / 10.0)
    gain_ru = 10.0 ** (-path_loss_db("ris_user", d_ru) / 10.0)

    h_bu = math.sqrt(gain_bu / 2.0) * complex(rng.standard_normal(), rng.standard_normal())
    n = config.n_elements
    if model == "los":
        h_br = math.sqrt(gain_br) * upa_steering(
            scene.upa_dims, scene.element_spacing, (bs - ris) / d_br)
        h_ru = math.sqrt(gain_ru) * upa_steering(
            scene.upa_dims, scene.element_spacing, (user - ris) / d_ru)
    else:
        h_br = math.sqrt(gain_br / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        h_ru = math.sqrt(gain_ru / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return ChannelRealization(h_bu, h_br, h_ru, tx_power_watts)


def end_to_end_channel(ch: ChannelRealization, theta: ScatteringMatrix) -> complex:
    """Direct evaluation of sqrt(P) (h_bu + h_ru^H Theta h_br).

    Works on the dense reflection matrix, independent of the vectorized
    path, so it doubles as the oracle for the cascaded-channel identity.
    """
    if theta.n_elements != ch.h_br.size:
        raise ValueError("reflection state and channel dimensions differ")
    reflected = ch.h_ru.conj() @ theta.to_dense() @ ch.h_br
    return complex(math.sqrt(ch.tx_power) * (ch.h_bu + reflected))


def cascade(ch: ChannelRealization, config: BdRisConfig) -> CascadedChannel:
    """Stack the direct path and the per-group blocks of M = h_ru h_br^H.

    The result h satisfies v^H h = end_to_end_channel(ch, Theta(v)) for
    every valid TRP v; block entries are conjugated and column-major to
    mirror the TRP vectorization.
    """
    if ch.h_br.size != config.n_elements:
        raise ValueError("channel and config dimensions differ")
    n0 = config.group_size
    m = np.outer(ch.h_ru, ch.h_br.conj())
    parts = [np.array([ch.h_bu], dtype=complex)]
    for k in range(config.n_groups):
        blk = m[k * n0:(k + 1) * n0, k * n0:(k + 1) * n0]
        parts.append(blk.conj().T.reshape(n0 * n0))
    return CascadedChannel(math.sqrt(ch.tx_power) * np.concatenate(parts))


def true_autocorrelation(h: CascadedChannel) -> AutocorrelationMatrix:
    """Rank-1 Hermitian outer product h h^H."""
    return AutocorrelationMatrix(np.outer(h.entries, h.entries.conj()))


def measure_power(h: CascadedChannel, v: TrpVector, noise_power: float,
                  rng: np.random.Generator, trp_index: int = 0) -> PowerMeasurement:
    """One received-power sample |v^H h + n|^2.

    Noise enters the received signal before squaring, as a circularly
    symmetric complex Gaussian of variance ``noise_power`` watts; passing
    zero gives the exact noiseless power |v^H h|^2.
    """
    if len(v) != len(h):
        raise ValueError("TRP and cascaded channel lengths differ")
    if noise_power < 0:
        raise ValueError("noise_power must be nonnegative")
    g = complex(v.entries.conj() @ h.entries)
    if noise_power > 0:
        g += math.sqrt(noise_power / 2.0) * complex(rng.standard_normal(),
                                                    rng.standard_normal())
    power = abs(g) ** 2
    return PowerMeasurement(trp_index, max(power, 0.0), noise_power)
