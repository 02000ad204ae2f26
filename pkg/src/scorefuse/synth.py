"""Synthetic multimodal score generator with known genuine/impostor
distributions and a cross-modality correlation knob.

Scores are clipped Gaussians on [0, 1]. A shared per-row latent factor mixes
into every modality's noise, so iterative imputers have real signal to learn
when correlation > 0:

    score_m = clip(mu + sigma * (sqrt(rho) * z_row + sqrt(1 - rho) * z_m), 0, 1)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec
from .model import ModalitySet, ScoreTable


@dataclass(frozen=True)
class ModalityDistribution:
    name: str
    genuine_mean: float
    genuine_sd: float
    impostor_mean: float
    impostor_sd: float


@dataclass(frozen=True)
class SynthSpec:
    n_identities: int
    modalities: tuple[ModalityDistribution, ...]
    correlation: float
    seed: int

    def __post_init__(self):
        if self.n_identities < 1:
            raise InvalidSpec(f"n_identities must be >= 1, got {self.n_identities}")
        if not self.modalities:
            raise InvalidSpec("at least one modality distribution required")
        if not 0.0 <= self.correlation < 1.0:
            raise InvalidSpec(f"correlation must be in [0, 1), got {self.correlation}")
        for m in self.modalities:
            if m.genuine_sd < 0 or m.impostor_sd < 0:
                raise InvalidSpec(f"{m.name}: standard deviations must be >= 0")
            if not m.genuine_mean > m.impostor_mean:
                raise InvalidSpec(
                    f"{m.name}: genuine mean {m.genuine_mean} must exceed "
                    f"impostor mean {m.impostor_mean}"
                )

    @property
    def modality_set(self) -> ModalitySet:
        return ModalitySet(tuple(m.name for m in self.modalities))

    def to_dict(self) -> dict:
        return {
            "n_identities": self.n_identities,
            "correlation": self.correlation,
            "seed": self.seed,
            "modalities": [
                {
                    "name": m.name,
                    "genuine_mean": m.genuine_mean,
                    "genuine_sd": m.genuine_sd,
                    "impostor_mean": m.impostor_mean,
                    "impostor_sd": m.impostor_sd,
                }
                for m in self.modalities
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        allowed = {"n_identities", "correlation", "seed", "modalities"}
        unknown = set(data) - allowed
        if unknown:
            raise InvalidSpec(f"unknown synth keys: {sorted(unknown)}")
        try:
            mods = tuple(
                ModalityDistribution(
                    name=str(m["name"]),
                    genuine_mean=float(m["genuine_mean"]),
                    genuine_sd=float(m["genuine_sd"]),
                    impostor_mean=float(m["impostor_mean"]),
                    impostor_sd=float(m["impostor_sd"]),
                )
                for m in data["modalities"]
            )
            return cls(
                n_identities=int(data["n_identities"]),
                modalities=mods,
                correlation=float(data.get("correlation", 0.0)),
                seed=int(data.get("seed", 0)),
            )
        except KeyError as exc:
            raise InvalidSpec(f"missing synth key: {exc}") from None


def uniform_spec(
    n_identities: int,
    n_modalities: int,
    genuine: tuple[float, float] = (0.8, 0.1),
    impostor: tuple[float, float] = (0.3, 0.1),
    correlation: float = 0.5,
    seed: int = 0,
) -> SynthSpec:
    """Spec with identical distributions for every modality (m1..mN)."""
    mods = tuple(
        ModalityDistribution(
            name=f"m{i + 1}",
            genuine_mean=genuine[0],
            genuine_sd=genuine[1],
            impostor_mean=impostor[0],
            impostor_sd=impostor[1],
        )
        for i in range(n_modalities)
    )
    return SynthSpec(n_identities=n_identities, modalities=mods, correlation=correlation, seed=seed)


def generate(spec: SynthSpec) -> ScoreTable:
    """Full n_identities x n_identities cross of comparisons, deterministic per seed."""
    n = spec.n_identities
    n_mod = len(spec.modalities)
    n_rows = n * n
    ids = [f"id{i + 1}" for i in range(n)]

    probe_idx = np.repeat(np.arange(n), n)
    gallery_idx = np.tile(np.arange(n), n)
    genuine = probe_idx == gallery_idx

    rng = np.random.default_rng(spec.seed)
    z_row = rng.standard_normal(n_rows)
    z_cell = rng.standard_normal((n_rows, n_mod))
    rho = spec.correlation
    mixed = np.sqrt(rho) * z_row[:, None] + np.sqrt(1.0 - rho) * z_cell

    means = np.where(
        genuine[:, None],
        np.array([m.genuine_mean for m in spec.modalities]),
        np.array([m.impostor_mean for m in spec.modalities]),
    )
    sds = np.where(
        genuine[:, None],
        np.array([m.genuine_sd for m in spec.modalities]),
        np.array([m.impostor_sd for m in spec.modalities]),
    )
    scores = np.clip(means + sds * mixed, 0.0, 1.0)

    return ScoreTable(
        modalities=spec.modality_set,
        probe_ids=np.array([ids[i] for i in probe_idx], dtype=object),
        gallery_ids=np.array([ids[j] for j in gallery_idx], dtype=object),
        labels=genuine,
        scores=np.ascontiguousarray(scores),
        normalized=True,
    )
