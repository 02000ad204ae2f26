import numpy as np
import pytest

from scorefuse.model import ModalitySet, build_table
from scorefuse.synth import ModalityDistribution, SynthSpec, generate, uniform_spec

# Four-subject demo table: three modalities, two missing cells, scores
# already inside [0, 1]. The exact values pin the worked substitution
# examples used across the imputation tests.
DEMO_MODALITIES = ("face", "fingerprint", "iris")
DEMO_RECORDS = [
    ("s1", "s1", [None, 0.74, 1.00]),
    ("s2", "s2", [0.41, 0.89, 0.47]),
    ("s3", "s3", [0.27, None, 0.03]),
    ("s4", "s4", [0.85, 0.00, 0.31]),
]


@pytest.fixture
def demo_table():
    return build_table(ModalitySet(DEMO_MODALITIES), DEMO_RECORDS, normalized=True)


@pytest.fixture
def small_table():
    """Complete 20-identity, 3-modality table for pipeline tests."""
    return generate(uniform_spec(20, 3, genuine=(0.75, 0.1), impostor=(0.3, 0.1),
                                 correlation=0.5, seed=101))


def mixed_quality_spec(n_identities=200, correlation=0.8, seed=42) -> SynthSpec:
    """Modalities whose class clusters sit at mismatched positions in [0, 1],
    so mean-of-available fusion degrades once patterns mix."""
    mods = (
        ModalityDistribution("gen_mid_a", 0.50, 0.14, 0.10, 0.04),
        ModalityDistribution("gen_mid_b", 0.55, 0.13, 0.12, 0.05),
        ModalityDistribution("imp_mid_a", 0.90, 0.04, 0.45, 0.14),
        ModalityDistribution("imp_mid_b", 0.92, 0.04, 0.50, 0.13),
    )
    return SynthSpec(n_identities=n_identities, modalities=mods,
                     correlation=correlation, seed=seed)


def random_fused(rng, n_genuine, n_impostor, ties=False):
    """Random fused-score arrays for metric oracle tests."""
    from scorefuse.metrics import FusedScores

    g = rng.random(n_genuine)
    i = rng.random(n_impostor)
    if ties:
        g = np.round(g, 1)
        i = np.round(i, 1)
    labels = np.r_[np.ones(n_genuine, dtype=bool), np.zeros(n_impostor, dtype=bool)]
    probes = np.array([f"p{j}" for j in range(n_genuine + n_impostor)], dtype=object)
    return FusedScores(
        probe_ids=probes,
        gallery_ids=probes.copy(),
        labels=labels,
        scores=np.r_[g, i],
        provenance="complete",
    )
