"""Named, fully specified experiment configurations.

Each preset is a plain ``{section: {key: value}}`` mapping that goes through
the same validation as a config file and is written out as ``config.ini``.
"""

from __future__ import annotations

import copy

from varprof.config import ExperimentConfig, from_mapping
from varprof.errors import ConfigError


def _clt(family: dict, n: int, kind: str = "symmetric", k: int = 2, ks_max: float | None = None,
         replicas: int = 1000, law: str = "gaussian") -> dict:
    cfg = {
        "experiment": {"kind": "clt", "seed": "2024", "replicas": str(replicas)},
        "profile": {"n": str(n), **family},
        "ensemble": {"kind": kind, "law": law},
        "polynomial": {"k": str(k)},
    }
    if ks_max is not None:
        cfg["checks"] = {"ks_max": str(ks_max)}
    return cfg


PRESETS: dict[str, tuple[str, dict]] = {
    "corollary-3.1": ("separable profile, i.i.d. Gaussian entries, k=2",
                      _clt({"family": "separable", "v_low": "0.5", "v_high": "1", "w_low": "0.6",
                            "w_high": "1"}, 200, kind="iid", ks_max=0.08)),
    "corollary-3.2": ("profile sampled from a positive function on the unit square, symmetric, k=2",
                      _clt({"family": "sampled", "function": "cosine"}, 200, ks_max=0.08)),
    "corollary-3.3": ("symmetric profile bounded below by n^-0.2, k=2",
                      _clt({"family": "bounded-below", "alpha": "0.2"}, 200, ks_max=0.08)),
    "corollary-3.4-band": ("periodic band, n=400, band=80, k=2",
                           _clt({"family": "band", "band": "80", "periodic": "true"}, 400, ks_max=0.08)),
    "corollary-3.5-band": ("non-periodic band, n=400, band=80, i.i.d. entries, k=2",
                           _clt({"family": "band", "band": "80", "periodic": "false"}, 400, kind="iid",
                                ks_max=0.08)),
    "corollary-3.6": ("sample covariance X X^T through a symmetric host, n=100, m=150, k=2", {
        "experiment": {"kind": "embedding", "seed": "2024", "replicas": "1000"},
        "profile": {"family": "all-ones", "n": "250"},
        "ensemble": {"kind": "symmetric", "law": "gaussian"},
        "polynomial": {"k": "2"},
        "embedding": {"type": "covariance", "dims": "100, 150"},
        "checks": {"ks_max": "0.08", "residual_max": "1e-10"},
    }),
    "corollary-3.7": ("product X1 X2 of square Gaussian matrices through a cyclic host, k=2", {
        "experiment": {"kind": "embedding", "seed": "2024", "replicas": "1000"},
        "profile": {"family": "all-ones", "n": "160"},
        "ensemble": {"kind": "iid", "law": "gaussian"},
        "polynomial": {"k": "2"},
        "embedding": {"type": "product", "dims": "80, 80"},
        "checks": {"ks_max": "0.1", "residual_max": "1e-10"},
    }),
    "corollary-3.8": ("Erdos-Renyi support profile, p=0.3, symmetric, k=2",
                      _clt({"family": "erdos-renyi", "p": "0.3", "alpha": "0.35", "graph_seed": "0"}, 300,
                           ks_max=0.08)),
    "corollary-3.11": ("block-sparse profile with a leading half block of ones, k=2",
                       _clt({"family": "block-sparse", "c": "0.5"}, 200, ks_max=0.08)),
    "remark-4.2-i": ("five-block profile with two shifted blocks: structural zeros by k", {
        "experiment": {"kind": "structural-zero", "seed": "7"},
        "profile": {"family": "remark42", "variant": "i", "n": "50"},
        "ensemble": {"kind": "iid", "law": "gaussian"},
        "polynomial": {"k": "1, 2, 3, 4, 5, 6, 7"},
    }),
    "remark-4.2-ii": ("five-block cyclic profile: trace constant unless 5 divides k", {
        "experiment": {"kind": "structural-zero", "seed": "7"},
        "profile": {"family": "remark42", "variant": "ii", "n": "50"},
        "ensemble": {"kind": "iid", "law": "gaussian"},
        "polynomial": {"k": "1, 2, 3, 4, 5, 6, 7"},
    }),
    "remark-4.2-iii": ("ones with a vanishing trailing block, symmetric, k=2",
                       _clt({"family": "remark42", "variant": "iii"}, 200, ks_max=0.08)),
    "remark-4.3": ("periodic anti-diagonal band, symmetric, k=2",
                   _clt({"family": "anti-diagonal", "width": "100", "periodic": "true"}, 200, ks_max=0.08)),
    "smooth-law": ("all-ones symmetric profile with a smooth symmetric non-Gaussian law, k=2",
                   _clt({"family": "all-ones"}, 200, law="smooth-symmetric:eps=0.5", ks_max=0.08)),
    "bound-sweep": ("TV bound for the all-ones profile, k=2, n in 100, 400, 1600", {
        "experiment": {"kind": "bound-sweep"},
        "profile": {"family": "all-ones", "n": "100, 400, 1600"},
        "polynomial": {"k": "2"},
    }),
    "bound-sweep-band": ("TV bound for periodic bands of width ceil(n^0.8), k=2", {
        "experiment": {"kind": "bound-sweep"},
        "profile": {"family": "band", "band_exponent": "0.8", "n": "100, 400, 1600"},
        "polynomial": {"k": "2"},
    }),
    "bound-sweep-remark-4.2-ii": ("TV bound for the five-block cyclic profile, k=3 (vacuous)", {
        "experiment": {"kind": "bound-sweep"},
        "profile": {"family": "remark42", "variant": "ii", "n": "50, 100, 200"},
        "polynomial": {"k": "3"},
    }),
    "variance-lower-bound": ("Monte Carlo variance against the cycle sum, all-ones n=20, k=2,3", {
        "experiment": {"kind": "variance-check", "seed": "11", "replicas": "5000"},
        "profile": {"family": "all-ones", "n": "20"},
        "ensemble": {"kind": "symmetric", "law": "gaussian"},
        "polynomial": {"k": "2, 3"},
    }),
    "norm-concentration": ("spectral norm of the all-ones symmetric Gaussian matrix, n=500", {
        "experiment": {"kind": "norm-check", "seed": "5"},
        "profile": {"family": "all-ones", "n": "500"},
        "ensemble": {"kind": "symmetric", "law": "gaussian"},
        "norm": {"trials": "100", "t": "2.0", "k_cal": "1.0"},
        "checks": {"ratio_max": "3.0"},
    }),
    "er-concentration": ("cycle sums and degrees of Erdos-Renyi graphs, n=500, p=0.3, k=3", {
        "experiment": {"kind": "er-concentration", "seed": "0"},
        "profile": {"family": "erdos-renyi", "n": "500", "p": "0.3", "alpha": "0.35"},
        "polynomial": {"k": "3"},
        "graph": {"graphs": "100"},
        "checks": {"ratio_low": "0.9", "ratio_high": "1.1", "fraction_min": "0.99"},
    }),
    "cycle-oracle": ("depth-first cycle sums against brute force on 50 small random profiles", {
        "experiment": {"kind": "cycle-oracle", "seed": "1"},
        "profile": {"family": "all-ones", "n": "8"},
        "polynomial": {"k": "2, 3, 4"},
        "oracle": {"cases": "50", "n_max": "8", "density": "0.4"},
        "checks": {"rel_tol": "1e-9"},
    }),
}


def list_presets() -> list[tuple[str, str]]:
    return [(name, desc) for name, (desc, _) in PRESETS.items()]


def preset_mapping(name: str, n: int | None = None, seed: int | None = None,
                   replicas: int | None = None) -> dict:
    """The raw mapping for preset ``name`` with optional overrides applied."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; see list-presets")
    mapping = copy.deepcopy(PRESETS[name][1])
    mapping["experiment"]["name"] = name
    if n is not None:
        mapping["profile"]["n"] = str(n)
        if "embedding" in mapping:
            raise ConfigError("sizes of embedding presets are set by [embedding] dims", "--n")
    if seed is not None:
        mapping["experiment"]["seed"] = str(seed)
    if replicas is not None:
        mapping["experiment"]["replicas"] = str(replicas)
    return mapping


def load_preset(name: str, **overrides) -> ExperimentConfig:
    return from_mapping(preset_mapping(name, **overrides))
