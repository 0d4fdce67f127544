"""Experiment configuration files.

A configuration is an INI file with sections ``[experiment]``, ``[profile]``,
``[ensemble]``, ``[polynomial]`` and optional kind-specific sections
(``[embedding]``, ``[norm]``, ``[oracle]``, ``[graph]``, ``[checks]``). Every
value is validated before any experiment runs; errors name the offending
``[section] key``.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from varprof.entrylaws import parse_law
from varprof.errors import ConfigError, DomainError

KINDS = ("clt", "bound-sweep", "norm-check", "variance-check", "cycle-oracle", "embedding",
         "er-concentration", "structural-zero")

# family -> allowed profile keys besides "family" and "n"
FAMILIES = {
    "all-ones": (),
    "separable": ("v_low", "v_high", "w_low", "w_high"),
    "sampled": ("function",),
    "band": ("band", "band_exponent", "periodic"),
    "erdos-renyi": ("p", "alpha", "graph_seed"),
    "block-sparse": ("c",),
    "anti-diagonal": ("width", "periodic"),
    "remark42": ("variant", "scaled"),
    "bounded-below": ("alpha", "profile_seed"),
    "file": ("path",),
}

SAMPLED_FUNCTIONS = {
    # positive on [0,1]^2 with unit row and column integrals
    "cosine": lambda x, y: 1 + 0.5 * _cos2pi(x) * _cos2pi(y),
    "constant": lambda x, y: 1.0 + 0 * x * y,
}

OPTION_SECTIONS = {
    "embedding": {"type": str, "dims": "ints"},
    "norm": {"t": float, "k_cal": float, "trials": int},
    "oracle": {"cases": int, "n_max": int, "density": float},
    "graph": {"graphs": int, "p": float, "alpha": float},
    "checks": {"ks_max": float, "ratio_max": float, "ratio_low": float, "ratio_high": float,
               "fraction_min": float, "rel_tol": float, "residual_max": float},
}

EXPERIMENT_KEYS = ("kind", "name", "seed", "replicas", "workers", "out")


def _cos2pi(x):
    import numpy as np

    return np.cos(2 * np.pi * x)


@dataclass
class ExperimentConfig:
    kind: str
    name: str
    seed: int
    replicas: int
    profile: dict
    ns: tuple[int, ...]
    ensemble_kind: str
    law: str
    coeffs: tuple[float, ...] | None
    ks: tuple[int, ...]
    options: dict = field(default_factory=dict)
    out: str | None = None
    workers: int | None = None

    def canonical(self) -> dict:
        """Everything that determines results (not ``out`` or ``workers``)."""
        return {
            "kind": self.kind,
            "name": self.name,
            "seed": self.seed,
            "replicas": self.replicas,
            "profile": self.profile,
            "ns": list(self.ns),
            "ensemble": {"kind": self.ensemble_kind, "law": self.law},
            "coeffs": list(self.coeffs) if self.coeffs else None,
            "ks": list(self.ks),
            "options": self.options,
        }

    @property
    def hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp["experiment"] = {"kind": self.kind, "name": self.name, "seed": str(self.seed),
                            "replicas": str(self.replicas)}
        prof = {"family": self.profile["family"], "n": _join(self.ns)}
        prof.update({k: _fmt(v) for k, v in self.profile.items() if k != "family"})
        cp["profile"] = prof
        cp["ensemble"] = {"kind": self.ensemble_kind, "law": self.law}
        poly = {"k": _join(self.ks)}
        if self.coeffs:
            poly["coeffs"] = _join(self.coeffs)
        cp["polynomial"] = poly
        for section, values in self.options.items():
            cp[section] = {k: _fmt(v) for k, v in values.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return _join(v)
    return str(v)


def _join(values):
    return ", ".join(str(v) for v in values)


def _int(value, where, lo=None, hi=None):
    try:
        out = int(str(value).strip())
    except ValueError:
        raise ConfigError(f"expected an integer, got {value!r}", where) from None
    if lo is not None and out < lo:
        raise ConfigError(f"must be >= {lo}, got {out}", where)
    if hi is not None and out > hi:
        raise ConfigError(f"must be <= {hi}, got {out}", where)
    return out


def _float(value, where):
    try:
        out = float(str(value).strip())
    except ValueError:
        raise ConfigError(f"expected a number, got {value!r}", where) from None
    if not math.isfinite(out):
        raise ConfigError("must be finite", where)
    return out


def _bool(value, where):
    s = str(value).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}", where)


def _list(value, conv, where):
    parts = [p for p in str(value).replace(";", ",").split(",") if p.strip()]
    if not parts:
        raise ConfigError("empty list", where)
    return tuple(conv(p, where) for p in parts)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return from_mapping({s: dict(cp[s]) for s in cp.sections()})


def from_mapping(sections: dict) -> ExperimentConfig:
    """Validate a ``{section: {key: value}}`` mapping into an ExperimentConfig."""
    allowed = {"experiment", "profile", "ensemble", "polynomial", *OPTION_SECTIONS}
    for s in sections:
        if s not in allowed:
            raise ConfigError(f"unknown section [{s}]")
    exp = dict(sections.get("experiment", {}))
    for key in exp:
        if key not in EXPERIMENT_KEYS:
            raise ConfigError("unknown key", f"[experiment] {key}")
    kind = str(exp.get("kind", "")).strip()
    if kind not in KINDS:
        raise ConfigError(f"must be one of {', '.join(KINDS)}; got {kind!r}", "[experiment] kind")
    name = str(exp.get("name", kind)).strip()
    seed = _int(exp.get("seed", 0), "[experiment] seed", 0, 2 ** 63 - 1)
    replicas = _int(exp.get("replicas", 1000), "[experiment] replicas", 2)
    workers = _int(exp["workers"], "[experiment] workers", 1) if "workers" in exp else None
    out = exp.get("out")

    prof_raw = dict(sections.get("profile", {"family": "all-ones", "n": "100"}))
    profile, ns = _validate_profile(prof_raw, kind)

    ens = dict(sections.get("ensemble", {}))
    for key in ens:
        if key not in ("kind", "law"):
            raise ConfigError("unknown key", f"[ensemble] {key}")
    ensemble_kind = str(ens.get("kind", "symmetric")).strip()
    if ensemble_kind not in ("iid", "symmetric"):
        raise ConfigError(f"must be iid or symmetric, got {ensemble_kind!r}", "[ensemble] kind")
    law = str(ens.get("law", "gaussian")).strip()
    try:
        parse_law(law)
    except DomainError as exc:
        raise ConfigError(str(exc), "[ensemble] law") from None

    poly = dict(sections.get("polynomial", {}))
    for key in poly:
        if key not in ("k", "coeffs"):
            raise ConfigError("unknown key", f"[polynomial] {key}")
    coeffs = None
    if "coeffs" in poly:
        coeffs = _list(poly["coeffs"], _float, "[polynomial] coeffs")
        if len(coeffs) < 2 or coeffs[-1] == 0:
            raise ConfigError("need degree >= 1 with nonzero leading coefficient", "[polynomial] coeffs")
        ks = (len(coeffs) - 1,)
    else:
        ks = _list(poly.get("k", "2"), lambda v, w: _int(v, w, 1, 10), "[polynomial] k")

    options = {}
    for section, spec in OPTION_SECTIONS.items():
        if section not in sections:
            continue
        vals = {}
        for key, value in sections[section].items():
            where = f"[{section}] {key}"
            if key not in spec:
                raise ConfigError("unknown key", where)
            conv = spec[key]
            if conv == "ints":
                vals[key] = list(_list(value, lambda v, w: _int(v, w, 1), where))
            elif conv is int:
                vals[key] = _int(value, where, 1)
            elif conv is float:
                vals[key] = _float(value, where)
            else:
                vals[key] = str(value).strip()
        options[section] = vals

    cfg = ExperimentConfig(kind, name, seed, replicas, profile, ns, ensemble_kind, law, coeffs, ks,
                           options, out, workers)
    _validate_kind(cfg)
    return cfg


def _validate_profile(raw, kind):
    family = str(raw.get("family", "")).strip()
    if family not in FAMILIES:
        raise ConfigError(f"must be one of {', '.join(FAMILIES)}; got {family!r}", "[profile] family")
    for key in raw:
        if key not in ("family", "n") + FAMILIES[family]:
            raise ConfigError(f"not a parameter of family {family}", f"[profile] {key}")
    if family == "file":
        if "path" not in raw:
            raise ConfigError("required for family 'file'", "[profile] path")
        try:
            ns = (build_profile({"family": "file", "path": str(raw["path"]).strip()}, 0).n,)
        except DomainError as exc:
            raise ConfigError(str(exc), "[profile] path") from None
    else:
        ns = _list(raw.get("n", "100"), lambda v, w: _int(v, w, 1, 5000), "[profile] n")
        if len(ns) > 1 and kind != "bound-sweep":
            raise ConfigError("a list of sizes is only allowed for bound-sweep", "[profile] n")
    profile = {"family": family}
    for key in FAMILIES[family]:
        if key not in raw:
            continue
        where = f"[profile] {key}"
        value = raw[key]
        if key in ("periodic", "scaled"):
            profile[key] = _bool(value, where)
        elif key in ("band", "width", "graph_seed", "profile_seed"):
            profile[key] = _int(value, where, 0)
        elif key in ("variant", "function", "path"):
            profile[key] = str(value).strip()
        else:
            profile[key] = _float(value, where)
    if family == "band" and ("band" in profile) == ("band_exponent" in profile):
        raise ConfigError("give exactly one of band, band_exponent", "[profile] band")
    if family == "sampled" and profile.get("function", "cosine") not in SAMPLED_FUNCTIONS:
        raise ConfigError(f"unknown function; choose from {', '.join(SAMPLED_FUNCTIONS)}",
                          "[profile] function")
    for n in ns:
        try:
            build_profile(profile, n)
        except DomainError as exc:
            raise ConfigError(f"n={n}: {exc}", f"[profile] {family}") from None
    return profile, ns


def _validate_kind(cfg):
    opts = cfg.options
    if cfg.kind == "embedding":
        emb = opts.get("embedding", {})
        if emb.get("type") not in ("covariance", "product"):
            raise ConfigError("must be covariance or product", "[embedding] type")
        dims = emb.get("dims")
        if not dims or (emb["type"] == "covariance" and len(dims) != 2) or len(dims) < 2:
            raise ConfigError("covariance needs two dims, product at least two", "[embedding] dims")
    if cfg.kind in ("clt", "embedding", "variance-check"):
        law = parse_law(cfg.law)
        if cfg.kind != "clt" and not law.compliant:
            raise ConfigError("this experiment needs a symmetric unit-variance law", "[ensemble] law")
    if cfg.kind == "er-concentration" and cfg.profile["family"] != "erdos-renyi":
        raise ConfigError("er-concentration needs family erdos-renyi", "[profile] family")
    if cfg.kind == "norm-check" and opts.get("norm", {}).get("trials", 100) < 30:
        raise ConfigError("at least 30 trials", "[norm] trials")
    if cfg.ensemble_kind == "symmetric" and cfg.kind in ("clt", "norm-check", "variance-check",
                                                          "structural-zero"):
        for n in cfg.ns:
            if cfg.profile["family"] != "file" and not build_profile(cfg.profile, n).symmetric:
                raise ConfigError("symmetric ensemble needs a symmetric profile", "[ensemble] kind")


def build_profile(profile: dict, n: int):
    """Construct the StdDevProfile described by a validated ``[profile]`` mapping."""
    from varprof import profiles as pr

    family = profile["family"]
    if family == "all-ones":
        return pr.all_ones(n)
    if family == "separable":
        import numpy as np

        v = np.linspace(profile.get("v_low", 0.5), profile.get("v_high", 1.0), n)
        w = np.linspace(profile.get("w_low", 0.5), profile.get("w_high", 1.0), n)
        return pr.make_separable(v, w)
    if family == "sampled":
        return pr.make_sampled(SAMPLED_FUNCTIONS[profile.get("function", "cosine")], n)
    if family == "band":
        band = profile.get("band")
        if band is None:
            band = math.ceil(n ** profile["band_exponent"])
        return pr.make_band(n, band, profile.get("periodic", True))
    if family == "erdos-renyi":
        cfg = pr.ErdosRenyiConfig(n, profile.get("p", 0.3), profile.get("alpha", 0.35),
                                  seed=profile.get("graph_seed", 0))
        return pr.sample_erdos_renyi(cfg)
    if family == "block-sparse":
        return pr.make_block_sparse(n, profile.get("c", 0.5))
    if family == "anti-diagonal":
        return pr.make_anti_diagonal(n, profile.get("width", max(1, n // 2)), profile.get("periodic", True))
    if family == "remark42":
        return pr.make_remark42(profile.get("variant", "ii"), n, profile.get("scaled", True))
    if family == "bounded-below":
        return pr.make_bounded_below(n, profile.get("alpha", 0.2), profile.get("profile_seed", 0))
    if family == "file":
        try:
            return pr.load_profile(profile["path"])
        except OSError as exc:
            raise DomainError(f"cannot read {profile['path']}: {exc}") from None
    raise DomainError(f"unknown family {family!r}")
