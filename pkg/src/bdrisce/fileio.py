"""Text persistence for pools, TRP sets, and experiment configuration.

Pools and TRP sets are stored binary-free: comment lines starting with
``#`` carry ``key=value`` metadata, then one TRP per line with one
complex entry per whitespace-separated token (``repr`` round-trip
precision).  Experiment configuration is an INI document with one
section per module; see ``configs/default.ini`` for the full schema.
All physical quantities carry unit suffixes in their key names.
"""

from __future__ import annotations

import configparser

import numpy as np

from .bdris import BdRisConfig
from .channel import SceneGeometry, dbm_to_watts
from .estimator import TrainConfig
from .harness import RunConfig
from .selection import CandidatePool, TrpSet


def _write_matrix(fh, matrix: np.ndarray) -> None:
    for row in matrix:
        fh.write(" ".join(repr(complex(z)) for z in row))
        fh.write("\n")


def _parse_header_and_rows(path):
    meta: dict[str, str] = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" in body:
                    for token in body.split():
                        if "=" in token:
                            key, _, value = token.partition("=")
                            meta[key] = value
                continue
            rows.append([complex(tok) for tok in line.split()])
    if not rows:
        raise ValueError(f"no TRP rows found in {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"ragged TRP rows in {path}")
    return meta, np.array(rows, dtype=complex)


def _config_header(config: BdRisConfig) -> str:
    return (f"# n_elements={config.n_elements} group_size={config.group_size} "
            f"reference_impedance={config.reference_impedance!r}\n")


def _config_from_meta(meta, path) -> BdRisConfig:
    try:
        return BdRisConfig(n_elements=int(meta["n_elements"]),
                           group_size=int(meta["group_size"]),
                           reference_impedance=float(meta["reference_impedance"]))
    except KeyError as exc:
        raise ValueError(f"{path} is missing header key {exc}") from exc


def save_pool(pool: CandidatePool, config: BdRisConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# bdrisce candidate pool\n")
        fh.write(_config_header(config))
        fh.write(f"# pool_size={pool.pool_size}\n")
        _write_matrix(fh, pool.matrix)


def load_pool(path) -> tuple[CandidatePool, BdRisConfig]:
    meta, matrix = _parse_header_and_rows(path)
    config = _config_from_meta(meta, path)
    if matrix.shape[1] != config.trp_length:
        raise ValueError(f"{path}: TRP length {matrix.shape[1]} does not match header")
    return CandidatePool(matrix), config


def save_trp_set(trp_set: TrpSet, config: BdRisConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# bdrisce TRP selection\n")
        fh.write(_config_header(config))
        fh.write("# source_indices=" + ",".join(str(i) for i in trp_set.source_indices) + "\n")
        _write_matrix(fh, trp_set.matrix)


def load_trp_set(path) -> tuple[TrpSet, BdRisConfig]:
    meta, matrix = _parse_header_and_rows(path)
    config = _config_from_meta(meta, path)
    if "source_indices" not in meta:
        raise ValueError(f"{path} is missing header key 'source_indices'")
    indices = tuple(int(tok) for tok in meta["source_indices"].split(",") if tok != "")
    return TrpSet(matrix, indices), config


def _vector_key(raw: str) -> tuple[float, float, float]:
    parts = [float(tok) for tok in raw.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated values, got {raw!r}")
    return tuple(parts)  # type: ignore[return-value]


def load_run_config(path, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an INI file, with optional key overrides.

    ``overrides`` maps dotted keys (``run.master_seed``, ``trp.trp_count``,
    ...) to already-typed values and wins over the file contents.
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read config file {path}")
    overrides = dict(overrides or {})

    def get(section, key, cast, default):
        dotted = f"{section}.{key}"
        if dotted in overrides:
            value = overrides.pop(dotted)
            return None if value is None else cast(value) if cast is not None else value
        if parser.has_option(section, key):
            raw = parser.get(section, key).strip()
            if raw.lower() in ("", "none"):
                return None
            return cast(raw) if cast is not None else raw
        return default

    bdris = BdRisConfig(
        n_elements=get("bdris", "n_elements", int, 16),
        group_size=get("bdris", "group_size", int, 4),
        reference_impedance=get("bdris", "reference_impedance_ohms", float, 50.0),
    )
    upa_raw = get("scene", "upa_dims", None, "4,4")
    if isinstance(upa_raw, str):
        upa = tuple(int(tok) for tok in upa_raw.split(","))
    else:
        upa = tuple(int(v) for v in upa_raw)
    if len(upa) != 2:
        raise ValueError("scene.upa_dims must be two comma-separated integers")
    scene = SceneGeometry(
        bs_position=_vector_key(get("scene", "bs_position_m", None, "50,-200,20")),
        ris_position=_vector_key(get("scene", "ris_position_m", None, "-2,-1,0")),
        user_area_min=_vector_key(get("scene", "user_area_min_m", None, "0,0,0")),
        user_area_max=_vector_key(get("scene", "user_area_max_m", None, "10,10,0")),
        upa_dims=upa,  # type: ignore[arg-type]
        element_spacing=get("scene", "element_spacing_wavelengths", float, 0.5),
    )
    train = TrainConfig(
        train_fraction=get("train", "train_fraction", float, 0.8),
        max_iterations=get("train", "max_iterations", int, 5000),
        lr_max=get("train", "lr_max", float, 0.1),
        lr_min=get("train", "lr_min", float, 1e-4),
        cosine_period=get("train", "cosine_period", int, 1000),
        batch_size=get("train", "batch_size", int, 32),
        init_scale=get("train", "init_scale", float, 0.01),
        normalization=get("train", "normalization", str, "mean_power"),
        seed=get("train", "seed", int, 0),
        eval_every=get("train", "eval_every", int, 1),
    )
    tx_power_dbm = get("channel", "tx_power_dbm", float, 30.0)
    cfg = RunConfig(
        bdris=bdris,
        scene=scene,
        trp_count=get("trp", "trp_count", int, 500),
        train=train,
        fading=get("channel", "fading", str, "los"),
        tx_power_watts=dbm_to_watts(tx_power_dbm),
        noise_power_dbm=get("channel", "noise_power_dbm", float, None),
        pool_size=get("trp", "pool_size", int, None),
        selection_scheme=get("trp", "selection_scheme", str, "greedy"),
        monte_carlo_trials=get("run", "monte_carlo_trials", int, 20),
        master_seed=get("run", "master_seed", int, 0),
    )
    if overrides:
        raise ValueError(f"unknown override keys: {sorted(overrides)}")
    return cfg
