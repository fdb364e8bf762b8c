"""Training-manifest emission.

The pipeline records how the downstream fine-tune is configured (adapter
rank/alpha/targets, optimizer schedule) but never executes it. Defaults
carry the reference recipe; any override is allowed and simply recorded.
"""

from __future__ import annotations

from pathlib import Path

from .. import jsonio
from ..errors import MissingField

REQUIRED_FIELDS = (
    "adapter_rank",
    "adapter_alpha",
    "adapter_targets",
    "batch_size",
    "grad_accum_steps",
    "optimizer",
    "learning_rate",
    "schedule",
    "warmup_steps",
    "epochs",
)


def default_tuning_config() -> dict:
    return {
        "adapter_rank": 128,
        "adapter_alpha": 64,
        "adapter_targets": ["q", "k", "v", "experts", "router"],
        "batch_size": 16,
        "grad_accum_steps": 2,
        "optimizer": "AdamW",
        "learning_rate": 0.0002,
        "schedule": "cosine",
        "warmup_steps": 10,
        "epochs": 2,
    }


def adapter_parameter_fraction(cfg: dict, architecture: dict) -> float:
    """Fraction of total parameters trained, from supplied matrix shapes.

    architecture = {"total_params": N, "adapter_targets":
    [{"name", "d_in", "d_out", "count"}, ...]}; each adapted matrix of shape
    (d_in, d_out) contributes rank * (d_in + d_out) adapter parameters.
    Reported for context, never asserted against a target value.
    """
    rank = cfg["adapter_rank"]
    adapter_params = sum(
        t["count"] * rank * (t["d_in"] + t["d_out"]) for t in architecture["adapter_targets"]
    )
    return adapter_params / architecture["total_params"]


def emit_tuning_manifest(
    cfg: dict,
    path: str | Path,
    architecture: dict | None = None,
    config_hash: str = "",
) -> dict:
    """Validate completeness and write the manifest JSON. Returns the payload."""
    missing = [f for f in REQUIRED_FIELDS if f not in cfg]
    if missing:
        raise MissingField(f"tuning config missing field(s): {missing}")
    manifest = {field: cfg[field] for field in REQUIRED_FIELDS}
    extra = {k: cfg[k] for k in sorted(set(cfg) - set(REQUIRED_FIELDS))}
    manifest.update(extra)
    manifest["adapter_param_fraction"] = (
        round(adapter_parameter_fraction(cfg, architecture), 6) if architecture else None
    )
    manifest["config_hash"] = config_hash
    jsonio.write_json(path, manifest)
    return manifest
