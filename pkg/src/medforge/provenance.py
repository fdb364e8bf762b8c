"""Run provenance: config hashing and output-file hash manifests.

Every CLI run writes a ``run.json`` next to its artifacts recording the
resolved configuration, its hash, and the sha256 of every file the run
produced. ``medforge verify <dir>`` re-hashes everything and reports drift.
JSON documents additionally embed ``config_hash`` themselves; JSONL files
are covered by the manifest (a header line would break their one-record-
per-line schema).
"""

from __future__ import annotations

from pathlib import Path

from . import __version__, jsonio

RUN_MANIFEST_NAME = "run.json"


def config_hash(resolved_config: dict) -> str:
    return jsonio.sha256_obj(resolved_config)


class RunManifest:
    """Collects artifact hashes for one pipeline run."""

    def __init__(self, out_dir: str | Path, resolved_config: dict):
        self.out_dir = Path(out_dir)
        self.resolved_config = resolved_config
        self.config_hash = config_hash(resolved_config)
        self.files: dict[str, str] = {}

    def track(self, path: str | Path) -> None:
        rel = str(Path(path).resolve().relative_to(self.out_dir.resolve()))
        self.files[rel] = jsonio.sha256_file(path)

    def write(self) -> Path:
        path = self.out_dir / RUN_MANIFEST_NAME
        jsonio.write_json(
            path,
            {
                "tool": "medforge",
                "version": __version__,
                "config_hash": self.config_hash,
                "resolved_config": self.resolved_config,
                "files": {k: self.files[k] for k in sorted(self.files)},
            },
        )
        return path


def verify_dir(out_dir: str | Path) -> list[str]:
    """Check every hash recorded in run.json. Returns a list of problems."""
    out_dir = Path(out_dir)
    manifest_path = out_dir / RUN_MANIFEST_NAME
    if not manifest_path.exists():
        return [f"missing {RUN_MANIFEST_NAME} in {out_dir}"]
    manifest = jsonio.read_json(manifest_path)
    problems: list[str] = []
    recomputed = config_hash(manifest.get("resolved_config", {}))
    if recomputed != manifest.get("config_hash"):
        problems.append(
            f"config_hash mismatch: recorded {manifest.get('config_hash')}, recomputed {recomputed}"
        )
    for rel, recorded in sorted(manifest.get("files", {}).items()):
        path = out_dir / rel
        if not path.exists():
            problems.append(f"{rel}: file missing")
            continue
        actual = jsonio.sha256_file(path)
        if actual != recorded:
            problems.append(f"{rel}: hash mismatch (recorded {recorded[:12]}, actual {actual[:12]})")
    return problems
