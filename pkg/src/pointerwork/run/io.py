import hashlib
import json
import math
import numpy as np
import pandas as pd
import yaml
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional
import pointerwork

FLOAT_FORMAT = "%.12g"


def _jsonable(value):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(obj, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_jsonable(obj), f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")
    return path


def write_csv(frame: pd.DataFrame, path) -> Path:
    """UTF-8, comma-delimited, '.' decimal, header row; infinities as inf, NaN as nan."""
    path = Path(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
    return path


def config_hash(config: dict) -> str:
    """sha256 of the resolved config without the output block, which never changes the numbers."""
    physics = {k: v for k, v in config.items() if k != "output"}
    text = yaml.safe_dump(physics, sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seeds: List[int]
    version: str = pointerwork.__version__
    started: str = field(default_factory=_now)
    finished: Optional[str] = None
    exit_status: Optional[int] = None
    files: List[dict] = field(default_factory=list)

    @classmethod
    def start(cls, command: str, config: dict):
        return cls(command=command, config_hash=config_hash(config), seeds=list(config["sweep"]["seeds"]))

    def finish(self, out_dir, paths, exit_status: int = 0) -> Path:
        """Stamp the end time, hash every output file and write manifest.json."""
        out_dir = Path(out_dir)
        self.finished = _now()
        self.exit_status = exit_status
        self.files = [
            {
                "path": str(Path(p).relative_to(out_dir)) if Path(p).is_relative_to(out_dir) else str(p),
                "sha256": file_digest(p),
                "bytes": Path(p).stat().st_size,
            }
            for p in sorted(set(str(p) for p in paths))
        ]
        return write_json(asdict(self), out_dir / "manifest.json")
