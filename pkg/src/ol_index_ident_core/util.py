from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from uuid import NAMESPACE_URL, UUID, uuid5


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def stable_stream(seed: int, *labels: str) -> int:
    """
    Deterministic 64-bit RNG stream id derived from a seed and string labels.

    Independent of PYTHONHASHSEED and process, so MC kernels reproduce across runs.
    """
    payload = ":".join([str(int(seed)), *labels]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def deterministic_run_id(*, scenario_fingerprint: str, options_fingerprint: str) -> UUID:
    return uuid5(NAMESPACE_URL, f"index-ident:{scenario_fingerprint}:{options_fingerprint}")


def canonical_json(payload: object) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(
        "w", encoding="utf-8", dir=str(path.parent), delete=False, suffix=".tmp"
    ) as tmp:
        tmp.write(text)
        tmp.flush()
        os.fsync(tmp.fileno())
        tmp_path = Path(tmp.name)
    os.replace(tmp_path, path)
