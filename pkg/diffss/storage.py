"""
Atomic file output: every artifact is written to a temp file in the target
directory and renamed over the destination.
"""
import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Iterator

from .imaging import encode_png, mask_to_png


def atomic_write_bytes(path: Path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
    try:
        with os.fdopen(fd, 'wb') as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode('utf-8'))


def dumps(document) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + '\n'


def write_json(path: Path, document) -> Path:
    return atomic_write_text(path, dumps(document))


def write_jsonl(path: Path, records: Iterable[dict]) -> Path:
    lines = [json.dumps(record, sort_keys=True) for record in records]
    return atomic_write_text(path, ''.join(f'{line}\n' for line in lines))


def read_jsonl(path: Path) -> Iterator[dict]:
    with open(path, encoding='utf-8') as handle:
        for line in handle:
            line = line.strip()
            if line:
                yield json.loads(line)


def write_png(path: Path, array) -> str:
    data = encode_png(array)
    atomic_write_bytes(path, data)
    return sha256(data)


def write_mask_png(path: Path, mask) -> str:
    data = mask_to_png(mask)
    atomic_write_bytes(path, data)
    return sha256(data)


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
