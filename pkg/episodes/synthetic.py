"""
Synthetic texture dataset: flat-ish colored objects on random smooth
backgrounds. Small enough to evaluate in seconds, varied enough that extra
support views change the reference segmenter's output.
"""
import logging
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from diffss.storage import write_png

from .manifest import ManifestRecord, size_bucket, write_manifest

logger = logging.getLogger(__name__)

# name and base RGB per class; index is position + 1
SYNTHETIC_CLASSES = (
    ('tomato', (205, 45, 40)),
    ('blueberry', (45, 60, 200)),
)
MANIFEST_NAME = 'manifest.jsonl'


def _object_mask(rng: np.random.Generator, size: int) -> np.ndarray:
    ys, xs = np.mgrid[0:size, 0:size]
    cy, cx = rng.uniform(0.3 * size, 0.7 * size, size=2)
    ry, rx = rng.uniform(0.15 * size, 0.3 * size, size=2)
    return (((ys - cy) / ry) ** 2 + ((xs - cx) / rx) ** 2 <= 1.0).astype(np.uint8)


def _background(rng: np.random.Generator, size: int) -> np.ndarray:
    c0, c1 = rng.uniform(0.0, 255.0, size=(2, 3))
    ys, xs = np.mgrid[0:size, 0:size] / max(size - 1, 1)
    t = (xs + ys) / 2.0 if rng.integers(2) else (xs - ys + 1.0) / 2.0
    return c0 + t[..., None] * (c1 - c0)


def render_sample(rng: np.random.Generator, base_color, size: int) -> tuple[np.ndarray, np.ndarray]:
    mask = _object_mask(rng, size)
    color = np.asarray(base_color, dtype=np.float64) + rng.uniform(-30.0, 30.0, size=3)
    texture = gaussian_filter(rng.standard_normal((size, size)), 1.0) * 10.0
    foreground = color + texture[..., None]
    image = np.where(mask[..., None].astype(bool), foreground, _background(rng, size))
    return np.clip(np.rint(image), 0, 255).astype(np.uint8), mask


def make_synthetic_dataset(root: Path, per_class: int = 10, size: int = 48, seed: int = 0) -> list[ManifestRecord]:
    """Write images, label maps and a manifest under ``root``; return the records."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    records = []
    for class_index, (name, color) in enumerate(SYNTHETIC_CLASSES, start=1):
        for n in range(per_class):
            image, mask = render_sample(rng, color, size)
            record_id = f'{name}-{n:03d}'
            write_png(root / 'images' / f'{record_id}.png', image)
            write_png(root / 'masks' / f'{record_id}.png', (mask * class_index).astype(np.uint8))
            records.append(ManifestRecord(
                id=record_id,
                image=f'images/{record_id}.png',
                mask=f'masks/{record_id}.png',
                classes=[class_index],
                sizes=[size_bucket(int(mask.sum()))],
                names=[name],
            ))
    write_manifest(root / MANIFEST_NAME, records)
    logger.info('wrote synthetic dataset root=%s images=%d', root, len(records))
    return sorted(records, key=lambda r: r.id)


def synthetic_class_names() -> list[str]:
    return [name for name, _ in SYNTHETIC_CLASSES]
