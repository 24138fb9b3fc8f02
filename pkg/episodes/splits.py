"""
Benchmark class splits.

PASCAL-5i and COCO-20i hold out one fold of classes for testing; FSS-1000
splits its class list 520/240/240.
"""
from dataclasses import dataclass

from django.db import models

from diffss.exceptions import ConfigError, ManifestError

PASCAL_CLASSES = (
    'aeroplane', 'bicycle', 'bird', 'boat', 'bottle',
    'bus', 'car', 'cat', 'chair', 'cow',
    'dining table', 'dog', 'horse', 'motorbike', 'person',
    'potted plant', 'sheep', 'sofa', 'train', 'tv monitor',
)

COCO_CLASSES = (
    'person', 'bicycle', 'car', 'motorcycle', 'airplane', 'bus', 'train', 'truck',
    'boat', 'traffic light', 'fire hydrant', 'stop sign', 'parking meter', 'bench',
    'bird', 'cat', 'dog', 'horse', 'sheep', 'cow', 'elephant', 'bear', 'zebra',
    'giraffe', 'backpack', 'umbrella', 'handbag', 'tie', 'suitcase', 'frisbee',
    'skis', 'snowboard', 'sports ball', 'kite', 'baseball bat', 'baseball glove',
    'skateboard', 'surfboard', 'tennis racket', 'bottle', 'wine glass', 'cup',
    'fork', 'knife', 'spoon', 'bowl', 'banana', 'apple', 'sandwich', 'orange',
    'broccoli', 'carrot', 'hot dog', 'pizza', 'donut', 'cake', 'chair', 'couch',
    'potted plant', 'bed', 'dining table', 'toilet', 'tv', 'laptop', 'mouse',
    'remote', 'keyboard', 'cell phone', 'microwave', 'oven', 'toaster', 'sink',
    'refrigerator', 'book', 'clock', 'vase', 'scissors', 'teddy bear',
    'hair drier', 'toothbrush',
)

FSS_COUNTS = (520, 240, 240)
FOLDS = 4


class Dataset(models.TextChoices):
    PASCAL5I = 'pascal5i', 'PASCAL-5i'
    FSS1000 = 'fss1000', 'FSS-1000'
    MINICOCO20I = 'minicoco20i', 'MiniCOCO-20i'
    SYNTHETIC = 'synthetic', 'Synthetic textures'


class Phase(models.TextChoices):
    TRAIN = 'train', 'Train'
    VAL = 'val', 'Validation'
    TEST = 'test', 'Test'


@dataclass(frozen=True)
class SplitSpec:
    dataset: Dataset
    fold: int
    phase: Phase
    classes: tuple[int, ...]
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'dataset', Dataset(self.dataset))
        object.__setattr__(self, 'phase', Phase(self.phase))
        object.__setattr__(self, 'classes', tuple(self.classes))
        object.__setattr__(self, 'class_names', tuple(self.class_names))

    def name_of(self, class_index: int) -> str:
        if self.class_names:
            return self.class_names[self.classes.index(class_index)]
        return default_class_name(self.dataset, class_index)


def _check_fold(fold: int) -> None:
    if fold not in range(FOLDS):
        raise ConfigError(f'fold must be in 0..{FOLDS - 1}, got {fold}')


def split_pascal5i(fold: int) -> tuple[list[int], list[int]]:
    """(train, test) classes: fold f tests classes 5f+1 .. 5f+5."""
    _check_fold(fold)
    test = list(range(5 * fold + 1, 5 * fold + 6))
    train = [c for c in range(1, 21) if c not in test]
    return train, test


def split_coco20i(fold: int) -> tuple[list[int], list[int]]:
    """(train, test) classes: fold f tests classes 4k+f+1 for k in 0..19."""
    _check_fold(fold)
    test = [4 * k + fold + 1 for k in range(20)]
    train = [c for c in range(1, 81) if c not in test]
    return train, test


def split_fss1000(class_names: list[str]) -> tuple[list[str], list[str], list[str]]:
    """(train, val, test) class names, taken in manifest order."""
    if len(class_names) != sum(FSS_COUNTS):
        raise ManifestError(f'FSS-1000 class manifest lists {len(class_names)} classes, expected {sum(FSS_COUNTS)}')
    if len(set(class_names)) != len(class_names):
        raise ManifestError('FSS-1000 class manifest repeats class names')
    n_train, n_val, _ = FSS_COUNTS
    names = list(class_names)
    return names[:n_train], names[n_train:n_train + n_val], names[n_train + n_val:]


def default_class_name(dataset: Dataset, class_index: int) -> str:
    table = {Dataset.PASCAL5I: PASCAL_CLASSES, Dataset.MINICOCO20I: COCO_CLASSES}.get(Dataset(dataset))
    if table is None or not 1 <= class_index <= len(table):
        return f'class {class_index}'
    return table[class_index - 1]


def make_split(
    dataset: Dataset | str,
    fold: int,
    phase: Phase | str,
    class_names: list[str] | None = None,
) -> SplitSpec:
    """
    Build the split for one (dataset, fold, phase). FSS-1000 and the synthetic
    set need ``class_names`` (FSS-1000: the 1000-entry class manifest;
    synthetic: every class, all of which are used in every phase). Val and
    test both evaluate on the held-out fold for the fold-based benchmarks.
    """
    dataset, phase = Dataset(dataset), Phase(phase)
    if dataset == Dataset.FSS1000:
        if class_names is None:
            raise ConfigError('FSS-1000 needs its class manifest')
        index = {name: position + 1 for position, name in enumerate(class_names)}
        chosen = dict(zip(Phase, split_fss1000(class_names)))[phase]
        return SplitSpec(dataset, 0, phase, [index[n] for n in chosen], chosen)
    if dataset == Dataset.SYNTHETIC:
        names = list(class_names or ())
        if not names:
            raise ConfigError('synthetic split needs class names')
        return SplitSpec(dataset, 0, phase, range(1, len(names) + 1), names)
    splitter = split_pascal5i if dataset == Dataset.PASCAL5I else split_coco20i
    train, test = splitter(fold)
    return SplitSpec(dataset, fold, phase, train if phase == Phase.TRAIN else test)


def read_class_list(text: str) -> list[str]:
    return [line.strip() for line in text.splitlines() if line.strip()]


def render_class_list(split: SplitSpec) -> str:
    return ''.join(f'{c}\t{split.name_of(c)}\n' for c in split.classes)
