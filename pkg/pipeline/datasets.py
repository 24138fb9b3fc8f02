import logging
from pathlib import Path

from diffss.exceptions import ConfigError, DiffssError
from episodes.manifest import ManifestRecord, load_manifest, load_support, support_id
from episodes.samples import SupportSample
from episodes.splits import Dataset, SplitSpec, make_split, read_class_list

from .config import RunConfig

logger = logging.getLogger(__name__)


def load_pool(config: RunConfig) -> list[ManifestRecord]:
    return load_manifest(config.data_dir / config.manifest)


def class_names(config: RunConfig, pool: list[ManifestRecord]) -> list[str] | None:
    if config.dataset == Dataset.FSS1000:
        path = Path(config.class_list)
        if not path.is_absolute():
            path = config.data_dir / path
        if not path.exists():
            raise ConfigError(f'class list {path} does not exist')
        return read_class_list(path.read_text(encoding='utf-8'))
    if config.dataset == Dataset.SYNTHETIC:
        names = {}
        for record in pool:
            for c in record.classes:
                names.setdefault(c, record.name_of(c) or f'class {c}')
        if not names:
            raise ConfigError('synthetic manifest has no classes')
        return [names.get(c, f'class {c}') for c in range(1, max(names) + 1)]
    return None


def splits_for(config: RunConfig, pool: list[ManifestRecord]) -> list[SplitSpec]:
    names = class_names(config, pool)
    return [make_split(config.dataset, fold, config.phase, names) for fold in config.folds]


def support_index(pool: list[ManifestRecord], splits: list[SplitSpec]) -> dict[str, tuple[ManifestRecord, int, SplitSpec]]:
    """Every (record, class) pair usable as a support, by support id."""
    index = {}
    for split in splits:
        wanted = set(split.classes)
        for record in pool:
            for c in sorted(set(record.classes) & wanted):
                index.setdefault(support_id(record, c), (record, c, split))
    return dict(sorted(index.items()))


def support_by_id(config: RunConfig, index: dict, sid: str) -> SupportSample:
    record, c, split = index[sid]
    return load_support(config.data_dir, record, c, record.name_of(c) or split.name_of(c))


def load_supports(config: RunConfig, index: dict, ids=None) -> dict[str, SupportSample]:
    """
    Load supports by id. Bad samples stop the run unless ``keep_going`` is
    set, in which case they are logged and left out.
    """
    supports = {}
    for sid in (ids if ids is not None else index):
        try:
            supports[sid] = support_by_id(config, index, sid)
        except DiffssError as exc:
            if not config.keep_going:
                raise
            logger.warning('skipping support %s: %s', sid, exc)
    return supports
