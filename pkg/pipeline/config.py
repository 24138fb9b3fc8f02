"""
Run configuration. Precedence, lowest first: ``settings.DIFFSS`` defaults,
a flat YAML config file, command-line flags.
"""
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import yaml
from django.conf import settings
from rest_framework import serializers

from conditions.models import GuidanceKind
from diffss.exceptions import ConfigError
from diffss.storage import atomic_write_text
from episodes.splits import FOLDS, Dataset, Phase

logger = logging.getLogger(__name__)

FINGERPRINT_NAME = 'run_config.yaml'
GUIDANCE_CHOICES = [*GuidanceKind.values, 'all']


@dataclass(frozen=True)
class RunConfig:
    out: str
    dataset: str = Dataset.SYNTHETIC
    data_root: str = ''
    manifest: str = 'manifest.jsonl'
    class_list: str = ''
    folds: tuple[int, ...] = (0,)
    phase: str = Phase.TEST
    guidance: str = GuidanceKind.SEGMAP
    n_aux: int = 4
    n_aux_sweep: tuple[int, ...] = ()
    k_original: int = 1
    kshot_reference: int | None = None
    seed: int = 0
    episodes: int = 1000
    backend: str = 'mock'
    backend_url: str = ''
    hed_url: str = ''
    detector: str = 'gradient'
    detector_resolution: int | None = None
    scribble_threshold: int = 128
    prompt_template: str = ''
    segmenter: str = 'reference'
    segmenter_command: str = ''
    workers: int = 1
    keep_going: bool = False
    mode: str = 'offline'
    floor: float = 0.0
    reducer: str = 'pca'
    minicoco_train: str = ''
    minicoco_val: tuple[str, ...] = ()
    minicoco_pool: str = ''
    ratio: float = 0.10
    strict: bool = False

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    @property
    def data_dir(self) -> Path:
        return Path(self.data_root)

    @property
    def kinds(self) -> list[GuidanceKind]:
        return GuidanceKind.expand(self.guidance)

    @property
    def aux_counts(self) -> list[int]:
        """Auxiliary counts to evaluate: the baseline 0, n_aux and any sweep values."""
        return sorted({0, self.n_aux, *self.n_aux_sweep})

    def to_dict(self) -> dict:
        document = asdict(self)
        document['folds'] = list(self.folds)
        document['n_aux_sweep'] = list(self.n_aux_sweep)
        document['minicoco_val'] = list(self.minicoco_val)
        return document


class RunConfigSerializer(serializers.Serializer):
    out = serializers.CharField(allow_blank=True)
    dataset = serializers.ChoiceField(choices=Dataset.choices)
    data_root = serializers.CharField(allow_blank=True)
    manifest = serializers.CharField()
    class_list = serializers.CharField(allow_blank=True)
    folds = serializers.ListField(child=serializers.IntegerField(min_value=0, max_value=FOLDS - 1), allow_empty=False)
    phase = serializers.ChoiceField(choices=Phase.choices)
    guidance = serializers.ChoiceField(choices=GUIDANCE_CHOICES)
    n_aux = serializers.IntegerField(min_value=0)
    n_aux_sweep = serializers.ListField(child=serializers.IntegerField(min_value=0), required=False)
    k_original = serializers.IntegerField(min_value=1)
    kshot_reference = serializers.IntegerField(min_value=2, allow_null=True)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 63 - 1)
    episodes = serializers.IntegerField(min_value=1)
    backend = serializers.ChoiceField(choices=['mock', 'http'])
    backend_url = serializers.CharField(allow_blank=True)
    hed_url = serializers.CharField(allow_blank=True)
    detector = serializers.ChoiceField(choices=['gradient', 'hed'])
    detector_resolution = serializers.IntegerField(min_value=8, allow_null=True)
    scribble_threshold = serializers.IntegerField(min_value=0, max_value=255)
    prompt_template = serializers.CharField(allow_blank=True)
    segmenter = serializers.ChoiceField(choices=['reference', 'oracle', 'subprocess'])
    segmenter_command = serializers.CharField(allow_blank=True)
    workers = serializers.IntegerField(min_value=1)
    keep_going = serializers.BooleanField()
    mode = serializers.ChoiceField(choices=['offline', 'online'])
    floor = serializers.FloatField(min_value=0.0, max_value=1.0)
    reducer = serializers.ChoiceField(choices=['pca', 'tsne'])
    minicoco_train = serializers.CharField(allow_blank=True)
    minicoco_val = serializers.ListField(child=serializers.CharField(), required=False)
    minicoco_pool = serializers.CharField(allow_blank=True)
    ratio = serializers.FloatField(min_value=0.0, max_value=1.0)
    strict = serializers.BooleanField()

    def validate(self, attrs):
        if attrs['segmenter'] == 'subprocess' and not attrs['segmenter_command']:
            raise serializers.ValidationError({'segmenter_command': 'required for the subprocess segmenter'})
        if attrs['backend'] == 'http' and not attrs['backend_url']:
            raise serializers.ValidationError({'backend_url': 'required for the http backend (or set DIFFSS_GENERATOR_URL)'})
        if attrs['detector'] == 'hed' and not attrs['hed_url']:
            raise serializers.ValidationError({'hed_url': 'required for the hed detector (or set DIFFSS_HED_URL)'})
        if attrs['dataset'] in (Dataset.FSS1000, Dataset.SYNTHETIC) and attrs['folds'] != [0]:
            raise serializers.ValidationError({'folds': f"{attrs['dataset']} has a single split, use fold 0"})
        if attrs['kshot_reference'] is not None and attrs['kshot_reference'] <= attrs['k_original']:
            raise serializers.ValidationError({'kshot_reference': 'must exceed k_original'})
        return attrs

    def create(self, validated_data):
        for key in ('folds', 'n_aux_sweep', 'minicoco_val'):
            validated_data[key] = tuple(validated_data.get(key) or ())
        return RunConfig(**validated_data)


def defaults() -> dict:
    conf = settings.DIFFSS
    return {
        **RunConfig(out='').to_dict(),
        'n_aux': conf['N_AUX'],
        'backend_url': conf['GENERATOR_URL'],
        'hed_url': conf['HED_URL'],
        'detector': conf['DETECTOR'],
        'detector_resolution': conf['DETECTOR_RESOLUTION'],
        'scribble_threshold': conf['SCRIBBLE_THRESHOLD'],
        'prompt_template': conf['PROMPT_TEMPLATE'],
        'out': conf['OUTPUT_ROOT'],
    }


def read_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f'config file {path} does not exist')
    try:
        document = yaml.safe_load(path.read_text(encoding='utf-8')) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f'config file {path} is not valid YAML: {exc}')
    if not isinstance(document, dict):
        raise ConfigError(f'config file {path} must be a flat mapping')
    return {str(key).replace('-', '_'): value for key, value in document.items()}


def load_run_config(config_file=None, require_data: bool = False, **flags) -> RunConfig:
    values = defaults()
    if config_file:
        document = read_config_file(config_file)
        # fingerprints name the command that wrote them
        document.pop('command', None)
        values.update(document)
    values.update({key: value for key, value in flags.items() if value is not None})

    unknown = sorted(set(values) - set(RunConfigSerializer().fields))
    if unknown:
        raise ConfigError(f'unknown config keys {unknown}')
    serializer = RunConfigSerializer(data=values)
    if not serializer.is_valid():
        raise ConfigError(f'invalid run config: {serializer.errors}')
    config = serializer.save()

    if not config.out:
        raise ConfigError('an output directory is required (--out or DIFFSS_OUTPUT_ROOT)')
    if require_data:
        check_data(config)
    logger.info('run config dataset=%s folds=%s out=%s', config.dataset, list(config.folds), config.out)
    return config


def write_fingerprint(config: RunConfig, directory: Path, command: str) -> Path:
    """Everything needed to re-run ``command`` into ``directory``."""
    document = {'command': command, **config.to_dict()}
    return atomic_write_text(Path(directory) / FINGERPRINT_NAME, yaml.safe_dump(document, sort_keys=True))


def check_data(config: RunConfig) -> None:
    """Fail before any compute when the dataset is not where the config says."""
    if not config.data_root or not config.data_dir.is_dir():
        raise ConfigError(f'dataset directory {config.data_root!r} does not exist')
    if not (config.data_dir / config.manifest).exists():
        raise ConfigError(f'manifest {config.data_dir / config.manifest} does not exist')
    if config.dataset == Dataset.FSS1000 and not config.class_list:
        raise ConfigError('FSS-1000 runs need --class-list')
