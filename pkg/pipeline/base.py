import logging

from django.core.management.base import BaseCommand, CommandError

from diffss.exceptions import DiffssError

from .config import RunConfig, RunConfigSerializer, load_run_config

logger = logging.getLogger(__name__)


def run_guarded(stage: str, fn, *args, **kwargs):
    """Run ``fn``, turning pipeline errors into a CommandError with the matching exit code."""
    try:
        return fn(*args, **kwargs)
    except DiffssError as exc:
        logger.error('%s failed: %s', stage, exc)
        raise CommandError(f'{stage}: {exc}', returncode=exc.exit_code) from exc


class PipelineCommand(BaseCommand):
    """
    Base for the pipeline subcommands. Every run option can come from
    ``--config`` (flat YAML) and be overridden by its flag.
    """
    stage = ''
    require_data = True

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Flat YAML run config; flags override it')
        parser.add_argument('--out', help='Output root (default DIFFSS_OUTPUT_ROOT)')
        parser.add_argument('--dataset', help='pascal5i, fss1000, minicoco20i or synthetic')
        parser.add_argument('--data-root', dest='data_root', help='Dataset directory holding the manifest')
        parser.add_argument('--manifest', help='Manifest file name inside the data root')
        parser.add_argument('--class-list', dest='class_list', help='FSS-1000 class list, one name per line')
        parser.add_argument('--fold', dest='folds', type=int, action='append', help='Fold index; repeatable')
        parser.add_argument('--phase', help='train, val or test')
        parser.add_argument('--guidance', help='segmap, hed, scribble or all')
        parser.add_argument('--n-aux', dest='n_aux', type=int, help='Generated auxiliaries per support')
        parser.add_argument('--n-aux-sweep', dest='n_aux_sweep', type=int, nargs='+',
                            help='Evaluate several auxiliary counts')
        parser.add_argument('--k-original', dest='k_original', type=int, help='Annotated supports per episode')
        parser.add_argument('--kshot-reference', dest='kshot_reference', type=int,
                            help='Also evaluate a true K-shot run for the second gain figure')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--episodes', type=int, help='Episodes per fold')
        parser.add_argument('--backend', help='Generator backend: mock or http')
        parser.add_argument('--backend-url', dest='backend_url', help='Generator service URL (or DIFFSS_GENERATOR_URL)')
        parser.add_argument('--hed-url', dest='hed_url', help='HED service URL (or DIFFSS_HED_URL)')
        parser.add_argument('--detector', help='Edge detector: gradient or hed')
        parser.add_argument('--detector-resolution', dest='detector_resolution', type=int)
        parser.add_argument('--scribble-threshold', dest='scribble_threshold', type=int)
        parser.add_argument('--segmenter', help='reference, oracle or subprocess')
        parser.add_argument('--segmenter-command', dest='segmenter_command',
                            help='Command for the subprocess segmenter, see docs/fss_adapter.md')
        parser.add_argument('--workers', type=int)
        parser.add_argument('--keep-going', dest='keep_going', action='store_true', default=None,
                            help='Skip invalid samples instead of stopping')
        parser.add_argument('--mode', help='offline (generated store) or online (generate per episode)')
        parser.add_argument('--floor', type=float, help='Drift IoU floor for kept images')
        parser.add_argument('--reducer', help='pca or tsne')

    def handle(self, *args, **options):
        fields = RunConfigSerializer().fields
        flags = {name: options.get(name) for name in fields if name in options}
        config = run_guarded(self.stage, load_run_config, options.get('config'), self.require_data, **flags)
        result = run_guarded(self.stage, self.run, config)
        self.stdout.write(self.summary(config, result))

    def run(self, config: RunConfig):
        raise NotImplementedError

    def summary(self, config: RunConfig, result) -> str:
        return f'{self.stage} done: {config.out}'
