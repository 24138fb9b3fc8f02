"""
The pipeline stages behind the management commands. Each stage reads what
earlier stages left under ``<out>`` and writes its own subdirectory::

    <out>/conditions/   condition PNGs and provenance.jsonl
    <out>/generated/    generated images and provenance.jsonl
    <out>/reports/      fold reports, tables, gains, episode dumps
    <out>/drift/        drift report and table
    <out>/proto/        prototype embedding CSV/SVG and consistency scores
    <out>/minicoco/     subset manifests and fold class lists

Every stage directory gets a ``run_config.yaml`` fingerprint.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from django.conf import settings

from conditions.artifacts import load_condition, read_provenance, register_artifacts, write_condition, write_provenance
from conditions.controls import ScribbleConfig, build_condition
from conditions.edges import make_detector
from conditions.models import GuidanceKind
from diffss.exceptions import (
    ConfigError,
    DiffssError,
    InsufficientSamples,
    ModelFailure,
    ProvenanceMismatch,
    QualityGateError,
)
from diffss.storage import atomic_write_text, write_json, write_jsonl
from drift_audit.audit import audit, filter_drifted
from drift_audit.persistence import register_drift, write_drift_report
from episodes.extension import extend_episode
from episodes.manifest import load_manifest, write_manifest
from episodes.minicoco import build_minicoco
from episodes.sampling import episode_stream, load_episode, write_episode_dump
from episodes.splits import render_class_list
from generation.images import GenerationRequest, image_id_for
from generation.service import generate, make_generator
from generation.store import GeneratedStore
from metrics.persistence import register_report, write_report
from metrics.reports import (
    build_fold_report,
    gain,
    guidance_table,
    published_table,
    render_csv,
    render_table,
    xshot_table,
)
from metrics.scores import IoUAccumulator
from proto_analysis.analysis import consistency_score, embed2d, prototype_set, samples_for
from proto_analysis.exports import write_embedding
from refseg.segmenters import make_segmenter, segment_episode

from .config import RunConfig, write_fingerprint
from .datasets import load_pool, load_supports, splits_for, support_by_id, support_index

logger = logging.getLogger(__name__)


def parallel_map(fn, items, workers: int = 1) -> list:
    """Ordered map; threads when ``workers`` > 1."""
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def make_backend(config: RunConfig):
    options = {'url': config.backend_url} if config.backend == 'http' else {}
    return make_generator(config.backend, **options)


def make_edge_detector(config: RunConfig):
    return make_detector(config.detector, config.detector_resolution, config.hed_url or None)


def run_conditions(config: RunConfig) -> list[dict]:
    pool = load_pool(config)
    index = support_index(pool, splits_for(config, pool))
    root = config.out_dir / 'conditions'
    detector = make_edge_detector(config)
    cfg = ScribbleConfig(config.scribble_threshold)
    template = config.prompt_template or None

    def build(sid):
        try:
            support = support_by_id(config, index, sid)
            return [
                write_condition(build_condition(support, kind, detector, cfg, template=template), root, detector, cfg)
                for kind in config.kinds
            ]
        except DiffssError as exc:
            if not config.keep_going:
                raise
            logger.warning('skipping %s: %s', sid, exc)
            return []

    records = [record for batch in parallel_map(build, index, config.workers) for record in batch]
    write_provenance(root, records)
    register_artifacts(root, records)
    write_fingerprint(config, root, 'conditions')
    logger.info('conditions written=%d supports=%d', len(records), len(index))
    return records


def run_generate(config: RunConfig) -> GeneratedStore:
    condition_root = config.out_dir / 'conditions'
    wanted = {kind.value for kind in config.kinds}
    records = [r for r in read_provenance(condition_root) if r['kind'] in wanted]
    store = GeneratedStore(config.out_dir / 'generated')
    count = max(config.aux_counts)

    if count == 0:
        logger.info('n_aux is 0; nothing to generate')
        store.flush()
    else:
        backend = make_backend(config)
        index = {}
        if backend.needs_support:
            pool = load_pool(config)
            index = support_index(pool, splits_for(config, pool))

        def produce(record) -> int:
            source_id, kind = record['source_id'], record['kind']
            ids = [image_id_for(source_id, kind, i) for i in range(1, count + 1)]
            if all(image_id in store for image_id in ids):
                logger.info('resume: %s %s already complete', source_id, kind)
                return 0
            support = None
            if backend.needs_support:
                if source_id not in index:
                    raise ProvenanceMismatch(f'condition source {source_id} is not a support of this dataset split')
                support = support_by_id(config, index, source_id)
            condition = load_condition(condition_root, record)
            request = GenerationRequest(condition, count=count, seed=config.seed)
            added = 0
            for image in generate(request, backend, support):
                if image.image_id not in store:
                    store.add(image)
                    added += 1
            return added

        try:
            added = sum(parallel_map(produce, records, config.workers))
        finally:
            store.flush()
        logger.info('generated added=%d total=%d', added, len(store))

    store.register()
    write_fingerprint(config, store.root, 'generate')
    return store


class AuxiliarySource:
    """
    Where an evaluation gets its auxiliaries: the generated store (offline)
    or the generator itself, per episode (online).
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.online = config.mode == 'online'
        if self.online:
            self.backend = make_backend(config)
            self.detector = make_edge_detector(config)
            self.cfg = ScribbleConfig(config.scribble_threshold)
        else:
            self.store = GeneratedStore(config.out_dir / 'generated')

    def auxiliaries(self, support, kind, count: int) -> list:
        if count == 0:
            return []
        if self.online:
            condition = build_condition(
                support, kind, self.detector, self.cfg, template=self.config.prompt_template or None
            )
            return generate(GenerationRequest(condition, count=count, seed=self.config.seed), self.backend, support)
        images = self.store.images(source_id=support.id, kind=kind.value)
        if len(images) < count:
            raise InsufficientSamples(
                f'{support.id}: {len(images)} stored {kind.value} images, {count} needed; run generate first'
            )
        return images[:count]


@dataclass(frozen=True)
class Variant:
    key: str
    k_original: int
    n_aux: int = 0
    guidance: str = ''


def _variants(config: RunConfig) -> list[Variant]:
    variants = [Variant('base', config.k_original)]
    for kind in config.kinds:
        for n in config.aux_counts:
            if n:
                variants.append(Variant(f'{kind.value}-n{n}', config.k_original, n, kind.value))
    return variants


def _report_config(config: RunConfig, variant: Variant) -> dict:
    label = f'{config.segmenter} {variant.k_original}-shot'
    if variant.n_aux:
        label += f' +{variant.n_aux} {variant.guidance}'
    return {
        'label': label,
        'dataset': config.dataset,
        'phase': config.phase,
        'k_original': variant.k_original,
        'n_aux': variant.n_aux,
        'guidance': variant.guidance,
        'seed': config.seed,
        'segmenter': config.segmenter,
        'episodes': config.episodes,
        'mode': config.mode,
    }


@dataclass(frozen=True, eq=False)
class Outcome:
    """One variant scored on one episode; ``error`` is set when the model failed."""
    key: str
    episode_id: str
    class_index: int
    prediction: object = None
    truth: object = None
    error: str = ''


def _evaluate_specs(config, specs, variants, pool, segmenter, source) -> list[list[Outcome]]:
    max_aux = {}
    for variant in variants:
        if variant.n_aux:
            max_aux[variant.guidance] = max(max_aux.get(variant.guidance, 0), variant.n_aux)

    def run(spec):
        episode = load_episode(spec, pool, config.data_dir)
        generated = {
            guidance: [source.auxiliaries(s, GuidanceKind(guidance), n) for s in episode.originals]
            for guidance, n in max_aux.items()
        }
        outcomes = []
        for variant in variants:
            auxiliaries = [img for per_support in generated.get(variant.guidance, []) for img in per_support[:variant.n_aux]]
            try:
                prediction = segment_episode(extend_episode(episode, auxiliaries), segmenter)
            except ModelFailure as exc:
                logger.warning('%s failed: %s', variant.key, exc)
                outcomes.append(Outcome(variant.key, spec.id, spec.class_index, error=str(exc)))
                continue
            outcomes.append(Outcome(variant.key, spec.id, spec.class_index, prediction.mask, episode.query.mask))
        return outcomes

    return parallel_map(run, specs, config.workers)


def run_evaluate(config: RunConfig) -> dict:
    pool = load_pool(config)
    splits = splits_for(config, pool)
    segmenter = make_segmenter(config.segmenter, config.segmenter_command or None)
    source = AuxiliarySource(config)
    root = config.out_dir / 'reports'
    variants = _variants(config)
    kshot = Variant(f'kshot-k{config.kshot_reference}', config.kshot_reference) if config.kshot_reference else None

    accumulators = {v.key: {} for v in variants + ([kshot] if kshot else [])}
    failures = {key: [] for key in accumulators}
    for split in splits:
        runs = [(variants, config.k_original)] + ([([kshot], kshot.k_original)] if kshot else [])
        for run_variants, k in runs:
            specs = list(episode_stream(split, pool, k, config.seed, config.episodes))
            write_episode_dump(root / f'episodes_f{split.fold}_k{k}.jsonl', specs)
            for key in (v.key for v in run_variants):
                accumulators[key][split.fold] = IoUAccumulator()
            for rows in _evaluate_specs(config, specs, run_variants, pool, segmenter, source):
                for outcome in rows:
                    if outcome.error:
                        failures[outcome.key].append(
                            {'variant': outcome.key, 'episode': outcome.episode_id, 'error': outcome.error}
                        )
                    else:
                        accumulators[outcome.key][split.fold].update(outcome.class_index, outcome.prediction, outcome.truth)

    failed = [f for key in sorted(failures) for f in failures[key]]
    write_jsonl(root / 'failures.jsonl', failed)
    attempts = len(accumulators) * len(splits) * config.episodes
    limit = settings.DIFFSS['EPISODE_FAILURE_RATE']
    if failed and len(failed) / attempts > limit:
        raise QualityGateError(f'{len(failed)} of {attempts} episode evaluations failed, above {limit:.0%}')

    reports = {}
    for variant in variants + ([kshot] if kshot else []):
        report = _fold_report(config, variant, accumulators[variant.key], len(failures[variant.key]))
        reports[variant.key] = report
        path = write_report(root / f'{variant.key}.json', report)
        register_report(report, path, root)

    ordered = list(reports.values())
    atomic_write_text(root / 'table.txt', render_table(ordered))
    atomic_write_text(root / 'per_class.csv', render_csv(ordered))
    _write_gains(config, root, reports, kshot)
    write_fingerprint(config, root, 'evaluate')
    return reports


def _fold_report(config, variant, accumulators, failures):
    return build_fold_report(_report_config(config, variant), accumulators, episodes=config.episodes, failures=failures)


def _write_gains(config: RunConfig, root: Path, reports: dict, kshot) -> None:
    base = reports['base']
    reference = reports[kshot.key] if kshot else None
    gains, sections = [], []
    if config.n_aux:
        rows = [(kind.value, base, reports[f'{kind.value}-n{config.n_aux}'], reference) for kind in config.kinds]
        sections.append(guidance_table(rows))
        for guidance, _, augmented, _ in rows:
            gains.append({'guidance': guidance, 'n_aux': config.n_aux, **gain(base, augmented, reference).to_dict()})
    if len(config.aux_counts) > 2:
        for kind in config.kinds:
            sweep = [base] + [reports[f'{kind.value}-n{n}'] for n in config.aux_counts if n]
            sections.append(f'{kind.value}\n{xshot_table(sweep)}')
    sections.append(published_table())
    write_json(root / 'gains.json', gains)
    atomic_write_text(root / 'gains.txt', '\n'.join(sections))


def _generated_images(config: RunConfig, store: GeneratedStore) -> list:
    images = [image for kind in config.kinds for image in store.images(kind=kind.value)]
    if not images:
        raise InsufficientSamples(f'no generated images in {store.root}; run generate first')
    return sorted(images, key=lambda image: image.image_id)


def _sources_for(config: RunConfig, images) -> tuple[dict, dict]:
    pool = load_pool(config)
    index = support_index(pool, splits_for(config, pool))
    wanted = sorted({image.source_id for image in images} & set(index))
    supports = load_supports(config, index, wanted)
    folds = {sid: index[sid][2].fold for sid in supports}
    return supports, folds


def run_drift(config: RunConfig):
    images = _generated_images(config, GeneratedStore(config.out_dir / 'generated'))
    sources, folds = _sources_for(config, images)
    segmenter = make_segmenter(config.segmenter, config.segmenter_command or None)
    report = audit(images, sources, segmenter, folds, config.workers)

    root = config.out_dir / 'drift'
    write_drift_report(root, report)
    register_drift(report, root)
    if config.floor > 0:
        kept = filter_drifted(images, report, config.floor)
        atomic_write_text(root / 'kept.txt', ''.join(f'{image.image_id}\n' for image in kept))
        logger.info('drift floor=%s kept=%d of %d', config.floor, len(kept), len(images))
    write_fingerprint(config, root, 'drift')
    return report


def run_proto(config: RunConfig):
    images = _generated_images(config, GeneratedStore(config.out_dir / 'generated'))
    sources, _ = _sources_for(config, images)
    missing = sorted({image.source_id for image in images} - set(sources))
    if missing:
        raise ProvenanceMismatch(f'{len(missing)} generated images have unknown sources, e.g. {missing[0]}')

    ps = prototype_set(samples_for(list(sources.values()), images))
    export = embed2d(ps, config.reducer, config.seed)
    scores = consistency_score(ps)

    root = config.out_dir / 'proto'
    write_embedding(root, export, f'{config.dataset} prototypes ({config.reducer})')
    write_json(root / 'consistency.json', {
        'scores': {str(c): v for c, v in scores.items()},
        'prototypes': len(ps),
        'skipped': ps.skipped,
        'reducer': export.reducer,
        'seed': export.seed,
    })
    write_fingerprint(config, root, 'proto')
    return export, scores


def run_minicoco(config: RunConfig):
    if not config.minicoco_train or not config.minicoco_val:
        raise ConfigError('minicoco needs --train-manifest and at least one --val-manifest')
    train = load_manifest(Path(config.minicoco_train))
    vals = [load_manifest(Path(path)) for path in config.minicoco_val]
    pool = load_manifest(Path(config.minicoco_pool)) if config.minicoco_pool else None
    subset = build_minicoco(train, vals, pool, ratio=config.ratio, seed=config.seed, strict=config.strict)

    root = config.out_dir / 'minicoco'
    write_manifest(root / 'train.jsonl', subset.train)
    write_manifest(root / 'val.jsonl', subset.val)
    for split in subset.splits:
        atomic_write_text(root / 'folds' / f'fold{split.fold}_{split.phase.value}.txt', render_class_list(split))
    write_json(root / 'summary.json', subset.summary(config.ratio, config.seed))
    write_fingerprint(config, root, 'minicoco')
    return subset
